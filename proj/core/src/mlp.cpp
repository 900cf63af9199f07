#include "vff/mlp.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

#include "vff/errors.hpp"

namespace vff {

Mlp::Mlp(std::vector<int> dims, Rng& rng) : dims_(std::move(dims)) {
  if (dims_.size() < 2) throw ParameterError("Mlp: need at least in and out dims");
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    const int in = dims_[l], out = dims_[l + 1];
    Mat w(out, in);
    const double std = 1.0 / std::sqrt(static_cast<double>(in));
    for (long c = 0; c < w.cols(); ++c)
      for (long r = 0; r < w.rows(); ++r) w(r, c) = rng.normal(0, std);
    weights_.push_back(std::move(w));
    biases_.push_back(Vec::Zero(out));
  }
}

Vec Mlp::forward(const Vec& x) const {
  Vec a = x;
  for (int l = 0; l < n_layers(); ++l) {
    a = (weights_[static_cast<std::size_t>(l)] * a +
         biases_[static_cast<std::size_t>(l)]).eval();
    if (l + 1 < n_layers()) a = a.cwiseMax(0.0);
  }
  return a;
}

Mat Mlp::forward_batch(const Mat& x) const {
  Cache cache;
  return forward_batch(x, cache);
}

Mat Mlp::forward_batch(const Mat& x, Cache& cache) const {
  if (x.cols() != dims_.front())
    throw DimensionError("Mlp: input width does not match");
  cache.acts.clear();
  cache.acts.push_back(x);
  Mat a = x;
  for (int l = 0; l < n_layers(); ++l) {
    Mat z = a * weights_[static_cast<std::size_t>(l)].transpose();
    z.rowwise() += biases_[static_cast<std::size_t>(l)].transpose();
    if (l + 1 < n_layers()) z = z.cwiseMax(0.0);
    cache.acts.push_back(z);
    a = std::move(z);
  }
  return a;
}

Vec Mlp::backward(const Cache& cache, const Mat& d_out) const {
  if (cache.acts.size() != static_cast<std::size_t>(n_layers()) + 1)
    throw DimensionError("Mlp::backward: cache does not match network");
  Vec grad = Vec::Zero(param_count());
  Mat dz = d_out;
  long pos = param_count();
  for (int l = n_layers() - 1; l >= 0; --l) {
    const Mat& a_in = cache.acts[static_cast<std::size_t>(l)];
    const Mat& w = weights_[static_cast<std::size_t>(l)];
    Mat dw = dz.transpose() * a_in;          // out x in
    Vec db = dz.colwise().sum().transpose(); // out
    pos -= db.size();
    grad.segment(pos, db.size()) = db;
    pos -= dw.size();
    grad.segment(pos, dw.size()) = Eigen::Map<const Vec>(dw.data(), dw.size());
    if (l > 0) {
      Mat da = dz * w;
      // ReLU mask from the stored post-activation
      const Mat& a_post = cache.acts[static_cast<std::size_t>(l)];
      dz = da.cwiseProduct((a_post.array() > 0.0).cast<double>().matrix());
    }
  }
  return grad;
}

long Mlp::param_count() const {
  long n = 0;
  for (int l = 0; l < n_layers(); ++l)
    n += weights_[static_cast<std::size_t>(l)].size() +
         biases_[static_cast<std::size_t>(l)].size();
  return n;
}

Vec Mlp::pack() const {
  Vec out(param_count());
  long pos = 0;
  for (int l = 0; l < n_layers(); ++l) {
    const Mat& w = weights_[static_cast<std::size_t>(l)];
    out.segment(pos, w.size()) = Eigen::Map<const Vec>(w.data(), w.size());
    pos += w.size();
    out.segment(pos, biases_[static_cast<std::size_t>(l)].size()) =
        biases_[static_cast<std::size_t>(l)];
    pos += biases_[static_cast<std::size_t>(l)].size();
  }
  return out;
}

void Mlp::unpack(const Vec& flat) {
  if (flat.size() != param_count()) throw DimensionError("Mlp::unpack: wrong length");
  long pos = 0;
  for (int l = 0; l < n_layers(); ++l) {
    Mat& w = weights_[static_cast<std::size_t>(l)];
    Eigen::Map<Vec>(w.data(), w.size()) = flat.segment(pos, w.size());
    pos += w.size();
    biases_[static_cast<std::size_t>(l)] =
        flat.segment(pos, biases_[static_cast<std::size_t>(l)].size());
    pos += biases_[static_cast<std::size_t>(l)].size();
  }
}

void to_json(nlohmann::json& j, const Mlp& m) {
  const Vec p = m.pack();
  j = nlohmann::json{{"dims", m.dims()},
                     {"params", std::vector<double>(p.data(), p.data() + p.size())}};
}

void from_json(const nlohmann::json& j, Mlp& m) {
  std::vector<int> dims = j.at("dims").get<std::vector<int>>();
  Rng rng(0);
  m = Mlp(dims, rng);
  std::vector<double> params = j.at("params").get<std::vector<double>>();
  m.unpack(Eigen::Map<const Vec>(params.data(), static_cast<long>(params.size())));
}

}  // namespace vff
