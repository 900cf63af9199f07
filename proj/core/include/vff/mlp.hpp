#pragma once

#include <nlohmann/json_fwd.hpp>
#include <vector>

#include "vff/rng.hpp"
#include "vff/types.hpp"

namespace vff {

// Fully connected net with ReLU hidden activations and a linear output layer.
// Batched entry points take one sample per row so the hot training paths run
// as matrix products.
class Mlp {
 public:
  Mlp() = default;
  // dims = {in, hidden..., out}; weights N(0, 1/sqrt(fan_in)), zero biases.
  Mlp(std::vector<int> dims, Rng& rng);

  Vec forward(const Vec& x) const;
  Mat forward_batch(const Mat& x) const;

  struct Cache {
    std::vector<Mat> acts;  // acts[0] = input, acts[l] = output of layer l-1 after ReLU
  };
  Mat forward_batch(const Mat& x, Cache& cache) const;

  // Flat parameter gradient (pack layout) given dL/d(output); pairs with the
  // cache from forward_batch.
  Vec backward(const Cache& cache, const Mat& d_out) const;

  long param_count() const;
  Vec pack() const;
  void unpack(const Vec& flat);

  const std::vector<int>& dims() const { return dims_; }
  int n_layers() const { return static_cast<int>(weights_.size()); }

 private:
  std::vector<int> dims_;
  std::vector<Mat> weights_;  // weights_[l] is dims[l+1] x dims[l]
  std::vector<Vec> biases_;
};

void to_json(nlohmann::json& j, const Mlp& m);
void from_json(const nlohmann::json& j, Mlp& m);

}  // namespace vff
