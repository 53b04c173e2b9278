#pragma once

#include <random>
#include <string>
#include <utility>
#include <vector>

#include "neural_reasoner/tensor.hpp"

namespace nr {

using Rng = std::mt19937_64;

/// Named trainable tensor.
struct NamedParam {
  std::string name;
  Tensor tensor;
};

using ParamList = std::vector<NamedParam>;

/// New trainable tensor with entries drawn from U[-range, range].
inline Tensor uniform_param(Shape shape, Rng& rng, double range) {
  Tensor t = Tensor::zeros(std::move(shape), true);
  std::uniform_real_distribution<double> dist(-range, range);
  for (double& v : t.values()) v = dist(rng);
  return t;
}

inline void zero_grads(const ParamList& params) {
  for (const auto& p : params) p.tensor.zero_grad();
}

}  // namespace nr
