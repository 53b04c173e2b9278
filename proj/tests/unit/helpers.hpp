#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "neural_reasoner/tensor.hpp"

namespace nr::testing {

inline Tensor random_tensor(Shape shape, std::mt19937_64& rng, bool requires_grad = true, double range = 1.0) {
  std::uniform_real_distribution<double> u(-range, range);
  std::vector<double> v(shape_size(shape));
  for (double& x : v) x = u(rng);
  return Tensor::from(std::move(shape), std::move(v), requires_grad);
}

inline std::vector<double> to_vector(const Tensor& t) { return {t.values().begin(), t.values().end()}; }

}  // namespace nr::testing
