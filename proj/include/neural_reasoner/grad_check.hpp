#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "neural_reasoner/error.hpp"
#include "neural_reasoner/tensor.hpp"

namespace nr {

/// Scalar-valued computation over tensors it closes over.
using ScalarFn = std::function<Tensor(Tape&)>;

/// Compares the reverse-mode gradient of `f` w.r.t. `x` against central
/// differences, one coordinate at a time. Returns
///   max_i |analytic_i - numeric_i| / max(1, |numeric_i|).
/// `x` must require gradients and be reachable from f's output; its values
/// are perturbed in place and restored.
inline double grad_check(const ScalarFn& f, Tensor x, double eps = 1e-5) {
  if (!(eps >= 1e-6 && eps <= 1e-3)) throw InputError("grad_check: eps must lie in [1e-6, 1e-3]");
  if (!x.requires_grad()) throw InputError("grad_check: tensor does not require gradients");

  x.zero_grad();
  {
    Tape tape;
    tape.backward(f(tape));
  }
  const std::vector<double> analytic(x.grad().begin(), x.grad().end());

  auto eval = [&f]() {
    Tape tape(false);
    return f(tape).item();
  };

  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + eps;
    const double up = eval();
    x[i] = saved - eps;
    const double down = eval();
    x[i] = saved;
    const double numeric = (up - down) / (2.0 * eps);
    worst = std::max(worst, std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(numeric)));
  }
  return worst;
}

/// Convenience form for a function of one tensor argument.
inline double grad_check(const std::function<Tensor(Tape&, const Tensor&)>& f, Tensor x, double eps = 1e-5) {
  return grad_check([&f, x](Tape& tape) { return f(tape, x); }, x, eps);
}

}  // namespace nr
