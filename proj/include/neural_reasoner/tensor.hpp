#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "neural_reasoner/error.hpp"

namespace nr {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

inline std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << ']';
  return os.str();
}

/// Dense row-major array of doubles with an optional gradient buffer.
///
/// A Tensor is a handle: copies share storage. Model parameters are tensors
/// created with requires_grad set; every op output that depends on such a
/// tensor (and is built on a recording Tape) gets a gradient buffer too.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false) {
    std::vector<double> values(shape_size(shape), 0.0);
    return Tensor(std::move(shape), std::move(values), requires_grad);
  }

  static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false) {
    return Tensor(std::move(shape), std::move(values), requires_grad);
  }

  static Tensor vec(std::initializer_list<double> values, bool requires_grad = false) {
    return Tensor({values.size()}, std::vector<double>(values), requires_grad);
  }

  static Tensor scalar(double value, bool requires_grad = false) {
    return Tensor({1}, {value}, requires_grad);
  }

  bool defined() const noexcept { return static_cast<bool>(s_); }
  const Shape& shape() const { return s_->shape; }
  std::size_t rank() const { return s_->shape.size(); }
  std::size_t size() const { return s_->value.size(); }
  std::size_t dim(std::size_t axis) const { return s_->shape.at(axis); }

  std::span<double> values() { return s_->value; }
  std::span<const double> values() const { return s_->value; }
  // Gradients are an accumulation side channel shared by every handle, so
  // they stay writable through const handles.
  std::span<double> grad() const { return s_->grad; }
  double* data() { return s_->value.data(); }
  const double* data() const { return s_->value.data(); }
  double* grad_data() const { return s_->grad.data(); }

  double& operator[](std::size_t i) { return s_->value[i]; }
  double operator[](std::size_t i) const { return s_->value[i]; }
  double at(std::size_t r, std::size_t c) const { return s_->value[r * s_->shape[1] + c]; }
  double& at(std::size_t r, std::size_t c) { return s_->value[r * s_->shape[1] + c]; }

  /// Value of a single-element tensor.
  double item() const {
    if (size() != 1) throw DimensionError("item() on tensor of shape " + shape_str(shape()));
    return s_->value[0];
  }

  bool requires_grad() const { return s_->requires_grad; }

  void zero_grad() const { std::fill(s_->grad.begin(), s_->grad.end(), 0.0); }

  /// Deep copy without gradient.
  Tensor clone() const { return Tensor(s_->shape, s_->value, false); }

  bool same_storage(const Tensor& other) const noexcept { return s_ == other.s_; }

 private:
  struct Storage {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;
    bool requires_grad = false;
  };

  Tensor(Shape shape, std::vector<double> values, bool requires_grad) : s_(std::make_shared<Storage>()) {
    if (shape.empty()) throw DimensionError("tensor shape must have at least one axis");
    for (std::size_t d : shape) {
      if (d == 0) throw DimensionError("tensor dimensions must be positive, got " + shape_str(shape));
    }
    if (shape_size(shape) != values.size()) {
      throw DimensionError("shape " + shape_str(shape) + " does not match " + std::to_string(values.size()) +
                           " values");
    }
    s_->shape = std::move(shape);
    s_->value = std::move(values);
    s_->requires_grad = requires_grad;
    if (requires_grad) s_->grad.assign(s_->value.size(), 0.0);
  }

  std::shared_ptr<Storage> s_;
};

/// Ordered record of differentiable operations for one forward pass.
///
/// Ops append a node after computing their output, so nodes are in
/// topological order by construction. A non-recording tape evaluates the
/// same ops without keeping anything (used for evaluation and finite
/// differences).
class Tape {
 public:
  explicit Tape(bool recording = true) : recording_(recording) {}

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  bool recording() const noexcept { return recording_; }
  std::size_t size() const noexcept { return nodes_.size(); }

  /// True iff an op over these inputs must produce a differentiable output.
  bool tracks(std::initializer_list<const Tensor*> inputs) const {
    if (!recording_) return false;
    return std::any_of(inputs.begin(), inputs.end(), [](const Tensor* t) { return t->requires_grad(); });
  }

  /// Appends a node. `backward` reads output.grad() and accumulates into the
  /// gradients of those inputs that require them.
  void record(Tensor output, std::function<void()> backward) {
    nodes_.push_back(Node{std::move(output), std::move(backward)});
  }

  /// Reverse sweep from a scalar loss. Parameter gradients accumulate into
  /// whatever they already hold; callers zero them between steps.
  void backward(Tensor loss) {
    if (loss.size() != 1) throw DimensionError("backward() needs a scalar loss, got " + shape_str(loss.shape()));
    if (!loss.requires_grad()) throw InputError("backward(): loss does not depend on any differentiable tensor");
    if (consumed_) throw InputError("backward(): tape already consumed");
    consumed_ = true;
    loss.grad()[0] += 1.0;
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
      auto g = it->output.grad();
      if (std::all_of(g.begin(), g.end(), [](double v) { return v == 0.0; })) continue;
      it->backward();
    }
  }

  void clear() {
    nodes_.clear();
    consumed_ = false;
  }

 private:
  struct Node {
    Tensor output;
    std::function<void()> backward;
  };

  std::vector<Node> nodes_;
  bool recording_;
  bool consumed_ = false;
};

}  // namespace nr
