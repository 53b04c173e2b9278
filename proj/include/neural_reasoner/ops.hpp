#pragma once

// Differentiable primitives over Tensor. Every op takes the Tape it records
// onto as its first argument.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "neural_reasoner/error.hpp"
#include "neural_reasoner/tensor.hpp"

namespace nr {

namespace detail {

inline void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
  }
}

inline void require_rank(const Tensor& a, std::size_t rank, const char* op) {
  if (a.rank() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                         shape_str(a.shape()));
  }
}

inline double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace detail

/// a[m x k] * b[k x n].
inline Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b) {
  detail::require_rank(a, 2, "matmul");
  detail::require_rank(b, 2, "matmul");
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    throw DimensionError("matmul: inner dimensions differ, " + shape_str(a.shape()) + " * " + shape_str(b.shape()));
  }
  Tensor out = Tensor::zeros({m, n}, tape.tracks({&a, &b}));
  const double* pa = a.data();
  const double* pb = b.data();
  double* po = out.data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double av = pa[i * k + p];
      for (std::size_t j = 0; j < n; ++j) po[i * n + j] += av * pb[p * n + j];
    }
  }
  if (out.requires_grad()) {
    tape.record(out, [a, b, out, m, k, n]() {
      const double* g = out.grad().data();
      if (a.requires_grad()) {
        double* ga = a.grad_data();
        const double* pb = b.data();
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t p = 0; p < k; ++p) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += g[i * n + j] * pb[p * n + j];
            ga[i * k + p] += acc;
          }
      }
      if (b.requires_grad()) {
        double* gb = b.grad_data();
        const double* pa = a.data();
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t p = 0; p < k; ++p) {
            const double av = pa[i * k + p];
            for (std::size_t j = 0; j < n; ++j) gb[p * n + j] += av * g[i * n + j];
          }
      }
    });
  }
  return out;
}

/// w[m x k] * x[k] -> [m]. Same math as matmul with a column vector.
inline Tensor matvec(Tape& tape, const Tensor& w, const Tensor& x) {
  detail::require_rank(w, 2, "matvec");
  detail::require_rank(x, 1, "matvec");
  const std::size_t m = w.dim(0), k = w.dim(1);
  if (x.dim(0) != k) {
    throw DimensionError("matvec: inner dimensions differ, " + shape_str(w.shape()) + " * " + shape_str(x.shape()));
  }
  Tensor out = Tensor::zeros({m}, tape.tracks({&w, &x}));
  const double* pw = w.data();
  const double* px = x.data();
  double* po = out.data();
  for (std::size_t i = 0; i < m; ++i) {
    double acc = 0.0;
    const double* row = pw + i * k;
    for (std::size_t p = 0; p < k; ++p) acc += row[p] * px[p];
    po[i] = acc;
  }
  if (out.requires_grad()) {
    tape.record(out, [w, x, out, m, k]() {
      const double* g = out.grad().data();
      if (w.requires_grad()) {
        double* gw = w.grad_data();
        const double* px = x.data();
        for (std::size_t i = 0; i < m; ++i) {
          const double gi = g[i];
          double* row = gw + i * k;
          for (std::size_t p = 0; p < k; ++p) row[p] += gi * px[p];
        }
      }
      if (x.requires_grad()) {
        double* gx = x.grad_data();
        const double* pw = w.data();
        for (std::size_t i = 0; i < m; ++i) {
          const double gi = g[i];
          const double* row = pw + i * k;
          for (std::size_t p = 0; p < k; ++p) gx[p] += gi * row[p];
        }
      }
    });
  }
  return out;
}

inline Tensor add(Tape& tape, const Tensor& a, const Tensor& b) {
  detail::require_same_shape(a, b, "add");
  Tensor out = Tensor::zeros(a.shape(), tape.tracks({&a, &b}));
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  if (out.requires_grad()) {
    tape.record(out, [a, b, out]() {
      auto g = out.grad();
      if (a.requires_grad())
        for (std::size_t i = 0; i < g.size(); ++i) a.grad()[i] += g[i];
      if (b.requires_grad())
        for (std::size_t i = 0; i < g.size(); ++i) b.grad()[i] += g[i];
    });
  }
  return out;
}

inline Tensor sub(Tape& tape, const Tensor& a, const Tensor& b) {
  detail::require_same_shape(a, b, "sub");
  Tensor out = Tensor::zeros(a.shape(), tape.tracks({&a, &b}));
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  if (out.requires_grad()) {
    tape.record(out, [a, b, out]() {
      auto g = out.grad();
      if (a.requires_grad())
        for (std::size_t i = 0; i < g.size(); ++i) a.grad()[i] += g[i];
      if (b.requires_grad())
        for (std::size_t i = 0; i < g.size(); ++i) b.grad()[i] -= g[i];
    });
  }
  return out;
}

/// Elementwise (Hadamard) product.
inline Tensor mul(Tape& tape, const Tensor& a, const Tensor& b) {
  detail::require_same_shape(a, b, "mul");
  Tensor out = Tensor::zeros(a.shape(), tape.tracks({&a, &b}));
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  if (out.requires_grad()) {
    tape.record(out, [a, b, out]() {
      auto g = out.grad();
      if (a.requires_grad())
        for (std::size_t i = 0; i < g.size(); ++i) a.grad()[i] += g[i] * b[i];
      if (b.requires_grad())
        for (std::size_t i = 0; i < g.size(); ++i) b.grad()[i] += g[i] * a[i];
    });
  }
  return out;
}

/// Scalar times tensor.
inline Tensor scale(Tape& tape, const Tensor& x, double s) {
  Tensor out = Tensor::zeros(x.shape(), tape.tracks({&x}));
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = s * x[i];
  if (out.requires_grad()) {
    tape.record(out, [x, out, s]() {
      auto g = out.grad();
      for (std::size_t i = 0; i < g.size(); ++i) x.grad()[i] += s * g[i];
    });
  }
  return out;
}

inline Tensor sigmoid(Tape& tape, const Tensor& x) {
  Tensor out = Tensor::zeros(x.shape(), tape.tracks({&x}));
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = detail::stable_sigmoid(x[i]);
  if (out.requires_grad()) {
    tape.record(out, [x, out]() {
      auto g = out.grad();
      for (std::size_t i = 0; i < g.size(); ++i) x.grad()[i] += g[i] * out[i] * (1.0 - out[i]);
    });
  }
  return out;
}

inline Tensor tanh(Tape& tape, const Tensor& x) {
  Tensor out = Tensor::zeros(x.shape(), tape.tracks({&x}));
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::tanh(x[i]);
  if (out.requires_grad()) {
    tape.record(out, [x, out]() {
      auto g = out.grad();
      for (std::size_t i = 0; i < g.size(); ++i) x.grad()[i] += g[i] * (1.0 - out[i] * out[i]);
    });
  }
  return out;
}

/// Concatenation along the first axis. Trailing dimensions must agree.
inline Tensor concat(Tape& tape, std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("concat: no inputs");
  Shape shape = parts[0].shape();
  std::size_t lead = 0;
  bool tracked = false;
  for (const Tensor& p : parts) {
    if (p.rank() != shape.size() || !std::equal(p.shape().begin() + 1, p.shape().end(), shape.begin() + 1)) {
      throw DimensionError("concat: incompatible shapes " + shape_str(parts[0].shape()) + " and " +
                           shape_str(p.shape()));
    }
    lead += p.dim(0);
    tracked = tracked || p.requires_grad();
  }
  shape[0] = lead;
  Tensor out = Tensor::zeros(shape, tape.recording() && tracked);
  std::size_t offset = 0;
  for (const Tensor& p : parts) {
    std::copy(p.values().begin(), p.values().end(), out.values().begin() + static_cast<std::ptrdiff_t>(offset));
    offset += p.size();
  }
  if (out.requires_grad()) {
    std::vector<Tensor> inputs(parts.begin(), parts.end());
    tape.record(out, [inputs, out]() {
      std::size_t off = 0;
      for (const Tensor& p : inputs) {
        if (p.requires_grad())
          for (std::size_t i = 0; i < p.size(); ++i) p.grad()[i] += out.grad()[off + i];
        off += p.size();
      }
    });
  }
  return out;
}

inline Tensor concat(Tape& tape, const Tensor& a, const Tensor& b) {
  const Tensor parts[] = {a, b};
  return concat(tape, parts);
}

/// Rows [begin, begin + count) along the first axis.
inline Tensor slice(Tape& tape, const Tensor& x, std::size_t begin, std::size_t count) {
  if (count == 0 || begin + count > x.dim(0)) {
    throw DimensionError("slice: range [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                         ") outside " + shape_str(x.shape()));
  }
  Shape shape = x.shape();
  shape[0] = count;
  const std::size_t stride = x.size() / x.dim(0);
  Tensor out = Tensor::zeros(shape, tape.tracks({&x}));
  const std::size_t off = begin * stride;
  std::copy_n(x.values().begin() + static_cast<std::ptrdiff_t>(off), out.size(), out.values().begin());
  if (out.requires_grad()) {
    tape.record(out, [x, out, off]() {
      for (std::size_t i = 0; i < out.size(); ++i) x.grad()[off + i] += out.grad()[i];
    });
  }
  return out;
}

/// K vectors of length D -> matrix [K x D].
inline Tensor stack(Tape& tape, std::span<const Tensor> rows) {
  if (rows.empty()) throw DimensionError("stack: no inputs");
  for (const Tensor& r : rows) {
    detail::require_rank(r, 1, "stack");
    if (r.dim(0) != rows[0].dim(0)) {
      throw DimensionError("stack: mixed lengths " + shape_str(rows[0].shape()) + " and " + shape_str(r.shape()));
    }
  }
  Tensor flat = concat(tape, rows);
  const std::size_t k = rows.size(), d = rows[0].dim(0);
  Tensor out = Tensor::zeros({k, d}, flat.requires_grad());
  std::copy(flat.values().begin(), flat.values().end(), out.values().begin());
  if (out.requires_grad()) {
    tape.record(out, [flat, out]() {
      for (std::size_t i = 0; i < out.size(); ++i) flat.grad()[i] += out.grad()[i];
    });
  }
  return out;
}

inline Tensor transpose(Tape& tape, const Tensor& x) {
  detail::require_rank(x, 2, "transpose");
  const std::size_t r = x.dim(0), c = x.dim(1);
  Tensor out = Tensor::zeros({c, r}, tape.tracks({&x}));
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out.at(j, i) = x.at(i, j);
  if (out.requires_grad()) {
    tape.record(out, [x, out, r, c]() {
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) x.grad()[i * c + j] += out.grad()[j * r + i];
    });
  }
  return out;
}

/// Softmax of a vector, or of each row of a matrix. Uses max subtraction.
inline Tensor softmax(Tape& tape, const Tensor& x) {
  if (x.rank() > 2) throw DimensionError("softmax: rank must be 1 or 2, got " + shape_str(x.shape()));
  const std::size_t cols = x.shape().back();
  const std::size_t rows = x.size() / cols;
  Tensor out = Tensor::zeros(x.shape(), tape.tracks({&x}));
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = x.data() + r * cols;
    double* o = out.data() + r * cols;
    const double mx = *std::max_element(in, in + cols);
    double total = 0.0;
    for (std::size_t j = 0; j < cols; ++j) total += (o[j] = std::exp(in[j] - mx));
    for (std::size_t j = 0; j < cols; ++j) o[j] /= total;
  }
  if (out.requires_grad()) {
    tape.record(out, [x, out, rows, cols]() {
      for (std::size_t r = 0; r < rows; ++r) {
        const double* y = out.data() + r * cols;
        const double* g = out.grad().data() + r * cols;
        double dot = 0.0;
        for (std::size_t j = 0; j < cols; ++j) dot += g[j] * y[j];
        double* gx = x.grad_data() + r * cols;
        for (std::size_t j = 0; j < cols; ++j) gx[j] += y[j] * (g[j] - dot);
      }
    });
  }
  return out;
}

/// -log(pred[target]) for a probability vector.
inline Tensor cross_entropy(Tape& tape, const Tensor& pred, std::size_t target) {
  detail::require_rank(pred, 1, "cross_entropy");
  if (target >= pred.size()) {
    throw InputError("cross_entropy: target " + std::to_string(target) + " out of range for " +
                     std::to_string(pred.size()) + " classes");
  }
  Tensor out = Tensor::scalar(-std::log(pred[target]), tape.tracks({&pred}));
  if (out.requires_grad()) {
    tape.record(out, [pred, out, target]() { pred.grad()[target] -= out.grad()[0] / pred[target]; });
  }
  return out;
}

/// cross_entropy(softmax(logits), target) computed through log-sum-exp.
inline Tensor softmax_cross_entropy(Tape& tape, const Tensor& logits, std::size_t target) {
  detail::require_rank(logits, 1, "softmax_cross_entropy");
  const std::size_t n = logits.size();
  if (target >= n) {
    throw InputError("softmax_cross_entropy: target " + std::to_string(target) + " out of range for " +
                     std::to_string(n) + " classes");
  }
  const double mx = *std::max_element(logits.values().begin(), logits.values().end());
  std::vector<double> prob(n);
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) total += (prob[j] = std::exp(logits[j] - mx));
  for (double& p : prob) p /= total;
  Tensor out = Tensor::scalar(std::log(total) + mx - logits[target], tape.tracks({&logits}));
  if (out.requires_grad()) {
    tape.record(out, [logits, out, prob = std::move(prob), target]() {
      const double g = out.grad()[0];
      for (std::size_t j = 0; j < prob.size(); ++j) logits.grad()[j] += g * (prob[j] - (j == target ? 1.0 : 0.0));
    });
  }
  return out;
}

/// Sum of all elements, as a scalar.
inline Tensor sum(Tape& tape, const Tensor& x) {
  double total = 0.0;
  for (double v : x.values()) total += v;
  Tensor out = Tensor::scalar(total, tape.tracks({&x}));
  if (out.requires_grad()) {
    tape.record(out, [x, out]() {
      const double g = out.grad()[0];
      for (double& gx : x.grad()) gx += g;
    });
  }
  return out;
}

/// [R x C] -> [R], summing each row.
inline Tensor row_sum(Tape& tape, const Tensor& x) {
  detail::require_rank(x, 2, "row_sum");
  const std::size_t r = x.dim(0), c = x.dim(1);
  Tensor out = Tensor::zeros({r}, tape.tracks({&x}));
  for (std::size_t i = 0; i < r; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < c; ++j) acc += x.at(i, j);
    out[i] = acc;
  }
  if (out.requires_grad()) {
    tape.record(out, [x, out, r, c]() {
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) x.grad()[i * c + j] += out.grad()[i];
    });
  }
  return out;
}

/// Column-wise maximum of [K x D] -> [D]. The gradient goes to the first
/// row attaining the maximum.
inline Tensor max_over_rows(Tape& tape, const Tensor& x) {
  detail::require_rank(x, 2, "max_over_rows");
  const std::size_t k = x.dim(0), d = x.dim(1);
  Tensor out = Tensor::zeros({d}, tape.tracks({&x}));
  std::vector<std::size_t> arg(d, 0);
  for (std::size_t j = 0; j < d; ++j) {
    double best = x.at(0, j);
    for (std::size_t i = 1; i < k; ++i) {
      if (x.at(i, j) > best) {
        best = x.at(i, j);
        arg[j] = i;
      }
    }
    out[j] = best;
  }
  if (out.requires_grad()) {
    tape.record(out, [x, out, arg = std::move(arg), d]() {
      for (std::size_t j = 0; j < d; ++j) x.grad()[arg[j] * d + j] += out.grad()[j];
    });
  }
  return out;
}

/// Column-wise mean of [K x D] -> [D]. Each column is summed in sorted
/// order, so the result does not depend on row order.
inline Tensor mean_over_rows(Tape& tape, const Tensor& x) {
  detail::require_rank(x, 2, "mean_over_rows");
  const std::size_t k = x.dim(0), d = x.dim(1);
  Tensor out = Tensor::zeros({d}, tape.tracks({&x}));
  std::vector<double> column(k);
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < k; ++i) column[i] = x.at(i, j);
    std::sort(column.begin(), column.end());
    double acc = 0.0;
    for (double v : column) acc += v;
    out[j] = acc / static_cast<double>(k);
  }
  if (out.requires_grad()) {
    tape.record(out, [x, out, k, d]() {
      const double inv = 1.0 / static_cast<double>(k);
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < d; ++j) x.grad()[i * d + j] += out.grad()[j] * inv;
    });
  }
  return out;
}

/// Column `index` of a [rows x cols] matrix. With an embedding table stored
/// as [embed_dim x vocab] this is the product E * one_hot(index).
inline Tensor column(Tape& tape, const Tensor& m, std::size_t index) {
  detail::require_rank(m, 2, "column");
  const std::size_t r = m.dim(0), c = m.dim(1);
  if (index >= c) {
    throw InputError("column: index " + std::to_string(index) + " out of range for " + shape_str(m.shape()));
  }
  Tensor out = Tensor::zeros({r}, tape.tracks({&m}));
  for (std::size_t i = 0; i < r; ++i) out[i] = m.at(i, index);
  if (out.requires_grad()) {
    tape.record(out, [m, out, r, c, index]() {
      for (std::size_t i = 0; i < r; ++i) m.grad()[i * c + index] += out.grad()[i];
    });
  }
  return out;
}

/// Index of the largest value; ties resolve to the lowest index.
inline std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw InputError("argmax: empty input");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

}  // namespace nr
