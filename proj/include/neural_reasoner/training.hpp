#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iostream>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "neural_reasoner/error.hpp"
#include "neural_reasoner/init.hpp"
#include "neural_reasoner/model.hpp"
#include "neural_reasoner/ops.hpp"

namespace nr {

struct TrainConfig {
  /// Weight of the reconstruction loss: E = alpha * E_rec + (1 - alpha) * E_reason.
  double alpha = 0.5;
  std::size_t epochs = 200;
  double clip_norm = 40.0;
  std::size_t batch_size = 32;
  double init_range = 0.1;
  double adadelta_rho = 0.95;
  double adadelta_eps = 1e-6;
  std::uint64_t seed = 1;
  /// Divide the reconstruction NLL by the number of predicted tokens.
  bool per_token_recovering = true;
  /// Clip each tensor separately instead of the global norm.
  bool per_tensor_clip = false;

  void validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw InputError("train: alpha must lie in [0, 1]");
    if (!(clip_norm > 0.0)) throw InputError("train: clip norm must be positive");
    if (epochs < 1) throw InputError("train: epochs must be >= 1");
    if (batch_size < 1) throw InputError("train: batch size must be >= 1");
    if (!(adadelta_rho > 0.0 && adadelta_rho < 1.0)) throw InputError("train: AdaDelta rho must lie in (0, 1)");
    if (!(adadelta_eps > 0.0)) throw InputError("train: AdaDelta eps must be positive");
  }
};

/// splitmix64 step; derives independent stream seeds from one seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

struct LossBreakdown {
  Tensor total;
  double reasoning = 0.0;   // cross entropy of the answer
  double recovering = 0.0;  // reconstruction NLL as mixed into total (0 when not computed)
};

/// alpha * E_recovering + (1 - alpha) * E_reasoning for one instance. With
/// alpha == 0 or no decoder the reconstruction branch is not evaluated.
inline LossBreakdown combined_loss(Tape& tape, const NeuralReasoner& model, const EncodedInstance& inst, double alpha,
                                   bool per_token_recovering = true) {
  if (!inst.answer) throw InputError("combined_loss: instance answer is not in the answer space");
  const Encodings enc = model.encode_inputs(tape, inst);
  Tensor reasoning = softmax_cross_entropy(tape, model.answer_logits(tape, enc), *inst.answer);
  LossBreakdown out;
  out.reasoning = reasoning.item();
  if (alpha == 0.0 || !model.has_decoder()) {
    out.total = reasoning;
    return out;
  }
  RecoveringLoss rec = model.recovering(tape, enc, inst);
  Tensor recovering = per_token_recovering ? scale(tape, rec.total, 1.0 / static_cast<double>(rec.tokens)) : rec.total;
  out.recovering = recovering.item();
  out.total = alpha == 1.0 ? recovering : add(tape, scale(tape, recovering, alpha), scale(tape, reasoning, 1.0 - alpha));
  return out;
}

inline double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

/// Rescales `grads` to norm `clip_norm` when its norm exceeds it. Returns
/// the norm before clipping.
inline double clip_gradients(std::span<double> grads, double clip_norm) {
  if (!(clip_norm > 0.0)) throw InputError("clip_gradients: clip norm must be positive");
  const double norm = l2_norm(grads);
  if (norm > clip_norm) {
    const double s = clip_norm / norm;
    for (double& g : grads) g *= s;
  }
  return norm;
}

/// Global-norm clipping over every parameter gradient. Returns the norm
/// before clipping.
inline double clip_gradients(const ParamList& params, double clip_norm) {
  if (!(clip_norm > 0.0)) throw InputError("clip_gradients: clip norm must be positive");
  double sq = 0.0;
  for (const auto& p : params)
    for (double g : p.tensor.grad()) sq += g * g;
  const double norm = std::sqrt(sq);
  if (norm > clip_norm) {
    const double s = clip_norm / norm;
    for (const auto& p : params)
      for (double& g : p.tensor.grad()) g *= s;
  }
  return norm;
}

inline double global_grad_norm(const ParamList& params) {
  double sq = 0.0;
  for (const auto& p : params)
    for (double g : p.tensor.grad()) sq += g * g;
  return std::sqrt(sq);
}

/// AdaDelta with per-coordinate accumulators E[g^2] and E[dx^2]:
///   E[g^2]  <- rho E[g^2] + (1 - rho) g^2
///   dx      <- -sqrt(E[dx^2] + eps) / sqrt(E[g^2] + eps) * g
///   E[dx^2] <- rho E[dx^2] + (1 - rho) dx^2
///   x       <- x + dx
class AdaDelta {
 public:
  AdaDelta(ParamList params, double rho = 0.95, double eps = 1e-6)
      : params_(std::move(params)), rho_(rho), eps_(eps) {
    for (const auto& p : params_) {
      sq_grad_.emplace_back(p.tensor.size(), 0.0);
      sq_update_.emplace_back(p.tensor.size(), 0.0);
    }
  }

  void step() {
    for (std::size_t i = 0; i < params_.size(); ++i) {
      Tensor& x = params_[i].tensor;
      auto g = x.grad();
      auto& eg = sq_grad_[i];
      auto& ed = sq_update_[i];
      for (std::size_t j = 0; j < x.size(); ++j) {
        eg[j] = rho_ * eg[j] + (1.0 - rho_) * g[j] * g[j];
        const double dx = -std::sqrt(ed[j] + eps_) / std::sqrt(eg[j] + eps_) * g[j];
        ed[j] = rho_ * ed[j] + (1.0 - rho_) * dx * dx;
        x[j] += dx;
      }
    }
  }

  const std::vector<double>& sq_grad(std::size_t i) const { return sq_grad_.at(i); }
  const std::vector<double>& sq_update(std::size_t i) const { return sq_update_.at(i); }

 private:
  ParamList params_;
  double rho_;
  double eps_;
  std::vector<std::vector<double>> sq_grad_;
  std::vector<std::vector<double>> sq_update_;
};

/// Fraction of instances whose predicted class is the gold class. Instances
/// whose answer is outside the answer space count as wrong.
inline double evaluate(const NeuralReasoner& model, const std::vector<EncodedInstance>& data) {
  if (data.empty()) throw InputError("evaluate: empty dataset");
  std::size_t correct = 0, unknown = 0;
  for (const auto& inst : data) {
    if (!inst.answer) {
      ++unknown;
      continue;
    }
    if (model.predict(inst) == *inst.answer) ++correct;
  }
  if (unknown) std::clog << "evaluate: " << unknown << " instance(s) with answers outside the answer space\n";
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

struct EpochMetrics {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double reasoning_loss = 0.0;
  double recovering_loss = 0.0;
  std::optional<double> test_accuracy;
  double wall_ms = 0.0;
};

struct StepInfo {
  std::size_t epoch = 0;
  std::size_t batch = 0;
  double grad_norm = 0.0;     // before clipping
  double clipped_norm = 0.0;  // after clipping
};

struct TrainHooks {
  std::function<void(const StepInfo&)> on_step;
  std::function<void(const EpochMetrics&)> on_epoch;
};

/// Mini-batch training: per epoch a seeded shuffle, then for each batch the
/// summed per-instance loss is backpropagated, gradients are clipped and
/// AdaDelta takes one step. Losses in the returned history are per-instance
/// means; test accuracy is recorded when `test` is nonempty.
inline std::vector<EpochMetrics> train(NeuralReasoner& model, const std::vector<EncodedInstance>& train_set,
                                       const std::vector<EncodedInstance>& test_set, const TrainConfig& config,
                                       const TrainHooks& hooks = {}) {
  config.validate();
  if (train_set.empty()) throw InputError("train: empty training set");
  const ParamList& params = model.parameters();
  AdaDelta opt(params, config.adadelta_rho, config.adadelta_eps);
  Rng shuffle_rng(derive_seed(config.seed, 1));
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::vector<EpochMetrics> history;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    EpochMetrics m;
    m.epoch = epoch;
    std::size_t batch = 0;
    for (std::size_t b = 0; b < order.size(); b += config.batch_size, ++batch) {
      zero_grads(params);
      const std::size_t e = std::min(order.size(), b + config.batch_size);
      for (std::size_t i = b; i < e; ++i) {
        Tape tape;
        LossBreakdown loss = combined_loss(tape, model, train_set[order[i]], config.alpha, config.per_token_recovering);
        const double value = loss.total.item();
        if (!std::isfinite(value)) {
          throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch) +
                             " (instance " + std::to_string(order[i]) + ")");
        }
        m.train_loss += value;
        m.reasoning_loss += loss.reasoning;
        m.recovering_loss += loss.recovering;
        tape.backward(loss.total);
      }
      StepInfo info{epoch, batch, 0.0, 0.0};
      if (config.per_tensor_clip) {
        info.grad_norm = global_grad_norm(params);
        for (const auto& p : params) clip_gradients(p.tensor.grad(), config.clip_norm);
      } else {
        info.grad_norm = clip_gradients(params, config.clip_norm);
      }
      if (!std::isfinite(info.grad_norm)) {
        throw NumericError("non-finite gradient at epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch));
      }
      info.clipped_norm = global_grad_norm(params);
      if (hooks.on_step) hooks.on_step(info);
      opt.step();
    }
    const double n = static_cast<double>(train_set.size());
    m.train_loss /= n;
    m.reasoning_loss /= n;
    m.recovering_loss /= n;
    if (!test_set.empty()) m.test_accuracy = evaluate(model, test_set);
    m.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    if (hooks.on_epoch) hooks.on_epoch(m);
    history.push_back(m);
  }
  return history;
}

}  // namespace nr
