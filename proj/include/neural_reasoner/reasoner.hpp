#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "neural_reasoner/error.hpp"
#include "neural_reasoner/init.hpp"
#include "neural_reasoner/ops.hpp"
#include "neural_reasoner/tensor.hpp"

namespace nr {

enum class Pooling { max, avg, gating };
enum class Activation { tanh, sigmoid };

inline const char* to_string(Pooling p) {
  switch (p) {
    case Pooling::max: return "max";
    case Pooling::avg: return "avg";
    case Pooling::gating: return "gating";
  }
  return "?";
}

inline Pooling parse_pooling(const std::string& s) {
  if (s == "max") return Pooling::max;
  if (s == "avg") return Pooling::avg;
  if (s == "gating") return Pooling::gating;
  throw InputError("unknown pooling '" + s + "' (expected max, avg or gating)");
}

struct ReasonerConfig {
  std::size_t layers = 2;
  /// Weight layers per interaction network; 1 is a single affine map + activation.
  std::size_t dnn_depth = 2;
  /// Output size of q at each layer. Empty means "every layer uses the
  /// encoder hidden size".
  std::vector<std::size_t> layer_dims;
  Pooling pooling = Pooling::max;
  /// When false, fact vectors pass through every layer unchanged.
  bool update_facts = false;
  Activation activation = Activation::tanh;

  void validate() const {
    if (layers < 1) throw InputError("reasoner: layer count must be >= 1");
    if (dnn_depth < 1) throw InputError("reasoner: dnn depth must be >= 1");
    if (!layer_dims.empty() && layer_dims.size() != layers) {
      throw InputError("reasoner: " + std::to_string(layer_dims.size()) + " layer dims given for " +
                       std::to_string(layers) + " layers");
    }
    for (std::size_t d : layer_dims)
      if (d == 0) throw InputError("reasoner: layer dims must be positive");
  }

  /// Output dim of q at layer `l` (1-based).
  std::size_t dim(std::size_t l, std::size_t fallback) const {
    return layer_dims.empty() ? fallback : layer_dims.at(l - 1);
  }
};

/// act(W x + b) with W stored [out x in].
struct DenseLayer {
  Tensor weight;
  Tensor bias;

  static DenseLayer random(std::size_t out, std::size_t in, Rng& rng, double range) {
    return {uniform_param({out, in}, rng, range), uniform_param({out}, rng, range)};
  }

  std::size_t in() const { return weight.dim(1); }
  std::size_t out() const { return weight.dim(0); }

  Tensor affine(Tape& tape, const Tensor& x) const { return add(tape, matvec(tape, weight, x), bias); }

  void collect(ParamList& list, const std::string& prefix) const {
    list.push_back({prefix + ".W", weight});
    list.push_back({prefix + ".b", bias});
  }
};

inline Tensor activate(Tape& tape, Activation act, const Tensor& x) {
  return act == Activation::tanh ? tanh(tape, x) : sigmoid(tape, x);
}

/// Parameters of one reasoning layer.
struct LayerParams {
  std::vector<DenseLayer> dnn;
  std::optional<DenseLayer> gate;  // present iff pooling == gating
  std::size_t q_dim = 0;           // size of q_k at this layer
  std::size_t f_dim = 0;           // size of the updated fact slice, 0 when facts are not updated

  std::size_t input_dim() const { return dnn.front().in(); }

  void collect(ParamList& list, const std::string& prefix) const {
    for (std::size_t i = 0; i < dnn.size(); ++i) dnn[i].collect(list, prefix + ".dnn" + std::to_string(i));
    if (gate) gate->collect(list, prefix + ".gate");
  }
};

struct ReasonerParams {
  std::vector<LayerParams> layers;

  /// `q_dim` and `f_dim` are the sizes of the layer-0 question and fact encodings.
  static ReasonerParams random(const ReasonerConfig& config, std::size_t q_dim, std::size_t f_dim, Rng& rng,
                               double range) {
    config.validate();
    ReasonerParams p;
    std::size_t q_in = q_dim;
    for (std::size_t l = 1; l <= config.layers; ++l) {
      LayerParams layer;
      layer.q_dim = config.dim(l, q_dim);
      layer.f_dim = (config.update_facts && l < config.layers) ? f_dim : 0;
      const std::size_t out = layer.q_dim + layer.f_dim;
      std::size_t in = q_in + f_dim;
      for (std::size_t d = 0; d < config.dnn_depth; ++d) {
        layer.dnn.push_back(DenseLayer::random(out, in, rng, range));
        in = out;
      }
      if (config.pooling == Pooling::gating) layer.gate = DenseLayer::random(layer.q_dim, q_in + f_dim, rng, range);
      p.layers.push_back(std::move(layer));
      q_in = p.layers.back().q_dim;
    }
    return p;
  }

  void collect(ParamList& list, const std::string& prefix) const {
    for (std::size_t l = 0; l < layers.size(); ++l) layers[l].collect(list, prefix + ".layer" + std::to_string(l + 1));
  }
};

struct Interaction {
  Tensor q;  // q_k at this layer
  Tensor f;  // f_k at this layer (the input fact itself when not updated)
};

/// Runs DNN_l on [q; f_k].
inline Interaction interact(Tape& tape, const LayerParams& layer, Activation act, const Tensor& q, const Tensor& f) {
  if (q.rank() != 1 || f.rank() != 1 || q.size() + f.size() != layer.input_dim()) {
    throw DimensionError("interact: [q; f] of sizes " + std::to_string(q.size()) + " + " + std::to_string(f.size()) +
                         " does not match DNN input " + std::to_string(layer.input_dim()));
  }
  Tensor x = concat(tape, q, f);
  for (const DenseLayer& d : layer.dnn) x = activate(tape, act, d.affine(tape, x));
  if (layer.f_dim == 0) return {x, f};
  return {slice(tape, x, 0, layer.q_dim), slice(tape, x, layer.q_dim, layer.f_dim)};
}

/// Unnormalized gate scores g(q, f_k), one per coordinate of q_k.
inline Tensor gate_scores(Tape& tape, const LayerParams& layer, const Tensor& q, const Tensor& f) {
  if (!layer.gate) throw InputError("gate_scores: layer has no gating network");
  return layer.gate->affine(tape, concat(tape, q, f));
}

/// Fuses the per-fact question updates into one vector.
///
/// For gating, `gates[k]` holds the scores for `qs[k]`; weights are a softmax
/// over k taken separately for every coordinate.
inline Tensor pool(Tape& tape, std::span<const Tensor> qs, Pooling kind, std::span<const Tensor> gates = {}) {
  if (qs.empty()) throw InputError("pool: no inputs");
  Tensor stacked = stack(tape, qs);
  switch (kind) {
    case Pooling::max: return max_over_rows(tape, stacked);
    case Pooling::avg: return mean_over_rows(tape, stacked);
    case Pooling::gating: {
      if (gates.size() != qs.size()) {
        throw InputError("pool: gating needs one score vector per input (" + std::to_string(gates.size()) + " vs " +
                         std::to_string(qs.size()) + ")");
      }
      Tensor weights = softmax(tape, transpose(tape, stack(tape, gates)));  // [D x K]
      return row_sum(tape, mul(tape, weights, transpose(tape, stacked)));
    }
  }
  throw InputError("pool: unknown pooling kind");
}

/// Per-layer intermediate values, for inspection.
struct ReasonTrace {
  std::vector<std::vector<Tensor>> facts;  // facts[l] = f^(l), l = 0..L-1
  std::vector<Tensor> questions;           // questions[l] = q^(l), l = 0..L
};

/// Runs the L reasoning layers and returns q^(L).
inline Tensor reason(Tape& tape, const ReasonerConfig& config, const ReasonerParams& params, const Tensor& q0,
                     std::span<const Tensor> facts0, ReasonTrace* trace = nullptr) {
  if (facts0.empty()) throw InputError("reason: at least one fact is required");
  if (params.layers.size() != config.layers) {
    throw InputError("reason: config has " + std::to_string(config.layers) + " layers, params have " +
                     std::to_string(params.layers.size()));
  }
  Tensor q = q0;
  std::vector<Tensor> facts(facts0.begin(), facts0.end());
  if (trace) trace->questions.push_back(q);
  for (const LayerParams& layer : params.layers) {
    if (trace) trace->facts.push_back(facts);
    std::vector<Tensor> updates, next_facts, gates;
    updates.reserve(facts.size());
    next_facts.reserve(facts.size());
    for (const Tensor& f : facts) {
      Interaction out = interact(tape, layer, config.activation, q, f);
      updates.push_back(out.q);
      next_facts.push_back(out.f);
      if (config.pooling == Pooling::gating) gates.push_back(gate_scores(tape, layer, q, f));
    }
    q = pool(tape, updates, config.pooling, gates);
    facts = std::move(next_facts);
    if (trace) trace->questions.push_back(q);
  }
  return q;
}

}  // namespace nr
