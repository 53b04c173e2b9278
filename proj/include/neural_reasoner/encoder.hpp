#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "neural_reasoner/error.hpp"
#include "neural_reasoner/init.hpp"
#include "neural_reasoner/ops.hpp"
#include "neural_reasoner/tensor.hpp"
#include "neural_reasoner/vocabulary.hpp"

namespace nr {

/// Weights of one GRU cell, without biases:
///   z = sigmoid(W_xz x + W_hz h)
///   r = sigmoid(W_xr x + W_hr h)
///   h~ = tanh(W_xh x + U_hh (r * h))
///   h' = (1 - z) * h + z * h~
struct GruWeights {
  Tensor W_xz, W_xr, W_xh;  // [hidden x input]
  Tensor W_hz, W_hr, U_hh;  // [hidden x hidden]

  static GruWeights random(std::size_t hidden, std::size_t input, Rng& rng, double range) {
    GruWeights w;
    w.W_xz = uniform_param({hidden, input}, rng, range);
    w.W_xr = uniform_param({hidden, input}, rng, range);
    w.W_xh = uniform_param({hidden, input}, rng, range);
    w.W_hz = uniform_param({hidden, hidden}, rng, range);
    w.W_hr = uniform_param({hidden, hidden}, rng, range);
    w.U_hh = uniform_param({hidden, hidden}, rng, range);
    return w;
  }

  static GruWeights zeros(std::size_t hidden, std::size_t input) {
    GruWeights w;
    w.W_xz = Tensor::zeros({hidden, input}, true);
    w.W_xr = Tensor::zeros({hidden, input}, true);
    w.W_xh = Tensor::zeros({hidden, input}, true);
    w.W_hz = Tensor::zeros({hidden, hidden}, true);
    w.W_hr = Tensor::zeros({hidden, hidden}, true);
    w.U_hh = Tensor::zeros({hidden, hidden}, true);
    return w;
  }

  std::size_t hidden() const { return W_hz.dim(0); }
  std::size_t input() const { return W_xz.dim(1); }

  void collect(ParamList& out, const std::string& prefix) const {
    out.push_back({prefix + ".W_xz", W_xz});
    out.push_back({prefix + ".W_xr", W_xr});
    out.push_back({prefix + ".W_xh", W_xh});
    out.push_back({prefix + ".W_hz", W_hz});
    out.push_back({prefix + ".W_hr", W_hr});
    out.push_back({prefix + ".U_hh", U_hh});
  }
};

/// One GRU transition on an already-embedded input.
inline Tensor gru_cell(Tape& tape, const GruWeights& w, const Tensor& x, const Tensor& h_prev) {
  if (x.rank() != 1 || x.dim(0) != w.input()) {
    throw DimensionError("gru_cell: input " + shape_str(x.shape()) + " does not match W_xz " + shape_str(w.W_xz.shape()));
  }
  if (h_prev.rank() != 1 || h_prev.dim(0) != w.hidden()) {
    throw DimensionError("gru_cell: state " + shape_str(h_prev.shape()) + " does not match hidden size " +
                         std::to_string(w.hidden()));
  }
  Tensor z = sigmoid(tape, add(tape, matvec(tape, w.W_xz, x), matvec(tape, w.W_hz, h_prev)));
  Tensor r = sigmoid(tape, add(tape, matvec(tape, w.W_xr, x), matvec(tape, w.W_hr, h_prev)));
  Tensor candidate = tanh(tape, add(tape, matvec(tape, w.W_xh, x), matvec(tape, w.U_hh, mul(tape, r, h_prev))));
  // (1 - z) * h + z * h~  ==  h + z * (h~ - h)
  return add(tape, h_prev, mul(tape, z, sub(tape, candidate, h_prev)));
}

/// Embedding table plus recurrent weights. The table is [embed_dim x |V|];
/// a token's embedding is its column.
struct EncoderParams {
  Tensor embedding;
  GruWeights gru;

  static EncoderParams random(std::size_t vocab_size, std::size_t embed_dim, std::size_t hidden, Rng& rng,
                              double range) {
    EncoderParams p;
    p.embedding = uniform_param({embed_dim, vocab_size}, rng, range);
    p.gru = GruWeights::random(hidden, embed_dim, rng, range);
    return p;
  }

  std::size_t vocab_size() const { return embedding.dim(1); }
  std::size_t hidden() const { return gru.hidden(); }
};

inline Tensor gru_step(Tape& tape, const EncoderParams& params, TokenId token, const Tensor& h_prev) {
  if (token >= params.vocab_size()) {
    throw InputError("gru_step: token id " + std::to_string(token) + " outside vocabulary of size " +
                     std::to_string(params.vocab_size()));
  }
  return gru_cell(tape, params.gru, column(tape, params.embedding, token), h_prev);
}

/// Folds gru_step over `tokens` from a zero state; returns the last state.
inline Tensor encode(Tape& tape, const EncoderParams& params, std::span<const TokenId> tokens) {
  if (tokens.empty()) throw InputError("encode: empty token sequence");
  Tensor h = Tensor::zeros({params.hidden()});
  for (TokenId t : tokens) h = gru_step(tape, params, t, h);
  return h;
}

}  // namespace nr
