#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "neural_reasoner/encoder.hpp"
#include "neural_reasoner/error.hpp"
#include "neural_reasoner/init.hpp"
#include "neural_reasoner/ops.hpp"
#include "neural_reasoner/tensor.hpp"
#include "neural_reasoner/vocabulary.hpp"

namespace nr {

/// What the auxiliary decoder reconstructs from layer-0 encodings.
enum class AuxMode { none, original, abstract };

inline const char* to_string(AuxMode m) {
  switch (m) {
    case AuxMode::none: return "none";
    case AuxMode::original: return "original";
    case AuxMode::abstract: return "abstract";
  }
  return "?";
}

inline AuxMode parse_aux_mode(const std::string& s) {
  if (s == "none") return AuxMode::none;
  if (s == "original") return AuxMode::original;
  if (s == "abstract") return AuxMode::abstract;
  throw InputError("unknown aux mode '" + s + "' (expected none, original or abstract)");
}

/// GRU decoder. `embedding` is the encoder's table (same storage); the
/// decoder owns its recurrent weights and the output projection.
struct DecoderParams {
  Tensor embedding;  // [embed_dim x |V|], shared
  GruWeights gru;
  Tensor W_out;  // [|V| x hidden]

  static DecoderParams random(const Tensor& shared_embedding, std::size_t hidden, Rng& rng, double range) {
    DecoderParams p;
    p.embedding = shared_embedding;
    p.gru = GruWeights::random(hidden, shared_embedding.dim(0), rng, range);
    p.W_out = uniform_param({shared_embedding.dim(1), hidden}, rng, range);
    return p;
  }

  std::size_t vocab_size() const { return W_out.dim(0); }

  /// The shared embedding is not listed; its owner lists it.
  void collect(ParamList& list, const std::string& prefix) const {
    gru.collect(list, prefix + ".gru");
    list.push_back({prefix + ".W_out", W_out});
  }
};

/// Teacher-forced negative log-likelihood of `target` followed by EOS,
/// starting the decoder from `context`.
inline Tensor decode_nll(Tape& tape, const DecoderParams& params, const Tensor& context,
                         std::span<const TokenId> target) {
  if (target.empty()) throw InputError("decode_nll: empty target sequence");
  for (TokenId t : target) {
    if (t >= params.vocab_size()) {
      throw InputError("decode_nll: token id " + std::to_string(t) + " outside vocabulary of size " +
                       std::to_string(params.vocab_size()));
    }
  }
  Tensor h = context;
  TokenId input = Vocabulary::kBos;
  std::vector<Tensor> terms;
  terms.reserve(target.size() + 1);
  for (std::size_t t = 0; t <= target.size(); ++t) {
    const TokenId expected = t < target.size() ? target[t] : Vocabulary::kEos;
    h = gru_cell(tape, params.gru, column(tape, params.embedding, input), h);
    terms.push_back(softmax_cross_entropy(tape, matvec(tape, params.W_out, h), expected));
    input = expected;
  }
  return sum(tape, concat(tape, terms));
}

struct RecoveringLoss {
  Tensor total;            // summed NLL over all reconstructed sentences
  std::size_t tokens = 0;  // number of predicted tokens, EOS included
};

/// Sum of decode_nll over the question and every fact of one instance.
/// `question_decoder` and `fact_decoder` may be the same parameters.
inline RecoveringLoss recovering_loss(Tape& tape, const DecoderParams& question_decoder,
                                      const DecoderParams& fact_decoder, const Tensor& q0,
                                      std::span<const Tensor> facts0, std::span<const TokenId> question_target,
                                      std::span<const std::vector<TokenId>> fact_targets) {
  if (facts0.size() != fact_targets.size()) {
    throw InputError("recovering_loss: " + std::to_string(facts0.size()) + " fact encodings for " +
                     std::to_string(fact_targets.size()) + " fact targets");
  }
  std::vector<Tensor> terms;
  terms.reserve(facts0.size() + 1);
  RecoveringLoss out;
  for (std::size_t k = 0; k < facts0.size(); ++k) {
    terms.push_back(decode_nll(tape, fact_decoder, facts0[k], fact_targets[k]));
    out.tokens += fact_targets[k].size() + 1;
  }
  terms.push_back(decode_nll(tape, question_decoder, q0, question_target));
  out.tokens += question_target.size() + 1;
  out.total = terms.size() == 1 ? terms.front() : sum(tape, concat(tape, terms));
  return out;
}

}  // namespace nr
