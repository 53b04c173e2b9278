#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "neural_reasoner/answerer.hpp"
#include "neural_reasoner/aux_decoder.hpp"
#include "neural_reasoner/data/corpus.hpp"
#include "neural_reasoner/encoder.hpp"
#include "neural_reasoner/error.hpp"
#include "neural_reasoner/init.hpp"
#include "neural_reasoner/reasoner.hpp"

namespace nr {

using data::EncodedInstance;

struct ModelConfig {
  std::size_t vocab_size = 0;
  std::size_t num_classes = 0;
  std::size_t embed_dim = 32;
  std::size_t hidden = 64;
  ReasonerConfig reasoner;
  AuxMode aux = AuxMode::none;
  /// Facts get their own GRU weights (the embedding table stays shared).
  bool separate_fact_encoder = false;
  /// Facts and question get separate decoders.
  bool split_decoders = false;
  double init_range = 0.1;

  void validate() const {
    if (vocab_size <= Vocabulary::kReserved) throw InputError("model: vocabulary holds no ordinary tokens");
    if (num_classes == 0) throw InputError("model: answer space is empty");
    if (embed_dim == 0 || hidden == 0) throw InputError("model: embed and hidden sizes must be positive");
    if (!(init_range > 0)) throw InputError("model: init range must be positive");
    reasoner.validate();
  }
};

/// Layer-0 representations of one instance.
struct Encodings {
  Tensor question;
  std::vector<Tensor> facts;
};

/// Encoder, reasoning stack, answerer and optional reconstruction decoder.
///
/// Parameters are drawn in a fixed order (encoder, reasoner, answerer,
/// decoder), so adding or removing the decoder leaves the other
/// initial values unchanged.
class NeuralReasoner {
 public:
  NeuralReasoner(const ModelConfig& config, std::uint64_t seed) : config_(config) {
    config_.validate();
    Rng rng(seed);
    const double r = config_.init_range;
    encoder_ = EncoderParams::random(config_.vocab_size, config_.embed_dim, config_.hidden, rng, r);
    if (config_.separate_fact_encoder) {
      fact_encoder_ = EncoderParams{encoder_.embedding, GruWeights::random(config_.hidden, config_.embed_dim, rng, r)};
    }
    reasoner_ = ReasonerParams::random(config_.reasoner, config_.hidden, config_.hidden, rng, r);
    answerer_ = AnswererParams::random(config_.num_classes, reasoner_.layers.back().q_dim, rng, r);
    if (config_.aux != AuxMode::none) {
      question_decoder_ = DecoderParams::random(encoder_.embedding, config_.hidden, rng, r);
      if (config_.split_decoders) fact_decoder_ = DecoderParams::random(encoder_.embedding, config_.hidden, rng, r);
    }
    collect();
  }

  const ModelConfig& config() const noexcept { return config_; }
  const ParamList& parameters() const noexcept { return params_; }
  bool has_decoder() const noexcept { return question_decoder_.has_value(); }

  EncoderParams& encoder() { return encoder_; }
  const EncoderParams& encoder() const { return encoder_; }
  ReasonerParams& reasoner() { return reasoner_; }
  const ReasonerParams& reasoner() const { return reasoner_; }
  AnswererParams& answerer() { return answerer_; }
  const AnswererParams& answerer() const { return answerer_; }
  const DecoderParams& question_decoder() const { return question_decoder_.value(); }
  const DecoderParams& fact_decoder() const { return fact_decoder_ ? *fact_decoder_ : question_decoder_.value(); }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.tensor.size();
    return n;
  }

  Encodings encode_inputs(Tape& tape, const EncodedInstance& inst) const {
    if (inst.facts.empty()) throw InputError("model: instance has no facts");
    Encodings e;
    e.question = encode(tape, encoder_, inst.question);
    const EncoderParams& fe = fact_encoder_ ? *fact_encoder_ : encoder_;
    e.facts.reserve(inst.facts.size());
    for (const auto& f : inst.facts) e.facts.push_back(encode(tape, fe, f));
    return e;
  }

  /// q^(L) for already encoded inputs.
  Tensor reason_over(Tape& tape, const Encodings& enc, ReasonTrace* trace = nullptr) const {
    return reason(tape, config_.reasoner, reasoner_, enc.question, enc.facts, trace);
  }

  Tensor answer_logits(Tape& tape, const Encodings& enc) const {
    return class_logits(tape, answerer_, reason_over(tape, enc));
  }

  /// Answer distribution for one instance.
  Tensor probabilities(Tape& tape, const EncodedInstance& inst) const {
    return softmax(tape, answer_logits(tape, encode_inputs(tape, inst)));
  }

  std::size_t predict(const EncodedInstance& inst) const {
    Tape tape(false);
    return argmax(answer_logits(tape, encode_inputs(tape, inst)).values());
  }

  RecoveringLoss recovering(Tape& tape, const Encodings& enc, const EncodedInstance& inst) const {
    if (!has_decoder()) throw InputError("model: no auxiliary decoder configured");
    return recovering_loss(tape, question_decoder(), fact_decoder(), enc.question, enc.facts, inst.question_target,
                           inst.fact_targets);
  }

 private:
  void collect() {
    ParamList all;
    all.push_back({"embedding", encoder_.embedding});
    encoder_.gru.collect(all, "encoder");
    if (fact_encoder_) fact_encoder_->gru.collect(all, "fact_encoder");
    reasoner_.collect(all, "reasoner");
    answerer_.collect(all, "answerer");
    if (question_decoder_) question_decoder_->collect(all, config_.split_decoders ? "question_decoder" : "decoder");
    if (fact_decoder_) fact_decoder_->collect(all, "fact_decoder");
    params_ = std::move(all);
  }

  ModelConfig config_;
  EncoderParams encoder_;
  std::optional<EncoderParams> fact_encoder_;
  ReasonerParams reasoner_;
  AnswererParams answerer_;
  std::optional<DecoderParams> question_decoder_;
  std::optional<DecoderParams> fact_decoder_;
  ParamList params_;
};

}  // namespace nr
