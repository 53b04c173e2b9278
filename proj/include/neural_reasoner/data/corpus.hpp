#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "neural_reasoner/answerer.hpp"
#include "neural_reasoner/aux_decoder.hpp"
#include "neural_reasoner/data/abstractize.hpp"
#include "neural_reasoner/data/instance.hpp"
#include "neural_reasoner/error.hpp"
#include "neural_reasoner/vocabulary.hpp"

namespace nr::data {

/// Vocabulary over every fact and question token. In abstract mode the
/// variable symbols of the abstract forms are added too (at least x, y, z).
inline Vocabulary build_vocab(const std::vector<Instance>& instances, AuxMode mode) {
  if (instances.empty()) throw InputError("build_vocab: empty corpus");
  Vocabulary vocab;
  for (const Instance& inst : instances) {
    for (const Sentence& f : inst.facts)
      for (const auto& t : f) vocab.add(t);
    for (const auto& t : inst.question) vocab.add(t);
  }
  if (mode == AuxMode::abstract) {
    for (std::size_t i = 0; i < 3; ++i) vocab.add(variable_name(i));
    for (const Instance& inst : instances) {
      if (inst.abstract_facts)
        for (const Sentence& f : *inst.abstract_facts)
          for (const auto& t : f) vocab.add(t);
      if (inst.abstract_question)
        for (const auto& t : *inst.abstract_question) vocab.add(t);
    }
  }
  return vocab;
}

/// Answer classes seen in `instances`, sorted.
inline AnswerSpace build_answer_space(const std::vector<Instance>& instances) {
  std::set<std::string> seen;
  for (const Instance& inst : instances) seen.insert(inst.answer);
  return AnswerSpace(std::vector<std::string>(seen.begin(), seen.end()));
}

/// An instance mapped to ids, with its reconstruction targets.
struct EncodedInstance {
  std::vector<std::vector<TokenId>> facts;
  std::vector<TokenId> question;
  std::optional<std::size_t> answer;  // nullopt: not in the answer space
  std::vector<std::vector<TokenId>> fact_targets;
  std::vector<TokenId> question_target;
};

inline EncodedInstance encode_instance(const Instance& inst, const Vocabulary& vocab, const AnswerSpace& answers,
                                       AuxMode mode, const EntityLexicon* lexicon = nullptr) {
  EncodedInstance out;
  for (const Sentence& f : inst.facts) out.facts.push_back(vocab.encode(f));
  out.question = vocab.encode(inst.question);
  out.answer = answers.find(inst.answer);
  if (mode == AuxMode::original) {
    out.fact_targets = out.facts;
    out.question_target = out.question;
  } else if (mode == AuxMode::abstract) {
    Instance abs = inst;
    if (!abs.abstract_facts || !abs.abstract_question) {
      if (!lexicon) throw InputError("encode_instance: abstract mode needs an entity lexicon");
      abs = abstractize(inst, *lexicon);
    }
    for (const Sentence& f : *abs.abstract_facts) out.fact_targets.push_back(vocab.encode(f));
    out.question_target = vocab.encode(*abs.abstract_question);
  }
  return out;
}

inline std::vector<EncodedInstance> encode_dataset(const std::vector<Instance>& instances, const Vocabulary& vocab,
                                                   const AnswerSpace& answers, AuxMode mode,
                                                   const EntityLexicon* lexicon = nullptr) {
  std::vector<EncodedInstance> out;
  out.reserve(instances.size());
  for (const Instance& inst : instances) out.push_back(encode_instance(inst, vocab, answers, mode, lexicon));
  return out;
}

}  // namespace nr::data
