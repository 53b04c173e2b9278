#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "neural_reasoner/data/instance.hpp"
#include "neural_reasoner/data/text.hpp"

namespace nr::data {

/// Name of the i-th variable (0-based): x, y, z, u, v, w, x7, x8, ...
inline std::string variable_name(std::size_t i) {
  static const char* const names[] = {"x", "y", "z", "u", "v", "w"};
  return i < 6 ? names[i] : "x" + std::to_string(i + 1);
}

/// Replaces entity phrases with variables. Variables are handed out in
/// order of first appearance and stay fixed for the lifetime of the object,
/// so one Abstractor should see one instance's sentences (facts first).
class Abstractor {
 public:
  explicit Abstractor(const EntityLexicon& lexicon) : lexicon_(&lexicon) {}

  Sentence apply(const Sentence& tokens) {
    Sentence out;
    for (std::size_t pos = 0; pos < tokens.size();) {
      if (auto m = lexicon_->match(tokens, pos)) {
        auto [it, inserted] = vars_.try_emplace(m->first, variable_name(vars_.size()));
        out.push_back(it->second);
        pos += m->second;
      } else {
        out.push_back(tokens[pos++]);
      }
    }
    return out;
  }

  std::size_t variable_count() const { return vars_.size(); }

 private:
  const EntityLexicon* lexicon_;
  std::map<std::string, std::string> vars_;
};

/// Abstract form as display text: tokens joined by spaces, without a final
/// period ("x is above y", "Is y to the right of the z ?").
inline std::string render_abstract(const Sentence& tokens) {
  Sentence t = tokens;
  if (!t.empty() && t.back() == ".") t.pop_back();
  return join(t, " ");
}

/// Copy of `inst` with abstract_facts / abstract_question filled in from its
/// original sentences.
inline Instance abstractize(const Instance& inst, const EntityLexicon& lexicon) {
  Instance out = inst;
  Abstractor abs(lexicon);
  std::vector<Sentence> facts;
  facts.reserve(inst.facts.size());
  for (const Sentence& f : inst.facts) facts.push_back(abs.apply(f));
  out.abstract_facts = std::move(facts);
  out.abstract_question = abs.apply(inst.question);
  return out;
}

}  // namespace nr::data
