#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "neural_reasoner/data/text.hpp"
#include "neural_reasoner/error.hpp"

namespace nr::data {

using Sentence = std::vector<std::string>;

/// One question with the facts preceding it. Tokens are lowercase.
struct Instance {
  std::vector<Sentence> facts;
  Sentence question;
  std::string answer;
  /// 1-based indices into `facts`.
  std::optional<std::vector<std::size_t>> supporting;
  std::optional<std::vector<Sentence>> abstract_facts;
  std::optional<Sentence> abstract_question;

  bool operator==(const Instance&) const = default;
};

enum class TaskKind { path_finding, positional };

inline const char* to_string(TaskKind k) { return k == TaskKind::path_finding ? "path_finding" : "positional"; }

inline TaskKind parse_task_kind(const std::string& s) {
  if (s == "path_finding" || s == "path-finding") return TaskKind::path_finding;
  if (s == "positional") return TaskKind::positional;
  throw InputError("unknown task '" + s + "' (expected path_finding or positional)");
}

inline const std::vector<std::string>& default_entities(TaskKind kind) {
  static const std::vector<std::string> locations = {"hallway", "office", "kitchen", "garden", "bedroom", "bathroom"};
  static const std::vector<std::string> shapes = {"triangle",   "red square", "blue square",
                                                  "pink rectangle", "red sphere", "yellow square"};
  return kind == TaskKind::path_finding ? locations : shapes;
}

/// Generator parameters for one synthetic task.
struct TaskSpec {
  TaskKind kind = TaskKind::positional;
  std::vector<std::string> entities;
  /// Facts per instance; the ones not on the answer's path are distractors.
  std::size_t fact_count = 2;
  /// Facts needed to answer (path length between the two questioned entities).
  std::size_t hops = 2;
  std::uint64_t seed = 1;

  static TaskSpec defaults(TaskKind kind, std::uint64_t seed) {
    TaskSpec s;
    s.kind = kind;
    s.entities = default_entities(kind);
    s.fact_count = kind == TaskKind::path_finding ? 5 : 2;
    s.hops = 2;
    s.seed = seed;
    return s;
  }

  std::size_t distractor_count() const { return fact_count - hops; }

  void validate() const {
    if (hops < 1) throw InputError("task spec: hops must be >= 1");
    if (fact_count < hops) throw InputError("task spec: fact count must be >= hops");
    if (entities.size() < 2) throw InputError("task spec: at least two entities are required");
    if (fact_count + 1 > entities.size()) {
      throw InputError("task spec: " + std::to_string(fact_count) + " facts need " + std::to_string(fact_count + 1) +
                       " entities, lexicon has " + std::to_string(entities.size()));
    }
  }
};

/// Surface phrases that denote entities, each mapped to an entity key.
class EntityLexicon {
 public:
  void add(const std::string& phrase, const std::string& entity) { phrases_[tokenize(phrase)] = entity; }

  /// For every entity name registers "the <name>" and "<name>"; a head noun
  /// shared by no other entity ("rectangle" for "pink rectangle") is
  /// registered as a bare alias too.
  static EntityLexicon for_entities(const std::vector<std::string>& names) {
    EntityLexicon lex;
    std::map<std::string, std::vector<std::string>> by_head;
    for (const auto& name : names) {
      lex.add("the " + name, name);
      lex.add(name, name);
      by_head[tokenize(name).back()].push_back(name);
    }
    for (const auto& [head, owners] : by_head)
      if (owners.size() == 1) lex.add(head, owners.front());
    return lex;
  }

  /// Entity denoted by tokens[pos...] using the longest matching phrase, and
  /// the phrase length. Matching ignores case.
  std::optional<std::pair<std::string, std::size_t>> match(const Sentence& tokens, std::size_t pos) const {
    std::optional<std::pair<std::string, std::size_t>> best;
    for (const auto& [phrase, entity] : phrases_) {
      if (pos + phrase.size() > tokens.size()) continue;
      if (best && phrase.size() <= best->second) continue;
      bool ok = true;
      for (std::size_t i = 0; i < phrase.size() && ok; ++i) ok = to_lower(tokens[pos + i]) == phrase[i];
      if (ok) best = std::make_pair(entity, phrase.size());
    }
    return best;
  }

  bool empty() const { return phrases_.empty(); }

 private:
  std::map<Sentence, std::string> phrases_;
};

/// Canonical answer form: lowercase, comma-joined without spaces, compass
/// abbreviations expanded ("s, e" -> "south,east").
inline std::string normalize_answer(const std::string& raw) {
  std::vector<std::string> parts;
  std::string cur;
  auto flush = [&]() {
    std::string p = to_lower(trim(cur));
    if (p == "n") p = "north";
    else if (p == "s") p = "south";
    else if (p == "e") p = "east";
    else if (p == "w") p = "west";
    parts.push_back(p);
    cur.clear();
  };
  for (char c : raw) {
    if (c == ',') flush();
    else cur += c;
  }
  flush();
  return join(parts, ",");
}

}  // namespace nr::data
