#pragma once

// bAbI text format.
//
//   statement:  <id> <sentence>.
//   question:   <id> <question>?\t<answer>\t<supporting ids, space separated>
//
// Ids restart at 1 at the start of every story. Each question yields one
// Instance whose facts are all statements of its story seen so far.

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "neural_reasoner/data/instance.hpp"
#include "neural_reasoner/data/text.hpp"
#include "neural_reasoner/error.hpp"

namespace nr::data {

inline std::vector<Instance> parse_babi(std::istream& in) {
  std::vector<Instance> out;
  std::vector<Sentence> facts;
  std::map<std::size_t, std::size_t> fact_of_line;  // story line id -> 1-based fact index
  std::size_t prev_id = 0;
  std::size_t lineno = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;

    const auto space = line.find(' ');
    const std::string id_text = line.substr(0, space);
    if (space == std::string::npos || id_text.empty() ||
        !std::all_of(id_text.begin(), id_text.end(), [](unsigned char c) { return std::isdigit(c); })) {
      throw ParseError(lineno, "expected '<id> <text>'");
    }
    const std::size_t id = std::stoul(id_text);
    if (id == 1) {
      facts.clear();
      fact_of_line.clear();
    } else if (id != prev_id + 1) {
      throw ParseError(lineno, "line id " + std::to_string(id) + " does not follow " + std::to_string(prev_id));
    }
    prev_id = id;

    const std::string body = line.substr(space + 1);
    if (body.find('\t') == std::string::npos) {
      Sentence s = tokenize(body);
      if (s.empty()) throw ParseError(lineno, "empty statement");
      facts.push_back(std::move(s));
      fact_of_line[id] = facts.size();
      continue;
    }

    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      const auto tab = body.find('\t', start);
      fields.push_back(body.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() != 3) {
      throw ParseError(lineno, "question line needs 3 tab-separated fields, found " + std::to_string(fields.size()));
    }
    if (facts.empty()) throw ParseError(lineno, "question without preceding facts");

    Instance inst;
    inst.facts = facts;
    inst.question = tokenize(fields[0]);
    if (inst.question.empty()) throw ParseError(lineno, "empty question");
    inst.answer = normalize_answer(fields[1]);
    if (inst.answer.empty()) throw ParseError(lineno, "empty answer");
    std::istringstream ids(fields[2]);
    std::string tok;
    std::vector<std::size_t> supporting;
    while (ids >> tok) {
      if (!std::all_of(tok.begin(), tok.end(), [](unsigned char c) { return std::isdigit(c); })) {
        throw ParseError(lineno, "supporting id '" + tok + "' is not a number");
      }
      auto it = fact_of_line.find(std::stoul(tok));
      if (it == fact_of_line.end()) throw ParseError(lineno, "supporting id " + tok + " is not a statement of this story");
      supporting.push_back(it->second);
    }
    if (!supporting.empty()) inst.supporting = std::move(supporting);
    out.push_back(std::move(inst));
  }
  return out;
}

inline std::vector<Instance> parse_babi(const std::string& text) {
  std::istringstream in(text);
  return parse_babi(in);
}

/// Writes each instance as its own story in canonical form.
inline void write_babi(std::ostream& out, const std::vector<Instance>& instances) {
  for (const Instance& inst : instances) {
    std::size_t id = 1;
    for (const Sentence& f : inst.facts) out << id++ << ' ' << detokenize(f) << '\n';
    out << id << ' ' << detokenize(inst.question) << '\t' << inst.answer << '\t';
    if (inst.supporting) {
      for (std::size_t i = 0; i < inst.supporting->size(); ++i) out << (i ? " " : "") << (*inst.supporting)[i];
    }
    out << '\n';
  }
}

inline std::string to_babi(const std::vector<Instance>& instances) {
  std::ostringstream os;
  write_babi(os, instances);
  return os.str();
}

}  // namespace nr::data
