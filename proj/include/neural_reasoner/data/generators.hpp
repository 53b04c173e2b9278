#pragma once

// Synthetic Path Finding and Positional Reasoning episodes.
//
// Both generators grow a random tree of entities on the integer grid: each
// new entity is placed in a free cell next to an already placed one, and the
// placement is stated as a fact. Every fact is a unit offset, so coordinates
// are fully determined and the tree guarantees a unique path between any two
// entities.

#include <algorithm>
#include <array>
#include <cstddef>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "neural_reasoner/data/instance.hpp"
#include "neural_reasoner/data/text.hpp"
#include "neural_reasoner/error.hpp"

namespace nr::data {

struct Cell {
  int x = 0;
  int y = 0;
  auto operator<=>(const Cell&) const = default;
};

namespace detail {

struct Relation {
  const char* phrase;  // as it appears between "is" and the object
  Cell offset;         // subject - object
};

// Path Finding: "The A is north of the B."
inline constexpr std::array<Relation, 4> kCompass = {{
    {"north of", {0, 1}},
    {"south of", {0, -1}},
    {"east of", {1, 0}},
    {"west of", {-1, 0}},
}};

// Positional: "The A is above the B."
inline constexpr std::array<Relation, 4> kSpatial = {{
    {"above", {0, 1}},
    {"below", {0, -1}},
    {"to the right of", {1, 0}},
    {"to the left of", {-1, 0}},
}};

inline std::size_t opposite(std::size_t rel) { return rel ^ 1U; }

/// Edge of the placement tree: `subject` sits at `object` + relation offset.
struct Edge {
  std::size_t subject;
  std::size_t relation;
  std::size_t object;
};

struct Layout {
  std::vector<std::size_t> entity;  // index into the lexicon, per placed node
  std::vector<Cell> cell;
  std::vector<Edge> edges;
};

inline Layout grow_tree(std::size_t nodes, std::size_t lexicon_size, std::mt19937_64& rng,
                        const std::array<Relation, 4>& relations) {
  Layout lay;
  std::vector<std::size_t> order(lexicon_size);
  for (std::size_t i = 0; i < lexicon_size; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  lay.entity.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(nodes));
  lay.cell.push_back({0, 0});
  std::set<Cell> used = {{0, 0}};
  for (std::size_t n = 1; n < nodes; ++n) {
    std::vector<std::pair<std::size_t, std::size_t>> options;  // (anchor, relation)
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t r = 0; r < relations.size(); ++r) {
        const Cell c{lay.cell[a].x + relations[r].offset.x, lay.cell[a].y + relations[r].offset.y};
        if (!used.contains(c)) options.emplace_back(a, r);
      }
    const auto [anchor, rel] = options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)];
    const Cell c{lay.cell[anchor].x + relations[rel].offset.x, lay.cell[anchor].y + relations[rel].offset.y};
    lay.cell.push_back(c);
    used.insert(c);
    lay.edges.push_back({n, rel, anchor});
  }
  return lay;
}

/// Node path from `from` to `to` in the tree, as the list of edge indices
/// traversed, each paired with the node reached.
inline std::vector<std::pair<std::size_t, std::size_t>> tree_path(const Layout& lay, std::size_t from, std::size_t to) {
  const std::size_t n = lay.cell.size();
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(n);  // (neighbor, edge)
  for (std::size_t e = 0; e < lay.edges.size(); ++e) {
    adj[lay.edges[e].subject].emplace_back(lay.edges[e].object, e);
    adj[lay.edges[e].object].emplace_back(lay.edges[e].subject, e);
  }
  std::vector<std::pair<std::size_t, std::size_t>> parent(n, {n, 0});
  std::vector<std::size_t> stack = {from};
  parent[from] = {from, 0};
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    for (auto [v, e] : adj[u])
      if (parent[v].first == n) {
        parent[v] = {u, e};
        stack.push_back(v);
      }
  }
  std::vector<std::pair<std::size_t, std::size_t>> path;
  for (std::size_t v = to; v != from; v = parent[v].first) path.emplace_back(parent[v].second, v);
  std::reverse(path.begin(), path.end());
  return path;
}

inline Sentence fact_sentence(const std::string& subject, const char* relation, const std::string& object) {
  return tokenize("the " + subject + " is " + relation + " the " + object + " .");
}

/// States every edge, in either direction, shuffled. Returns the sentences
/// and the 1-based position of each edge's sentence.
inline std::pair<std::vector<Sentence>, std::vector<std::size_t>> state_edges(
    const Layout& lay, const std::vector<std::string>& names, std::mt19937_64& rng,
    const std::array<Relation, 4>& relations) {
  std::vector<std::size_t> order(lay.edges.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<Sentence> facts(order.size());
  std::vector<std::size_t> position(order.size());
  std::bernoulli_distribution flip(0.5);
  for (std::size_t slot = 0; slot < order.size(); ++slot) {
    const Edge& e = lay.edges[order[slot]];
    const std::string& subj = names[lay.entity[e.subject]];
    const std::string& obj = names[lay.entity[e.object]];
    facts[slot] = flip(rng) ? fact_sentence(obj, relations[opposite(e.relation)].phrase, subj)
                            : fact_sentence(subj, relations[e.relation].phrase, obj);
    position[order[slot]] = slot + 1;
  }
  return {std::move(facts), std::move(position)};
}

/// Ordered node pairs whose tree distance equals `hops`.
inline std::vector<std::pair<std::size_t, std::size_t>> pairs_at_distance(const Layout& lay, std::size_t hops) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t a = 0; a < lay.cell.size(); ++a)
    for (std::size_t b = 0; b < lay.cell.size(); ++b)
      if (a != b && tree_path(lay, a, b).size() == hops) out.emplace_back(a, b);
  return out;
}

}  // namespace detail

/// "How do you go from A to B?" over a random map of rooms.
inline Instance generate_path_finding(const TaskSpec& spec, std::mt19937_64& rng) {
  spec.validate();
  for (;;) {
    const auto lay = detail::grow_tree(spec.fact_count + 1, spec.entities.size(), rng, detail::kCompass);
    const auto pairs = detail::pairs_at_distance(lay, spec.hops);
    if (pairs.empty()) continue;
    const auto [from, to] = pairs[std::uniform_int_distribution<std::size_t>(0, pairs.size() - 1)(rng)];
    auto [facts, position] = detail::state_edges(lay, spec.entities, rng, detail::kCompass);

    Instance inst;
    inst.facts = std::move(facts);
    inst.question = tokenize("how do you go from the " + spec.entities[lay.entity[from]] + " to the " +
                             spec.entities[lay.entity[to]] + " ?");
    std::vector<std::string> steps;
    std::vector<std::size_t> supporting;
    std::size_t at = from;
    for (auto [edge, next] : detail::tree_path(lay, from, to)) {
      const Cell d{lay.cell[next].x - lay.cell[at].x, lay.cell[next].y - lay.cell[at].y};
      for (const auto& rel : detail::kCompass)
        if (rel.offset == d) steps.push_back(tokenize(rel.phrase).front());
      supporting.push_back(position[edge]);
      at = next;
    }
    inst.answer = join(steps, ",");
    inst.supporting = std::move(supporting);
    return inst;
  }
}

/// "Is A <relation> B?" over a random arrangement of shapes; half the
/// answers are yes.
inline Instance generate_positional(const TaskSpec& spec, std::mt19937_64& rng) {
  spec.validate();
  for (;;) {
    const auto lay = detail::grow_tree(spec.fact_count + 1, spec.entities.size(), rng, detail::kSpatial);
    const auto pairs = detail::pairs_at_distance(lay, spec.hops);
    if (pairs.empty()) continue;
    const auto [a, b] = pairs[std::uniform_int_distribution<std::size_t>(0, pairs.size() - 1)(rng)];
    const bool want_yes = std::bernoulli_distribution(0.5)(rng);
    const Cell d{lay.cell[a].x - lay.cell[b].x, lay.cell[a].y - lay.cell[b].y};
    std::vector<std::size_t> candidates;
    for (std::size_t r = 0; r < detail::kSpatial.size(); ++r) {
      const Cell o = detail::kSpatial[r].offset;
      const bool holds = (o.x != 0 && o.x * d.x > 0) || (o.y != 0 && o.y * d.y > 0);
      if (holds == want_yes) candidates.push_back(r);
    }
    if (candidates.empty()) continue;
    const std::size_t rel = candidates[std::uniform_int_distribution<std::size_t>(0, candidates.size() - 1)(rng)];
    auto [facts, position] = detail::state_edges(lay, spec.entities, rng, detail::kSpatial);

    Instance inst;
    inst.facts = std::move(facts);
    inst.question = tokenize("is the " + spec.entities[lay.entity[a]] + " " + detail::kSpatial[rel].phrase + " the " +
                             spec.entities[lay.entity[b]] + " ?");
    inst.answer = want_yes ? "yes" : "no";
    std::vector<std::size_t> supporting;
    for (auto [edge, next] : detail::tree_path(lay, a, b)) supporting.push_back(position[edge]);
    std::sort(supporting.begin(), supporting.end());
    inst.supporting = std::move(supporting);
    return inst;
  }
}

inline Instance generate(const TaskSpec& spec, std::mt19937_64& rng) {
  return spec.kind == TaskKind::path_finding ? generate_path_finding(spec, rng) : generate_positional(spec, rng);
}

/// `n` instances drawn from the stream seeded by spec.seed.
inline std::vector<Instance> generate(const TaskSpec& spec, std::size_t n) {
  std::mt19937_64 rng(spec.seed);
  std::vector<Instance> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(generate(spec, rng));
  return out;
}

}  // namespace nr::data
