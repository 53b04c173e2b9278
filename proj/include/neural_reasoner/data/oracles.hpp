#pragma once

// Brute-force answer oracles. They read only the instance text, so they
// check the generators without sharing any of their code.

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <queue>
#include <tuple>
#include <string>
#include <vector>

#include "neural_reasoner/data/instance.hpp"
#include "neural_reasoner/data/text.hpp"

namespace nr::data {

namespace detail {

inline std::optional<std::size_t> find_token(const Sentence& s, const std::string& tok, std::size_t from = 0) {
  for (std::size_t i = from; i < s.size(); ++i)
    if (s[i] == tok) return i;
  return std::nullopt;
}

/// Tokens [b, e) joined by spaces, with one leading "the" dropped.
inline std::string noun_phrase(const Sentence& s, std::size_t b, std::size_t e) {
  if (b < e && s[b] == "the") ++b;
  if (b >= e) return {};
  return join(Sentence(s.begin() + static_cast<std::ptrdiff_t>(b), s.begin() + static_cast<std::ptrdiff_t>(e)), " ");
}

struct Step {
  int dx = 0;
  int dy = 0;
};

inline std::optional<Step> compass_step(const std::string& w) {
  if (w == "north") return Step{0, 1};
  if (w == "south") return Step{0, -1};
  if (w == "east") return Step{1, 0};
  if (w == "west") return Step{-1, 0};
  return std::nullopt;
}

inline const char* compass_name(int dx, int dy) {
  if (dx == 0 && dy == 1) return "north";
  if (dx == 0 && dy == -1) return "south";
  if (dx == 1 && dy == 0) return "east";
  return "west";
}

/// Finds a spatial relation in `s` starting the search at `from`. Returns
/// (start, length, unit offset of subject relative to object).
inline std::optional<std::tuple<std::size_t, std::size_t, Step>> spatial_relation(const Sentence& s,
                                                                                   std::size_t from) {
  for (std::size_t i = from; i < s.size(); ++i) {
    if (s[i] == "above") return std::make_tuple(i, std::size_t{1}, Step{0, 1});
    if (s[i] == "below") return std::make_tuple(i, std::size_t{1}, Step{0, -1});
    if (s[i] == "to" && i + 3 < s.size() && s[i + 1] == "the" && s[i + 3] == "of") {
      if (s[i + 2] == "left") return std::make_tuple(i, std::size_t{4}, Step{-1, 0});
      if (s[i + 2] == "right") return std::make_tuple(i, std::size_t{4}, Step{1, 0});
    }
  }
  return std::nullopt;
}

}  // namespace detail

/// Shortest route by breadth-first search over the stated adjacencies.
/// Returns the comma-joined directions, or nullopt when the text cannot be
/// read or the shortest route is not unique.
inline std::optional<std::string> path_finding_oracle(const Instance& inst) {
  struct Link {
    std::string to;
    int dx, dy;
  };
  std::map<std::string, std::vector<Link>> graph;
  for (const Sentence& f : inst.facts) {
    // the A is <dir> of the B .
    const auto is = detail::find_token(f, "is");
    if (!is || *is + 2 >= f.size() || f[*is + 2] != "of") return std::nullopt;
    const auto step = detail::compass_step(f[*is + 1]);
    if (!step) return std::nullopt;
    const std::size_t end = f.back() == "." ? f.size() - 1 : f.size();
    const std::string a = detail::noun_phrase(f, 0, *is);
    const std::string b = detail::noun_phrase(f, *is + 3, end);
    if (a.empty() || b.empty()) return std::nullopt;
    // a = b + step: walking b -> a goes `step`.
    graph[b].push_back({a, step->dx, step->dy});
    graph[a].push_back({b, -step->dx, -step->dy});
  }
  // how do you go from the A to the B ?
  const Sentence& q = inst.question;
  const auto from_at = detail::find_token(q, "from");
  if (!from_at) return std::nullopt;
  const auto to_at = detail::find_token(q, "to", *from_at + 1);
  if (!to_at) return std::nullopt;
  const std::size_t end = q.back() == "?" ? q.size() - 1 : q.size();
  const std::string src = detail::noun_phrase(q, *from_at + 1, *to_at);
  const std::string dst = detail::noun_phrase(q, *to_at + 1, end);
  if (!graph.contains(src) || !graph.contains(dst) || src == dst) return std::nullopt;

  std::map<std::string, std::size_t> dist, count;
  std::map<std::string, std::pair<std::string, std::string>> parent;  // node -> (prev, direction)
  std::queue<std::string> frontier;
  dist[src] = 0;
  count[src] = 1;
  frontier.push(src);
  while (!frontier.empty()) {
    const std::string u = frontier.front();
    frontier.pop();
    for (const Link& l : graph[u]) {
      auto it = dist.find(l.to);
      if (it == dist.end()) {
        dist[l.to] = dist[u] + 1;
        count[l.to] = count[u];
        parent[l.to] = {u, detail::compass_name(l.dx, l.dy)};
        frontier.push(l.to);
      } else if (it->second == dist[u] + 1) {
        count[l.to] += count[u];
      }
    }
  }
  if (!dist.contains(dst) || count[dst] != 1) return std::nullopt;
  std::vector<std::string> steps;
  for (std::string v = dst; v != src; v = parent[v].first) steps.push_back(parent[v].second);
  std::reverse(steps.begin(), steps.end());
  return join(steps, ",");
}

/// Assigns coordinates by propagating the unit offsets stated in the facts,
/// then evaluates the question's predicate. Returns "yes"/"no", or nullopt
/// when the facts are unreadable, contradictory, or do not connect the two
/// entities asked about.
inline std::optional<std::string> positional_oracle(const Instance& inst) {
  struct Link {
    std::string to;
    detail::Step offset;  // coord(to) - coord(from)
  };
  std::map<std::string, std::vector<Link>> graph;
  for (const Sentence& f : inst.facts) {
    const auto is = detail::find_token(f, "is");
    if (!is) return std::nullopt;
    const auto rel = detail::spatial_relation(f, *is + 1);
    if (!rel || std::get<0>(*rel) != *is + 1) return std::nullopt;
    const std::size_t end = f.back() == "." ? f.size() - 1 : f.size();
    const std::string a = detail::noun_phrase(f, 0, *is);
    const std::string b = detail::noun_phrase(f, std::get<0>(*rel) + std::get<1>(*rel), end);
    if (a.empty() || b.empty()) return std::nullopt;
    const detail::Step s = std::get<2>(*rel);  // a = b + s
    graph[b].push_back({a, s});
    graph[a].push_back({b, {-s.dx, -s.dy}});
  }
  // is the A <relation> the B ?
  const Sentence& q = inst.question;
  if (q.empty() || q.front() != "is") return std::nullopt;
  const auto rel = detail::spatial_relation(q, 1);
  if (!rel) return std::nullopt;
  const std::size_t end = q.back() == "?" ? q.size() - 1 : q.size();
  const std::string a = detail::noun_phrase(q, 1, std::get<0>(*rel));
  const std::string b = detail::noun_phrase(q, std::get<0>(*rel) + std::get<1>(*rel), end);
  if (!graph.contains(a) || !graph.contains(b)) return std::nullopt;

  std::map<std::string, std::pair<int, int>> coord;
  std::queue<std::string> frontier;
  coord[b] = {0, 0};
  frontier.push(b);
  while (!frontier.empty()) {
    const std::string u = frontier.front();
    frontier.pop();
    for (const Link& l : graph[u]) {
      const std::pair<int, int> c{coord[u].first + l.offset.dx, coord[u].second + l.offset.dy};
      auto it = coord.find(l.to);
      if (it == coord.end()) {
        coord[l.to] = c;
        frontier.push(l.to);
      } else if (it->second != c) {
        return std::nullopt;
      }
    }
  }
  if (!coord.contains(a)) return std::nullopt;
  const auto [ax, ay] = coord[a];
  const auto [bx, by] = coord[b];
  const detail::Step want = std::get<2>(*rel);
  const bool holds = want.dx != 0 ? (ax - bx) * want.dx > 0 : (ay - by) * want.dy > 0;
  return holds ? "yes" : "no";
}

inline std::optional<std::string> oracle_answer(TaskKind kind, const Instance& inst) {
  return kind == TaskKind::path_finding ? path_finding_oracle(inst) : positional_oracle(inst);
}

}  // namespace nr::data
