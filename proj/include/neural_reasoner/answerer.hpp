#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "neural_reasoner/error.hpp"
#include "neural_reasoner/init.hpp"
#include "neural_reasoner/ops.hpp"
#include "neural_reasoner/reasoner.hpp"
#include "neural_reasoner/tensor.hpp"

namespace nr {

/// Ordered set of answer strings.
class AnswerSpace {
 public:
  AnswerSpace() = default;

  explicit AnswerSpace(std::vector<std::string> classes) {
    for (auto& c : classes) add(c);
  }

  std::size_t add(const std::string& answer) {
    auto [it, inserted] = index_.try_emplace(answer, classes_.size());
    if (inserted) classes_.push_back(answer);
    return it->second;
  }

  std::optional<std::size_t> find(const std::string& answer) const {
    auto it = index_.find(answer);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& label(std::size_t i) const { return classes_.at(i); }
  std::size_t size() const noexcept { return classes_.size(); }
  bool empty() const noexcept { return classes_.empty(); }
  const std::vector<std::string>& classes() const noexcept { return classes_; }

 private:
  std::vector<std::string> classes_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Scores a (question, candidate embedding) pair with a one-hidden-layer
/// tanh network: score = v . tanh(W [q; w_z] + b) + c.
struct MatchParams {
  DenseLayer hidden;
  DenseLayer out;  // [1 x hidden]

  static MatchParams random(std::size_t q_dim, std::size_t class_dim, std::size_t hidden_dim, Rng& rng,
                            double range) {
    return {DenseLayer::random(hidden_dim, q_dim + class_dim, rng, range), DenseLayer::random(1, hidden_dim, rng, range)};
  }

  void collect(ParamList& list, const std::string& prefix) const {
    hidden.collect(list, prefix + ".hidden");
    out.collect(list, prefix + ".out");
  }
};

struct AnswererParams {
  Tensor W_softmax;  // [num_classes x D_L]
  std::optional<MatchParams> match;

  static AnswererParams random(std::size_t num_classes, std::size_t q_dim, Rng& rng, double range) {
    return {uniform_param({num_classes, q_dim}, rng, range), std::nullopt};
  }

  void collect(ParamList& list, const std::string& prefix) const {
    list.push_back({prefix + ".W_softmax", W_softmax});
    if (match) match->collect(list, prefix + ".match");
  }
};

/// Pre-softmax class scores.
inline Tensor class_logits(Tape& tape, const AnswererParams& params, const Tensor& q_final) {
  if (q_final.rank() != 1 || q_final.dim(0) != params.W_softmax.dim(1)) {
    throw DimensionError("classify: question vector " + shape_str(q_final.shape()) + " does not match W_softmax " +
                         shape_str(params.W_softmax.shape()));
  }
  return matvec(tape, params.W_softmax, q_final);
}

/// Probability over the answer classes.
inline Tensor classify(Tape& tape, const AnswererParams& params, const Tensor& q_final) {
  return softmax(tape, class_logits(tape, params, q_final));
}

/// One score per candidate embedding, as a vector [num_candidates].
inline Tensor score_dynamic(Tape& tape, const AnswererParams& params, const Tensor& q_final,
                            std::span<const Tensor> candidates) {
  if (!params.match) throw InputError("score_dynamic: answerer has no match network");
  if (candidates.empty()) throw InputError("score_dynamic: empty candidate list");
  const MatchParams& m = *params.match;
  std::vector<Tensor> scores;
  scores.reserve(candidates.size());
  for (const Tensor& w : candidates) {
    Tensor h = tanh(tape, m.hidden.affine(tape, concat(tape, q_final, w)));
    scores.push_back(m.out.affine(tape, h));
  }
  return concat(tape, scores);
}

/// Index of the winning answer; ties go to the lowest index.
inline std::size_t predict(const Tensor& scores) { return argmax(scores.values()); }

}  // namespace nr
