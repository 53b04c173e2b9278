#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "helpers.hpp"
#include "neural_reasoner/answerer.hpp"
#include "neural_reasoner/grad_check.hpp"

namespace nr {
namespace {

using testing::random_tensor;
using testing::to_vector;

AnswererParams with_match(std::size_t q_dim, std::size_t class_dim, std::uint64_t seed) {
  Rng rng(seed);
  AnswererParams p = AnswererParams::random(3, q_dim, rng, 0.5);
  p.match = MatchParams::random(q_dim, class_dim, 6, rng, 0.5);
  return p;
}

TEST(Classify, ZeroWeightsGiveUniformDistribution) {
  AnswererParams p{Tensor::zeros({5, 4}, true), std::nullopt};
  Tape tape;
  for (double v : to_vector(classify(tape, p, Tensor::vec({0.3, -1.0, 2.0, 0.1})))) EXPECT_DOUBLE_EQ(v, 0.2);
}

TEST(Classify, LogitsLnThreeAndZero) {
  AnswererParams p{Tensor::from({2, 1}, {std::log(3.0), 0.0}, true), std::nullopt};
  Tape tape;
  Tensor probs = classify(tape, p, Tensor::vec({1.0}));
  EXPECT_NEAR(probs[0], 0.75, 1e-15);
  EXPECT_NEAR(probs[1], 0.25, 1e-15);
}

TEST(Classify, DistributionSumsToOne) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    AnswererParams p{random_tensor({12, 8}, rng, true, 3.0), std::nullopt};
    Tape tape;
    double s = 0.0;
    for (double v : to_vector(classify(tape, p, random_tensor({8}, rng, false)))) s += v;
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(Classify, SizeMismatchThrows) {
  AnswererParams p{Tensor::zeros({2, 3}, true), std::nullopt};
  Tape tape;
  EXPECT_THROW(classify(tape, p, Tensor::vec({1.0, 2.0})), DimensionError);
}

TEST(Classify, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(9);
  AnswererParams p{random_tensor({4, 5}, rng), std::nullopt};
  Tensor q = random_tensor({5}, rng);
  auto f = [&](Tape& t) { return softmax_cross_entropy(t, class_logits(t, p, q), 2); };
  EXPECT_LT(grad_check(f, p.W_softmax), 1e-6);
  EXPECT_LT(grad_check(f, q), 1e-6);
}

TEST(Predict, TiesGoToLowestIndex) {
  EXPECT_EQ(predict(Tensor::vec({0.2, 0.4, 0.4})), 1U);
  AnswererParams p{Tensor::zeros({4, 2}, true), std::nullopt};
  Tape tape;
  EXPECT_EQ(predict(classify(tape, p, Tensor::vec({1.0, 1.0}))), 0U);
}

TEST(ScoreDynamic, IdenticalCandidatesScoreIdentically) {
  AnswererParams p = with_match(4, 3, 1);
  Tensor q = Tensor::vec({0.1, -0.2, 0.3, 0.4});
  const std::vector<Tensor> cands = {Tensor::vec({0.5, 0.5, -0.1}), Tensor::vec({0.5, 0.5, -0.1})};
  Tape tape;
  Tensor s = score_dynamic(tape, p, q, cands);
  EXPECT_EQ(s[0], s[1]);
  EXPECT_EQ(predict(s), 0U);
}

TEST(ScoreDynamic, SingleCandidateIsChosen) {
  AnswererParams p = with_match(4, 3, 2);
  const std::vector<Tensor> cands = {Tensor::vec({0.2, -0.3, 0.9})};
  Tape tape;
  Tensor s = score_dynamic(tape, p, Tensor::vec({1, 2, 3, 4}), cands);
  EXPECT_EQ(s.size(), 1U);
  EXPECT_EQ(predict(s), 0U);
}

TEST(ScoreDynamic, ZeroNetworkTiesEveryCandidate) {
  AnswererParams p = with_match(2, 2, 3);
  for (Tensor t : {p.match->hidden.weight, p.match->hidden.bias, p.match->out.weight, p.match->out.bias})
    for (double& v : t.values()) v = 0.0;
  const std::vector<Tensor> cands = {Tensor::vec({1, 0}), Tensor::vec({0, 1}), Tensor::vec({-1, 2})};
  Tape tape;
  Tensor s = score_dynamic(tape, p, Tensor::vec({0.5, 0.5}), cands);
  EXPECT_EQ(to_vector(s), (std::vector<double>{0, 0, 0}));
  EXPECT_EQ(predict(s), 0U);
}

TEST(ScoreDynamic, PermutingCandidatesPermutesScores) {
  AnswererParams p = with_match(4, 3, 4);
  std::mt19937_64 rng(5);
  Tensor q = random_tensor({4}, rng, false);
  std::vector<Tensor> cands;
  for (int i = 0; i < 5; ++i) cands.push_back(random_tensor({3}, rng, false));
  const std::vector<std::size_t> perm = {3, 0, 4, 1, 2};
  std::vector<Tensor> permuted;
  for (std::size_t i : perm) permuted.push_back(cands[i]);
  Tape tape;
  Tensor a = score_dynamic(tape, p, q, cands);
  Tensor b = score_dynamic(tape, p, q, permuted);
  for (std::size_t i = 0; i < perm.size(); ++i) EXPECT_EQ(b[i], a[perm[i]]);
}

TEST(ScoreDynamic, Errors) {
  Tape tape;
  AnswererParams plain{Tensor::zeros({2, 2}, true), std::nullopt};
  const std::vector<Tensor> cands = {Tensor::vec({1, 0})};
  EXPECT_THROW(score_dynamic(tape, plain, Tensor::vec({1, 1}), cands), InputError);
  AnswererParams p = with_match(2, 2, 6);
  EXPECT_THROW(score_dynamic(tape, p, Tensor::vec({1, 1}), std::vector<Tensor>{}), InputError);
}

TEST(ScoreDynamic, GradientMatchesFiniteDifferences) {
  AnswererParams p = with_match(3, 2, 7);
  std::mt19937_64 rng(8);
  Tensor q = random_tensor({3}, rng);
  const std::vector<Tensor> cands = {random_tensor({2}, rng), random_tensor({2}, rng), random_tensor({2}, rng)};
  auto f = [&](Tape& t) { return softmax_cross_entropy(t, score_dynamic(t, p, q, cands), 1); };
  EXPECT_LT(grad_check(f, p.match->hidden.weight), 1e-6);
  EXPECT_LT(grad_check(f, p.match->out.weight), 1e-6);
  EXPECT_LT(grad_check(f, q), 1e-6);
  EXPECT_LT(grad_check(f, cands[2]), 1e-6);
}

TEST(AnswerSpace, IndexesInInsertionOrder) {
  AnswerSpace s;
  EXPECT_TRUE(s.empty());
  EXPECT_EQ(s.add("yes"), 0U);
  EXPECT_EQ(s.add("no"), 1U);
  EXPECT_EQ(s.add("yes"), 0U);
  EXPECT_EQ(s.size(), 2U);
  EXPECT_EQ(s.label(1), "no");
  EXPECT_EQ(s.find("maybe"), std::nullopt);
}

}  // namespace
}  // namespace nr
