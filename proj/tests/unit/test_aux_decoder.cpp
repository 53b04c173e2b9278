#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "helpers.hpp"
#include "neural_reasoner/aux_decoder.hpp"
#include "neural_reasoner/data/corpus.hpp"
#include "neural_reasoner/data/text.hpp"
#include "neural_reasoner/grad_check.hpp"

namespace nr {
namespace {

using testing::random_tensor;

DecoderParams zero_decoder(std::size_t vocab, std::size_t embed, std::size_t hidden) {
  DecoderParams p;
  p.embedding = Tensor::zeros({embed, vocab}, true);
  p.gru = GruWeights::zeros(hidden, embed);
  p.W_out = Tensor::zeros({vocab, hidden}, true);
  return p;
}

DecoderParams random_decoder(std::size_t vocab, std::size_t embed, std::size_t hidden, std::uint64_t seed,
                             double range = 0.3) {
  Rng rng(seed);
  Tensor embedding = uniform_param({embed, vocab}, rng, range);
  return DecoderParams::random(embedding, hidden, rng, range);
}

TEST(DecodeNll, ZeroWeightsGiveUniformPerTokenLoss) {
  // 4 ordinary tokens + 4 reserved: every prediction is uniform over 8.
  const DecoderParams p = zero_decoder(8, 3, 5);
  const std::vector<TokenId> target = {4, 5, 6, 7, 4};
  Tape tape;
  Tensor nll = decode_nll(tape, p, Tensor::vec({0.3, -0.1, 0.2, 0.9, -0.5}), target);
  EXPECT_NEAR(nll.item(), 6.0 * std::log(8.0), 1e-12);
}

TEST(DecodeNll, IsNonNegative) {
  std::mt19937_64 rng(3);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const DecoderParams p = random_decoder(9, 4, 6, seed, 2.0);
    const std::vector<TokenId> target = {4, 8, 5, 5};
    Tape tape(false);
    EXPECT_GE(decode_nll(tape, p, random_tensor({6}, rng, false), target).item(), 0.0);
  }
}

TEST(DecodeNll, GradientMatchesFiniteDifferences) {
  const DecoderParams p = random_decoder(9, 4, 6, 11);
  Rng rng(4);
  Tensor context = random_tensor({6}, rng, true, 0.8);
  const std::vector<TokenId> target = {4, 7, 8, 5};
  auto f = [&](Tape& t) { return decode_nll(t, p, context, target); };
  EXPECT_LT(grad_check(f, context), 1e-6);
  EXPECT_LT(grad_check(f, p.W_out), 1e-6);
  EXPECT_LT(grad_check(f, p.gru.U_hh), 1e-6);
  EXPECT_LT(grad_check(f, p.embedding), 1e-6);
}

TEST(DecodeNll, Errors) {
  const DecoderParams p = zero_decoder(8, 2, 2);
  Tape tape;
  EXPECT_THROW(decode_nll(tape, p, Tensor::zeros({2}), std::vector<TokenId>{}), InputError);
  EXPECT_THROW(decode_nll(tape, p, Tensor::zeros({2}), std::vector<TokenId>{4, 8}), InputError);
}

TEST(RecoveringLoss, NoFactsEqualsQuestionLoss) {
  const DecoderParams p = random_decoder(10, 4, 5, 2);
  Rng rng(1);
  Tensor q0 = random_tensor({5}, rng, false);
  const std::vector<TokenId> question = {4, 6, 9};
  Tape tape(false);
  RecoveringLoss rec = recovering_loss(tape, p, p, q0, std::vector<Tensor>{}, question,
                                       std::vector<std::vector<TokenId>>{});
  EXPECT_EQ(rec.total.item(), decode_nll(tape, p, q0, question).item());
  EXPECT_EQ(rec.tokens, 4U);
}

TEST(RecoveringLoss, EqualsSentenceBySentenceSum) {
  const DecoderParams qd = random_decoder(10, 4, 5, 3);
  DecoderParams fd = qd;
  Rng rng(7);
  fd.gru = GruWeights::random(5, 4, rng, 0.3);
  fd.W_out = uniform_param({10, 5}, rng, 0.3);
  Tensor q0 = random_tensor({5}, rng, false);
  const std::vector<Tensor> facts = {random_tensor({5}, rng, false), random_tensor({5}, rng, false)};
  const std::vector<TokenId> question = {4, 5, 6};
  const std::vector<std::vector<TokenId>> fact_targets = {{7, 8}, {9, 4, 5, 6}};

  Tape tape(false);
  RecoveringLoss rec = recovering_loss(tape, qd, fd, q0, facts, question, fact_targets);
  const double expected = decode_nll(tape, fd, facts[0], fact_targets[0]).item() +
                          decode_nll(tape, fd, facts[1], fact_targets[1]).item() +
                          decode_nll(tape, qd, q0, question).item();
  EXPECT_NEAR(rec.total.item(), expected, 1e-12);
  EXPECT_EQ(rec.tokens, 3U + 5U + 4U);
}

TEST(RecoveringLoss, MismatchedFactCountThrows) {
  const DecoderParams p = zero_decoder(8, 2, 2);
  Tape tape;
  const std::vector<Tensor> facts = {Tensor::zeros({2})};
  EXPECT_THROW(recovering_loss(tape, p, p, Tensor::zeros({2}), facts, std::vector<TokenId>{4},
                               std::vector<std::vector<TokenId>>{}),
               InputError);
}

TEST(AuxMode, AbstractChangesOnlyTheTargets) {
  data::Instance inst;
  inst.facts = {data::tokenize("The triangle is above the pink rectangle."),
                data::tokenize("The blue square is to the left of the triangle.")};
  inst.question = data::tokenize("Is the pink rectangle to the right of the blue square?");
  inst.answer = "yes";
  const auto lexicon = data::EntityLexicon::for_entities({"triangle", "pink rectangle", "blue square"});
  const data::Instance abs = data::abstractize(inst, lexicon);
  const Vocabulary vocab = data::build_vocab({abs}, AuxMode::abstract);
  const AnswerSpace answers({"no", "yes"});

  const auto orig = data::encode_instance(abs, vocab, answers, AuxMode::original);
  const auto abst = data::encode_instance(abs, vocab, answers, AuxMode::abstract);
  EXPECT_EQ(orig.facts, abst.facts);
  EXPECT_EQ(orig.question, abst.question);
  EXPECT_EQ(orig.answer, abst.answer);
  EXPECT_EQ(orig.fact_targets, orig.facts);
  EXPECT_NE(abst.fact_targets, orig.fact_targets);
  EXPECT_EQ(abst.question_target, vocab.encode(data::tokenize("is y to the right of z ?")));

  const auto none = data::encode_instance(abs, vocab, answers, AuxMode::none);
  EXPECT_TRUE(none.fact_targets.empty());
  EXPECT_TRUE(none.question_target.empty());
}

TEST(AuxMode, ParsesNames) {
  EXPECT_EQ(parse_aux_mode("none"), AuxMode::none);
  EXPECT_EQ(parse_aux_mode("original"), AuxMode::original);
  EXPECT_EQ(parse_aux_mode("abstract"), AuxMode::abstract);
  EXPECT_THROW(parse_aux_mode("both"), InputError);
}

}  // namespace
}  // namespace nr
