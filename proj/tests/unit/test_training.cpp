#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "neural_reasoner/data/corpus.hpp"
#include "neural_reasoner/data/generators.hpp"
#include "neural_reasoner/grad_check.hpp"
#include "neural_reasoner/training.hpp"

namespace nr {
namespace {

struct Dataset {
  std::vector<EncodedInstance> train, test;
  std::size_t vocab_size = 0, num_classes = 0;
};

Dataset positional(std::size_t n_train, std::size_t n_test, AuxMode aux, std::uint64_t seed = 1) {
  const auto raw_train = data::generate(data::TaskSpec::defaults(data::TaskKind::positional, seed), n_train);
  const auto raw_test = data::generate(data::TaskSpec::defaults(data::TaskKind::positional, seed + 1000), n_test);
  const Vocabulary vocab = data::build_vocab(raw_train, aux);
  const AnswerSpace answers = data::build_answer_space(raw_train);
  Dataset d;
  d.train = data::encode_dataset(raw_train, vocab, answers, aux);
  d.test = n_test ? data::encode_dataset(raw_test, vocab, answers, aux) : std::vector<EncodedInstance>{};
  d.vocab_size = vocab.size();
  d.num_classes = answers.size();
  return d;
}

ModelConfig small_config(const Dataset& d, AuxMode aux, std::size_t embed = 6, std::size_t hidden = 7) {
  ModelConfig c;
  c.vocab_size = d.vocab_size;
  c.num_classes = d.num_classes;
  c.embed_dim = embed;
  c.hidden = hidden;
  c.aux = aux;
  return c;
}

std::vector<std::vector<double>> snapshot(const ParamList& params) {
  std::vector<std::vector<double>> out;
  for (const auto& p : params) out.emplace_back(p.tensor.values().begin(), p.tensor.values().end());
  return out;
}

TEST(CombinedLoss, AlphaEndpointsAndMidpoint) {
  const Dataset d = positional(5, 0, AuxMode::original);
  NeuralReasoner model(small_config(d, AuxMode::original), 3);
  const EncodedInstance& inst = d.train[0];

  Tape t0(false), t1(false), th(false);
  LossBreakdown a0 = combined_loss(t0, model, inst, 0.0);
  LossBreakdown a1 = combined_loss(t1, model, inst, 1.0);
  LossBreakdown ah = combined_loss(th, model, inst, 0.5);

  Tape ref(false);
  const Encodings enc = model.encode_inputs(ref, inst);
  const double reasoning = softmax_cross_entropy(ref, model.answer_logits(ref, enc), *inst.answer).item();
  const RecoveringLoss rec = model.recovering(ref, enc, inst);
  const double recovering = rec.total.item() / static_cast<double>(rec.tokens);

  EXPECT_EQ(a0.total.item(), reasoning);
  EXPECT_EQ(a1.total.item(), recovering);
  EXPECT_NEAR(ah.total.item(), 0.5 * reasoning + 0.5 * recovering, 1e-14);
  EXPECT_EQ(a0.recovering, 0.0);
}

TEST(CombinedLoss, RawSumOption) {
  const Dataset d = positional(3, 0, AuxMode::original);
  NeuralReasoner model(small_config(d, AuxMode::original), 4);
  Tape t(false), ref(false);
  LossBreakdown raw = combined_loss(t, model, d.train[0], 1.0, /*per_token_recovering=*/false);
  const Encodings enc = model.encode_inputs(ref, d.train[0]);
  EXPECT_EQ(raw.total.item(), model.recovering(ref, enc, d.train[0]).total.item());
}

TEST(CombinedLoss, WholeModelGradientMatchesFiniteDifferences) {
  const Dataset d = positional(3, 0, AuxMode::original);
  ModelConfig c = small_config(d, AuxMode::original, 4, 5);
  c.init_range = 0.5;
  NeuralReasoner model(c, 5);
  for (const auto& p : model.parameters()) {
    EXPECT_LT(grad_check([&](Tape& t) { return combined_loss(t, model, d.train[1], 0.5).total; }, p.tensor), 1e-4)
        << p.name;
  }
}

TEST(Clipping, NormEightyIsHalved) {
  std::vector<double> g = {48.0, 64.0};  // norm 80
  EXPECT_DOUBLE_EQ(clip_gradients(g, 40.0), 80.0);
  EXPECT_DOUBLE_EQ(g[0], 24.0);
  EXPECT_DOUBLE_EQ(g[1], 32.0);
}

TEST(Clipping, SmallNormIsUnchanged) {
  std::vector<double> g = {6.0, 8.0};  // norm 10
  clip_gradients(g, 40.0);
  EXPECT_EQ(g, (std::vector<double>{6.0, 8.0}));
}

TEST(Clipping, DirectionIsPreserved) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 30.0);
  std::vector<double> g(50);
  for (double& v : g) v = n(rng);
  const std::vector<double> before = g;
  const double norm = clip_gradients(g, 40.0);
  ASSERT_GT(norm, 40.0);
  const double after = l2_norm(g);
  EXPECT_NEAR(after, 40.0, 1e-12);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(g[i] / after, before[i] / norm, 1e-15);
}

TEST(Clipping, GlobalNormAcrossTensors) {
  Tensor a = Tensor::vec({0.0}, true), b = Tensor::vec({0.0, 0.0}, true);
  a.grad()[0] = 48.0;
  b.grad()[1] = 64.0;
  const ParamList params = {{"a", a}, {"b", b}};
  EXPECT_DOUBLE_EQ(clip_gradients(params, 40.0), 80.0);
  EXPECT_DOUBLE_EQ(a.grad()[0], 24.0);
  EXPECT_DOUBLE_EQ(b.grad()[1], 32.0);
  EXPECT_DOUBLE_EQ(global_grad_norm(params), 40.0);
  std::vector<double> g = {1.0};
  EXPECT_THROW(clip_gradients(g, 0.0), InputError);
}

TEST(AdaDelta, FirstStepClosedForm) {
  const double rho = 0.95, eps = 1e-6;
  Tensor x = Tensor::vec({0.5, -1.0, 2.0, 0.0}, true);
  const std::vector<double> g = {0.3, -2.0, 1e-4, 0.0};
  for (std::size_t i = 0; i < g.size(); ++i) x.grad()[i] = g[i];
  const std::vector<double> before = {0.5, -1.0, 2.0, 0.0};
  AdaDelta opt({{"x", x}}, rho, eps);
  opt.step();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double dx = -std::sqrt(eps) / std::sqrt((1 - rho) * g[i] * g[i] + eps) * g[i];
    EXPECT_NEAR(x[i], before[i] + dx, 1e-15);
  }
}

TEST(AdaDelta, ZeroGradientLeavesParametersAndDecaysAccumulators) {
  Tensor x = Tensor::vec({1.0, 2.0}, true);
  AdaDelta opt({{"x", x}});
  x.grad()[0] = 1.0;
  x.grad()[1] = -3.0;
  opt.step();
  const std::vector<double> after = {x[0], x[1]};
  const std::vector<double> eg = opt.sq_grad(0), ed = opt.sq_update(0);
  x.zero_grad();
  opt.step();
  EXPECT_EQ(x[0], after[0]);
  EXPECT_EQ(x[1], after[1]);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_DOUBLE_EQ(opt.sq_grad(0)[i], 0.95 * eg[i]);
    EXPECT_DOUBLE_EQ(opt.sq_update(0)[i], 0.95 * ed[i]);
  }
}

TEST(AdaDelta, AccumulatorsStayNonNegative) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 5.0);
  Tensor x = Tensor::zeros({8}, true);
  AdaDelta opt({{"x", x}});
  for (int step = 0; step < 1000; ++step) {
    for (double& g : x.grad()) g = n(rng);
    opt.step();
    for (std::size_t i = 0; i < 8; ++i) {
      ASSERT_GE(opt.sq_grad(0)[i], 0.0);
      ASSERT_GE(opt.sq_update(0)[i], 0.0);
    }
  }
}

TEST(Train, OneEpochChangesParameters) {
  const Dataset d = positional(10, 0, AuxMode::none);
  NeuralReasoner model(small_config(d, AuxMode::none), 1);
  const auto before = snapshot(model.parameters());
  TrainConfig tc;
  tc.alpha = 0.0;
  tc.epochs = 1;
  train(model, d.train, {}, tc);
  EXPECT_NE(snapshot(model.parameters()), before);
}

TEST(Train, FixedSeedReproducesHistory) {
  const Dataset d = positional(40, 20, AuxMode::original);
  auto run = [&]() {
    NeuralReasoner model(small_config(d, AuxMode::original), 2);
    TrainConfig tc;
    tc.epochs = 3;
    tc.batch_size = 8;
    std::vector<double> trace;
    for (const auto& m : train(model, d.train, d.test, tc)) {
      trace.insert(trace.end(), {m.train_loss, m.reasoning_loss, m.recovering_loss, m.test_accuracy.value()});
    }
    return std::make_pair(trace, snapshot(model.parameters()));
  };
  EXPECT_EQ(run(), run());
}

TEST(Train, AlphaZeroIgnoresTheDecoder) {
  const Dataset d = positional(40, 20, AuxMode::original);
  auto history = [&](AuxMode aux) {
    NeuralReasoner model(small_config(d, aux), 6);
    TrainConfig tc;
    tc.alpha = 0.0;
    tc.epochs = 3;
    tc.batch_size = 8;
    std::vector<double> trace;
    for (const auto& m : train(model, d.train, d.test, tc)) {
      trace.insert(trace.end(), {m.train_loss, m.reasoning_loss, m.recovering_loss, m.test_accuracy.value()});
    }
    return trace;
  };
  EXPECT_EQ(history(AuxMode::original), history(AuxMode::none));
}

TEST(Train, StepsRespectTheClipThreshold) {
  const Dataset d = positional(64, 0, AuxMode::original);
  NeuralReasoner model(small_config(d, AuxMode::original), 3);
  TrainConfig tc;
  tc.epochs = 2;
  tc.clip_norm = 0.05;
  std::size_t steps = 0, clipped = 0;
  TrainHooks hooks;
  hooks.on_step = [&](const StepInfo& s) {
    ++steps;
    if (s.grad_norm > tc.clip_norm) ++clipped;
    EXPECT_LE(s.clipped_norm, tc.clip_norm + 1e-9);
  };
  train(model, d.train, {}, tc, hooks);
  EXPECT_EQ(steps, 4U);
  EXPECT_GT(clipped, 0U);
}

TEST(Train, LossDecreasesOverTwentyEpochs) {
  const Dataset d = positional(500, 0, AuxMode::original);
  std::vector<double> first, last;
  for (std::uint64_t seed : {1, 2, 3}) {
    NeuralReasoner model(small_config(d, AuxMode::original, 32, 64), seed);
    TrainConfig tc;
    tc.epochs = 20;
    tc.seed = seed;
    const auto history = train(model, d.train, {}, tc);
    first.push_back(history.front().train_loss);
    last.push_back(history.back().train_loss);
  }
  std::sort(first.begin(), first.end());
  std::sort(last.begin(), last.end());
  EXPECT_LT(last[1], first[1]);
}

TEST(Train, RejectsBadConfigAndEmptyData) {
  const Dataset d = positional(4, 0, AuxMode::none);
  NeuralReasoner model(small_config(d, AuxMode::none), 1);
  TrainConfig tc;
  EXPECT_THROW(train(model, {}, {}, tc), InputError);
  tc.alpha = 1.5;
  EXPECT_THROW(train(model, d.train, {}, tc), InputError);
}

TEST(Evaluate, EmptyTestSetIsAnError) {
  const Dataset d = positional(4, 0, AuxMode::none);
  NeuralReasoner model(small_config(d, AuxMode::none), 1);
  EXPECT_THROW(evaluate(model, {}), InputError);
}

TEST(Evaluate, UntrainedModelIsNearChance) {
  const Dataset d = positional(200, 1000, AuxMode::none);
  NeuralReasoner model(small_config(d, AuxMode::none, 32, 64), 8);
  EXPECT_NEAR(evaluate(model, d.test), 0.5, 0.05);
}

TEST(DeriveSeed, StreamsDiffer) {
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
  EXPECT_EQ(derive_seed(5, 3), derive_seed(5, 3));
}

}  // namespace
}  // namespace nr
