#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hadola/error.hpp"
#include "hadola/model.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace hadola;
using namespace hadola::test;

namespace {

std::vector<std::string> vocab(std::size_t c) {
  std::vector<std::string> v;
  for (std::size_t k = 0; k < c; ++k) v.push_back("c" + std::to_string(k));
  return v;
}

SurrogateModel random_model(std::size_t d, std::size_t c, std::uint64_t seed) {
  auto m = init_model(d, vocab(c), seed);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  for (double& w : m.mutable_weights()) w = n(rng);
  return m;
}

}  // namespace

TEST(InitModel, SmallDeterministicWeights) {
  const auto a = init_model(4, vocab(3), 9), b = init_model(4, vocab(3), 9);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.num_parameters(), 15u);
  for (double w : a.weights()) EXPECT_LE(std::fabs(w), 0.01);
  EXPECT_NE(a, init_model(4, vocab(3), 10));
}

TEST(InitModel, Rejects) {
  EXPECT_THROW(init_model(0, vocab(3), 1), DimensionError);
  EXPECT_THROW(init_model(2, vocab(1), 1), VocabError);
  EXPECT_THROW(init_model(2, {"a", "a"}, 1), VocabError);
  EXPECT_THROW(init_model(2, vocab(2), 1).class_index("zz"), VocabError);
}

TEST(Forward, MatchesNaiveSoftmax) {
  const auto m = random_model(5, 4, 3);
  const std::vector<double> x = {0.3, -1.0, 2.0, 0.0, 0.5};
  const auto f = forward(m, x);
  const auto z = oracle::logits(m, x);
  const auto p = oracle::probabilities(z);
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_NEAR(f.logits[k], z[k], 1e-12);
    EXPECT_NEAR(f.dist[k], p[k], 1e-14);
  }
  EXPECT_THROW(forward(m, std::vector<double>{1.0}), DimensionError);
}

TEST(Restricted, UsesSampleAnswersInOrder) {
  SurrogateModel m(1, {"a", "b", "c"}, {1.0, 0.0, 2.0, 0.0, 3.0, 0.0}, 0);
  const auto s = make_sample({{"c", Y, 5}, {"a", Y, 5}}, {1.0});
  const auto z = restricted_logits(m, s);
  EXPECT_EQ(z, (std::vector<double>{3.0, 1.0}));
  const auto r = restricted_distribution(m, s);
  EXPECT_EQ(r.answers(), (std::vector<std::string>{"c", "a"}));
  EXPECT_NEAR(r.weights()[0], 1.0 / (1.0 + std::exp(-2.0)), 1e-15);
}

TEST(Examples, LabeledAndPseudo) {
  SurrogateModel m(1, {"a", "b", "c"}, std::vector<double>(6, 0.0), 0);
  const auto s = make_sample({{"c", Y, 6}, {"a", M, 4}}, {1.0});
  const auto ex = labeled_example(m, s);
  EXPECT_EQ(ex.label, 2u);
  EXPECT_EQ(ex.support, (std::vector<std::size_t>{2, 0}));
  ASSERT_EQ(ex.human.size(), 2u);
  EXPECT_NEAR(ex.human[0], 0.99 / 1.49, 1e-15);
  const auto pe = pseudo_example({1.0}, 1);
  EXPECT_FALSE(pe.has_human());
  EXPECT_TRUE(pe.support.empty());
  EXPECT_FALSE(plain_example(m, s).has_human());
}

TEST(Loss, MatchesReference) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 20; ++i) {
    const auto m = random_model(3, 5, 100 + i), hu = random_model(3, 5, 200 + i);
    Example ex{{0.2, -0.4, 1.1}, static_cast<std::size_t>(i % 5), {}, {}};
    if (i % 2) {
      ex.support = {static_cast<std::size_t>(i % 5), static_cast<std::size_t>((i + 2) % 5)};
      ex.human = {0.7, 0.3};
    }
    const LossWeights w{0.3, 0.7};
    const auto t = loss_hadola(m, hu, ex, w);
    EXPECT_NEAR(t.total, oracle::loss_reference(m, hu, ex, w), 1e-12);
    EXPECT_NEAR(t.total, t.ce + 0.3 * t.phi + 0.7 * t.align, 1e-12);
    EXPECT_NEAR(t.ce, loss_ce(m, ex.features, ex.label), 1e-12);
    EXPECT_GE(t.phi, 0.0);
  }
}

TEST(Loss, ReducesToCeWhenModelsCoincideWithoutHuman) {
  const auto m = random_model(2, 3, 1);
  const auto t = loss_hadola(m, m, pseudo_example({1.0, 1.0}, 0), {5.0, 5.0});
  EXPECT_NEAR(t.phi, 0.0, 1e-15);
  EXPECT_EQ(t.align, 0.0);
  EXPECT_NEAR(t.total, t.ce, 1e-15);
}

TEST(Grad, MatchesFiniteDifferences) {
  for (int i = 0; i < 10; ++i) {
    const auto m = random_model(4, 6, 300 + i), hu = random_model(4, 6, 400 + i);
    Example ex{{0.5, -0.1, 0.9, -1.3}, static_cast<std::size_t>(i % 6), {}, {}};
    if (i % 2) {
      ex.support = {static_cast<std::size_t>(i % 6), 5, 0};
      if (ex.support[0] == 5 || ex.support[0] == 0) ex.support = {ex.support[0], 3};
      ex.human.assign(ex.support.size(), 1.0 / ex.support.size());
    }
    const LossWeights w{0.8, 1.3};
    const auto g = grad(m, hu, ex, w);
    const auto f = oracle::finite_diff_grad(m, hu, ex, w);
    for (std::size_t k = 0; k < g.size(); ++k) EXPECT_NEAR(g[k], f[k], 1e-6 * std::max(1.0, std::fabs(f[k])));
  }
}

TEST(Grad, CeMatchesOracle) {
  const auto m = random_model(3, 4, 77);
  const std::vector<double> x = {1.0, 2.0, -0.5};
  const auto g = grad_ce(m, x, 2);
  const auto o = oracle::ce_gradient(m, x, 2);
  for (std::size_t k = 0; k < g.size(); ++k) EXPECT_NEAR(g[k], o[k], 1e-14);
}

TEST(Grad, RejectsBadExamples) {
  const auto m = random_model(2, 3, 1);
  EXPECT_THROW(grad(m, m, Example{{1.0, 1.0}, 7, {}, {}}, {}), VocabError);
  EXPECT_THROW(grad(m, m, Example{{1.0, 1.0}, 0, {0, 1}, {1.0}}, {}), VocabError);
  EXPECT_THROW(grad(m, random_model(3, 3, 1), pseudo_example({1.0, 1.0}, 0), {}), VocabError);
}

TEST(Train, ReducesLossDeterministically) {
  const auto m0 = init_model(2, vocab(3), 5);
  std::vector<Example> batch = {pseudo_example({1.0, 0.0}, 0), pseudo_example({0.0, 1.0}, 1),
                                pseudo_example({-1.0, -1.0}, 2)};
  const TrainOptions opts{0.5, 50, 1};
  const auto a = train(m0, batch, m0, {0.0, 0.0}, opts);
  const auto b = train(m0, batch, m0, {0.0, 0.0}, opts);
  ASSERT_EQ(a.epoch_losses.size(), 50u);
  EXPECT_LT(a.epoch_losses.back(), a.epoch_losses.front());
  EXPECT_EQ(a.model, b.model);
}

TEST(Train, DivergesOnHugeLearningRate) {
  const auto m0 = init_model(1, vocab(2), 5);
  std::vector<Example> batch = {pseudo_example({1e150}, 0), pseudo_example({-1e150}, 0)};
  EXPECT_THROW(train(m0, batch, m0, {0.0, 0.0}, {1e150, 5, 0}), DivergedError);
}

TEST(Weights, NormalizeAndGrid) {
  const auto w = normalize_weights(2.0, 4.0, 0.5);
  EXPECT_NEAR(w.beta, 0.5, 1e-8);
  EXPECT_NEAR(w.lambda, 4.0, 1e-6);
  const auto grid = weight_grid({1.0, 2.0});
  ASSERT_EQ(grid.size(), 9u);
  EXPECT_DOUBLE_EQ(grid.front().beta, 0.3);
  EXPECT_DOUBLE_EQ(grid.back().lambda, 6.0);
}
