#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "hadola/error.hpp"
#include "hadola/metrics.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace hadola;
using namespace hadola::test;

TEST(VqaAcc, CappedAtThreeMatches) {
  const auto s = make_sample({{"a", Y, 1}, {"b", Y, 2}, {"c", M, 7}});
  EXPECT_DOUBLE_EQ(vqa_acc("a", s), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(vqa_acc("b", s), 2.0 / 3.0);
  EXPECT_EQ(vqa_acc("c", s), 1.0);
  EXPECT_EQ(vqa_acc("zzz", s), 0.0);
  EXPECT_EQ(vqa_acc("C.", s), 1.0);
}

TEST(HuAcc, ProductOfHaConfAndVqaAcc) {
  const auto s = make_sample({{"a", N, 2}, {"b", Y, 8}});
  EXPECT_DOUBLE_EQ(hu_acc("a", s), 0.01 * 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(hu_acc("b", s), 0.99);
  EXPECT_EQ(hu_acc("c", s), 0.0);
}

TEST(Kl, MatchesBruteforce) {
  std::mt19937_64 rng(5);
  std::gamma_distribution<double> g(1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> h(5), p(5);
    double sh = 0, sp = 0;
    for (auto& x : h) sh += (x = g(rng));
    for (auto& x : p) sp += (x = g(rng));
    for (auto& x : h) x /= sh;
    for (auto& x : p) x /= sp;
    EXPECT_NEAR(kl_divergence(h, p), oracle::kl_bruteforce(h, p), 1e-12);
  }
}

TEST(Kl, EdgeCases) {
  const std::vector<double> h = {0.5, 0.5, 0.0}, p = {1.0, 0.0, 0.0}, r = {0.5, 0.25, 0.25};
  EXPECT_EQ(kl_divergence(h, p), std::numeric_limits<double>::infinity());
  EXPECT_NEAR(kl_divergence(h, r), 0.5 * std::log(2.0), 1e-15);
  EXPECT_EQ(kl_divergence(h, h), 0.0);
  EXPECT_THROW(kl_divergence(std::vector<double>{1.0}, std::vector<double>{0.5, 0.5}), SupportMismatch);
  EXPECT_THROW(kl_divergence(AnswerDistribution({"a", "b"}, {0.5, 0.5}), AnswerDistribution({"a", "c"}, {0.5, 0.5})),
               SupportMismatch);
}

TEST(AlignSupport, FloorsMissingModelMass) {
  const AnswerDistribution h({"a", "b"}, {0.75, 0.25});
  const AnswerDistribution p({"a", "c"}, {1.0, 0.0});
  const auto al = align_support(h, p);
  ASSERT_EQ(al.h.answers(), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(al.h.weights()[2], 0.0);
  const double z = 1.0 + 2e-6;
  EXPECT_NEAR(al.p.weights()[0], 1.0 / z, 1e-15);
  EXPECT_NEAR(al.p.weights()[1], 1e-6 / z, 1e-18);
  EXPECT_TRUE(std::isfinite(kl_divergence(al.h, al.p)));
}

TEST(Profile, SortedPaddedRenormalized) {
  const std::vector<double> w = {0.1, 0.6, 0.3};
  const auto prof = canonical_profile(w);
  ASSERT_EQ(prof.values.size(), kProfileLength);
  EXPECT_NEAR(prof.values[0], 0.6, 1e-15);
  EXPECT_NEAR(prof.values[2], 0.1, 1e-15);
  EXPECT_EQ(prof.values[9], 0.0);
  const auto ref = oracle::profile_bruteforce(w, kProfileLength);
  for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(prof.values[i], ref[i], 1e-15);
}

TEST(Profile, TruncationRenormalizes) {
  std::vector<double> w(12, 1.0 / 12.0);
  const auto prof = canonical_profile(w, 10);
  double s = 0;
  for (double v : prof.values) s += v;
  EXPECT_NEAR(s, 1.0, 1e-15);
  EXPECT_NEAR(prof.values[0], 0.1, 1e-15);
}

TEST(Profile, MeanProfile) {
  std::vector<ConfidenceProfile> ps = {canonical_profile(std::vector<double>{1.0}, 3),
                                       canonical_profile(std::vector<double>{0.5, 0.5}, 3)};
  const auto m = mean_profile(ps);
  EXPECT_NEAR(m.values[0], 0.75, 1e-15);
  EXPECT_NEAR(m.values[1], 0.25, 1e-15);
  EXPECT_THROW(mean_profile(std::vector<ConfidenceProfile>{}), std::exception);
}

TEST(Temperature, ScalesAndRejectsNonPositive) {
  const std::vector<double> z = {1.0, 2.0, 0.0};
  const auto p1 = temperature_scale(z, 1.0);
  const auto p2 = temperature_scale(z, 100.0);
  EXPECT_GT(p1[1], p2[1]);
  EXPECT_NEAR(p2[0] + p2[1] + p2[2], 1.0, 1e-15);
  EXPECT_THROW(temperature_scale(z, 0.0), InvalidTemperature);
  EXPECT_THROW(temperature_scale(z, -1.0), InvalidTemperature);
}

TEST(Predict, TiesToSmallestAnswer) {
  EXPECT_EQ(predict_answer(AnswerDistribution({"b", "a"}, {0.5, 0.5})), "a");
  EXPECT_EQ(predict_answer(AnswerDistribution({"b", "a"}, {0.6, 0.4})), "b");
}

namespace {

SurrogateModel two_class_model() {
  // logits: a -> x, b -> -x
  return SurrogateModel(1, {"a", "b"}, {1.0, 0.0, -1.0, 0.0}, 0);
}

}  // namespace

TEST(Evaluate, SingleAnswerSamplesAlwaysCorrect) {
  const auto m = two_class_model();
  const auto s = make_sample({{"b", Y, 10}}, {5.0});
  const auto r = evaluate(m, {s});
  EXPECT_EQ(r.vqa_acc_mean, 1.0);
  EXPECT_DOUBLE_EQ(r.hu_acc_mean, 0.99);
  EXPECT_EQ(r.kl_mean, 0.0);
  ASSERT_TRUE(r.low.has_value());
  EXPECT_FALSE(r.medium.has_value());
  EXPECT_FALSE(r.high.has_value());
}

TEST(Evaluate, RestrictedArgmaxAndStrata) {
  const auto m = two_class_model();
  const auto s1 = make_sample({{"a", M, 5}, {"b", M, 5}}, {1.0}, "1");
  const auto s2 = make_sample({{"a", N, 2}, {"b", N, 8}}, {-1.0}, "2");
  const auto r = evaluate(m, {s1, s2});
  EXPECT_EQ(r.n, 2u);
  EXPECT_DOUBLE_EQ(r.vqa_acc_mean, 1.0);
  EXPECT_DOUBLE_EQ(r.hu_acc_mean, (0.5 + 0.01) / 2);
  ASSERT_TRUE(r.medium && r.high);
  EXPECT_EQ(r.medium->n, 1u);
  EXPECT_DOUBLE_EQ(r.high->hu_acc_mean, 0.01);
  // s1: H = (0.5, 0.5), M = softmax(1, -1)
  const double pa = 1.0 / (1.0 + std::exp(-2.0));
  const double kl1 = 0.5 * std::log(0.5 / pa) + 0.5 * std::log(0.5 / (1 - pa));
  EXPECT_NEAR(r.medium->kl_mean, kl1, 1e-12);
}

TEST(Evaluate, Errors) {
  const auto m = two_class_model();
  EXPECT_THROW(evaluate(m, {make_sample({{"a", Y, 10}}, {1.0, 2.0})}), DimensionError);
  EXPECT_THROW(evaluate(m, {make_sample({{"a", Y, 10}}, {1.0})}, 0.0), InvalidTemperature);
  EXPECT_EQ(evaluate(m, {}).n, 0u);
}

TEST(Evaluate, Serialization) {
  const auto m = two_class_model();
  const auto r = evaluate(m, {make_sample({{"a", Y, 10}}, {1.0})});
  const auto csv = eval_report_to_csv(r);
  EXPECT_NE(csv.find("stratum,n,vqa_acc,hu_acc,kl"), std::string::npos);
  EXPECT_NE(csv.find("medium,0,,,"), std::string::npos);
  EXPECT_NE(eval_report_to_json(r).find("\"medium\": null"), std::string::npos);
}
