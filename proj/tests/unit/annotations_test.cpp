#include <gtest/gtest.h>

#include <sstream>

#include "hadola/annotations.hpp"
#include "hadola/error.hpp"
#include "test_util.hpp"

using namespace hadola;
using namespace hadola::test;

TEST(Confidence, MapsToFixedScores) {
  EXPECT_EQ(map_confidence(ConfidenceLabel::yes), 0.99);
  EXPECT_EQ(map_confidence(ConfidenceLabel::maybe), 0.5);
  EXPECT_EQ(map_confidence(ConfidenceLabel::no), 0.01);
}

TEST(Confidence, ParsesCaseAndWhitespace) {
  EXPECT_EQ(parse_confidence(" YES "), ConfidenceLabel::yes);
  EXPECT_EQ(parse_confidence("Maybe"), ConfidenceLabel::maybe);
  EXPECT_EQ(parse_confidence("no"), ConfidenceLabel::no);
  EXPECT_THROW(parse_confidence("perhaps"), IngestError);
  EXPECT_THROW(parse_confidence(""), IngestError);
}

TEST(Normalize, LowercaseTrimCollapseStrip) {
  EXPECT_EQ(normalize_answer("  Red   Bus!! "), "red bus");
  EXPECT_EQ(normalize_answer("Yes."), "yes");
  EXPECT_EQ(normalize_answer("3.5"), "3.5");
  EXPECT_THROW(Annotation::make(" ?! ", ConfidenceLabel::yes), IngestError);
}

TEST(Sample, RequiresTenAnnotations) {
  std::vector<Annotation> nine(9, Annotation{"a", ConfidenceLabel::yes});
  EXPECT_THROW(AnnotatedSample::make("x", {1.0}, nine), IngestError);
}

TEST(HaConf, MeanOverAnnotatorsOfAnswer) {
  const auto s = make_sample({{"red", Y, 6}, {"red", M, 2}, {"blue", N, 2}});
  EXPECT_DOUBLE_EQ(haconf(s, "red"), (6 * 0.99 + 2 * 0.5) / 8);
  EXPECT_DOUBLE_EQ(haconf(s, "Blue"), 0.01);
  EXPECT_THROW(haconf(s, "green"), NoSuchAnswer);
  EXPECT_EQ(haconf_or_zero(s, "green"), 0.0);
}

TEST(Hud, MeanOverDistinctAnswers) {
  const auto s = make_sample({{"a", Y, 4}, {"b", M, 3}, {"c", N, 3}});
  EXPECT_NEAR(hud(s), (0.99 + 0.5 + 0.01) / 3, 1e-15);
  EXPECT_EQ(hu_level(s), HULevel::medium);
}

TEST(Hud, StratumBoundaries) {
  EXPECT_EQ(classify_hud(0.99), HULevel::low);
  EXPECT_EQ(classify_hud(0.66), HULevel::low);
  EXPECT_EQ(classify_hud(0.6599), HULevel::medium);
  EXPECT_EQ(classify_hud(0.3301), HULevel::medium);
  EXPECT_EQ(classify_hud(0.33), HULevel::high);
  EXPECT_EQ(classify_hud(0.01), HULevel::high);
}

TEST(Majority, TiesGoToSmallestAnswer) {
  EXPECT_EQ(majority_answer(make_sample({{"zebra", Y, 5}, {"apple", N, 5}})), "apple");
  EXPECT_EQ(majority_answer(make_sample({{"b", Y, 4}, {"a", Y, 3}, {"c", Y, 3}})), "b");
}

TEST(HumanDistribution, RenormalizedHaConf) {
  const auto s = make_sample({{"a", Y, 5}, {"b", M, 5}});
  const auto h = human_distribution(s);
  ASSERT_EQ(h.size(), 2u);
  EXPECT_EQ(h.answers()[0], "a");
  EXPECT_NEAR(h.weights()[0], 0.99 / 1.49, 1e-15);
  EXPECT_NEAR(h.weights()[1], 0.5 / 1.49, 1e-15);
}

TEST(AnswerDistribution, Validates) {
  EXPECT_THROW(AnswerDistribution({}, {}), std::invalid_argument);
  EXPECT_THROW(AnswerDistribution({"a", "a"}, {0.5, 0.5}), std::invalid_argument);
  EXPECT_THROW(AnswerDistribution({"a", "b"}, {0.5, 0.6}), std::invalid_argument);
  EXPECT_THROW(AnswerDistribution({"a", "b"}, {1.5, -0.5}), std::invalid_argument);
  EXPECT_NO_THROW(AnswerDistribution({"a"}, {1.0}));
}

TEST(Stratify, PartitionsByHud) {
  std::vector<AnnotatedSample> v = {make_sample({{"a", Y, 10}}, {0.0}, "1"),
                                    make_sample({{"a", M, 10}}, {0.0}, "2"),
                                    make_sample({{"a", N, 10}}, {0.0}, "3"),
                                    make_sample({{"a", Y, 9}, {"b", Y, 1}}, {0.0}, "4")};
  const auto s = stratify(v);
  EXPECT_EQ(s.low.size(), 2u);
  EXPECT_EQ(s.medium.size(), 1u);
  EXPECT_EQ(s.high.size(), 1u);
  EXPECT_EQ(s.total(), 4u);
  EXPECT_THROW(stratify({}), std::invalid_argument);
}

TEST(Jsonl, RoundTrip) {
  const auto s = make_sample({{"red", Y, 6}, {"blue", N, 4}}, {0.1, -2.5, 1e-300}, "q7");
  const auto back = parse_jsonl_line(to_jsonl_line(s));
  EXPECT_EQ(back.id, "q7");
  EXPECT_EQ(back.features, s.features);
  ASSERT_EQ(back.annotations.size(), 10u);
  EXPECT_EQ(back.annotations[9].answer, "blue");
  EXPECT_EQ(back.annotations[9].confidence, ConfidenceLabel::no);

  std::istringstream in(to_jsonl({s, s}));
  const auto d = read_dataset(in);
  EXPECT_EQ(d.dim, 3u);
  EXPECT_EQ(d.samples.size(), 2u);
  EXPECT_EQ(d.vocabulary(), (std::vector<std::string>{"blue", "red"}));
}

TEST(Dataset, RejectsMixedDimensions) {
  EXPECT_THROW(Dataset::make({make_sample({{"a", Y, 10}}, {1.0}), make_sample({{"a", Y, 10}}, {1.0, 2.0})}),
               DimensionError);
}
