#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "hadola/error.hpp"
#include "hadola/ingest.hpp"

using namespace hadola;
namespace fs = std::filesystem;

namespace {
const fs::path kFixtures = HADOLA_FIXTURE_DIR;
}

TEST(Ingest, ThreeRecordFixture) {
  const auto r = parse_vqa_annotation_files(kFixtures / "vqa_three_records.json", std::nullopt, std::nullopt);
  ASSERT_EQ(r.samples.size(), 1u);
  EXPECT_EQ(r.samples[0].id, "101");
  EXPECT_EQ(r.samples[0].features.size(), kHashEmbeddingDim);
  ASSERT_EQ(r.errors.size(), 2u);
  for (const auto& e : r.errors) EXPECT_EQ(e.kind, RecordErrorKind::malformed);
  std::set<std::string> ids = {r.errors[0].question_id, r.errors[1].question_id};
  EXPECT_EQ(ids, (std::set<std::string>{"102", "103"}));
  EXPECT_NEAR(haconf(r.samples[0], "red"), (6 * 0.99 + 2 * 0.5) / 8, 1e-15);
}

TEST(Ingest, QuestionsAndFeatures) {
  const auto r = parse_vqa_annotation_files(kFixtures / "vqa_three_records.json",
                                            kFixtures / "vqa_questions.json", kFixtures / "vqa_features.jsonl");
  ASSERT_EQ(r.samples.size(), 1u);
  EXPECT_EQ(r.samples[0].features, (std::vector<double>{0.5, -0.25, 1.0, 0.0}));
}

TEST(Ingest, OrphanWhenQuestionMissing) {
  const std::string ann = R"({"annotations": [{"question_id": 5, "answers": [)"
                          R"({"answer":"a","answer_confidence":"yes"},{"answer":"a","answer_confidence":"yes"},)"
                          R"({"answer":"a","answer_confidence":"yes"},{"answer":"a","answer_confidence":"yes"},)"
                          R"({"answer":"a","answer_confidence":"yes"},{"answer":"a","answer_confidence":"yes"},)"
                          R"({"answer":"a","answer_confidence":"yes"},{"answer":"a","answer_confidence":"yes"},)"
                          R"({"answer":"a","answer_confidence":"yes"},{"answer":"a","answer_confidence":"yes"}]}]})";
  const auto r = parse_vqa_annotations(ann, std::string_view(R"({"questions": []})"));
  EXPECT_TRUE(r.samples.empty());
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_EQ(r.errors[0].kind, RecordErrorKind::orphan);
  EXPECT_EQ(parse_vqa_annotations(ann).samples.size(), 1u);
}

TEST(Ingest, InvalidJsonThrows) {
  EXPECT_THROW(parse_vqa_annotations("{not json"), IngestError);
  EXPECT_THROW(parse_vqa_annotations(R"({"foo": 1})"), IngestError);
}

TEST(Ingest, NumericIdOrder) {
  std::string recs;
  for (int id : {10, 9, 100}) {
    if (!recs.empty()) recs += ",";
    recs += R"({"question_id": )" + std::to_string(id) + R"(, "answers": [)";
    for (int i = 0; i < 10; ++i) recs += std::string(i ? "," : "") + R"({"answer":"x","answer_confidence":"maybe"})";
    recs += "]}";
  }
  const auto r = parse_vqa_annotations(R"({"annotations": [)" + recs + "]}");
  ASSERT_EQ(r.samples.size(), 3u);
  EXPECT_EQ(r.samples[0].id, "9");
  EXPECT_EQ(r.samples[1].id, "10");
  EXPECT_EQ(r.samples[2].id, "100");
}

TEST(Ingest, FilterUnanswerable) {
  const auto r = parse_vqa_annotation_files(kFixtures / "vizwiz_unanswerable.json", std::nullopt, std::nullopt);
  ASSERT_EQ(r.samples.size(), 2u);
  const auto kept = filter_unanswerable(r.samples);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].id, "VizWiz_val_00000002.jpg");
}

TEST(HashEmbedding, DeterministicUnitNorm) {
  const auto a = hash_embedding("What color is the bus?");
  EXPECT_EQ(a, hash_embedding("what COLOR is the bus"));
  double n = 0;
  for (double x : a) n += x * x;
  EXPECT_NEAR(n, 1.0, 1e-12);
  for (double x : hash_embedding("")) EXPECT_EQ(x, 0.0);
}

TEST(FeatureTable, ParsesAndRejects) {
  const auto t = read_feature_table("{\"id\": 7, \"features\": [1, 2]}\n\n{\"id\": \"x\", \"features\": []}\n");
  EXPECT_EQ(t.at("7"), (std::vector<double>{1.0, 2.0}));
  EXPECT_TRUE(t.at("x").empty());
  EXPECT_THROW(read_feature_table("{\"id\": 1}\n"), IngestError);
}
