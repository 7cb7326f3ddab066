#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hadola/annotations.hpp"

namespace hadola {

inline constexpr std::size_t kHashEmbeddingDim = 64;

enum class RecordErrorKind { malformed, orphan };

struct RecordError {
  RecordErrorKind kind = RecordErrorKind::malformed;
  std::string question_id;
  std::string message;
};

struct IngestResult {
  std::vector<AnnotatedSample> samples;
  std::vector<RecordError> errors;
};

// Per-question features keyed by id. When absent, features are a signed
// feature-hashing embedding of the question text (or of the id if no question
// file was given).
using FeatureTable = std::map<std::string, std::vector<double>>;

// Deterministic 64-dim hashing embedding, L2-normalized (zero for empty text).
std::vector<double> hash_embedding(std::string_view text, std::size_t dim = kHashEmbeddingDim);

// Parses VQAv2-schema annotations. Bad records are collected in `errors` and
// skipped; a file that is not valid JSON throws IngestError. Samples are
// ordered by numeric question_id.
IngestResult parse_vqa_annotations(std::string_view annotations_json,
                                   std::optional<std::string_view> questions_json = std::nullopt,
                                   const FeatureTable* features = nullptr);
IngestResult parse_vqa_annotation_files(const std::filesystem::path& annotations,
                                        const std::optional<std::filesystem::path>& questions,
                                        const std::optional<std::filesystem::path>& feature_file);

// Reads JSONL {"id", "features"} lines.
FeatureTable read_feature_table(std::string_view jsonl);

// Drops samples whose modal answer is "unanswerable" with count >= 5.
std::vector<AnnotatedSample> filter_unanswerable(const std::vector<AnnotatedSample>& samples);

}  // namespace hadola
