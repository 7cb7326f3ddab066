#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace hadola {

inline constexpr std::size_t kAnnotatorsPerSample = 10;

// Self-reported annotator confidence.
enum class ConfidenceLabel { yes, maybe, no };

// yes -> 0.99, maybe -> 0.5, no -> 0.01.
double map_confidence(ConfidenceLabel label) noexcept;

// Case-folded and trimmed; anything other than yes/maybe/no throws IngestError.
ConfidenceLabel parse_confidence(std::string_view token);
std::string_view to_string(ConfidenceLabel label) noexcept;

// Lowercase, trim, collapse internal whitespace, strip trailing punctuation.
std::string normalize_answer(std::string_view raw);

struct Annotation {
  std::string answer;  // normalized, non-empty
  ConfidenceLabel confidence = ConfidenceLabel::yes;

  // Normalizes `raw_answer`; throws IngestError if nothing is left.
  static Annotation make(std::string_view raw_answer, ConfidenceLabel confidence);
};

struct AnnotatedSample {
  std::string id;
  std::vector<double> features;
  std::vector<Annotation> annotations;  // exactly kAnnotatorsPerSample

  // Validates the annotation count; throws IngestError otherwise.
  static AnnotatedSample make(std::string id, std::vector<double> features,
                              std::vector<Annotation> annotations);
};

// One distinct answer of a sample with its annotator count and HaConf.
struct AnswerStat {
  std::string answer;
  std::size_t count = 0;
  double haconf = 0.0;
};

// Distinct answers in first-occurrence order.
std::vector<AnswerStat> answer_stats(const AnnotatedSample& sample);

// Mean confidence score of the annotators who gave `answer` (normalized first).
// Throws NoSuchAnswer if nobody gave it.
double haconf(const AnnotatedSample& sample, std::string_view answer);
// Same, but 0.0 for answers nobody gave.
double haconf_or_zero(const AnnotatedSample& sample, std::string_view answer) noexcept;

// Mean HaConf over the sample's distinct answers.
double hud(const AnnotatedSample& sample);

// Most frequent answer; ties go to the lexicographically smallest answer.
std::string majority_answer(const AnnotatedSample& sample);

// Probability vector over a list of distinct answers.
class AnswerDistribution {
 public:
  // Validates: m >= 1, distinct answers, nonnegative weights summing to 1
  // within 1e-9. Throws std::invalid_argument on violation.
  AnswerDistribution(std::vector<std::string> answers, std::vector<double> weights);

  const std::vector<std::string>& answers() const noexcept { return answers_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  std::size_t size() const noexcept { return answers_.size(); }

 private:
  std::vector<std::string> answers_;
  std::vector<double> weights_;
};

// HaConf vector over distinct answers, renormalized to the simplex.
AnswerDistribution human_distribution(const AnnotatedSample& sample);

enum class HULevel { low, medium, high };

std::string_view to_string(HULevel level) noexcept;
HULevel parse_hu_level(std::string_view token);

// [0.66, 0.99] low, (0.33, 0.66) medium, [0.01, 0.33] high.
HULevel classify_hud(double hud_value);
inline HULevel hu_level(const AnnotatedSample& sample) { return classify_hud(hud(sample)); }

struct Strata {
  std::vector<AnnotatedSample> low;
  std::vector<AnnotatedSample> medium;
  std::vector<AnnotatedSample> high;

  const std::vector<AnnotatedSample>& at(HULevel level) const;
  std::size_t total() const noexcept { return low.size() + medium.size() + high.size(); }
};

// Throws std::invalid_argument on an empty dataset.
Strata stratify(const std::vector<AnnotatedSample>& samples);

// A set of samples sharing one feature dimension.
struct Dataset {
  std::size_t dim = 0;
  std::vector<AnnotatedSample> samples;

  // Checks every sample's feature length against `dim`; throws DimensionError.
  static Dataset make(std::vector<AnnotatedSample> samples);
  // Sorted union of all normalized answers.
  std::vector<std::string> vocabulary() const;
};

// JSON Lines: {"id", "features", "annotations": [{"answer", "confidence"} x10]}.
std::string to_jsonl_line(const AnnotatedSample& sample);
AnnotatedSample parse_jsonl_line(std::string_view line);
Dataset read_dataset(std::istream& in);
Dataset read_dataset(const std::filesystem::path& path);
std::string to_jsonl(const std::vector<AnnotatedSample>& samples);
void write_dataset(const std::filesystem::path& path, const std::vector<AnnotatedSample>& samples);

}  // namespace hadola
