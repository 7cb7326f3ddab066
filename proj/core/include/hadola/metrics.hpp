#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hadola/annotations.hpp"
#include "hadola/model.hpp"

namespace hadola {

inline constexpr double kSmoothingFloor = 1e-6;
inline constexpr std::size_t kProfileLength = 10;

// min(#matching annotators / 3, 1).
double vqa_acc(std::string_view model_answer, const AnnotatedSample& sample);
// haconf_or_zero * vqa_acc.
double hu_acc(std::string_view model_answer, const AnnotatedSample& sample);

// sum_i h_i ln(h_i / p_i), with 0 ln 0 = 0; +inf if p_i = 0 < h_i.
// Throws SupportMismatch when the answer lists differ.
double kl_divergence(const AnswerDistribution& h, const AnswerDistribution& p);
// Same over two raw aligned vectors; throws SupportMismatch on length mismatch.
double kl_divergence(std::span<const double> h, std::span<const double> p);

struct AlignedPair {
  AnswerDistribution h;
  AnswerDistribution p;
};

// Union of supports (h's answers first, then p's extras). Model entries that
// are missing or zero get `floor` before renormalizing; missing human entries
// are exact zeros.
AlignedPair align_support(const AnswerDistribution& h, const AnswerDistribution& model_dist,
                          double floor = kSmoothingFloor);

// Sorted-descending, fixed-length representation of a distribution.
struct ConfidenceProfile {
  std::vector<double> values;

  bool operator==(const ConfidenceProfile&) const = default;
};

ConfidenceProfile canonical_profile(std::span<const double> weights, std::size_t k = kProfileLength);
inline ConfidenceProfile canonical_profile(const AnswerDistribution& dist,
                                           std::size_t k = kProfileLength) {
  return canonical_profile(dist.weights(), k);
}

// Element-wise mean of profiles, renormalized. Throws on empty input or
// mismatched lengths.
ConfidenceProfile mean_profile(std::span<const ConfidenceProfile> profiles);

// softmax(logits / T). Throws InvalidTemperature for T <= 0.
std::vector<double> temperature_scale(std::span<const double> logits, double temperature);

// Model answer for a sample: argmax of the restricted distribution, ties to the
// lexicographically smallest answer.
std::string predict_answer(const AnswerDistribution& restricted);

struct StratumReport {
  std::size_t n = 0;
  double vqa_acc_mean = 0.0;
  double hu_acc_mean = 0.0;
  double kl_mean = 0.0;
};

struct EvalReport {
  std::size_t n = 0;
  double vqa_acc_mean = 0.0;
  double hu_acc_mean = 0.0;
  double kl_mean = 0.0;
  double temperature = 1.0;
  // Absent when no evaluated sample falls in the stratum.
  std::optional<StratumReport> low;
  std::optional<StratumReport> medium;
  std::optional<StratumReport> high;

  const std::optional<StratumReport>& stratum(HULevel level) const;
};

// Scores every sample with the restricted distribution of `model` (logits
// divided by `temperature`). Throws DimensionError on feature-length mismatch.
EvalReport evaluate(const SurrogateModel& model, const std::vector<AnnotatedSample>& samples,
                    double temperature = 1.0);

std::string eval_report_to_json(const EvalReport& report, int indent = 2);
// Columns: stratum, n, vqa_acc, hu_acc, kl. Absent strata have n = 0 and empty metrics.
std::string eval_report_to_csv(const EvalReport& report);

}  // namespace hadola
