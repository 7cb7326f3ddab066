#include "hadola/annotations.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <stdexcept>
#include <unordered_set>

#include "hadola/error.hpp"

namespace hadola {

double map_confidence(ConfidenceLabel label) noexcept {
  switch (label) {
    case ConfidenceLabel::yes:
      return 0.99;
    case ConfidenceLabel::maybe:
      return 0.5;
    case ConfidenceLabel::no:
      return 0.01;
  }
  return 0.5;
}

std::string_view to_string(ConfidenceLabel label) noexcept {
  switch (label) {
    case ConfidenceLabel::yes:
      return "yes";
    case ConfidenceLabel::maybe:
      return "maybe";
    case ConfidenceLabel::no:
      return "no";
  }
  return "maybe";
}

ConfidenceLabel parse_confidence(std::string_view token) {
  const std::string folded = normalize_answer(token);
  if (folded == "yes") return ConfidenceLabel::yes;
  if (folded == "maybe") return ConfidenceLabel::maybe;
  if (folded == "no") return ConfidenceLabel::no;
  throw IngestError("unknown confidence token '" + std::string(token) + "'");
}

std::string normalize_answer(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (unsigned char c : raw) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  while (!out.empty() && (std::ispunct(static_cast<unsigned char>(out.back())) || out.back() == ' '))
    out.pop_back();
  return out;
}

Annotation Annotation::make(std::string_view raw_answer, ConfidenceLabel confidence) {
  std::string answer = normalize_answer(raw_answer);
  if (answer.empty()) throw IngestError("empty answer after normalization: '" + std::string(raw_answer) + "'");
  return Annotation{std::move(answer), confidence};
}

AnnotatedSample AnnotatedSample::make(std::string id, std::vector<double> features,
                                      std::vector<Annotation> annotations) {
  if (annotations.size() != kAnnotatorsPerSample)
    throw IngestError("sample '" + id + "' has " + std::to_string(annotations.size()) +
                      " annotations, expected " + std::to_string(kAnnotatorsPerSample));
  for (const auto& a : annotations)
    if (a.answer.empty()) throw IngestError("sample '" + id + "' has an empty answer");
  return AnnotatedSample{std::move(id), std::move(features), std::move(annotations)};
}

std::vector<AnswerStat> answer_stats(const AnnotatedSample& sample) {
  std::vector<AnswerStat> stats;
  std::vector<double> sums;
  for (const auto& a : sample.annotations) {
    auto it = std::find_if(stats.begin(), stats.end(),
                           [&](const AnswerStat& s) { return s.answer == a.answer; });
    if (it == stats.end()) {
      stats.push_back(AnswerStat{a.answer, 0, 0.0});
      sums.push_back(0.0);
      it = stats.end() - 1;
    }
    const auto idx = static_cast<std::size_t>(it - stats.begin());
    ++it->count;
    sums[idx] += map_confidence(a.confidence);
  }
  for (std::size_t i = 0; i < stats.size(); ++i)
    stats[i].haconf = sums[i] / static_cast<double>(stats[i].count);
  return stats;
}

double haconf(const AnnotatedSample& sample, std::string_view answer) {
  const std::string key = normalize_answer(answer);
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& a : sample.annotations) {
    if (a.answer != key) continue;
    sum += map_confidence(a.confidence);
    ++count;
  }
  if (count == 0) throw NoSuchAnswer(key);
  return sum / static_cast<double>(count);
}

double haconf_or_zero(const AnnotatedSample& sample, std::string_view answer) noexcept {
  try {
    return haconf(sample, answer);
  } catch (const NoSuchAnswer&) {
    return 0.0;
  }
}

double hud(const AnnotatedSample& sample) {
  const auto stats = answer_stats(sample);
  if (stats.empty()) throw std::invalid_argument("hud: sample '" + sample.id + "' has no annotations");
  // Sum in sorted order so the value is independent of annotation order.
  std::vector<double> values;
  values.reserve(stats.size());
  for (const auto& s : stats) values.push_back(s.haconf);
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

std::string majority_answer(const AnnotatedSample& sample) {
  const auto stats = answer_stats(sample);
  if (stats.empty()) throw std::invalid_argument("majority_answer: no annotations");
  const AnswerStat* best = &stats.front();
  for (const auto& s : stats)
    if (s.count > best->count || (s.count == best->count && s.answer < best->answer)) best = &s;
  return best->answer;
}

AnswerDistribution::AnswerDistribution(std::vector<std::string> answers, std::vector<double> weights)
    : answers_(std::move(answers)), weights_(std::move(weights)) {
  if (answers_.empty()) throw std::invalid_argument("AnswerDistribution: empty support");
  if (answers_.size() != weights_.size())
    throw std::invalid_argument("AnswerDistribution: answers/weights length mismatch");
  std::unordered_set<std::string> seen;
  double total = 0.0;
  for (std::size_t i = 0; i < answers_.size(); ++i) {
    if (!seen.insert(answers_[i]).second)
      throw std::invalid_argument("AnswerDistribution: duplicate answer '" + answers_[i] + "'");
    if (!(weights_[i] >= 0.0) || !std::isfinite(weights_[i]))
      throw std::invalid_argument("AnswerDistribution: negative or non-finite weight");
    total += weights_[i];
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("AnswerDistribution: weights sum to " + std::to_string(total));
}

AnswerDistribution human_distribution(const AnnotatedSample& sample) {
  const auto stats = answer_stats(sample);
  double total = 0.0;
  for (const auto& s : stats) total += s.haconf;
  std::vector<std::string> answers;
  std::vector<double> weights;
  for (const auto& s : stats) {
    answers.push_back(s.answer);
    weights.push_back(s.haconf / total);
  }
  return AnswerDistribution(std::move(answers), std::move(weights));
}

std::string_view to_string(HULevel level) noexcept {
  switch (level) {
    case HULevel::low:
      return "low";
    case HULevel::medium:
      return "medium";
    case HULevel::high:
      return "high";
  }
  return "medium";
}

HULevel parse_hu_level(std::string_view token) {
  if (token == "low") return HULevel::low;
  if (token == "medium") return HULevel::medium;
  if (token == "high") return HULevel::high;
  throw std::invalid_argument("unknown HU stratum '" + std::string(token) + "'");
}

HULevel classify_hud(double hud_value) {
  if (!(hud_value >= 0.01 - 1e-12 && hud_value <= 0.99 + 1e-12))
    throw std::logic_error("HUD " + std::to_string(hud_value) + " outside [0.01, 0.99]");
  if (hud_value >= 0.66) return HULevel::low;
  if (hud_value > 0.33) return HULevel::medium;
  return HULevel::high;
}

const std::vector<AnnotatedSample>& Strata::at(HULevel level) const {
  switch (level) {
    case HULevel::low:
      return low;
    case HULevel::medium:
      return medium;
    case HULevel::high:
      return high;
  }
  return medium;
}

Strata stratify(const std::vector<AnnotatedSample>& samples) {
  if (samples.empty()) throw std::invalid_argument("stratify: empty dataset");
  Strata out;
  for (const auto& s : samples) {
    switch (hu_level(s)) {
      case HULevel::low:
        out.low.push_back(s);
        break;
      case HULevel::medium:
        out.medium.push_back(s);
        break;
      case HULevel::high:
        out.high.push_back(s);
        break;
    }
  }
  return out;
}

Dataset Dataset::make(std::vector<AnnotatedSample> samples) {
  Dataset ds;
  if (!samples.empty()) ds.dim = samples.front().features.size();
  for (const auto& s : samples)
    if (s.features.size() != ds.dim)
      throw DimensionError("sample '" + s.id + "' has " + std::to_string(s.features.size()) +
                           " features, dataset dimension is " + std::to_string(ds.dim));
  ds.samples = std::move(samples);
  return ds;
}

std::vector<std::string> Dataset::vocabulary() const {
  std::set<std::string> answers;
  for (const auto& s : samples)
    for (const auto& a : s.annotations) answers.insert(a.answer);
  return {answers.begin(), answers.end()};
}

}  // namespace hadola
