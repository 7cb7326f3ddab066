#include "hadola/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "hadola/error.hpp"
#include "hadola/numeric.hpp"
#include "hadola/parallel.hpp"
#include "json_detail.hpp"

namespace hadola {

double vqa_acc(std::string_view model_answer, const AnnotatedSample& sample) {
  const std::string key = normalize_answer(model_answer);
  std::size_t count = 0;
  for (const auto& a : sample.annotations)
    if (a.answer == key) ++count;
  return std::min(static_cast<double>(count) / 3.0, 1.0);
}

double hu_acc(std::string_view model_answer, const AnnotatedSample& sample) {
  return haconf_or_zero(sample, model_answer) * vqa_acc(model_answer, sample);
}

double kl_divergence(std::span<const double> h, std::span<const double> p) {
  if (h.size() != p.size())
    throw SupportMismatch("KL operands have lengths " + std::to_string(h.size()) + " and " +
                          std::to_string(p.size()));
  double s = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (h[i] <= 0.0) continue;
    if (p[i] <= 0.0) return std::numeric_limits<double>::infinity();
    s += h[i] * std::log(h[i] / p[i]);
  }
  return std::max(s, 0.0);
}

double kl_divergence(const AnswerDistribution& h, const AnswerDistribution& p) {
  if (h.answers() != p.answers()) throw SupportMismatch("KL operands are not aligned on the same answers");
  return kl_divergence(std::span<const double>(h.weights()), std::span<const double>(p.weights()));
}

AlignedPair align_support(const AnswerDistribution& h, const AnswerDistribution& model_dist, double floor) {
  std::vector<std::string> answers = h.answers();
  for (const auto& a : model_dist.answers())
    if (std::find(answers.begin(), answers.end(), a) == answers.end()) answers.push_back(a);

  std::vector<double> hw(answers.size(), 0.0);
  std::vector<double> pw(answers.size(), 0.0);
  std::copy(h.weights().begin(), h.weights().end(), hw.begin());
  bool adjusted = false;
  for (std::size_t i = 0; i < answers.size(); ++i) {
    const auto it = std::find(model_dist.answers().begin(), model_dist.answers().end(), answers[i]);
    double v = 0.0;
    if (it != model_dist.answers().end())
      v = model_dist.weights()[static_cast<std::size_t>(it - model_dist.answers().begin())];
    if (v <= 0.0) {
      v = floor;
      adjusted = true;
    }
    pw[i] = v;
  }
  if (adjusted) {
    double total = 0.0;
    for (double v : pw) total += v;
    for (double& v : pw) v /= total;
  }
  return AlignedPair{AnswerDistribution(answers, std::move(hw)), AnswerDistribution(answers, std::move(pw))};
}

ConfidenceProfile canonical_profile(std::span<const double> weights, std::size_t k) {
  if (k == 0) throw std::invalid_argument("profile length must be at least 1");
  std::vector<double> v(weights.begin(), weights.end());
  std::sort(v.begin(), v.end(), std::greater<>());
  v.resize(k, 0.0);
  double total = 0.0;
  for (double x : v) total += x;
  if (total > 0.0)
    for (double& x : v) x /= total;
  return ConfidenceProfile{std::move(v)};
}

ConfidenceProfile mean_profile(std::span<const ConfidenceProfile> profiles) {
  if (profiles.empty()) throw std::invalid_argument("mean of zero profiles");
  const std::size_t k = profiles.front().values.size();
  std::vector<double> column(profiles.size());
  std::vector<double> mean(k);
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < profiles.size(); ++i) {
      if (profiles[i].values.size() != k) throw std::invalid_argument("profiles of different lengths");
      column[i] = profiles[i].values[j];
    }
    mean[j] = stable_mean(column);
  }
  return canonical_profile(mean, k);
}

std::vector<double> temperature_scale(std::span<const double> logits, double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) throw InvalidTemperature(temperature);
  std::vector<double> scaled(logits.begin(), logits.end());
  for (double& z : scaled) z /= temperature;
  return softmax(scaled);
}

std::string predict_answer(const AnswerDistribution& restricted) {
  const auto& w = restricted.weights();
  const auto& a = restricted.answers();
  std::size_t best = 0;
  for (std::size_t i = 1; i < w.size(); ++i)
    if (w[i] > w[best] || (w[i] == w[best] && a[i] < a[best])) best = i;
  return a[best];
}

const std::optional<StratumReport>& EvalReport::stratum(HULevel level) const {
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

namespace {

struct SampleScore {
  HULevel level = HULevel::low;
  double vqa = 0.0;
  double hu = 0.0;
  double kl = 0.0;
};

StratumReport summarize(const std::vector<const SampleScore*>& scores) {
  StratumReport r;
  r.n = scores.size();
  std::vector<double> vqa, hu, kl;
  for (const auto* s : scores) {
    vqa.push_back(s->vqa);
    hu.push_back(s->hu);
    kl.push_back(s->kl);
  }
  r.vqa_acc_mean = stable_mean(vqa);
  r.hu_acc_mean = stable_mean(hu);
  r.kl_mean = stable_mean(kl);
  return r;
}

}  // namespace

EvalReport evaluate(const SurrogateModel& model, const std::vector<AnnotatedSample>& samples, double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) throw InvalidTemperature(temperature);
  for (const auto& s : samples)
    if (s.features.size() != model.dim())
      throw DimensionError("sample '" + s.id + "' has " + std::to_string(s.features.size()) +
                           " features, model expects " + std::to_string(model.dim()));

  std::vector<SampleScore> scores(samples.size());
  parallel_for(samples.size(), [&](std::size_t i) {
    const auto& s = samples[i];
    const auto logits = restricted_logits(model, s);
    const auto dist_w = temperature_scale(logits, temperature);
    std::vector<std::string> answers;
    for (const auto& st : answer_stats(s)) answers.push_back(st.answer);
    const AnswerDistribution dist(std::move(answers), dist_w);
    const std::string answer = predict_answer(dist);
    const auto aligned = align_support(human_distribution(s), dist);
    scores[i] = SampleScore{hu_level(s), vqa_acc(answer, s), hu_acc(answer, s),
                            kl_divergence(aligned.h, aligned.p)};
  });

  EvalReport report;
  report.temperature = temperature;
  report.n = samples.size();
  if (samples.empty()) return report;

  std::vector<const SampleScore*> all, by_level[3];
  for (const auto& sc : scores) {
    all.push_back(&sc);
    by_level[static_cast<int>(sc.level)].push_back(&sc);
  }
  const auto overall = summarize(all);
  report.vqa_acc_mean = overall.vqa_acc_mean;
  report.hu_acc_mean = overall.hu_acc_mean;
  report.kl_mean = overall.kl_mean;
  std::optional<StratumReport>* slots[3] = {&report.low, &report.medium, &report.high};
  for (int l = 0; l < 3; ++l)
    if (!by_level[l].empty()) *slots[l] = summarize(by_level[l]);
  return report;
}

namespace {

nlohmann::json stratum_json(const std::optional<StratumReport>& s) {
  if (!s) return nullptr;
  return {{"n", s->n}, {"vqa_acc_mean", s->vqa_acc_mean}, {"hu_acc_mean", s->hu_acc_mean}, {"kl_mean", s->kl_mean}};
}

}  // namespace

namespace detail {

nlohmann::json eval_report_json(const EvalReport& report) {
  return {{"n", report.n},
          {"vqa_acc_mean", report.vqa_acc_mean},
          {"hu_acc_mean", report.hu_acc_mean},
          {"kl_mean", report.kl_mean},
          {"temperature", report.temperature},
          {"strata",
           {{"low", stratum_json(report.low)},
            {"medium", stratum_json(report.medium)},
            {"high", stratum_json(report.high)}}}};
}

}  // namespace detail

std::string eval_report_to_json(const EvalReport& report, int indent) {
  return detail::eval_report_json(report).dump(indent);
}

std::string eval_report_to_csv(const EvalReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "stratum,n,vqa_acc,hu_acc,kl\n";
  out << "all," << report.n << ',' << report.vqa_acc_mean << ',' << report.hu_acc_mean << ',' << report.kl_mean
      << '\n';
  for (HULevel level : {HULevel::low, HULevel::medium, HULevel::high}) {
    const auto& s = report.stratum(level);
    out << to_string(level) << ',';
    if (s)
      out << s->n << ',' << s->vqa_acc_mean << ',' << s->hu_acc_mean << ',' << s->kl_mean << '\n';
    else
      out << "0,,,\n";
  }
  return out.str();
}

}  // namespace hadola
