#include "hadola/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_set>

#include "hadola/error.hpp"
#include "hadola/numeric.hpp"
#include "hadola/parallel.hpp"

namespace hadola {
namespace {

void check_features(const SurrogateModel& model, std::span<const double> features) {
  if (features.size() != model.dim())
    throw DimensionError("expected " + std::to_string(model.dim()) + " features, got " +
                         std::to_string(features.size()));
}

void check_same_vocab(const SurrogateModel& a, const SurrogateModel& b) {
  if (a.dim() != b.dim() || a.vocab() != b.vocab())
    throw VocabError("model and reference model do not share vocabulary and dimension");
}

std::vector<double> logits_of(const SurrogateModel& model, std::span<const double> features) {
  const std::size_t d = model.dim();
  const std::size_t stride = model.row_stride();
  const auto w = model.weights();
  std::vector<double> z(model.num_classes());
  for (std::size_t c = 0; c < z.size(); ++c) {
    const double* row = w.data() + c * stride;
    double s = row[d];
    for (std::size_t k = 0; k < d; ++k) s += row[k] * features[k];
    z[c] = s;
  }
  return z;
}

std::vector<double> gather(std::span<const double> v, std::span<const std::size_t> idx) {
  std::vector<double> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = v[idx[i]];
  return out;
}

// sum h ln(h / p) over entries with h > 0.
double kl_raw(std::span<const double> h, std::span<const double> p) {
  double s = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i)
    if (h[i] > 0.0) s += h[i] * std::log(h[i] / p[i]);
  return s;
}

struct Pieces {
  std::vector<double> dist;        // full-vocab model distribution
  std::vector<double> restricted;  // model distribution on the support
  std::vector<double> hu_restricted;
};

std::vector<std::size_t> support_of(const SurrogateModel& model, const Example& ex) {
  if (!ex.support.empty()) return ex.support;
  std::vector<std::size_t> all(model.num_classes());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return all;
}

Pieces compute_pieces(const SurrogateModel& model, const SurrogateModel& hu_model, const Example& ex,
                      std::span<const std::size_t> support) {
  Pieces p;
  const auto z = logits_of(model, ex.features);
  p.dist = softmax(z);
  p.restricted = softmax(gather(z, support));
  p.hu_restricted = softmax(gather(logits_of(hu_model, ex.features), support));
  return p;
}

LossTerms loss_unchecked(const SurrogateModel& model, const SurrogateModel& hu_model, const Example& ex,
                         const LossWeights& w) {
  const auto support = support_of(model, ex);
  const Pieces p = compute_pieces(model, hu_model, ex, support);
  LossTerms t;
  t.ce = -std::log(p.dist[ex.label]);
  t.phi = kl_raw(p.hu_restricted, p.restricted);
  if (ex.has_human()) t.align = kl_raw(ex.human, p.restricted) - kl_raw(ex.human, p.hu_restricted);
  t.total = t.ce + w.beta * t.phi + w.lambda * t.align;
  return t;
}

// d loss / d logits, then the outer product with [x; 1].
GradientVector grad_unchecked(const SurrogateModel& model, const SurrogateModel& hu_model, const Example& ex,
                              const LossWeights& w) {
  const auto support = support_of(model, ex);
  const Pieces p = compute_pieces(model, hu_model, ex, support);

  std::vector<double> dz = p.dist;
  dz[ex.label] -= 1.0;
  for (std::size_t i = 0; i < support.size(); ++i) {
    // d KL(q || softmax(z_S)) / d z_j = r_j - q_j for any q on the simplex.
    double extra = w.beta * (p.restricted[i] - p.hu_restricted[i]);
    if (ex.has_human()) extra += w.lambda * (p.restricted[i] - ex.human[i]);
    dz[support[i]] += extra;
  }

  const std::size_t d = model.dim();
  const std::size_t stride = model.row_stride();
  GradientVector g(model.num_parameters());
  for (std::size_t c = 0; c < dz.size(); ++c) {
    double* row = g.data() + c * stride;
    for (std::size_t k = 0; k < d; ++k) row[k] = dz[c] * ex.features[k];
    row[d] = dz[c];
  }
  return g;
}

void check_example(const SurrogateModel& model, const Example& ex) {
  check_features(model, ex.features);
  if (ex.label >= model.num_classes()) throw VocabError("label index out of range");
  for (std::size_t s : ex.support)
    if (s >= model.num_classes()) throw VocabError("support index out of range");
  if (ex.has_human() && ex.human.size() != ex.support.size())
    throw VocabError("human distribution is not aligned with the support");
}

}  // namespace

SurrogateModel::SurrogateModel(std::size_t dim, std::vector<std::string> vocab, std::vector<double> weights,
                               std::uint64_t seed)
    : dim_(dim), vocab_(std::move(vocab)), weights_(std::move(weights)), seed_(seed) {
  if (dim_ == 0) throw DimensionError("model dimension must be at least 1");
  if (vocab_.size() < 2) throw VocabError("model needs at least two classes");
  std::unordered_set<std::string> seen;
  for (const auto& v : vocab_)
    if (!seen.insert(v).second) throw VocabError("duplicate vocabulary entry '" + v + "'");
  if (weights_.size() != vocab_.size() * (dim_ + 1))
    throw DimensionError("weight matrix has " + std::to_string(weights_.size()) + " entries, expected " +
                         std::to_string(vocab_.size() * (dim_ + 1)));
  for (double x : weights_)
    if (!std::isfinite(x)) throw std::invalid_argument("non-finite model weight");
}

std::size_t SurrogateModel::class_index(std::string_view answer) const {
  const auto it = std::find(vocab_.begin(), vocab_.end(), answer);
  if (it == vocab_.end()) throw VocabError("answer '" + std::string(answer) + "' is not in the vocabulary");
  return static_cast<std::size_t>(it - vocab_.begin());
}

bool SurrogateModel::has_class(std::string_view answer) const noexcept {
  return std::find(vocab_.begin(), vocab_.end(), answer) != vocab_.end();
}

SurrogateModel init_model(std::size_t dim, std::vector<std::string> vocab, std::uint64_t seed) {
  if (dim == 0) throw DimensionError("model dimension must be at least 1");
  const std::size_t n = vocab.size() * (dim + 1);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-0.01, 0.01);
  std::vector<double> w(n);
  for (double& x : w) x = uni(rng);
  return SurrogateModel(dim, std::move(vocab), std::move(w), seed);
}

ForwardResult forward(const SurrogateModel& model, std::span<const double> features) {
  check_features(model, features);
  ForwardResult r;
  r.logits = logits_of(model, features);
  r.dist = softmax(r.logits);
  return r;
}

std::vector<double> restricted_logits(const SurrogateModel& model, const AnnotatedSample& sample) {
  check_features(model, sample.features);
  const auto z = logits_of(model, sample.features);
  std::vector<double> out;
  for (const auto& s : answer_stats(sample)) out.push_back(z[model.class_index(s.answer)]);
  return out;
}

AnswerDistribution restricted_distribution(const SurrogateModel& model, const AnnotatedSample& sample) {
  const auto z = restricted_logits(model, sample);
  std::vector<std::string> answers;
  for (const auto& s : answer_stats(sample)) answers.push_back(s.answer);
  return AnswerDistribution(std::move(answers), softmax(z));
}

Example labeled_example(const SurrogateModel& model, const AnnotatedSample& sample) {
  check_features(model, sample.features);
  Example ex;
  ex.features = sample.features;
  ex.label = model.class_index(majority_answer(sample));
  const auto h = human_distribution(sample);
  for (const auto& a : h.answers()) ex.support.push_back(model.class_index(a));
  ex.human = h.weights();
  return ex;
}

Example plain_example(const SurrogateModel& model, const AnnotatedSample& sample) {
  check_features(model, sample.features);
  return pseudo_example(sample.features, model.class_index(majority_answer(sample)));
}

Example pseudo_example(std::vector<double> features, std::size_t label) {
  Example ex;
  ex.features = std::move(features);
  ex.label = label;
  return ex;
}

double loss_ce(const SurrogateModel& model, std::span<const double> features, std::size_t label) {
  const auto f = forward(model, features);
  if (label >= f.dist.size()) throw VocabError("label index out of range");
  return -std::log(f.dist[label]);
}

LossTerms loss_hadola(const SurrogateModel& model, const SurrogateModel& hu_model, const Example& example,
                      const LossWeights& weights) {
  check_same_vocab(model, hu_model);
  check_example(model, example);
  return loss_unchecked(model, hu_model, example, weights);
}

GradientVector grad(const SurrogateModel& model, const SurrogateModel& hu_model, const Example& example,
                    const LossWeights& weights) {
  check_same_vocab(model, hu_model);
  check_example(model, example);
  return grad_unchecked(model, hu_model, example, weights);
}

GradientVector grad_ce(const SurrogateModel& model, std::span<const double> features, std::size_t label) {
  const Example ex = pseudo_example({features.begin(), features.end()}, label);
  check_example(model, ex);
  return grad_unchecked(model, model, ex, LossWeights{0.0, 0.0});
}

GradientVector batch_grad(const SurrogateModel& model, const SurrogateModel& hu_model,
                          std::span<const Example> batch, const LossWeights& weights) {
  check_same_vocab(model, hu_model);
  for (const auto& ex : batch) check_example(model, ex);
  std::vector<GradientVector> per(batch.size());
  parallel_for(batch.size(), [&](std::size_t i) { per[i] = grad_unchecked(model, hu_model, batch[i], weights); });
  GradientVector total(model.num_parameters(), 0.0);
  for (const auto& g : per)
    for (std::size_t k = 0; k < total.size(); ++k) total[k] += g[k];
  return total;
}

TrainResult train(const SurrogateModel& model, std::span<const Example> batch, const SurrogateModel& hu_model,
                  const LossWeights& weights, const TrainOptions& options) {
  if (!(options.learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  check_same_vocab(model, hu_model);
  for (const auto& ex : batch) check_example(model, ex);

  TrainResult result{model, {}};
  if (batch.empty() || options.epochs == 0) return result;

  const auto n = static_cast<double>(batch.size());
  std::vector<double> losses(batch.size());
  std::vector<GradientVector> per(batch.size());
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    const SurrogateModel& cur = result.model;
    parallel_for(batch.size(), [&](std::size_t i) {
      losses[i] = loss_unchecked(cur, hu_model, batch[i], weights).total;
      per[i] = grad_unchecked(cur, hu_model, batch[i], weights);
    });
    double loss_sum = 0.0;
    for (double l : losses) loss_sum += l;
    const double mean_loss = loss_sum / n;
    if (!std::isfinite(mean_loss)) throw DivergedError(epoch);
    result.epoch_losses.push_back(mean_loss);

    GradientVector total(cur.num_parameters(), 0.0);
    for (const auto& g : per)
      for (std::size_t k = 0; k < total.size(); ++k) total[k] += g[k];
    auto w = result.model.mutable_weights();
    for (std::size_t k = 0; k < w.size(); ++k) w[k] -= options.learning_rate * (total[k] / n);
    for (double x : w)
      if (!std::isfinite(x)) throw DivergedError(epoch);
  }
  return result;
}

LossWeights normalize_weights(double a0, double r0, double c0, double eps) {
  return LossWeights{a0 / (r0 + eps), a0 / (std::abs(c0) + eps)};
}

std::vector<LossWeights> weight_grid(const LossWeights& normalized) {
  static constexpr double kScales[] = {0.3, 1.0, 3.0};
  std::vector<LossWeights> grid;
  for (double bs : kScales)
    for (double ls : kScales) grid.push_back(LossWeights{bs * normalized.beta, ls * normalized.lambda});
  return grid;
}

}  // namespace hadola
