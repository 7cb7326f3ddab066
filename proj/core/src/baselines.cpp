#include <algorithm>
#include <unordered_set>

#include "hadola/error.hpp"
#include "hadola/pipeline.hpp"
#include "split.hpp"

namespace hadola {
namespace {

std::vector<Example> plain_examples(const SurrogateModel& model, const std::vector<AnnotatedSample>& samples) {
  std::vector<Example> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(plain_example(model, s));
  return out;
}

SurrogateModel sft_on(const std::vector<AnnotatedSample>& labeled, std::size_t dim, std::vector<std::string> vocab,
                      const PipelineConfig& config) {
  const SurrogateModel init = init_model(dim, std::move(vocab), config.seed);
  const auto batch = plain_examples(init, labeled);
  return train(init, batch, init, LossWeights{0.0, 0.0},
               TrainOptions{config.learning_rate, config.epochs, config.seed})
      .model;
}

}  // namespace

SurrogateModel baseline_sft(const Dataset& dataset, const PipelineConfig& config, double fraction,
                            std::optional<HULevel> stratum, std::vector<std::string> vocab) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw ConfigError("fraction must be in (0, 1]");
  if (!(config.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (vocab.empty()) vocab = dataset.vocabulary();

  std::vector<AnnotatedSample> pool;
  for (const auto& s : dataset.samples)
    if (!stratum || hu_level(s) == *stratum) pool.push_back(s);
  if (pool.empty()) throw ConfigError("no samples available for SFT");

  std::mt19937_64 rng(config.seed);
  const auto perm = detail::permutation(pool.size(), rng);
  const std::size_t n = std::clamp<std::size_t>(detail::fraction_count(fraction, pool.size()), 1, pool.size());
  std::vector<AnnotatedSample> chosen;
  for (std::size_t i = 0; i < n; ++i) chosen.push_back(pool[perm[i]]);
  return sft_on(chosen, dataset.dim, std::move(vocab), config);
}

ActiveLearningResult baseline_active_learning(const Dataset& dataset, const PipelineConfig& config,
                                              SelectionStrategy strategy, std::vector<std::string> vocab) {
  config.validate();
  const std::size_t n = dataset.samples.size();
  if (n == 0) throw ConfigError("dataset is empty");
  if (vocab.empty()) vocab = dataset.vocabulary();

  std::mt19937_64 rng(config.seed);
  const auto perm = detail::permutation(n, rng);
  const std::size_t n_seed = std::clamp<std::size_t>(detail::fraction_count(config.seed_fraction, n), 1, n);
  std::vector<AnnotatedSample> labeled, pool;
  for (std::size_t i = 0; i < n; ++i) (i < n_seed ? labeled : pool).push_back(dataset.samples[perm[i]]);
  const std::size_t per_round = detail::ceil_count(config.per_round_fraction, pool.size());

  ActiveLearningResult result{sft_on(labeled, dataset.dim, vocab, config), {}};
  for (std::size_t t = 1; t <= config.rounds; ++t) {
    const std::size_t take = std::min(per_round, pool.size());
    // A random order breaks ties among equally confident items.
    auto order = detail::permutation(pool.size(), rng);
    if (strategy == SelectionStrategy::least_confidence) {
      std::vector<double> confidence(pool.size());
      for (std::size_t i = 0; i < pool.size(); ++i) {
        const auto f = forward(result.model, pool[i].features);
        confidence[i] = *std::max_element(f.dist.begin(), f.dist.end());
      }
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return confidence[a] < confidence[b]; });
    }
    std::vector<std::string> ids;
    std::unordered_set<std::size_t> picked;
    for (std::size_t i = 0; i < take; ++i) {
      labeled.push_back(pool[order[i]]);
      ids.push_back(pool[order[i]].id);
      picked.insert(order[i]);
    }
    std::vector<AnnotatedSample> rest;
    for (std::size_t i = 0; i < pool.size(); ++i)
      if (!picked.count(i)) rest.push_back(std::move(pool[i]));
    pool = std::move(rest);
    result.selected.push_back(std::move(ids));

    const auto batch = plain_examples(result.model, labeled);
    result.model = train(result.model, batch, result.model, LossWeights{0.0, 0.0},
                         TrainOptions{config.learning_rate, config.epochs, config.seed + t})
                       .model;
  }
  return result;
}

}  // namespace hadola
