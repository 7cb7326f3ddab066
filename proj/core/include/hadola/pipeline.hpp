#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hadola/annotations.hpp"
#include "hadola/metrics.hpp"
#include "hadola/model.hpp"

namespace hadola {

// Selection and filtering thresholds, computed once from the seed set.
struct Thresholds {
  double tau1 = 0.0;   // mean KL on low-HU seed samples (nats)
  double tau2 = 0.0;   // mean KL on medium-HU seed samples (nats)
  double sigma = 0.0;  // population std of the pooled low + medium KL values
  ConfidenceProfile h_omega;
  double tau_g = 0.0;  // mean gradient consistency on low + medium seed samples
  double tau_t = 0.0;  // mean TracIn-mini score on low + medium seed samples
  bool swapped = false;  // tau1 > tau2 was observed and the pair was swapped

  double lower() const noexcept { return tau1 - sigma; }
  double upper() const noexcept { return tau2 + sigma; }
  // Closed window [tau1 - sigma, tau2 + sigma].
  bool admits(double kl_u) const noexcept { return kl_u >= lower() && kl_u <= upper(); }
  // Upper bound on the L1 distance between a retained profile and h_omega.
  double pinsker_bound() const noexcept;
  bool keeps(double s_g, double s_tracin) const noexcept {
    return s_g >= tau_g && s_tracin <= tau_t;
  }
};

enum class WeightMode { fixed, normalized };

struct PipelineConfig {
  double seed_fraction = 0.05;
  double per_round_fraction = 0.01;
  std::size_t rounds = 10;
  LossWeights weights{0.3, 0.7};
  // `normalized` replaces `weights` by normalize_weights() of the initial batch
  // means, multiplied by the scales below.
  WeightMode weight_mode = WeightMode::fixed;
  double beta_scale = 1.0;
  double lambda_scale = 1.0;
  double learning_rate = 0.1;
  std::size_t epochs = 100;
  double validation_fraction = 0.2;
  std::uint64_t seed = 7;
  // Re-verifies the Pinsker window and the keep rule at runtime.
  bool audit = false;
  // Writes measured wall-clock time into history records (0 otherwise).
  bool record_wall_time = false;

  // Throws ConfigError.
  void validate() const;
};

PipelineConfig config_from_json(std::string_view text);
std::string config_to_json(const PipelineConfig& config, int indent = 2);

// An S_r entry: the pipeline never sees its human annotations.
struct UnlabeledItem {
  std::string id;
  std::vector<double> features;
};

// S_0, split into the part used for training and g_ref and the held-out part
// used for the validation loss.
struct SeedSplit {
  std::vector<AnnotatedSample> train;
  std::vector<AnnotatedSample> validation;

  std::vector<AnnotatedSample> all() const;
};

struct PseudoPair {
  std::string id;
  std::vector<double> features;
  std::size_t label = 0;
  std::size_t birth_round = 0;
  double s_g = 0.0;
  double s_tracin = 0.0;
};

struct DiscriminateRecord {
  std::string id;
  double kl_u = 0.0;
  double l1_to_anchor = 0.0;
  bool retained = false;
};

struct TriggerRecord {
  std::string id;
  std::size_t label = 0;
  double s_g = 0.0;
  double s_tracin = 0.0;
  bool kept = false;
};

struct RoundAudit {
  std::size_t round = 0;
  std::vector<DiscriminateRecord> discriminate;
  std::vector<TriggerRecord> trigger;
};

struct RoundRecord {
  std::size_t t = 0;
  std::size_t n_candidates = 0;
  std::size_t n_retained = 0;
  std::size_t n_kept = 0;
  std::size_t n_pseudo_total = 0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  double final_loss = 0.0;
  EvalReport eval;
  double wall_ms = 0.0;
};

struct PipelineState {
  PipelineConfig config;
  std::size_t round = 0;
  SurrogateModel hu_model;  // frozen M_HU
  SurrogateModel theta0;    // M_0 snapshot
  SurrogateModel current;   // M_t
  SeedSplit seed;
  std::vector<UnlabeledItem> pool;  // S_r minus kept pseudo pairs
  std::size_t per_round_count = 0;
  std::vector<PseudoPair> pseudo;   // cumulative, only grows
  Thresholds thresholds;
  LossWeights weights;              // effective loss weights
  std::mt19937_64 rng;
  std::vector<RoundAudit> audit;
};

// Sorted union of answers in `dataset` and `extra`.
std::vector<std::string> closed_vocabulary(const Dataset& dataset,
                                           const std::vector<AnnotatedSample>& extra = {});

// Splits the dataset into S_0 / S_r, fits M_HU on the seed training portion with
// CE only, and computes thresholds. `vocab` defaults to the dataset vocabulary.
PipelineState initialize(const Dataset& dataset, const PipelineConfig& config,
                         std::vector<std::string> vocab = {});

struct KlWindow {
  double tau1 = 0.0;
  double tau2 = 0.0;
  double sigma = 0.0;
  bool swapped = false;
};

// Means of the low and medium KL values and the population std of both pooled.
// Swaps tau1 and tau2 if tau1 > tau2.
KlWindow kl_window(std::span<const double> low_kl, std::span<const double> medium_kl);

// Thresholds from M_HU on the seed set. Throws SeedStratumError if the seed has
// no low or no medium sample.
Thresholds compute_thresholds(const SurrogateModel& hu_model, const SeedSplit& seed);

// D_KL(h_omega || canonical profile of the model's full-vocab distribution).
double kl_to_anchor(const SurrogateModel& model, std::span<const double> features,
                    const ConfidenceProfile& h_omega);

struct DiscriminateResult {
  std::vector<UnlabeledItem> retained;
  std::vector<DiscriminateRecord> records;
};

DiscriminateResult discriminate(const SurrogateModel& model, std::span<const UnlabeledItem> candidates,
                                const Thresholds& thresholds);

// Pseudo label = argmax of the full-vocab distribution, ties to the
// lexicographically smallest class name.
std::size_t pseudo_label(const SurrogateModel& model, std::span<const double> features);
std::vector<PseudoPair> self_annotate(const SurrogateModel& prev, std::span<const UnlabeledItem> retained,
                                      std::size_t round = 0);

// Reference quantities shared by every pair scored against the same checkpoints.
struct TriggerContext {
  const SurrogateModel* theta0 = nullptr;
  const SurrogateModel* theta_t = nullptr;
  GradientVector g_ref;        // mean CE gradient over seed training portion at theta_t
  GradientVector val_grad_0;   // gradient of mean validation CE at theta0
  GradientVector val_grad_t;   // gradient of mean validation CE at theta_t
};

TriggerContext make_trigger_context(const SurrogateModel& theta0, const SurrogateModel& theta_t,
                                    const SeedSplit& seed);
double gradient_consistency(const TriggerContext& ctx, std::span<const double> features,
                            std::size_t label);
double tracin_mini(const TriggerContext& ctx, std::span<const double> features, std::size_t label);

struct ErrorTriggerResult {
  std::vector<PseudoPair> kept;
  std::vector<TriggerRecord> records;
};

ErrorTriggerResult error_trigger(std::span<const PseudoPair> pairs, const SurrogateModel& theta0,
                                 const SurrogateModel& theta_t, const SeedSplit& seed,
                                 const Thresholds& thresholds);

// One full round: discriminate, self-annotate, error trigger, train.
RoundRecord run_round(PipelineState& state, const std::vector<AnnotatedSample>& eval_set);

struct RunResult {
  SurrogateModel final_model;
  PipelineState state;
  EvalReport initial_eval;
  std::vector<RoundRecord> history;
};

// Empty `eval_set` evaluates on the full dataset.
RunResult run(const Dataset& dataset, const PipelineConfig& config,
              const std::vector<AnnotatedSample>& eval_set = {});

std::string history_to_json(const RunResult& result);
// One line per scored sample: {round, id, stage, kl_u | s_g + s_tracin, decision}.
std::string audit_to_jsonl(const std::vector<RoundAudit>& audit);

// CE-only training on a random `fraction` of the dataset, drawn with the same
// split as initialize() so fraction == seed_fraction reproduces S_0. With a
// stratum, the dataset is first restricted to that HU stratum.
SurrogateModel baseline_sft(const Dataset& dataset, const PipelineConfig& config, double fraction,
                            std::optional<HULevel> stratum = std::nullopt,
                            std::vector<std::string> vocab = {});

enum class SelectionStrategy { least_confidence, random };

struct ActiveLearningResult {
  SurrogateModel model;
  std::vector<std::vector<std::string>> selected;  // ids per round
};

// Seed-only SFT, then per round: pick the lowest max-probability items from
// the pool (or random ones), label them with the human majority answer and
// continue CE training on the grown labeled set.
ActiveLearningResult baseline_active_learning(const Dataset& dataset, const PipelineConfig& config,
                                              SelectionStrategy strategy = SelectionStrategy::least_confidence,
                                              std::vector<std::string> vocab = {});

}  // namespace hadola
