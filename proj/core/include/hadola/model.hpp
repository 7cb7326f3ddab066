#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hadola/annotations.hpp"

namespace hadola {

// Softmax classifier over feature vectors. Weights are a row-major
// C x (D + 1) matrix; the last column is the bias.
class SurrogateModel {
 public:
  SurrogateModel(std::size_t dim, std::vector<std::string> vocab, std::vector<double> weights,
                 std::uint64_t seed);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t num_classes() const noexcept { return vocab_.size(); }
  std::size_t row_stride() const noexcept { return dim_ + 1; }
  std::size_t num_parameters() const noexcept { return weights_.size(); }
  std::uint64_t seed() const noexcept { return seed_; }

  const std::vector<std::string>& vocab() const noexcept { return vocab_; }
  std::span<const double> weights() const noexcept { return weights_; }
  std::span<double> mutable_weights() noexcept { return weights_; }

  // Throws VocabError for unknown answers.
  std::size_t class_index(std::string_view answer) const;
  bool has_class(std::string_view answer) const noexcept;

  bool operator==(const SurrogateModel&) const = default;

 private:
  std::size_t dim_;
  std::vector<std::string> vocab_;
  std::vector<double> weights_;
  std::uint64_t seed_;
};

// Uniform weights in [-0.01, 0.01] from a fixed-seed generator.
// Throws DimensionError for D == 0 and VocabError for |vocab| < 2 or duplicates.
SurrogateModel init_model(std::size_t dim, std::vector<std::string> vocab, std::uint64_t seed);

struct ForwardResult {
  std::vector<double> logits;
  std::vector<double> dist;
};

ForwardResult forward(const SurrogateModel& model, std::span<const double> features);

// Logits of the sample's distinct answers, in first-occurrence order.
std::vector<double> restricted_logits(const SurrogateModel& model, const AnnotatedSample& sample);
// Softmax over the sample's distinct answers only.
AnswerDistribution restricted_distribution(const SurrogateModel& model, const AnnotatedSample& sample);

struct LossWeights {
  double beta = 0.3;
  double lambda = 0.7;
};

// A training target. `support` lists the class indices the regularization
// terms are computed on (the sample's answers for human-labeled data; empty
// means the full vocabulary). `human` is H(s) aligned with `support`; empty for
// pseudo-labeled pairs, which switches the alignment term off.
struct Example {
  std::vector<double> features;
  std::size_t label = 0;
  std::vector<std::size_t> support;
  std::vector<double> human;

  bool has_human() const noexcept { return !human.empty(); }
};

// Human-labeled example: majority answer as label, H(s) on the answer set.
Example labeled_example(const SurrogateModel& model, const AnnotatedSample& sample);
// CE-only view of a human-labeled sample (no support, no H).
Example plain_example(const SurrogateModel& model, const AnnotatedSample& sample);
Example pseudo_example(std::vector<double> features, std::size_t label);

double loss_ce(const SurrogateModel& model, std::span<const double> features, std::size_t label);

struct LossTerms {
  double total = 0.0;
  double ce = 0.0;
  double phi = 0.0;
  double align = 0.0;
};

// CE + beta * KL(M_HU || M_theta) + lambda * (KL(H || M_theta) - KL(H || M_HU)).
LossTerms loss_hadola(const SurrogateModel& model, const SurrogateModel& hu_model,
                      const Example& example, const LossWeights& weights);

using GradientVector = std::vector<double>;

// Exact gradient of loss_hadola with respect to model weights (hu_model fixed).
GradientVector grad(const SurrogateModel& model, const SurrogateModel& hu_model,
                    const Example& example, const LossWeights& weights);
// Gradient of the cross-entropy term alone.
GradientVector grad_ce(const SurrogateModel& model, std::span<const double> features,
                       std::size_t label);
// Sum of per-example gradients, accumulated in batch order.
GradientVector batch_grad(const SurrogateModel& model, const SurrogateModel& hu_model,
                          std::span<const Example> batch, const LossWeights& weights);

struct TrainOptions {
  double learning_rate = 0.1;
  std::size_t epochs = 100;
  std::uint64_t seed = 0;
};

struct TrainResult {
  SurrogateModel model;
  // Mean total loss over the batch at the start of each epoch.
  std::vector<double> epoch_losses;
};

// Full-batch gradient descent on the mean HaDola loss. Throws DivergedError
// on a non-finite loss and VocabError if the two models disagree on vocab.
TrainResult train(const SurrogateModel& model, std::span<const Example> batch,
                  const SurrogateModel& hu_model, const LossWeights& weights,
                  const TrainOptions& options);

// beta0 = A0 / (R0 + eps), lambda0 = A0 / (|C0| + eps).
LossWeights normalize_weights(double a0, double r0, double c0, double eps = 1e-8);

// {0.3, 1, 3} x {0.3, 1, 3} around a normalized pair.
std::vector<LossWeights> weight_grid(const LossWeights& normalized);

// Checkpoints: {"vocab", "D", "C", "seed", "weights"} with weights as hex-float
// strings, so a round trip is bit-exact.
std::string checkpoint_to_json(const SurrogateModel& model);
SurrogateModel checkpoint_from_json(std::string_view text);
void save_checkpoint(const std::filesystem::path& path, const SurrogateModel& model);
SurrogateModel load_checkpoint(const std::filesystem::path& path);

}  // namespace hadola
