#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "hadola/annotations.hpp"

namespace hadola {

// Annotator simulator. Each sample draws a latent answer distribution p* over
// a random candidate set from Dirichlet(alpha, 1/alpha, ..., 1/alpha): large
// alpha concentrates mass on the first candidate, alpha = 1 is flat and small
// alpha spreads mass over the other candidates.
struct SynthConfig {
  std::size_t n_samples = 2000;
  // Extra samples drawn from the same world for held-out evaluation.
  std::size_t n_eval_samples = 0;
  std::size_t n_classes = 20;
  std::size_t feature_dim = 16;
  std::size_t candidate_set_size = 8;
  std::array<double, 3> mix{0.6, 0.3, 0.1};       // low, medium, high
  std::array<double, 3> alpha{50.0, 2.0, 0.5};    // low, medium, high
  double prototype_scale = 1.0;
  double noise = 5.0;
  std::uint64_t seed = 7;

  // Throws ConfigError.
  void validate() const;
};

SynthConfig synth_config_from_json(std::string_view text);
std::string synth_config_to_json(const SynthConfig& config, int indent = 2);

struct SynthDataset {
  std::vector<AnnotatedSample> samples;
  std::vector<HULevel> intended;  // stratum each sample was drawn for
  std::vector<AnnotatedSample> eval_samples;
  std::vector<HULevel> eval_intended;
};

SynthDataset generate(const SynthConfig& config);

// Sidecar metadata: config echo plus intended and realized stratum counts.
std::string synth_metadata_json(const SynthConfig& config, const SynthDataset& data);

}  // namespace hadola
