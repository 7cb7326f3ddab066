#include "hadola/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include <json.hpp>

#include "hadola/error.hpp"

namespace hadola {

using nlohmann::json;

void SynthConfig::validate() const {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(n_samples >= 1, "n_samples must be at least 1");
  require(n_classes >= 2, "n_classes must be at least 2");
  require(feature_dim >= 1, "feature_dim must be at least 1");
  require(candidate_set_size >= 1 && candidate_set_size <= kAnnotatorsPerSample,
          "candidate_set_size must be in [1, 10]");
  double total = 0.0;
  for (double f : mix) {
    require(f >= 0.0 && f <= 1.0, "stratum fractions must be in [0, 1]");
    total += f;
  }
  require(std::abs(total - 1.0) <= 1e-9, "stratum fractions must sum to 1");
  for (double a : alpha) require(a > 0.0 && std::isfinite(a), "Dirichlet concentrations must be positive");
  require(noise >= 0.0, "noise must be nonnegative");
  require(prototype_scale > 0.0, "prototype_scale must be positive");
}

namespace {

std::array<double, 3> strata_triple(const json& v, const char* name) {
  if (v.is_array()) {
    if (v.size() != 3) throw ConfigError(std::string(name) + " must have three entries");
    return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
  }
  if (v.is_object()) {
    for (const auto& [k, _] : v.items())
      if (k != "low" && k != "medium" && k != "high") throw ConfigError(std::string("unknown key in ") + name);
    return {v.at("low").get<double>(), v.at("medium").get<double>(), v.at("high").get<double>()};
  }
  throw ConfigError(std::string(name) + " must be an array or an object");
}

json triple_json(const std::array<double, 3>& t) {
  return {{"low", t[0]}, {"medium", t[1]}, {"high", t[2]}};
}

std::string class_name(std::size_t c, std::size_t n_classes) {
  const int width = n_classes <= 10 ? 1 : static_cast<int>(std::to_string(n_classes - 1).size());
  char buf[32];
  std::snprintf(buf, sizeof buf, "a%0*zu", width, c);
  return buf;
}

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

constexpr std::uint64_t kPrototypeTag = 0x70726f74;
constexpr std::uint64_t kSampleTag = 0x73616d70;

struct World {
  std::vector<std::vector<double>> prototypes;
  std::vector<std::string> names;
};

World make_world(const SynthConfig& c) {
  World w;
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t k = 0; k < c.n_classes; ++k) {
    auto rng = stream(c.seed, kPrototypeTag, k);
    std::vector<double> p(c.feature_dim);
    for (double& x : p) x = c.prototype_scale * normal(rng);
    w.prototypes.push_back(std::move(p));
    w.names.push_back(class_name(k, c.n_classes));
  }
  return w;
}

std::pair<AnnotatedSample, HULevel> make_sample(const SynthConfig& c, const World& w, std::size_t index) {
  auto rng = stream(c.seed, kSampleTag, index);
  std::uniform_real_distribution<double> uni(0.0, 1.0);

  // (1) stratum
  const double u = uni(rng);
  HULevel level = HULevel::high;
  if (u < c.mix[0]) level = HULevel::low;
  else if (u < c.mix[0] + c.mix[1]) level = HULevel::medium;
  const double a = c.alpha[static_cast<int>(level)];

  // (2) candidate set and latent answer distribution
  const std::size_t k = std::min(c.candidate_set_size, c.n_classes);
  std::vector<std::size_t> classes(c.n_classes);
  for (std::size_t i = 0; i < classes.size(); ++i) classes[i] = i;
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, classes.size() - 1);
    std::swap(classes[i], classes[pick(rng)]);
  }
  classes.resize(k);
  std::vector<double> p(k);
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    std::gamma_distribution<double> gamma(i == 0 ? a : 1.0 / a, 1.0);
    p[i] = gamma(rng);
    total += p[i];
  }
  if (!(total > 0.0) || !std::isfinite(total)) {
    std::fill(p.begin(), p.end(), 0.0);
    p[0] = 1.0;
  } else {
    for (double& x : p) x /= total;
  }

  // (3) annotators
  std::vector<Annotation> anns;
  for (std::size_t n = 0; n < kAnnotatorsPerSample; ++n) {
    const double r = uni(rng);
    std::size_t pick = k - 1;
    double acc = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      acc += p[i];
      if (r < acc) {
        pick = i;
        break;
      }
    }
    const double pa = p[pick];
    const double v = uni(rng);
    ConfidenceLabel conf = ConfidenceLabel::maybe;
    if (v < pa) conf = ConfidenceLabel::yes;
    else if (v < pa + (1.0 - pa) * 0.5) conf = ConfidenceLabel::no;
    anns.push_back(Annotation{w.names[classes[pick]], conf});
  }

  // (4) features around the prototype of the most likely answer
  const std::size_t modal = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
  const double scale = c.noise * (1.0 - p[modal]);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> x = w.prototypes[classes[modal]];
  for (double& xi : x) xi += scale * normal(rng);

  char id[32];
  std::snprintf(id, sizeof id, "syn-%06zu", index);
  return {AnnotatedSample::make(id, std::move(x), std::move(anns)), level};
}

json count_levels(const std::vector<HULevel>& levels) {
  std::size_t n[3] = {0, 0, 0};
  for (HULevel l : levels) ++n[static_cast<int>(l)];
  return {{"low", n[0]}, {"medium", n[1]}, {"high", n[2]}};
}

std::vector<HULevel> realized(const std::vector<AnnotatedSample>& samples) {
  std::vector<HULevel> out;
  for (const auto& s : samples) out.push_back(hu_level(s));
  return out;
}

}  // namespace

SynthConfig synth_config_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("synth config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("synth config must be a JSON object");
  SynthConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "n_samples") c.n_samples = v.get<std::size_t>();
      else if (key == "n_eval_samples") c.n_eval_samples = v.get<std::size_t>();
      else if (key == "n_classes") c.n_classes = v.get<std::size_t>();
      else if (key == "feature_dim") c.feature_dim = v.get<std::size_t>();
      else if (key == "candidate_set_size") c.candidate_set_size = v.get<std::size_t>();
      else if (key == "mix") c.mix = strata_triple(v, "mix");
      else if (key == "alpha") c.alpha = strata_triple(v, "alpha");
      else if (key == "prototype_scale") c.prototype_scale = v.get<double>();
      else if (key == "noise") c.noise = v.get<double>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else throw ConfigError("unknown synth config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad synth config value: ") + e.what());
  }
  c.validate();
  return c;
}

std::string synth_config_to_json(const SynthConfig& c, int indent) {
  const json j = {{"n_samples", c.n_samples},
                  {"n_eval_samples", c.n_eval_samples},
                  {"n_classes", c.n_classes},
                  {"feature_dim", c.feature_dim},
                  {"candidate_set_size", c.candidate_set_size},
                  {"mix", triple_json(c.mix)},
                  {"alpha", triple_json(c.alpha)},
                  {"prototype_scale", c.prototype_scale},
                  {"noise", c.noise},
                  {"seed", c.seed}};
  return j.dump(indent);
}

SynthDataset generate(const SynthConfig& config) {
  config.validate();
  const World world = make_world(config);
  SynthDataset out;
  for (std::size_t i = 0; i < config.n_samples + config.n_eval_samples; ++i) {
    auto [sample, level] = make_sample(config, world, i);
    if (i < config.n_samples) {
      out.samples.push_back(std::move(sample));
      out.intended.push_back(level);
    } else {
      out.eval_samples.push_back(std::move(sample));
      out.eval_intended.push_back(level);
    }
  }
  return out;
}

std::string synth_metadata_json(const SynthConfig& config, const SynthDataset& data) {
  json j = {{"config", json::parse(synth_config_to_json(config))},
            {"n_samples", data.samples.size()},
            {"intended_counts", count_levels(data.intended)},
            {"realized_counts", count_levels(realized(data.samples))}};
  if (!data.eval_samples.empty()) {
    j["n_eval_samples"] = data.eval_samples.size();
    j["eval_intended_counts"] = count_levels(data.eval_intended);
    j["eval_realized_counts"] = count_levels(realized(data.eval_samples));
  }
  return j.dump(2) + "\n";
}

}  // namespace hadola
