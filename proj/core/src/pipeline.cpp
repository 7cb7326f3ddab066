#include "hadola/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <stdexcept>
#include <unordered_set>

#include "hadola/error.hpp"
#include "hadola/numeric.hpp"
#include "hadola/parallel.hpp"
#include "json_detail.hpp"
#include "split.hpp"

namespace hadola {

using nlohmann::json;

double Thresholds::pinsker_bound() const noexcept {
  const double hi = upper();
  return hi > 0.0 ? std::sqrt(2.0 * hi) : 0.0;
}

void PipelineConfig::validate() const {
  auto require = [](bool ok, const char* msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(seed_fraction > 0.0 && seed_fraction < 1.0, "seed_fraction must be in (0, 1)");
  require(per_round_fraction > 0.0 && per_round_fraction < 1.0, "per_round_fraction must be in (0, 1)");
  require(validation_fraction > 0.0 && validation_fraction < 1.0, "validation_fraction must be in (0, 1)");
  require(weights.beta >= 0.0 && weights.lambda >= 0.0, "beta and lambda must be nonnegative");
  require(beta_scale > 0.0 && lambda_scale > 0.0, "weight scales must be positive");
  require(learning_rate > 0.0, "learning_rate must be positive");
}

namespace detail {

json config_json(const PipelineConfig& c) {
  return {{"seed_fraction", c.seed_fraction},
          {"per_round_fraction", c.per_round_fraction},
          {"rounds", c.rounds},
          {"beta", c.weights.beta},
          {"lambda", c.weights.lambda},
          {"weight_mode", c.weight_mode == WeightMode::fixed ? "fixed" : "normalized"},
          {"beta_scale", c.beta_scale},
          {"lambda_scale", c.lambda_scale},
          {"learning_rate", c.learning_rate},
          {"epochs", c.epochs},
          {"validation_fraction", c.validation_fraction},
          {"seed", c.seed},
          {"audit", c.audit},
          {"record_wall_time", c.record_wall_time}};
}

}  // namespace detail

PipelineConfig config_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  PipelineConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "seed_fraction") c.seed_fraction = v.get<double>();
      else if (key == "per_round_fraction") c.per_round_fraction = v.get<double>();
      else if (key == "rounds") c.rounds = v.get<std::size_t>();
      else if (key == "beta") c.weights.beta = v.get<double>();
      else if (key == "lambda") c.weights.lambda = v.get<double>();
      else if (key == "weight_mode") {
        const auto mode = v.get<std::string>();
        if (mode == "fixed") c.weight_mode = WeightMode::fixed;
        else if (mode == "normalized") c.weight_mode = WeightMode::normalized;
        else throw ConfigError("weight_mode must be 'fixed' or 'normalized'");
      } else if (key == "beta_scale") c.beta_scale = v.get<double>();
      else if (key == "lambda_scale") c.lambda_scale = v.get<double>();
      else if (key == "learning_rate") c.learning_rate = v.get<double>();
      else if (key == "epochs") c.epochs = v.get<std::size_t>();
      else if (key == "validation_fraction") c.validation_fraction = v.get<double>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "audit") c.audit = v.get<bool>();
      else if (key == "record_wall_time") c.record_wall_time = v.get<bool>();
      else throw ConfigError("unknown config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  c.validate();
  return c;
}

std::string config_to_json(const PipelineConfig& config, int indent) {
  return detail::config_json(config).dump(indent);
}

std::vector<AnnotatedSample> SeedSplit::all() const {
  std::vector<AnnotatedSample> out = train;
  out.insert(out.end(), validation.begin(), validation.end());
  return out;
}

std::vector<std::string> closed_vocabulary(const Dataset& dataset, const std::vector<AnnotatedSample>& extra) {
  std::set<std::string> answers;
  for (const auto& a : dataset.vocabulary()) answers.insert(a);
  for (const auto& s : extra)
    for (const auto& a : s.annotations) answers.insert(a.answer);
  return {answers.begin(), answers.end()};
}

namespace {

std::vector<Example> labeled_examples(const SurrogateModel& model, const std::vector<AnnotatedSample>& samples) {
  std::vector<Example> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(labeled_example(model, s));
  return out;
}

// Mean CE gradient over human majority labels, summed in sample order.
GradientVector mean_ce_grad(const SurrogateModel& model, const std::vector<AnnotatedSample>& samples) {
  GradientVector total(model.num_parameters(), 0.0);
  if (samples.empty()) return total;
  std::vector<GradientVector> per(samples.size());
  parallel_for(samples.size(), [&](std::size_t i) {
    per[i] = grad_ce(model, samples[i].features, model.class_index(majority_answer(samples[i])));
  });
  for (const auto& g : per)
    for (std::size_t k = 0; k < total.size(); ++k) total[k] += g[k];
  const auto n = static_cast<double>(samples.size());
  for (double& x : total) x /= n;
  return total;
}

double human_kl(const SurrogateModel& model, const AnnotatedSample& s) {
  const auto aligned = align_support(human_distribution(s), restricted_distribution(model, s));
  return kl_divergence(aligned.h, aligned.p);
}

LossWeights initial_normalized_weights(const SurrogateModel& init, const SurrogateModel& hu,
                                       const std::vector<Example>& batch, const PipelineConfig& config) {
  std::vector<double> ce, phi, align;
  for (const auto& ex : batch) {
    const auto t = loss_hadola(init, hu, ex, LossWeights{1.0, 1.0});
    ce.push_back(t.ce);
    phi.push_back(t.phi);
    align.push_back(t.align);
  }
  if (batch.empty()) return config.weights;
  const auto w = normalize_weights(stable_mean(ce), stable_mean(phi), stable_mean(align));
  return LossWeights{w.beta * config.beta_scale, w.lambda * config.lambda_scale};
}

}  // namespace

KlWindow kl_window(std::span<const double> low_kl, std::span<const double> medium_kl) {
  if (low_kl.empty() || medium_kl.empty()) throw SeedStratumError("seed set needs low and medium samples");
  KlWindow w;
  w.tau1 = stable_mean(low_kl);
  w.tau2 = stable_mean(medium_kl);
  std::vector<double> pooled(low_kl.begin(), low_kl.end());
  pooled.insert(pooled.end(), medium_kl.begin(), medium_kl.end());
  w.sigma = stable_stddev(pooled);
  if (w.tau1 > w.tau2) {
    std::swap(w.tau1, w.tau2);
    w.swapped = true;
  }
  return w;
}

Thresholds compute_thresholds(const SurrogateModel& hu_model, const SeedSplit& seed) {
  const auto all = seed.all();
  std::vector<const AnnotatedSample*> anchor;
  std::vector<double> low_kl, medium_kl;
  std::vector<ConfidenceProfile> profiles;
  for (const auto& s : all) {
    const HULevel level = hu_level(s);
    if (level == HULevel::high) continue;
    anchor.push_back(&s);
    (level == HULevel::low ? low_kl : medium_kl).push_back(human_kl(hu_model, s));
    profiles.push_back(canonical_profile(restricted_distribution(hu_model, s)));
  }
  if (low_kl.empty()) throw SeedStratumError("seed set contains no low-HU sample");
  if (medium_kl.empty()) throw SeedStratumError("seed set contains no medium-HU sample");

  Thresholds t;
  const KlWindow w = kl_window(low_kl, medium_kl);
  t.tau1 = w.tau1;
  t.tau2 = w.tau2;
  t.sigma = w.sigma;
  t.swapped = w.swapped;
  t.h_omega = mean_profile(profiles);

  const TriggerContext ctx = make_trigger_context(hu_model, hu_model, seed);
  std::vector<double> sg(anchor.size()), st(anchor.size());
  parallel_for(anchor.size(), [&](std::size_t i) {
    const auto& s = *anchor[i];
    const std::size_t label = hu_model.class_index(majority_answer(s));
    sg[i] = gradient_consistency(ctx, s.features, label);
    st[i] = tracin_mini(ctx, s.features, label);
  });
  t.tau_g = stable_mean(sg);
  t.tau_t = stable_mean(st);
  return t;
}

PipelineState initialize(const Dataset& dataset, const PipelineConfig& config, std::vector<std::string> vocab) {
  config.validate();
  const std::size_t n = dataset.samples.size();
  if (n == 0) throw ConfigError("dataset is empty");
  if (vocab.empty()) vocab = dataset.vocabulary();

  std::mt19937_64 rng(config.seed);
  const auto perm = detail::permutation(n, rng);
  const std::size_t n_seed = std::clamp<std::size_t>(detail::fraction_count(config.seed_fraction, n), 1, n);
  const std::size_t n_val = detail::fraction_count(config.validation_fraction, n_seed);
  if (n_val == 0 || n_val >= n_seed)
    throw ConfigError("validation split of the seed set is empty or leaves no training samples (seed size " +
                      std::to_string(n_seed) + ")");

  SeedSplit seed;
  for (std::size_t i = 0; i < n_seed; ++i)
    (i < n_seed - n_val ? seed.train : seed.validation).push_back(dataset.samples[perm[i]]);
  std::vector<UnlabeledItem> pool;
  for (std::size_t i = n_seed; i < n; ++i) {
    const auto& s = dataset.samples[perm[i]];
    pool.push_back(UnlabeledItem{s.id, s.features});
  }

  bool has_low = false, has_medium = false;
  for (const auto& s : seed.all()) {
    const HULevel l = hu_level(s);
    has_low |= l == HULevel::low;
    has_medium |= l == HULevel::medium;
  }
  if (!has_low || !has_medium)
    throw SeedStratumError("seed set lacks a low-HU or medium-HU sample; enlarge the seed or reseed");

  const SurrogateModel m_init = init_model(dataset.dim, std::move(vocab), config.seed);
  const auto batch = labeled_examples(m_init, seed.train);
  const TrainOptions opts{config.learning_rate, config.epochs, config.seed};
  SurrogateModel hu = train(m_init, batch, m_init, LossWeights{0.0, 0.0}, opts).model;

  const LossWeights weights = config.weight_mode == WeightMode::fixed
                                  ? config.weights
                                  : initial_normalized_weights(m_init, hu, batch, config);
  Thresholds thresholds = compute_thresholds(hu, seed);
  const std::size_t per_round = detail::ceil_count(config.per_round_fraction, pool.size());

  return PipelineState{config,     0,        hu, hu, hu, std::move(seed), std::move(pool), per_round, {},
                       thresholds, weights, std::move(rng), {}};
}

double kl_to_anchor(const SurrogateModel& model, std::span<const double> features, const ConfidenceProfile& h_omega) {
  const auto f = forward(model, features);
  const auto profile = canonical_profile(f.dist, h_omega.values.size());
  return kl_divergence(h_omega.values, profile.values);
}

DiscriminateResult discriminate(const SurrogateModel& model, std::span<const UnlabeledItem> candidates,
                                const Thresholds& thresholds) {
  std::vector<DiscriminateRecord> records(candidates.size());
  const std::size_t k = thresholds.h_omega.values.size();
  parallel_for(candidates.size(), [&](std::size_t i) {
    const auto f = forward(model, candidates[i].features);
    const auto profile = canonical_profile(f.dist, k);
    const double kl = kl_divergence(thresholds.h_omega.values, profile.values);
    records[i] = DiscriminateRecord{candidates[i].id, kl, l1_distance(profile.values, thresholds.h_omega.values),
                                    thresholds.admits(kl)};
  });
  DiscriminateResult out;
  for (std::size_t i = 0; i < candidates.size(); ++i)
    if (records[i].retained) out.retained.push_back(candidates[i]);
  out.records = std::move(records);
  return out;
}

std::size_t pseudo_label(const SurrogateModel& model, std::span<const double> features) {
  const auto f = forward(model, features);
  const auto& vocab = model.vocab();
  std::size_t best = 0;
  for (std::size_t c = 1; c < f.dist.size(); ++c)
    if (f.dist[c] > f.dist[best] || (f.dist[c] == f.dist[best] && vocab[c] < vocab[best])) best = c;
  return best;
}

std::vector<PseudoPair> self_annotate(const SurrogateModel& prev, std::span<const UnlabeledItem> retained,
                                      std::size_t round) {
  std::vector<PseudoPair> pairs(retained.size());
  parallel_for(retained.size(), [&](std::size_t i) {
    pairs[i] = PseudoPair{retained[i].id, retained[i].features, pseudo_label(prev, retained[i].features), round,
                          0.0, 0.0};
  });
  return pairs;
}

TriggerContext make_trigger_context(const SurrogateModel& theta0, const SurrogateModel& theta_t,
                                    const SeedSplit& seed) {
  if (seed.validation.empty()) throw ConfigError("validation set is empty");
  TriggerContext ctx;
  ctx.theta0 = &theta0;
  ctx.theta_t = &theta_t;
  ctx.g_ref = mean_ce_grad(theta_t, seed.train);
  ctx.val_grad_0 = mean_ce_grad(theta0, seed.validation);
  ctx.val_grad_t = mean_ce_grad(theta_t, seed.validation);
  return ctx;
}

double gradient_consistency(const TriggerContext& ctx, std::span<const double> features, std::size_t label) {
  return cosine_similarity(grad_ce(*ctx.theta_t, features, label), ctx.g_ref);
}

double tracin_mini(const TriggerContext& ctx, std::span<const double> features, std::size_t label) {
  return dot(grad_ce(*ctx.theta0, features, label), ctx.val_grad_0) +
         dot(grad_ce(*ctx.theta_t, features, label), ctx.val_grad_t);
}

ErrorTriggerResult error_trigger(std::span<const PseudoPair> pairs, const SurrogateModel& theta0,
                                 const SurrogateModel& theta_t, const SeedSplit& seed,
                                 const Thresholds& thresholds) {
  ErrorTriggerResult out;
  if (pairs.empty()) return out;
  const TriggerContext ctx = make_trigger_context(theta0, theta_t, seed);
  std::vector<PseudoPair> scored(pairs.begin(), pairs.end());
  parallel_for(scored.size(), [&](std::size_t i) {
    scored[i].s_g = gradient_consistency(ctx, scored[i].features, scored[i].label);
    scored[i].s_tracin = tracin_mini(ctx, scored[i].features, scored[i].label);
  });
  for (auto& p : scored) {
    const bool keep = thresholds.keeps(p.s_g, p.s_tracin);
    out.records.push_back(TriggerRecord{p.id, p.label, p.s_g, p.s_tracin, keep});
    if (keep) out.kept.push_back(std::move(p));
  }
  return out;
}

RoundRecord run_round(PipelineState& state, const std::vector<AnnotatedSample>& eval_set) {
  const auto started = std::chrono::steady_clock::now();
  const std::size_t t = ++state.round;

  // Draw this round's candidates without replacement from the current pool.
  const std::size_t n_cand = std::min(state.per_round_count, state.pool.size());
  std::vector<std::size_t> idx(state.pool.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  for (std::size_t i = 0; i < n_cand; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(state.rng)]);
  }
  std::vector<UnlabeledItem> candidates;
  for (std::size_t i = 0; i < n_cand; ++i) candidates.push_back(state.pool[idx[i]]);

  auto disc = discriminate(state.current, candidates, state.thresholds);
  if (state.config.audit) {
    const double bound = state.thresholds.pinsker_bound();
    for (const auto& r : disc.records)
      if (r.retained && r.l1_to_anchor > bound + 1e-12)
        throw std::logic_error("Pinsker window violated for '" + r.id + "': L1 " + std::to_string(r.l1_to_anchor) +
                               " > " + std::to_string(bound));
  }

  const auto pairs = self_annotate(state.current, disc.retained, t);
  auto trig = error_trigger(pairs, state.theta0, state.current, state.seed, state.thresholds);
  if (state.config.audit) {
    for (const auto& p : trig.kept)
      if (!state.thresholds.keeps(p.s_g, p.s_tracin))
        throw std::logic_error("kept pseudo pair '" + p.id + "' fails the keep rule");
  }

  std::unordered_set<std::string> kept_ids;
  for (const auto& p : trig.kept) kept_ids.insert(p.id);
  std::erase_if(state.pool, [&](const UnlabeledItem& u) { return kept_ids.count(u.id) > 0; });
  state.pseudo.insert(state.pseudo.end(), trig.kept.begin(), trig.kept.end());

  std::vector<Example> batch = labeled_examples(state.current, state.seed.train);
  for (const auto& p : state.pseudo) batch.push_back(pseudo_example(p.features, p.label));
  const TrainOptions opts{state.config.learning_rate, state.config.epochs, state.config.seed + t};
  TrainResult trained{state.current, {}};
  try {
    trained = train(state.current, batch, state.hu_model, state.weights, opts);
  } catch (const DivergedError& e) {
    throw DivergedError(e.epoch(), t);
  }
  state.current = std::move(trained.model);

  RoundRecord rec;
  rec.t = t;
  rec.n_candidates = n_cand;
  rec.n_retained = disc.retained.size();
  rec.n_kept = trig.kept.size();
  rec.n_pseudo_total = state.pseudo.size();
  rec.window_lo = state.thresholds.lower();
  rec.window_hi = state.thresholds.upper();
  rec.final_loss = trained.epoch_losses.empty() ? 0.0 : trained.epoch_losses.back();
  rec.eval = evaluate(state.current, eval_set);
  state.audit.push_back(RoundAudit{t, std::move(disc.records), std::move(trig.records)});
  if (state.config.record_wall_time)
    rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  return rec;
}

RunResult run(const Dataset& dataset, const PipelineConfig& config, const std::vector<AnnotatedSample>& eval_set) {
  PipelineState state = initialize(dataset, config, closed_vocabulary(dataset, eval_set));
  const auto& eval = eval_set.empty() ? dataset.samples : eval_set;
  EvalReport initial = evaluate(state.current, eval);
  std::vector<RoundRecord> history;
  for (std::size_t t = 0; t < config.rounds; ++t) history.push_back(run_round(state, eval));
  SurrogateModel final_model = state.current;
  return RunResult{std::move(final_model), std::move(state), std::move(initial), std::move(history)};
}

}  // namespace hadola
