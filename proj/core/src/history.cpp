#include <json.hpp>

#include "hadola/pipeline.hpp"
#include "json_detail.hpp"

namespace hadola {

using nlohmann::json;

std::string history_to_json(const RunResult& result) {
  const auto& st = result.state;
  const auto& th = st.thresholds;
  json rounds = json::array();
  for (const auto& r : result.history) {
    rounds.push_back({{"t", r.t},
                      {"n_candidates", r.n_candidates},
                      {"n_retained", r.n_retained},
                      {"n_kept", r.n_kept},
                      {"n_pseudo_total", r.n_pseudo_total},
                      {"tau_window", {r.window_lo, r.window_hi}},
                      {"final_loss", r.final_loss},
                      {"eval", detail::eval_report_json(r.eval)},
                      {"wall_ms", r.wall_ms}});
  }
  const json j = {
      {"config", detail::config_json(st.config)},
      {"thresholds",
       {{"tau1", th.tau1},
        {"tau2", th.tau2},
        {"sigma", th.sigma},
        {"h_omega", th.h_omega.values},
        {"tau_g", th.tau_g},
        {"tau_t", th.tau_t},
        {"tau_t_sign", th.tau_t < 0.0 ? "negative" : "nonnegative"},
        {"swapped", th.swapped},
        {"pinsker_bound", th.pinsker_bound()}}},
      {"loss_weights", {{"beta", st.weights.beta}, {"lambda", st.weights.lambda}}},
      {"splits",
       {{"seed_train", st.seed.train.size()},
        {"seed_validation", st.seed.validation.size()},
        {"per_round_candidates", st.per_round_count}}},
      {"vocab_size", st.hu_model.num_classes()},
      {"initial_eval", detail::eval_report_json(result.initial_eval)},
      {"rounds", std::move(rounds)}};
  return j.dump(2) + "\n";
}

std::string audit_to_jsonl(const std::vector<RoundAudit>& audit) {
  std::string out;
  for (const auto& round : audit) {
    for (const auto& r : round.discriminate) {
      const json line = {{"round", round.round}, {"id", r.id},
                         {"stage", "discriminate"}, {"kl_u", r.kl_u},
                         {"l1_to_anchor", r.l1_to_anchor}, {"decision", r.retained ? "retained" : "discarded"}};
      out += line.dump() + "\n";
    }
    for (const auto& r : round.trigger) {
      const json line = {{"round", round.round}, {"id", r.id},         {"stage", "error_trigger"},
                         {"label", r.label},     {"s_g", r.s_g},       {"s_tracin", r.s_tracin},
                         {"decision", r.kept ? "kept" : "rejected"}};
      out += line.dump() + "\n";
    }
  }
  return out;
}

}  // namespace hadola
