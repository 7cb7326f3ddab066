// hadola: synthetic data generation, stratification, the selection pipeline,
// baselines and evaluation from the command line.
//
// Exit codes: 0 ok, 2 usage or configuration error, 3 training divergence.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "hadola/annotations.hpp"
#include "hadola/error.hpp"
#include "hadola/file_io.hpp"
#include "hadola/ingest.hpp"
#include "hadola/metrics.hpp"
#include "hadola/model.hpp"
#include "hadola/pipeline.hpp"
#include "hadola/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitDiverged = 3;

// Configuration and input problems that map to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

hadola::PipelineConfig load_config(const std::string& path) {
  if (path.empty()) return {};
  return hadola::config_from_json(hadola::read_text_file(path));
}

hadola::Dataset load_data(const std::string& path) {
  if (!fs::exists(path)) throw UsageError("data file not found: " + path);
  auto data = hadola::read_dataset(fs::path(path));
  if (data.samples.empty()) throw UsageError("dataset is empty: " + path);
  return data;
}

json config_echo(const hadola::PipelineConfig& c) { return json::parse(hadola::config_to_json(c)); }

void write_json(const fs::path& path, const json& j) { hadola::write_text_file_atomic(path, j.dump(2) + "\n"); }

// "data.jsonl" -> "data.eval.jsonl"
fs::path eval_path_for(const fs::path& out) {
  fs::path p = out;
  p.replace_extension();
  return p.string() + ".eval.jsonl";
}

struct GenArgs {
  std::string config, out;
};

int cmd_gen(const GenArgs& a) {
  hadola::SynthConfig cfg;
  if (!a.config.empty()) cfg = hadola::synth_config_from_json(hadola::read_text_file(a.config));
  const auto data = hadola::generate(cfg);
  hadola::write_dataset(a.out, data.samples);
  if (!data.eval_samples.empty()) hadola::write_dataset(eval_path_for(a.out), data.eval_samples);
  hadola::write_text_file_atomic(a.out + ".meta.json", hadola::synth_metadata_json(cfg, data));
  std::printf("wrote %zu samples to %s\n", data.samples.size(), a.out.c_str());
  return kExitOk;
}

struct StratifyArgs {
  std::string data, out;
};

int cmd_stratify(const StratifyArgs& a) {
  const auto data = load_data(a.data);
  const auto strata = hadola::stratify(data.samples);
  const fs::path dir(a.out);
  json counts = {{"input", a.data}, {"total", data.samples.size()}};
  for (auto level : {hadola::HULevel::low, hadola::HULevel::medium, hadola::HULevel::high}) {
    const std::string name(hadola::to_string(level));
    hadola::write_dataset(dir / (name + ".jsonl"), strata.at(level));
    counts[name] = strata.at(level).size();
  }
  write_json(dir / "counts.json", counts);
  std::printf("low %zu, medium %zu, high %zu\n", strata.low.size(), strata.medium.size(), strata.high.size());
  return kExitOk;
}

struct RunArgs {
  std::string data, config, out, eval;
  bool audit = false;
  bool wall_clock = false;
};

int cmd_hadola(const RunArgs& a) {
  auto cfg = load_config(a.config);
  if (a.audit) cfg.audit = true;
  if (a.wall_clock) cfg.record_wall_time = true;
  const auto data = load_data(a.data);
  std::vector<hadola::AnnotatedSample> eval_set;
  if (!a.eval.empty()) eval_set = load_data(a.eval).samples;

  const auto result = hadola::run(data, cfg, eval_set);
  const fs::path dir(a.out);
  hadola::save_checkpoint(dir / "model.json", result.final_model);
  hadola::write_text_file_atomic(dir / "history.json", hadola::history_to_json(result));
  if (cfg.audit) hadola::write_text_file_atomic(dir / "audit.jsonl", hadola::audit_to_jsonl(result.state.audit));

  const auto& last = result.history.empty() ? result.initial_eval : result.history.back().eval;
  std::printf("rounds %zu, pseudo pairs %zu, hu_acc %.6f, kl %.6f\n", result.history.size(),
              result.state.pseudo.size(), last.hu_acc_mean, last.kl_mean);
  return kExitOk;
}

struct SftArgs {
  std::string data, config, out, stratum;
  double fraction = 1.0;
};

int cmd_sft(const SftArgs& a) {
  const auto cfg = load_config(a.config);
  if (!(a.fraction > 0.0 && a.fraction <= 1.0)) throw UsageError("--fraction must be in (0, 1]");
  std::optional<hadola::HULevel> stratum;
  if (!a.stratum.empty()) stratum = hadola::parse_hu_level(a.stratum);
  const auto data = load_data(a.data);
  const auto model = hadola::baseline_sft(data, cfg, a.fraction, stratum);
  hadola::save_checkpoint(a.out, model);
  write_json(a.out + ".meta.json", {{"command", "sft"},
                                    {"data", a.data},
                                    {"fraction", a.fraction},
                                    {"stratum", a.stratum.empty() ? json(nullptr) : json(a.stratum)},
                                    {"config", config_echo(cfg)}});
  std::printf("wrote %s\n", a.out.c_str());
  return kExitOk;
}

struct AlArgs {
  std::string data, config, out, strategy = "least-confidence";
};

int cmd_al(const AlArgs& a) {
  const auto cfg = load_config(a.config);
  const auto strategy = a.strategy == "random" ? hadola::SelectionStrategy::random
                                               : hadola::SelectionStrategy::least_confidence;
  const auto data = load_data(a.data);
  const auto result = hadola::baseline_active_learning(data, cfg, strategy);
  hadola::save_checkpoint(a.out, result.model);
  write_json(a.out + ".meta.json", {{"command", "al"},
                                    {"data", a.data},
                                    {"strategy", a.strategy},
                                    {"selected", result.selected},
                                    {"config", config_echo(cfg)}});
  std::printf("wrote %s\n", a.out.c_str());
  return kExitOk;
}

struct EvalArgs {
  std::string model, data, out;
  double temp = 1.0;
};

int cmd_eval(const EvalArgs& a) {
  if (!fs::exists(a.model)) throw UsageError("checkpoint not found: " + a.model);
  const auto model = hadola::load_checkpoint(a.model);
  const auto data = load_data(a.data);
  const auto report = hadola::evaluate(model, data.samples, a.temp);
  json j = json::parse(hadola::eval_report_to_json(report));
  j["model"] = a.model;
  j["data"] = a.data;
  if (a.out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    write_json(a.out + ".json", j);
    hadola::write_text_file_atomic(a.out + ".csv", hadola::eval_report_to_csv(report));
    std::printf("hu_acc %.6f, vqa_acc %.6f, kl %.6f\n", report.hu_acc_mean, report.vqa_acc_mean, report.kl_mean);
  }
  return kExitOk;
}

struct IngestArgs {
  std::string annotations, questions, features, out;
  bool drop_unanswerable = false;
};

int cmd_ingest(const IngestArgs& a) {
  auto opt = [](const std::string& s) { return s.empty() ? std::nullopt : std::optional<fs::path>(s); };
  auto result = hadola::parse_vqa_annotation_files(a.annotations, opt(a.questions), opt(a.features));
  for (const auto& e : result.errors)
    std::fprintf(stderr, "%s record %s: %s\n", e.kind == hadola::RecordErrorKind::malformed ? "malformed" : "orphan",
                 e.question_id.c_str(), e.message.c_str());
  auto samples = std::move(result.samples);
  const std::size_t parsed = samples.size();
  if (a.drop_unanswerable) samples = hadola::filter_unanswerable(samples);
  hadola::write_dataset(a.out, samples);
  std::printf("wrote %zu samples (%zu parsed, %zu rejected records)\n", samples.size(), parsed,
              result.errors.size());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hadola: human-uncertainty-aware data selection on a surrogate classifier"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate a synthetic annotated dataset");
  g->add_option("--config", gen.config, "Synth config JSON")->check(CLI::ExistingFile);
  g->add_option("--out", gen.out, "Output JSONL path")->required();

  StratifyArgs strat;
  auto* s = app.add_subcommand("stratify", "Split a dataset into low/medium/high HU strata");
  s->add_option("--data", strat.data, "Dataset JSONL")->required();
  s->add_option("--out", strat.out, "Output directory")->required();

  RunArgs run;
  auto* h = app.add_subcommand("hadola", "Run the selection pipeline");
  h->add_option("--data", run.data, "Dataset JSONL")->required();
  h->add_option("--config", run.config, "Pipeline config JSON")->check(CLI::ExistingFile);
  h->add_option("--out", run.out, "Output directory")->required();
  h->add_option("--eval", run.eval, "Held-out evaluation JSONL (default: the dataset itself)");
  h->add_flag("--audit", run.audit, "Write per-sample decisions and re-check invariants");
  h->add_flag("--wall-clock", run.wall_clock, "Record wall-clock time per round");

  SftArgs sft;
  auto* f = app.add_subcommand("sft", "CE-only training on a labeled fraction");
  f->add_option("--data", sft.data, "Dataset JSONL")->required();
  f->add_option("--fraction", sft.fraction, "Labeled fraction in (0, 1]")->required();
  f->add_option("--stratum", sft.stratum, "Restrict to one HU stratum")
      ->check(CLI::IsMember({"low", "medium", "high"}));
  f->add_option("--config", sft.config, "Pipeline config JSON")->check(CLI::ExistingFile);
  f->add_option("--out", sft.out, "Output checkpoint path")->required();

  AlArgs al;
  auto* l = app.add_subcommand("al", "Active-learning baseline");
  l->add_option("--data", al.data, "Dataset JSONL")->required();
  l->add_option("--config", al.config, "Pipeline config JSON")->check(CLI::ExistingFile);
  l->add_option("--strategy", al.strategy, "least-confidence or random")
      ->check(CLI::IsMember({"least-confidence", "random"}));
  l->add_option("--out", al.out, "Output checkpoint path")->required();

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Evaluate a checkpoint");
  e->add_option("--model", ev.model, "Checkpoint JSON")->required();
  e->add_option("--data", ev.data, "Dataset JSONL")->required();
  e->add_option("--temp", ev.temp, "Softmax temperature");
  e->add_option("--out", ev.out, "Output prefix for <prefix>.json and <prefix>.csv");

  IngestArgs in;
  auto* i = app.add_subcommand("ingest", "Convert VQAv2/VizWiz annotation files to JSONL");
  i->add_option("--annotations", in.annotations, "Annotation JSON")->required()->check(CLI::ExistingFile);
  i->add_option("--questions", in.questions, "Question JSON")->check(CLI::ExistingFile);
  i->add_option("--features", in.features, "Feature JSONL {id, features}")->check(CLI::ExistingFile);
  i->add_flag("--drop-unanswerable", in.drop_unanswerable, "Drop mostly-unanswerable questions");
  i->add_option("--out", in.out, "Output JSONL path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForAllHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return kExitUsage;
  }

  try {
    if (*g) return cmd_gen(gen);
    if (*s) return cmd_stratify(strat);
    if (*h) return cmd_hadola(run);
    if (*f) return cmd_sft(sft);
    if (*l) return cmd_al(al);
    if (*e) return cmd_eval(ev);
    if (*i) return cmd_ingest(in);
  } catch (const hadola::DivergedError& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return kExitDiverged;
  } catch (const UsageError& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return kExitUsage;
  } catch (const hadola::Error& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return kExitUsage;
  } catch (const std::invalid_argument& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return kExitUsage;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 1;
  }
  return kExitUsage;
}
