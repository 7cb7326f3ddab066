#include "hadola/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <sstream>

#include <json.hpp>

#include "hadola/error.hpp"
#include "hadola/file_io.hpp"

namespace hadola {

using nlohmann::json;

std::vector<double> hash_embedding(std::string_view text, std::size_t dim) {
  std::vector<double> v(dim, 0.0);
  if (dim == 0) return v;
  auto add_token = [&](const std::string& tok) {
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a
    for (unsigned char c : tok) {
      h ^= c;
      h *= 1099511628211ull;
    }
    v[h % dim] += (h >> 63) ? -1.0 : 1.0;
  };
  std::string tok;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      tok.push_back(static_cast<char>(std::tolower(c)));
    } else if (!tok.empty()) {
      add_token(tok);
      tok.clear();
    }
  }
  if (!tok.empty()) add_token(tok);
  double norm = 0.0;
  for (double x : v) norm += x * x;
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
  }
  return v;
}

FeatureTable read_feature_table(std::string_view jsonl) {
  FeatureTable table;
  std::istringstream in{std::string(jsonl)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      const auto& id = j.at("id");
      table[id.is_string() ? id.get<std::string>() : id.dump()] = j.at("features").get<std::vector<double>>();
    } catch (const json::exception& e) {
      throw IngestError("feature file line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return table;
}

namespace {

std::string id_string(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

bool id_less(const std::string& a, const std::string& b) {
  auto numeric = [](const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
  };
  const bool na = numeric(a), nb = numeric(b);
  if (na && nb) return a.size() != b.size() ? a.size() < b.size() : a < b;
  if (na != nb) return na;
  return a < b;
}

json parse_or_throw(std::string_view text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw IngestError(std::string(what) + " is not valid JSON: " + e.what());
  }
}

}  // namespace

IngestResult parse_vqa_annotations(std::string_view annotations_json, std::optional<std::string_view> questions_json,
                                   const FeatureTable* features) {
  const json root = parse_or_throw(annotations_json, "annotation file");
  // VQAv2 wraps records in {"annotations": [...]}; VizWiz is a bare array.
  const json* records = nullptr;
  if (root.is_object() && root.contains("annotations")) records = &root.at("annotations");
  else if (root.is_array()) records = &root;
  if (!records || !records->is_array()) throw IngestError("annotation file has no 'annotations' array");

  std::map<std::string, std::string> questions;
  const bool have_questions = questions_json.has_value();
  if (have_questions) {
    const json q = parse_or_throw(*questions_json, "question file");
    const json* list = q.is_object() && q.contains("questions") ? &q.at("questions") : &q;
    if (!list->is_array()) throw IngestError("question file has no 'questions' array");
    for (const auto& item : *list)
      if (item.contains("question_id")) questions[id_string(item.at("question_id"))] = item.value("question", "");
  }

  IngestResult out;
  for (const auto& rec : *records) {
    std::string qid;
    if (rec.contains("question_id")) qid = id_string(rec.at("question_id"));
    else if (rec.contains("image")) qid = id_string(rec.at("image"));
    auto malformed = [&](const std::string& msg) {
      out.errors.push_back(RecordError{RecordErrorKind::malformed, qid, msg});
    };
    if (qid.empty()) {
      malformed("record has no question_id");
      continue;
    }
    if (!rec.contains("answers") || !rec.at("answers").is_array()) {
      malformed("record has no answers array");
      continue;
    }
    const auto& answers = rec.at("answers");
    if (answers.size() != kAnnotatorsPerSample) {
      malformed("record has " + std::to_string(answers.size()) + " answers, expected 10");
      continue;
    }
    std::vector<Annotation> anns;
    try {
      for (const auto& a : answers)
        anns.push_back(Annotation::make(a.at("answer").get<std::string>(),
                                        parse_confidence(a.at("answer_confidence").get<std::string>())));
    } catch (const IngestError& e) {
      malformed(e.what());
      continue;
    } catch (const json::exception& e) {
      malformed(e.what());
      continue;
    }

    std::string question_text = rec.value("question", std::string{});
    if (have_questions) {
      const auto it = questions.find(qid);
      if (it == questions.end()) {
        out.errors.push_back(RecordError{RecordErrorKind::orphan, qid, "question_id not found in question file"});
        continue;
      }
      question_text = it->second;
    }

    std::vector<double> feats;
    if (features) {
      const auto it = features->find(qid);
      if (it == features->end()) {
        out.errors.push_back(RecordError{RecordErrorKind::orphan, qid, "question_id not found in feature file"});
        continue;
      }
      feats = it->second;
    } else {
      feats = hash_embedding(question_text.empty() ? qid : question_text);
    }
    out.samples.push_back(AnnotatedSample::make(qid, std::move(feats), std::move(anns)));
  }
  std::stable_sort(out.samples.begin(), out.samples.end(),
                   [](const AnnotatedSample& a, const AnnotatedSample& b) { return id_less(a.id, b.id); });
  return out;
}

IngestResult parse_vqa_annotation_files(const std::filesystem::path& annotations,
                                        const std::optional<std::filesystem::path>& questions,
                                        const std::optional<std::filesystem::path>& feature_file) {
  const std::string ann_text = read_text_file(annotations);
  std::optional<std::string> q_text;
  if (questions) q_text = read_text_file(*questions);
  std::optional<FeatureTable> table;
  if (feature_file) table = read_feature_table(read_text_file(*feature_file));
  return parse_vqa_annotations(ann_text, q_text ? std::optional<std::string_view>(*q_text) : std::nullopt,
                               table ? &*table : nullptr);
}

std::vector<AnnotatedSample> filter_unanswerable(const std::vector<AnnotatedSample>& samples) {
  std::vector<AnnotatedSample> out;
  for (const auto& s : samples) {
    const auto stats = answer_stats(s);
    const auto modal = std::max_element(stats.begin(), stats.end(), [](const AnswerStat& a, const AnswerStat& b) {
      return a.count < b.count || (a.count == b.count && a.answer > b.answer);
    });
    if (modal != stats.end() && modal->answer == "unanswerable" && modal->count >= 5) continue;
    out.push_back(s);
  }
  return out;
}

}  // namespace hadola
