#include <fstream>
#include <istream>
#include <sstream>

#include <json.hpp>

#include "hadola/annotations.hpp"
#include "hadola/error.hpp"
#include "hadola/file_io.hpp"

namespace hadola {

using nlohmann::json;

std::string to_jsonl_line(const AnnotatedSample& sample) {
  json anns = json::array();
  for (const auto& a : sample.annotations)
    anns.push_back({{"answer", a.answer}, {"confidence", std::string(to_string(a.confidence))}});
  const json j = {{"id", sample.id}, {"features", sample.features}, {"annotations", std::move(anns)}};
  return j.dump();
}

AnnotatedSample parse_jsonl_line(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw IngestError(std::string("invalid JSON line: ") + e.what());
  }
  try {
    std::string id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
    auto features = j.at("features").get<std::vector<double>>();
    std::vector<Annotation> annotations;
    for (const auto& a : j.at("annotations"))
      annotations.push_back(Annotation::make(a.at("answer").get<std::string>(),
                                             parse_confidence(a.at("confidence").get<std::string>())));
    return AnnotatedSample::make(std::move(id), std::move(features), std::move(annotations));
  } catch (const json::exception& e) {
    throw IngestError(std::string("malformed sample record: ") + e.what());
  }
}

Dataset read_dataset(std::istream& in) {
  std::vector<AnnotatedSample> samples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      samples.push_back(parse_jsonl_line(line));
    } catch (const IngestError& e) {
      throw IngestError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return Dataset::make(std::move(samples));
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open dataset " + path.string());
  return read_dataset(in);
}

std::string to_jsonl(const std::vector<AnnotatedSample>& samples) {
  std::string out;
  for (const auto& s : samples) {
    out += to_jsonl_line(s);
    out += '\n';
  }
  return out;
}

void write_dataset(const std::filesystem::path& path, const std::vector<AnnotatedSample>& samples) {
  write_text_file_atomic(path, to_jsonl(samples));
}

}  // namespace hadola
