#include <cerrno>
#include <cstdio>
#include <cstdlib>

#include <json.hpp>

#include "hadola/error.hpp"
#include "hadola/file_io.hpp"
#include "hadola/model.hpp"

namespace hadola {
namespace {

using nlohmann::json;

std::string hex_float(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", x);
  return buf;
}

double parse_hex_float(const std::string& s) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0' || errno == ERANGE)
    throw Error("checkpoint: bad weight literal '" + s + "'");
  return v;
}

}  // namespace

std::string checkpoint_to_json(const SurrogateModel& model) {
  json weights = json::array();
  for (double w : model.weights()) weights.push_back(hex_float(w));
  const json j = {{"format", "hadola-checkpoint/1"},
                  {"vocab", model.vocab()},
                  {"D", model.dim()},
                  {"C", model.num_classes()},
                  {"seed", model.seed()},
                  {"weights", std::move(weights)}};
  return j.dump(1) + "\n";
}

SurrogateModel checkpoint_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    auto vocab = j.at("vocab").get<std::vector<std::string>>();
    const auto dim = j.at("D").get<std::size_t>();
    const auto classes = j.at("C").get<std::size_t>();
    if (classes != vocab.size()) throw Error("checkpoint: C does not match vocab length");
    std::vector<double> weights;
    for (const auto& w : j.at("weights")) weights.push_back(parse_hex_float(w.get<std::string>()));
    return SurrogateModel(dim, std::move(vocab), std::move(weights), j.at("seed").get<std::uint64_t>());
  } catch (const json::exception& e) {
    throw Error(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const SurrogateModel& model) {
  write_text_file_atomic(path, checkpoint_to_json(model));
}

SurrogateModel load_checkpoint(const std::filesystem::path& path) {
  return checkpoint_from_json(read_text_file(path));
}

}  // namespace hadola
