#pragma once

#include <json.hpp>

#include "hadola/metrics.hpp"
#include "hadola/pipeline.hpp"

namespace hadola::detail {

nlohmann::json eval_report_json(const EvalReport& report);
nlohmann::json config_json(const PipelineConfig& config);

}  // namespace hadola::detail
