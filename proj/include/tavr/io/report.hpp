#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "tavr/enrich.hpp"
#include "tavr/losses.hpp"
#include "tavr/metrics.hpp"
#include "tavr/optim.hpp"

namespace tavr::io {

using nlohmann::json;

json to_json(const MetricsReport& r);
MetricsReport metrics_from_json(const json& j);

// Values and per-term breakdown; gradients are not serialized.
json to_json(const LossReport& r, const LossConfig& cfg);

json to_json(const RootResult& r);
json to_json(const EnrichConfig& cfg);

// distance,raw_count,smoothed
std::string curve_csv(const CrossSectionCurve& curve);

// iteration,total,dice_mean,<active loss terms>[,components]
std::string trace_csv(const std::vector<TraceEntry>& trace);

}  // namespace tavr::io
