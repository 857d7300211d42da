#include "tavr/io/report.hpp"

#include <cstdio>
#include <sstream>

namespace tavr::io {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

json optional_value(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

json to_json(const MetricsReport& r) {
  json classes = json::array();
  for (const auto& c : r.classes)
    classes.push_back({{"id", c.id},
                       {"name", c.name},
                       {"dice", c.dice},
                       {"iou", c.iou},
                       {"absent_in_both", c.absent_in_both},
                       {"cases", c.cases}});
  return {{"case_id", r.case_id}, {"classes", classes}, {"mean_dice", r.mean_dice}, {"mean_iou", r.mean_iou}};
}

MetricsReport metrics_from_json(const json& j) {
  try {
    MetricsReport r;
    r.case_id = j.value("case_id", "");
    for (const auto& c : j.at("classes")) {
      ClassScore s;
      s.id = c.at("id").get<ClassId>();
      s.name = c.at("name").get<std::string>();
      s.dice = c.at("dice").get<double>();
      s.iou = c.at("iou").get<double>();
      s.absent_in_both = c.value("absent_in_both", false);
      s.cases = c.value("cases", std::size_t{1});
      r.classes.push_back(std::move(s));
    }
    r.mean_dice = j.at("mean_dice").get<double>();
    r.mean_iou = j.at("mean_iou").get<double>();
    return r;
  } catch (const json::exception& e) {
    throw Error(std::string("malformed metrics report: ") + e.what());
  }
}

json to_json(const LossReport& r, const LossConfig& cfg) {
  json recall = json::object();
  for (const auto& [c, v] : r.skeleton_recall) recall[ClassMap::tavr().contains(c) ? ClassMap::tavr().name_of(c) : std::to_string(c)] = v;
  return {{"objective", to_string(r.objective)},
          {"total", r.total},
          {"terms",
           {{"dice", optional_value(r.dice)},
            {"ce", optional_value(r.ce)},
            {"focal", optional_value(r.focal)},
            {"sr", optional_value(r.sr)},
            {"focal_sr", optional_value(r.focal_sr)}}},
          {"skeleton_recall", recall},
          {"config",
           {{"gamma", cfg.gamma},
            {"dice_weight", cfg.dice_weight},
            {"ce_weight", cfg.ce_weight},
            {"focal_sr_mode", cfg.focal_sr_mode == FocalSrMode::coupled ? "coupled" : "detached"},
            {"dice_smooth", cfg.dice_smooth},
            {"clamp_eps", cfg.clamp_eps}}}};
}

json to_json(const RootResult& r) {
  const bool located = r.extent.status != RootStatus::failed;
  return {{"status", to_string(r.extent.status)},
          {"max_distance", r.extent.status == RootStatus::found ? json(r.extent.max_distance) : json(nullptr)},
          {"min_distance", located ? json(r.extent.min_distance) : json(nullptr)},
          {"smoothed_min_distance", located ? json(r.extent.smoothed_min_distance) : json(nullptr)},
          {"plane",
           {{"point", {r.plane.point.x(), r.plane.point.y(), r.plane.point.z()}},
            {"normal", {r.plane.normal.x(), r.plane.normal.y(), r.plane.normal.z()}}}},
          {"root_voxels", r.root_mask.count()}};
}

json to_json(const EnrichConfig& cfg) {
  const auto names = [](const std::vector<ClassId>& ids) {
    json a = json::array();
    for (ClassId c : ids) a.push_back(ClassMap::tavr().name_of(c));
    return a;
  };
  return {{"valve_distance", cfg.valve_distance},
          {"annulus_distance", cfg.annulus_distance},
          {"sweep_max_distance", cfg.sweep_max_distance},
          {"sweep_step", cfg.sweep_step},
          {"slab_half_width", cfg.slab_half_width},
          {"smoothing_window", cfg.smoothing_window},
          {"fallback_min_distance", cfg.fallback_min_distance},
          {"metric", cfg.metric == Metric::index_euclidean ? "index_euclidean" : "world_euclidean"},
          {"precedence", names(cfg.precedence)},
          {"required", names(cfg.required)}};
}

std::string curve_csv(const CrossSectionCurve& curve) {
  std::ostringstream os;
  os << "distance,raw_count,smoothed\n";
  for (std::size_t k = 0; k < curve.size(); ++k)
    os << num(curve.distances[k]) << ',' << curve.raw_counts[k] << ',' << num(curve.smoothed[k]) << '\n';
  return os.str();
}

std::string trace_csv(const std::vector<TraceEntry>& trace) {
  std::ostringstream os;
  os << "iteration,total,dice_mean";
  if (trace.empty()) return os.str() + "\n";
  const TraceEntry& first = trace.front();
  const std::pair<const char*, std::optional<double> TraceEntry::*> terms[] = {
      {"dice", &TraceEntry::dice}, {"ce", &TraceEntry::ce},           {"focal", &TraceEntry::focal},
      {"sr", &TraceEntry::sr},     {"focal_sr", &TraceEntry::focal_sr}};
  for (const auto& [name, member] : terms)
    if ((first.*member).has_value()) os << ',' << name;
  if (first.watch_components) os << ",components";
  os << '\n';
  for (const auto& e : trace) {
    os << e.iteration << ',' << num(e.total) << ',' << num(e.metrics.mean_dice);
    for (const auto& [name, member] : terms)
      if ((first.*member).has_value()) os << ',' << num((e.*member).value_or(0.0));
    if (first.watch_components) os << ',' << e.watch_components.value_or(0);
    os << '\n';
  }
  return os.str();
}

}  // namespace tavr::io
