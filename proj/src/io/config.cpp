#include "tavr/io/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

namespace tavr::io {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& v, const std::string& where) {
  double out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw Error(where + ": expected a number, got '" + v + "'");
  return out;
}

int to_int(const std::string& v, const std::string& where) {
  int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw Error(where + ": expected an integer, got '" + v + "'");
  return out;
}

ClassId class_ref(const std::string& v, const ClassMap& classes, const std::string& where) {
  if (auto id = classes.find(v)) return *id;
  const int n = to_int(v, where);
  if (n < 0 || n > 255 || !classes.contains(static_cast<ClassId>(n))) throw Error(where + ": unknown class '" + v + "'");
  return static_cast<ClassId>(n);
}

std::vector<ClassId> class_list(const std::string& v, const std::string& where) {
  std::vector<ClassId> out;
  for (const auto& item : split(v, ',')) out.push_back(class_ref(item, ClassMap::tavr(), where));
  return out;
}

}  // namespace

LabelMapping parse_label_map(const std::string& value, const ClassMap& classes) {
  LabelMapping out;
  for (const auto& pair : split(value, ',')) {
    const auto colon = pair.find(':');
    if (colon == std::string::npos) throw Error("label_map entry '" + pair + "' is not source:class");
    const int source = to_int(trim(pair.substr(0, colon)), "label_map");
    if (out.count(source)) throw Error("label_map maps source value " + std::to_string(source) + " twice");
    out[source] = class_ref(trim(pair.substr(colon + 1)), classes, "label_map");
  }
  return out;
}

Settings parse_settings(const std::string& text, const std::string& origin) {
  Settings s;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = origin + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw Error(where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "valve_distance") s.enrich.valve_distance = to_double(value, where);
    else if (key == "annulus_distance") s.enrich.annulus_distance = to_double(value, where);
    else if (key == "sweep_max_distance") s.enrich.sweep_max_distance = to_double(value, where);
    else if (key == "sweep_step") s.enrich.sweep_step = to_double(value, where);
    else if (key == "slab_half_width") s.enrich.slab_half_width = to_double(value, where);
    else if (key == "smoothing_window") s.enrich.smoothing_window = to_int(value, where);
    else if (key == "fallback_min_distance") s.enrich.fallback_min_distance = to_double(value, where);
    else if (key == "precedence") s.enrich.precedence = class_list(value, where);
    else if (key == "required") s.enrich.required = class_list(value, where);
    else if (key == "metric") {
      if (value == "index_euclidean" || value == "index") s.enrich.metric = Metric::index_euclidean;
      else if (value == "world_euclidean" || value == "world") s.enrich.metric = Metric::world_euclidean;
      else throw Error(where + ": metric must be index_euclidean or world_euclidean");
    } else if (key == "gamma") s.loss.gamma = to_double(value, where);
    else if (key == "dice_weight") s.loss.dice_weight = to_double(value, where);
    else if (key == "ce_weight") s.loss.ce_weight = to_double(value, where);
    else if (key == "dice_smooth") s.loss.dice_smooth = to_double(value, where);
    else if (key == "clamp_eps") s.loss.clamp_eps = to_double(value, where);
    else if (key == "focal_sr_mode") {
      if (value == "coupled") s.loss.focal_sr_mode = FocalSrMode::coupled;
      else if (value == "detached") s.loss.focal_sr_mode = FocalSrMode::detached;
      else throw Error(where + ": focal_sr_mode must be coupled or detached");
    } else if (key == "reduction") {
      if (value != "mean_voxels_and_classes") throw Error(where + ": only mean_voxels_and_classes is supported");
    } else if (key == "tube_radius") s.tube_radius = to_double(value, where);
    else if (key == "label_map") s.label_map = parse_label_map(value);
    else throw Error(where + ": unknown key '" + key + "'");
  }
  s.enrich.validate();
  s.loss.validate();
  if (!(s.tube_radius >= 0)) throw Error(origin + ": tube_radius must be >= 0");
  return s;
}

Settings load_settings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_settings(ss.str(), path.string());
}

}  // namespace tavr::io
