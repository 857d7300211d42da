#include "tavr/io/manifest.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "tavr/error.hpp"

namespace tavr::io {

std::string to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "unknown";
}

Split split_from_string(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "val" || s == "validation") return Split::val;
  if (s == "test") return Split::test;
  throw Error("unknown split '" + std::string(s) + "'");
}

SplitCounts DatasetManifest::counts() const {
  SplitCounts c;
  for (const auto& m : cases) {
    switch (m.split) {
      case Split::train: ++c.train; break;
      case Split::val: ++c.val; break;
      case Split::test: ++c.test; break;
    }
  }
  return c;
}

std::vector<std::string> DatasetManifest::duplicate_ids() const {
  std::map<std::string, int> seen;
  std::vector<std::string> out;
  for (const auto& m : cases)
    if (++seen[m.case_id] == 2) out.push_back(m.case_id);
  return out;
}

DatasetManifest parse_manifest(const std::string& json_text, const std::filesystem::path& base_dir) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("cases") || !doc["cases"].is_array())
    throw Error("manifest must be an object with a \"cases\" array");
  const auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };
  DatasetManifest m;
  std::size_t k = 0;
  for (const auto& c : doc["cases"]) {
    const std::string where = "manifest case #" + std::to_string(k++);
    if (!c.is_object()) throw Error(where + " is not an object");
    for (const char* key : {"case_id", "label_path", "split"})
      if (!c.contains(key) || !c[key].is_string()) throw Error(where + " lacks string field \"" + key + "\"");
    ManifestCase mc;
    mc.case_id = c["case_id"].get<std::string>();
    mc.label_path = resolve(c["label_path"].get<std::string>());
    mc.split = split_from_string(c["split"].get<std::string>());
    if (c.contains("pred_path")) {
      if (!c["pred_path"].is_string()) throw Error(where + ": pred_path must be a string");
      mc.pred_path = resolve(c["pred_path"].get<std::string>());
    }
    m.cases.push_back(std::move(mc));
  }
  return m;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read manifest " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str(), path.parent_path());
}

}  // namespace tavr::io
