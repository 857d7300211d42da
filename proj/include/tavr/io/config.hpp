#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "tavr/enrich.hpp"
#include "tavr/io/nifti.hpp"
#include "tavr/losses.hpp"

namespace tavr::io {

// Everything a `--config` file can set. Keys are the field names of
// EnrichConfig and LossConfig plus `tube_radius` and `label_map`.
struct Settings {
  EnrichConfig enrich;
  LossConfig loss;
  double tube_radius = 0.0;
  std::optional<LabelMapping> label_map;
};

// Plain text, one `key = value` per line, `#` starts a comment. Unknown keys
// and malformed values are errors naming the line.
Settings parse_settings(const std::string& text, const std::string& origin = "<config>");
Settings load_settings(const std::filesystem::path& path);

// "7:aorta, 46:left_ventricle" -> {7: 1, 46: 2}; names or numeric ids allowed.
LabelMapping parse_label_map(const std::string& value, const ClassMap& classes = ClassMap::tavr());

}  // namespace tavr::io
