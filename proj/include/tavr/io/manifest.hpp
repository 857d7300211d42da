#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace tavr::io {

enum class Split { train, val, test };
std::string to_string(Split s);
Split split_from_string(std::string_view s);

struct ManifestCase {
  std::string case_id;
  std::filesystem::path label_path;  // resolved against the manifest directory
  Split split = Split::train;
  std::optional<std::filesystem::path> pred_path;
};

struct SplitCounts {
  std::size_t train = 0, val = 0, test = 0;
  std::size_t total() const { return train + val + test; }
};

// JSON: {"cases": [{"case_id": "...", "label_path": "...", "split": "train|val|test",
//                   "pred_path": "..." (optional)}]}
struct DatasetManifest {
  std::vector<ManifestCase> cases;

  SplitCounts counts() const;
  std::vector<std::string> duplicate_ids() const;
};

// Schema errors throw. Duplicate ids and missing files are left to the caller
// (see DatasetManifest::duplicate_ids and validate commands).
DatasetManifest load_manifest(const std::filesystem::path& path);
DatasetManifest parse_manifest(const std::string& json_text, const std::filesystem::path& base_dir);

// Split sizes of the published enriched dataset.
inline constexpr SplitCounts kPublishedSplits{378, 100, 100};

}  // namespace tavr::io
