#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fluidity/domain.hpp"

namespace fluidity {

std::string read_file(const std::filesystem::path& path);
/// Writes to a sibling temp file, then renames over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// On-disk layout of one run:
///   <root>/manifest.json
///   <root>/chains/<seed_id>.json
///   <root>/images/<seed_id>/<step>.png   (mock backends: <step>.scene)
///   <root>/reports/
class RunDirectory {
 public:
  explicit RunDirectory(std::filesystem::path root) : root_(std::move(root)) {}

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path manifest_path() const { return root_ / "manifest.json"; }
  std::filesystem::path chains_dir() const { return root_ / "chains"; }
  std::filesystem::path chain_path(std::string_view seed_id) const;
  std::filesystem::path reports_dir() const { return root_ / "reports"; }

  bool has_manifest() const;
  RunManifest load_manifest() const;
  void save_manifest(const RunManifest& manifest) const;

  void save_chain(const ChainRecord& record) const;
  std::optional<ChainRecord> load_chain(std::string_view seed_id) const;
  /// All stored chains, sorted by seed id.
  std::vector<ChainRecord> load_chains() const;

  /// Stores an image artifact and returns its path relative to the root.
  std::string save_image(std::string_view seed_id, int step, std::string_view extension,
                         std::string_view bytes) const;

 private:
  std::filesystem::path root_;
};

}  // namespace fluidity
