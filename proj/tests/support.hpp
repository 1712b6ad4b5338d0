#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fluidity/config.hpp"
#include "fluidity/engine.hpp"
#include "fluidity/mock.hpp"
#include "fluidity/run_dir.hpp"

namespace fluidity::test {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(FLUIDITY_FIXTURE_DIR) / name;
}

// Fresh directory under the system temp dir, removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t") {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("fluidity-" + tag + "-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

// Minimal RFC 4180 reader: header row becomes the keys.
inline std::vector<std::map<std::string, std::string>> read_csv_text(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(field);
      field.clear();
    } else if (c == '\n') {
      row.push_back(field);
      field.clear();
      rows.push_back(row);
      row.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  if (!field.empty() || !row.empty()) {
    row.push_back(field);
    rows.push_back(row);
  }
  std::vector<std::map<std::string, std::string>> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    std::map<std::string, std::string> m;
    for (std::size_t k = 0; k < rows[0].size() && k < rows[r].size(); ++k) m[rows[0][k]] = rows[r][k];
    out.push_back(m);
  }
  return out;
}

inline std::vector<std::map<std::string, std::string>> read_csv(const std::filesystem::path& path) {
  return read_csv_text(read_file(path));
}

inline std::vector<std::string> csv_header(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream line(text.substr(0, text.find('\n')));
  std::string f;
  while (std::getline(line, f, ',')) out.push_back(f);
  return out;
}

// Mock seed scenes written under `dir`, as a seed set.
inline std::vector<SeedImage> mock_seed_set(const std::filesystem::path& dir, std::size_t count, std::uint64_t seed,
                                            double person_fraction = 0.0) {
  const auto& onto = MockOntology::default_ontology();
  const auto ids = write_scene_files(make_mock_seed_scenes(onto, count, seed, person_fraction), dir);
  std::vector<SeedImage> out;
  for (const auto& id : ids) out.push_back({id, dir / (id + ".scene"), std::nullopt});
  return out;
}

inline ExperimentConfig mock_config(std::vector<SeedImage> seeds, double drift, std::uint64_t rng_seed,
                                    int workers = 4, const std::string& mount = "suite") {
  ExperimentConfig c;
  apply_mock_suite(c, make_mock_suite(MockOntology::default_ontology(), drift, rng_seed, mount));
  c.run_id = "mock-" + std::to_string(drift);
  c.seed_set = std::move(seeds);
  c.rng_seed = rng_seed;
  c.workers = workers;
  return c;
}

// A client with one fresh mock service mounted at `mount`.
struct MockClient {
  std::shared_ptr<MockService> service = std::make_shared<MockService>();
  BackendClient client;

  explicit MockClient(const std::string& mount = "suite") { client.mount(mount, service); }
};

}  // namespace fluidity::test
