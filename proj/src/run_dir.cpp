#include "fluidity/run_dir.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "fluidity/codec.hpp"

namespace fluidity {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file_atomic(const fs::path& path, std::string_view contents) {
  static std::atomic<unsigned> counter{0};
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const auto tid = std::hash<std::thread::id>{}(std::this_thread::get_id());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(tid) + "." + std::to_string(counter.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

fs::path RunDirectory::chain_path(std::string_view seed_id) const {
  return chains_dir() / (std::string(seed_id) + ".json");
}

bool RunDirectory::has_manifest() const { return fs::exists(manifest_path()); }

RunManifest RunDirectory::load_manifest() const { return decode_manifest(read_file(manifest_path())); }

void RunDirectory::save_manifest(const RunManifest& manifest) const {
  write_file_atomic(manifest_path(), encode_manifest(manifest));
}

void RunDirectory::save_chain(const ChainRecord& record) const {
  write_file_atomic(chain_path(record.seed.id), encode_record(record));
}

std::optional<ChainRecord> RunDirectory::load_chain(std::string_view seed_id) const {
  const auto path = chain_path(seed_id);
  if (!fs::exists(path)) return std::nullopt;
  return decode_record(read_file(path));
}

std::vector<ChainRecord> RunDirectory::load_chains() const {
  std::vector<fs::path> files;
  if (fs::exists(chains_dir())) {
    for (const auto& entry : fs::directory_iterator(chains_dir())) {
      if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<ChainRecord> records;
  records.reserve(files.size());
  for (const auto& f : files) records.push_back(decode_record(read_file(f)));
  return records;
}

std::string RunDirectory::save_image(std::string_view seed_id, int step, std::string_view extension,
                                     std::string_view bytes) const {
  const fs::path relative = fs::path("images") / std::string(seed_id) / (std::to_string(step) + "." + std::string(extension));
  write_file_atomic(root_ / relative, bytes);
  return relative.generic_string();
}

}  // namespace fluidity
