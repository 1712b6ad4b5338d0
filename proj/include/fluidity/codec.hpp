#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fluidity/domain.hpp"

namespace fluidity {

/// Raised when stored bytes cannot be turned back into a record. `field` is
/// the JSON path being read ("/steps/3/metrics/compat_score"); `byte_offset`
/// is set for syntax errors and is npos for schema errors.
class DecodeError : public std::runtime_error {
 public:
  DecodeError(std::string field, std::size_t byte_offset, const std::string& message);

  const std::string& field() const { return field_; }
  std::size_t byte_offset() const { return byte_offset_; }

 private:
  std::string field_;
  std::size_t byte_offset_;
};

// Records are stored as UTF-8 JSON with sorted keys, two-space indent and a
// trailing newline. Doubles are written in shortest round-trip form, so
// decode(encode(r)) == r and the encoding is canonical.
std::string encode_record(const ChainRecord& record);
ChainRecord decode_record(std::string_view bytes);

std::string encode_manifest(const RunManifest& manifest);
RunManifest decode_manifest(std::string_view bytes);

std::string encode_seed_set(const std::vector<SeedImage>& seeds);
std::vector<SeedImage> decode_seed_set(std::string_view bytes);

nlohmann::json to_json(const BackendDescriptor& descriptor);
BackendDescriptor descriptor_from_json(const nlohmann::json& j, const std::string& path = "");

nlohmann::json to_json(const Thresholds& thresholds);
Thresholds thresholds_from_json(const nlohmann::json& j, const std::string& path = "");

/// Parses JSON text, reporting the byte offset and the field being read on failure.
nlohmann::json parse_tracked(std::string_view bytes);

}  // namespace fluidity
