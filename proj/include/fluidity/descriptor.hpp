#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace fluidity {

enum class Role { captioner, image_generator, labeler, embedder };

std::string_view to_string(Role role);
std::optional<Role> parse_role(std::string_view text);

/// Identity and location of one inference backend. `endpoint` is either an
/// http(s) base URL or "mock:<name>" for an in-process service.
struct BackendDescriptor {
  Role role = Role::captioner;
  std::string backend_id;
  std::string endpoint;
  std::map<std::string, std::string> params;
  std::uint64_t rng_seed = 0;

  bool is_mock() const { return endpoint.starts_with("mock:"); }
  std::string param_or(const std::string& key, std::string fallback) const;

  friend bool operator==(const BackendDescriptor&, const BackendDescriptor&) = default;
};

}  // namespace fluidity
