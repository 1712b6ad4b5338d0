#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "fluidity/backend.hpp"

namespace fluidity {

struct ConformanceCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ConformanceReport {
  std::vector<ConformanceCheck> checks;

  bool passed() const;
  const ConformanceCheck* find(std::string_view name) const;
  /// Conformance manifest: {"protocol": ..., "passed": bool, "checks": [{name, passed, detail}]}.
  nlohmann::json to_json() const;
};

/// Inputs a server under test must accept. The defaults suit the mock suite;
/// for a PNG server set `blank_image` to a plain PNG and add role params.
struct ConformanceProbe {
  std::string prompt = "a red truck on a road";
  Image blank_image{"text/x-scene", "scene v1\n"};
  std::map<std::string, std::string> params;
  std::uint64_t seed = 12345;
};

/// Exercises /health, /caption, /generate, /labels and /embed with normal
/// and edge payloads (empty prompt, oversized caption, malformed base64,
/// blank image), checks the error taxonomy and repeats seeded requests to
/// check determinism. Failures are report entries, never exceptions.
ConformanceReport conformance_check(Transport& transport, const ConformanceProbe& probe = {});
ConformanceReport conformance_check(const std::string& base_url, const ConformanceProbe& probe = {});

}  // namespace fluidity
