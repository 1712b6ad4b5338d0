#include "fluidity/conformance.hpp"

#include <cmath>
#include <optional>

namespace fluidity {

using nlohmann::json;

bool ConformanceReport::passed() const {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return !checks.empty();
}

const ConformanceCheck* ConformanceReport::find(std::string_view name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

json ConformanceReport::to_json() const {
  json out = {{"protocol", std::string(kProtocolVersion)}, {"passed", passed()}, {"checks", json::array()}};
  for (const auto& c : checks) out["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  return out;
}

namespace {

constexpr int kOversizedWords = 4000;

class Prober {
 public:
  Prober(Transport& transport, const ConformanceProbe& probe) : transport_(transport), probe_(probe) {}

  ConformanceReport run() {
    health();
    const auto image = generate_image();
    caption(image);
    labels(image);
    embed(image);
    edge_cases();
    determinism(image);
    envelope_shape();
    return std::move(report_);
  }

 private:
  void record(std::string name, bool passed, std::string detail = "") {
    report_.checks.push_back({std::move(name), passed, std::move(detail)});
  }

  json request(const std::string& input, std::map<std::string, std::string> extra = {}) const {
    json params = json::object();
    for (const auto& [k, v] : probe_.params) params[k] = v;
    for (const auto& [k, v] : extra) params[k] = v;
    return {{"input", input}, {"params", params}, {"seed", probe_.seed}};
  }

  json image_request(const Image& image, std::map<std::string, std::string> extra = {}) const {
    extra["media_type"] = image.media_type;
    return request(base64_encode(image.bytes), std::move(extra));
  }

  // Sends one request. Transport failures and missing routes become
  // nullopt, and the first such failure per route is recorded.
  std::optional<json> send(const std::string& route, const json& body) {
    try {
      json reply = transport_.post(route, body);
      seen_.push_back(reply);
      if (!reply.value("ok", false) && reply.contains("error") && reply["error"].value("kind", "") == "not_found") {
        missing(route);
        return std::nullopt;
      }
      return reply;
    } catch (const BackendFailure& e) {
      if (e.payload_kind() == "not_found") {
        missing(route);
      } else {
        record("reachable " + route, false, e.what());
      }
    } catch (const std::exception& e) {
      record("reachable " + route, false, e.what());
    }
    return std::nullopt;
  }

  void missing(const std::string& route) {
    for (const auto& c : report_.checks) {
      if (c.name == "missing endpoint" && c.detail == route) return;
    }
    record("missing endpoint", false, route);
  }

  static bool is_ok(const std::optional<json>& r) { return r && r->value("ok", false) && r->contains("result"); }

  static bool is_typed_error(const std::optional<json>& r) {
    return r && !r->value("ok", true) && r->contains("error") && (*r)["error"].is_object() &&
           (*r)["error"].contains("kind") && (*r)["error"]["kind"].is_string() && (*r)["error"].contains("message");
  }

  static std::string describe(const std::optional<json>& r) { return r ? r->dump().substr(0, 200) : "no reply"; }

  void health() {
    try {
      const json r = transport_.post("/health", json::object());
      record("health", r.value("ok", false), r.dump());
    } catch (const std::exception& e) {
      record("health", false, e.what());
    }
  }

  std::optional<Image> generate_image() {
    const auto r = send("/generate", request(probe_.prompt));
    if (!r) return std::nullopt;
    const bool shaped = is_ok(r) && (*r)["result"].is_object() && (*r)["result"].contains("data") &&
                        (*r)["result"]["data"].is_string();
    if (!shaped) {
      record("generate returns an image", false, describe(r));
      return std::nullopt;
    }
    Image image;
    image.media_type = (*r)["result"].value("media_type", std::string("image/png"));
    try {
      image.bytes = base64_decode((*r)["result"]["data"].get<std::string>());
    } catch (const std::exception& e) {
      record("generate returns an image", false, std::string("result is not base64: ") + e.what());
      return std::nullopt;
    }
    record("generate returns an image", !image.bytes.empty(), image.media_type);
    return image;
  }

  void caption(const std::optional<Image>& image) {
    if (!image) return;
    const auto r = send("/caption", image_request(*image));
    if (!r) return;
    const bool good = is_ok(r) && (*r)["result"].is_string() &&
                      (*r)["result"].get<std::string>().find_first_not_of(" \t\r\n") != std::string::npos;
    record("caption returns text", good, describe(r));
  }

  void labels(const std::optional<Image>& image) {
    auto check_list = [&](const std::string& name, const std::optional<json>& r) {
      if (!r) return;
      bool good = is_ok(r) && (*r)["result"].is_array();
      if (good) {
        for (const auto& l : (*r)["result"]) good = good && l.is_string();
      }
      record(name, good, describe(r));
    };
    if (image) check_list("labels returns a list", send("/labels", image_request(*image)));
    // A blank image may legitimately have no labels, but it must not be an error.
    check_list("labels on a blank image", send("/labels", image_request(probe_.blank_image)));
  }

  void embed(const std::optional<Image>& image) {
    auto vector_of = [](const std::optional<json>& r) -> std::optional<std::vector<double>> {
      if (!is_ok(r) || !(*r)["result"].is_array() || (*r)["result"].empty()) return std::nullopt;
      std::vector<double> v;
      double norm = 0.0;
      for (const auto& x : (*r)["result"]) {
        if (!x.is_number()) return std::nullopt;
        v.push_back(x.get<double>());
        if (!std::isfinite(v.back())) return std::nullopt;
        norm += v.back() * v.back();
      }
      if (norm == 0.0) return std::nullopt;
      return v;
    };
    const auto text = send("/embed", request(probe_.prompt, {{"modality", "text"}}));
    if (!text) return;
    const auto tv = vector_of(text);
    record("embed text returns a vector", tv.has_value(), describe(text));
    if (!image) return;
    const auto img = send("/embed", image_request(*image, {{"modality", "image"}}));
    if (!img) return;
    const auto iv = vector_of(img);
    record("embed image returns a vector", iv.has_value(), describe(img));
    if (tv && iv) {
      record("embed dimensions agree", tv->size() == iv->size(),
             std::to_string(tv->size()) + " vs " + std::to_string(iv->size()));
    }
  }

  void edge_cases() {
    if (const auto r = send("/generate", request("")); r) {
      record("empty prompt rejected", is_typed_error(r), describe(r));
    }
    if (const auto r = send("/caption", request("@@not base64@@", {{"media_type", probe_.blank_image.media_type}})); r) {
      record("malformed base64 rejected", is_typed_error(r), describe(r));
    }
    std::string oversized;
    for (int i = 0; i < kOversizedWords; ++i) oversized += i % 2 == 0 ? "red " : "truck ";
    if (const auto r = send("/generate", request(oversized)); r) {
      record("oversized caption answered", is_ok(r) || is_typed_error(r), describe(r));
    }
    if (const auto r = send("/embed", request(probe_.prompt, {{"modality", "smell"}})); r) {
      record("unknown modality rejected", is_typed_error(r), describe(r));
    }
  }

  void determinism(const std::optional<Image>& image) {
    const auto g1 = send("/generate", request(probe_.prompt));
    const auto g2 = send("/generate", request(probe_.prompt));
    if (g1 && g2) record("determinism", *g1 == *g2, "/generate twice with one seed");
    if (!image) return;
    const auto c1 = send("/caption", image_request(*image));
    const auto c2 = send("/caption", image_request(*image));
    if (c1 && c2) record("determinism", *c1 == *c2, "/caption twice with one seed");
  }

  void envelope_shape() {
    bool good = true;
    std::string bad;
    for (const auto& r : seen_) {
      const bool shaped = r.is_object() && r.contains("ok") && r["ok"].is_boolean() &&
                          (r["ok"].get<bool>() ? r.contains("result") : is_typed_error(r));
      if (!shaped && good) bad = r.dump().substr(0, 200);
      good = good && shaped;
    }
    record("envelopes well formed", good, bad);
  }

  Transport& transport_;
  const ConformanceProbe& probe_;
  ConformanceReport report_;
  std::vector<json> seen_;
};

}  // namespace

ConformanceReport conformance_check(Transport& transport, const ConformanceProbe& probe) {
  return Prober(transport, probe).run();
}

ConformanceReport conformance_check(const std::string& base_url, const ConformanceProbe& probe) {
  HttpOptions options;
  options.retries = 0;
  const auto transport = make_http_transport(base_url, options);
  return conformance_check(*transport, probe);
}

}  // namespace fluidity
