#include "fluidity/backend.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace fluidity {

using nlohmann::json;

std::string Image::extension() const {
  if (media_type == "text/x-scene") return "scene";
  if (media_type == "image/jpeg") return "jpg";
  return "png";
}

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::transport: return "transport";
    case ErrorKind::backend: return "backend";
    case ErrorKind::timeout: return "timeout";
  }
  return "unknown";
}

namespace {

constexpr std::string_view kAlphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int decode_char(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}

void require_role(const BackendDescriptor& backend, Role role) {
  if (backend.role != role) {
    throw std::invalid_argument("backend '" + backend.backend_id + "' has role " + std::string(to_string(backend.role)) +
                                ", expected " + std::string(to_string(role)));
  }
}

Embedding to_embedding(const json& result, const std::string& endpoint) {
  if (!result.is_array() || result.empty()) throw BackendFailure(endpoint, "malformed_response", "embedding must be a non-empty array");
  Embedding e;
  e.vector.reserve(result.size());
  double norm = 0.0;
  for (const auto& v : result) {
    if (!v.is_number()) throw BackendFailure(endpoint, "malformed_response", "embedding entries must be numbers");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw BackendFailure(endpoint, "malformed_response", "embedding entries must be finite");
    norm += x * x;
    e.vector.push_back(x);
  }
  if (norm == 0.0) throw BackendFailure(endpoint, "malformed_response", "embedding has zero norm");
  return e;
}

}  // namespace

std::string base64_encode(std::string_view bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) | (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                       static_cast<unsigned char>(bytes[i + 2]);
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  if (i + 1 == bytes.size()) {
    const unsigned v = static_cast<unsigned char>(bytes[i]) << 16;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += "==";
  } else if (i + 2 == bytes.size()) {
    const unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) | (static_cast<unsigned char>(bytes[i + 1]) << 8);
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

std::string base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw std::invalid_argument("base64 length must be a multiple of 4");
  std::string out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    std::array<int, 4> q{};
    int pad = 0;
    for (int k = 0; k < 4; ++k) {
      const char c = text[i + k];
      if (c == '=' && i + 4 == text.size() && k >= 2) {
        q[k] = 0;
        ++pad;
        continue;
      }
      if (pad > 0) throw std::invalid_argument("base64 padding in the middle of a quantum");
      q[k] = decode_char(c);
      if (q[k] < 0) throw std::invalid_argument("invalid base64 character");
    }
    const unsigned v = (q[0] << 18) | (q[1] << 12) | (q[2] << 6) | q[3];
    out += static_cast<char>((v >> 16) & 0xff);
    if (pad < 2) out += static_cast<char>((v >> 8) & 0xff);
    if (pad < 1) out += static_cast<char>(v & 0xff);
  }
  return out;
}

void BackendClient::mount(const std::string& name, std::shared_ptr<Transport> transport) {
  std::lock_guard lock(mutex_);
  mounts_[name] = std::move(transport);
}

std::shared_ptr<Transport> BackendClient::transport_for(const BackendDescriptor& backend) const {
  std::lock_guard lock(mutex_);
  if (backend.is_mock()) {
    const std::string name = backend.endpoint.substr(5);
    auto it = mounts_.find(name);
    if (it == mounts_.end()) throw TransportError(backend.endpoint, "no mock service mounted at " + backend.endpoint);
    return it->second;
  }
  HttpOptions options;
  options.timeout_seconds = std::stod(backend.param_or("timeout_s", "30"));
  options.retries = std::stoi(backend.param_or("retries", "2"));
  const std::string key = backend.endpoint + "|" + std::to_string(options.timeout_seconds) + "|" + std::to_string(options.retries);
  auto it = http_.find(key);
  if (it == http_.end()) it = http_.emplace(key, make_http_transport(backend.endpoint, options)).first;
  return it->second;
}

json BackendClient::call(const BackendDescriptor& backend, std::string_view route, json request) const {
  auto transport = transport_for(backend);
  json response = transport->post(route, request);
  const std::string where = backend.endpoint + std::string(route);
  if (!response.is_object() || !response.contains("ok") || !response["ok"].is_boolean()) {
    throw BackendFailure(where, "malformed_response", "response envelope lacks an 'ok' field");
  }
  if (!response["ok"].get<bool>()) {
    std::string kind = "unknown";
    std::string message = "backend error";
    if (response.contains("error") && response["error"].is_object()) {
      kind = response["error"].value("kind", kind);
      message = response["error"].value("message", message);
    }
    throw BackendFailure(where, kind, where + ": " + message);
  }
  if (route != "/health" && !response.contains("result")) {
    throw BackendFailure(where, "malformed_response", "response lacks a result");
  }
  return route == "/health" ? json(nullptr) : response["result"];
}

namespace {

json make_request(std::string input, const BackendDescriptor& backend, std::uint64_t seed) {
  json params = json::object();
  for (const auto& [k, v] : backend.params) params[k] = v;
  return {{"input", std::move(input)}, {"params", params}, {"seed", seed}};
}

}  // namespace

Caption BackendClient::request_caption(const Image& image, const BackendDescriptor& backend, std::uint64_t seed,
                                       int step_index) const {
  require_role(backend, Role::captioner);
  json request = make_request(base64_encode(image.bytes), backend, seed);
  request["params"]["media_type"] = image.media_type;
  const json result = call(backend, "/caption", std::move(request));
  if (!result.is_string()) throw BackendFailure(backend.endpoint + "/caption", "malformed_response", "caption must be a string");
  return {result.get<std::string>(), backend.backend_id, step_index};
}

Image BackendClient::request_image(const Caption& prompt, const BackendDescriptor& backend, std::uint64_t seed) const {
  require_role(backend, Role::image_generator);
  const json result = call(backend, "/generate", make_request(prompt.text, backend, seed));
  const std::string where = backend.endpoint + "/generate";
  if (!result.is_object() || !result.contains("data") || !result["data"].is_string()) {
    throw BackendFailure(where, "malformed_response", "image result must carry base64 'data'");
  }
  Image image;
  image.media_type = result.value("media_type", std::string("image/png"));
  try {
    image.bytes = base64_decode(result["data"].get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw BackendFailure(where, "malformed_response", std::string("image data: ") + e.what());
  }
  return image;
}

LabelSet BackendClient::request_labels(const Image& image, const BackendDescriptor& backend, std::uint64_t seed) const {
  require_role(backend, Role::labeler);
  json request = make_request(base64_encode(image.bytes), backend, seed);
  request["params"]["media_type"] = image.media_type;
  const json result = call(backend, "/labels", std::move(request));
  if (!result.is_array()) throw BackendFailure(backend.endpoint + "/labels", "malformed_response", "labels must be an array");
  LabelSet set{backend.backend_id, {}};
  for (const auto& label : result) {
    if (!label.is_string()) throw BackendFailure(backend.endpoint + "/labels", "malformed_response", "labels must be strings");
    auto text = label.get<std::string>();
    if (std::find(set.labels.begin(), set.labels.end(), text) == set.labels.end()) set.labels.push_back(std::move(text));
  }
  return set;
}

Embedding BackendClient::embed_text(std::string_view text, const BackendDescriptor& backend) const {
  require_role(backend, Role::embedder);
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) throw std::invalid_argument("cannot embed empty text");
  json request = make_request(std::string(text), backend, backend.rng_seed);
  request["params"]["modality"] = "text";
  return to_embedding(call(backend, "/embed", std::move(request)), backend.endpoint + "/embed");
}

Embedding BackendClient::embed_image(const Image& image, const BackendDescriptor& backend) const {
  require_role(backend, Role::embedder);
  json request = make_request(base64_encode(image.bytes), backend, backend.rng_seed);
  request["params"]["modality"] = "image";
  request["params"]["media_type"] = image.media_type;
  return to_embedding(call(backend, "/embed", std::move(request)), backend.endpoint + "/embed");
}

bool BackendClient::health(const BackendDescriptor& backend) const {
  try {
    call(backend, "/health", json::object());
    return true;
  } catch (const BackendError&) {
    return false;
  }
}

}  // namespace fluidity
