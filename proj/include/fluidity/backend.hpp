#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fluidity/descriptor.hpp"
#include "fluidity/domain.hpp"

namespace fluidity {

inline constexpr std::string_view kProtocolVersion = "fluidity-protocol/1";

/// Opaque image artifact. Real backends return PNG; the mock suite returns
/// text-serialized scenes.
struct Image {
  std::string media_type = "image/png";
  std::string bytes;

  /// File extension used when the image is persisted ("png" or "scene").
  std::string extension() const;

  friend bool operator==(const Image&, const Image&) = default;
};

struct Embedding {
  std::vector<double> vector;

  std::size_t dim() const { return vector.size(); }
};

enum class ErrorKind { transport, backend, timeout };

std::string_view to_string(ErrorKind kind);

/// Every failed request surfaces as exactly one of three kinds.
class BackendError : public std::runtime_error {
 public:
  BackendError(ErrorKind kind, std::string endpoint, const std::string& message)
      : std::runtime_error(message), kind_(kind), endpoint_(std::move(endpoint)) {}

  ErrorKind kind() const { return kind_; }
  const std::string& endpoint() const { return endpoint_; }

 private:
  ErrorKind kind_;
  std::string endpoint_;
};

class TransportError : public BackendError {
 public:
  TransportError(std::string endpoint, const std::string& message)
      : BackendError(ErrorKind::transport, std::move(endpoint), message) {}
};

class TimeoutError : public BackendError {
 public:
  TimeoutError(std::string endpoint, const std::string& message)
      : BackendError(ErrorKind::timeout, std::move(endpoint), message) {}
};

/// The backend answered with {"ok":false,"error":{...}}.
class BackendFailure : public BackendError {
 public:
  BackendFailure(std::string endpoint, std::string payload_kind, const std::string& message)
      : BackendError(ErrorKind::backend, std::move(endpoint), message), payload_kind_(std::move(payload_kind)) {}

  const std::string& payload_kind() const { return payload_kind_; }

 private:
  std::string payload_kind_;
};

/// Carries one protocol request to a backend and returns the decoded
/// response envelope. Implementations throw TransportError or TimeoutError;
/// backend-level errors come back as an {"ok":false} envelope.
class Transport {
 public:
  virtual ~Transport() = default;
  /// `route` is one of /health, /caption, /generate, /labels, /embed.
  virtual nlohmann::json post(std::string_view route, const nlohmann::json& request) = 0;
};

struct HttpOptions {
  double timeout_seconds = 30.0;
  int retries = 2;
};

/// Plain HTTP/JSON transport to a protocol server at `base_url`.
std::shared_ptr<Transport> make_http_transport(const std::string& base_url, HttpOptions options);

/// Serves any Transport over HTTP so out-of-process harnesses can reach it.
class ProtocolServer {
 public:
  explicit ProtocolServer(std::shared_ptr<Transport> handler);
  ~ProtocolServer();
  ProtocolServer(const ProtocolServer&) = delete;
  ProtocolServer& operator=(const ProtocolServer&) = delete;

  /// Binds to `port` (0 picks a free one) and returns the bound port, or -1.
  int bind(const std::string& host, int port);
  /// Blocks until stop() is called.
  void listen_after_bind();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::string base64_encode(std::string_view bytes);
/// Throws std::invalid_argument on malformed input.
std::string base64_decode(std::string_view text);

/// Typed front end for the four inference roles. Safe for concurrent use.
class BackendClient {
 public:
  BackendClient() = default;

  /// Routes "mock:<name>" endpoints to an in-process transport.
  void mount(const std::string& name, std::shared_ptr<Transport> transport);

  Caption request_caption(const Image& image, const BackendDescriptor& backend, std::uint64_t seed,
                          int step_index) const;
  Image request_image(const Caption& prompt, const BackendDescriptor& backend, std::uint64_t seed) const;
  LabelSet request_labels(const Image& image, const BackendDescriptor& backend, std::uint64_t seed) const;
  Embedding embed_text(std::string_view text, const BackendDescriptor& backend) const;
  Embedding embed_image(const Image& image, const BackendDescriptor& backend) const;
  bool health(const BackendDescriptor& backend) const;

 private:
  nlohmann::json call(const BackendDescriptor& backend, std::string_view route, nlohmann::json request) const;
  std::shared_ptr<Transport> transport_for(const BackendDescriptor& backend) const;

  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Transport>> mounts_;
  mutable std::map<std::string, std::shared_ptr<Transport>> http_;
};

}  // namespace fluidity
