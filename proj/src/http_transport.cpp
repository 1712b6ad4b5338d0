#include <chrono>

#include <httplib.h>

#include "fluidity/backend.hpp"

namespace fluidity {

using nlohmann::json;

namespace {

class HttpTransport final : public Transport {
 public:
  HttpTransport(std::string base_url, HttpOptions options) : base_url_(std::move(base_url)), options_(options) {}

  json post(std::string_view route, const json& request) override {
    TransportError last(base_url_, "no attempt made");
    for (int attempt = 0; attempt <= options_.retries; ++attempt) {
      try {
        return post_once(route, request);
      } catch (const TimeoutError&) {
        throw;
      } catch (const TransportError& e) {
        last = e;
      }
    }
    throw last;
  }

 private:
  json post_once(std::string_view route, const json& request) {
    const std::string where = base_url_ + std::string(route);
    httplib::Client client(base_url_);
    const auto seconds = std::chrono::duration<double>(options_.timeout_seconds);
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(seconds));
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(seconds));
    client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(seconds));

    const auto started = std::chrono::steady_clock::now();
    httplib::Result res = route == "/health" ? client.Get(std::string(route))
                                             : client.Post(std::string(route), request.dump(), "application/json");
    if (!res) {
      const auto error = res.error();
      const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      if (error == httplib::Error::ConnectionTimeout ||
          (error == httplib::Error::Read && elapsed >= 0.9 * options_.timeout_seconds)) {
        throw TimeoutError(where, "request to " + where + " timed out after " + std::to_string(elapsed) + " s");
      }
      throw TransportError(where, "cannot reach " + where + ": " + httplib::to_string(error));
    }
    if (res->status == 404) {
      throw BackendFailure(where, "not_found", where + " does not exist on this server");
    }
    try {
      return json::parse(res->body);
    } catch (const json::parse_error&) {
      throw BackendFailure(where, "malformed_response",
                           where + " returned HTTP " + std::to_string(res->status) + " with a non-JSON body");
    }
  }

  std::string base_url_;
  HttpOptions options_;
};

json error_envelope(const std::string& kind, const std::string& message) {
  return {{"ok", false}, {"error", {{"kind", kind}, {"message", message}}}};
}

}  // namespace

std::shared_ptr<Transport> make_http_transport(const std::string& base_url, HttpOptions options) {
  return std::make_shared<HttpTransport>(base_url, options);
}

struct ProtocolServer::Impl {
  std::shared_ptr<Transport> handler;
  httplib::Server server;
};

ProtocolServer::ProtocolServer(std::shared_ptr<Transport> handler) : impl_(std::make_unique<Impl>()) {
  impl_->handler = std::move(handler);
  auto* impl = impl_.get();
  auto reply = [](httplib::Response& res, const json& body) {
    res.status = body.value("ok", false) ? 200 : 400;
    res.set_content(body.dump(), "application/json");
  };
  impl_->server.Get("/health", [impl, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, impl->handler->post("/health", json::object()));
  });
  for (const char* route : {"/caption", "/generate", "/labels", "/embed"}) {
    impl_->server.Post(route, [impl, reply, route](const httplib::Request& req, httplib::Response& res) {
      json request;
      try {
        request = json::parse(req.body);
      } catch (const json::parse_error& e) {
        reply(res, error_envelope("bad_request", std::string("request body is not JSON: ") + e.what()));
        return;
      }
      try {
        reply(res, impl->handler->post(route, request));
      } catch (const std::exception& e) {
        reply(res, error_envelope("internal", e.what()));
      }
    });
  }
}

ProtocolServer::~ProtocolServer() { stop(); }

int ProtocolServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

void ProtocolServer::listen_after_bind() { impl_->server.listen_after_bind(); }

void ProtocolServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace fluidity
