#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "arstage/error.hpp"
#include "arstage/sim/client.hpp"
#include "arstage/sim/harness.hpp"

namespace arstage::net {

/// Could not reach the server, or it refused the upgrade.
class ConnectError : public Error {
 public:
  using Error::Error;
};

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 8080;
  /// Sent as `Authorization: Bearer <token>` when not empty.
  std::string token;
};

/// Parses "host:port", "ws://host:port[/ws]" or "http://host:port".
/// Throws ValidationError.
Endpoint parse_endpoint(const std::string& text);

struct HttpResponse {
  unsigned status = 0;
  std::map<std::string, std::string> headers;
  std::string body;
};

/// One blocking HTTP/1.1 GET. Throws ConnectError on transport failure.
HttpResponse http_get(const Endpoint& endpoint, const std::string& target,
                      std::chrono::milliseconds timeout = std::chrono::seconds(5));

/// A blocking WebSocket connection to `/ws`, for tools and tests.
class WsClient {
 public:
  /// Connects and upgrades, retrying up to `retries` more times with
  /// doubling delay. Throws ConnectError (an HTTP refusal such as 401 is not
  /// retried; its status is in the message).
  explicit WsClient(const Endpoint& endpoint, int retries = 3,
                    std::chrono::milliseconds first_delay = std::chrono::milliseconds(200));
  ~WsClient();
  WsClient(const WsClient&) = delete;
  WsClient& operator=(const WsClient&) = delete;

  void send(const std::string& text);
  /// The next text frame, or empty on timeout. Throws ConnectError once the
  /// connection is closed.
  std::optional<std::string> receive(std::chrono::milliseconds timeout);
  void close();
  [[nodiscard]] bool is_open() const;

 private:
  class Impl;
  std::unique_ptr<Impl> impl_;
};

struct FleetOptions {
  Endpoint endpoint;
  /// Scenario seconds per wall-clock second.
  double time_scale = 1.0;
  int connect_retries = 3;
  std::chrono::milliseconds retry_delay{200};
  /// How long to keep listening after the last client finishes.
  std::chrono::milliseconds linger{500};
};

struct FleetReport {
  /// Client ids that never connected, with the reason.
  std::map<std::string, std::string> failures;
};

/// Runs scripted clients (and optionally an observing designer) against a
/// live server, all concurrently on one event loop. Each client steps on the
/// wall clock, paced by `time_scale`. The clients and observer are owned by
/// the caller and hold the results when this returns.
FleetReport run_fleet(const std::vector<sim::SimClient*>& clients, sim::MonitorObserver* observer,
                      const FleetOptions& options);

}  // namespace arstage::net
