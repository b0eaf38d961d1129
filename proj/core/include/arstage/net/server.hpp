#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "arstage/content/content_item.hpp"
#include "arstage/server/config.hpp"
#include "arstage/server/session.hpp"
#include "arstage/viewsim/walkable.hpp"

namespace arstage::net {

/// The listener could not be set up (bad address, port in use).
class BindError : public Error {
 public:
  using Error::Error;
};

/// The staging server on the network: one HTTP listener serving
///
/// - `GET /healthz`  → `{"status":"ok","users":N,"revision":R}`;
/// - `GET /ws`       → WebSocket upgrade; one protocol message per text frame;
/// - `GET /...`      → files of `static_dir` (the console bundle), or a
///                     placeholder page when no bundle is configured.
///
/// When `auth_token` is set, the upgrade must carry it as
/// `Authorization: Bearer <token>` or as a `token` query parameter
/// (browsers cannot set headers on WebSocket requests); otherwise the server
/// answers 401.
///
/// Connections are handled concurrently, each on its own strand. Every call
/// into the session (messages, joins, leaves, ticks, health) is serialized on
/// one session strand, which is the single command queue for all mutations.
class StagingServer {
 public:
  StagingServer(server::ServerConfig config, content::Project project,
                std::optional<viewsim::WalkableSet> walkable = std::nullopt);
  ~StagingServer();
  StagingServer(const StagingServer&) = delete;
  StagingServer& operator=(const StagingServer&) = delete;

  /// Called on the session strand after each accepted edit. Set before start().
  void set_change_hook(server::Session::ChangeHook hook);

  /// Binds `bind_addr` and starts accepting. Returns the bound port, which
  /// differs from the configured one when that is 0. Throws BindError.
  std::uint16_t start();
  /// Serves on the calling thread plus `threads - 1` helpers until stop().
  void run(unsigned threads = 1);
  /// Thread-safe; makes run() return.
  void stop();

  [[nodiscard]] std::uint16_t port() const;

 private:
  class Impl;
  std::shared_ptr<Impl> impl_;
};

}  // namespace arstage::net
