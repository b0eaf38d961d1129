#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "arstage/content/registry.hpp"
#include "arstage/protocol/codec.hpp"
#include "arstage/protocol/messages.hpp"
#include "arstage/server/config.hpp"
#include "arstage/tracking/fusion.hpp"
#include "arstage/viewsim/view.hpp"
#include "arstage/viewsim/walkable.hpp"

namespace arstage::server {

/// Transport-assigned identifier of one connection.
using ConnectionId = std::uint64_t;

/// Where the session's outgoing traffic goes. Calls are made from the thread
/// driving the session, in the order messages must be delivered per connection.
class Outbox {
 public:
  virtual ~Outbox() = default;
  virtual void send(ConnectionId connection, std::string encoded) = 0;
  /// Close after flushing everything already sent to this connection.
  virtual void close(ConnectionId connection) = 0;
};

struct Health {
  std::string status = "ok";
  /// Registered AR clients (designers are not counted).
  std::size_t users = 0;
  std::uint64_t revision = 0;
  bool operator==(const Health&) const = default;
};

/// The staging session: connected users, their fused poses, and the content
/// registry they share.
///
/// Transport-independent and single-threaded: the owner serializes every call
/// (the network server drives it from one strand, tests call it directly).
/// Time is supplied by the caller in milliseconds on any monotonic clock.
///
/// Delivery rules:
/// - a new connection receives its snapshot before anything else about content;
/// - every accepted edit produces one ContentDelta sent once to every
///   registered connection, clients and designers alike;
/// - only designers receive user_joined, user_left and monitor frames.
class Session {
 public:
  /// Called after each accepted edit with the updated project.
  using ChangeHook = std::function<void(const content::Project&)>;

  Session(ServerConfig config, content::Project project,
          std::optional<viewsim::WalkableSet> walkable, Outbox& outbox);
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  void open(ConnectionId connection, std::int64_t now_ms);
  /// Decodes and handles one wire message. Protocol errors are answered with
  /// an error message; the connection stays open unless the error is fatal.
  void receive(ConnectionId connection, std::string_view bytes, std::int64_t now_ms);
  /// Same as above for an already decoded message (in-process transports).
  void receive(ConnectionId connection, const protocol::Message& message, std::int64_t now_ms);
  /// The transport saw the connection go away.
  void close(ConnectionId connection, std::int64_t now_ms);
  /// Drops silent clients and sends one monitor frame to each designer.
  void tick(std::int64_t now_ms);

  /// The designer feed as of `now_ms` (unchunked).
  [[nodiscard]] protocol::MonitorFrame monitoring_snapshot(std::int64_t now_ms) const;
  [[nodiscard]] Health health() const;
  [[nodiscard]] const content::ContentRegistry& registry() const { return registry_; }
  [[nodiscard]] const ServerConfig& config() const { return config_; }
  [[nodiscard]] std::size_t connection_count() const { return connections_.size(); }
  [[nodiscard]] std::uint64_t ticks() const { return tick_; }

  void set_change_hook(ChangeHook hook) { change_hook_ = std::move(hook); }

 private:
  struct Connection {
    protocol::SequenceValidator incoming;
    std::uint64_t next_seq = 1;
    std::optional<std::string> client_id;
    protocol::Role role = protocol::Role::Client;
  };
  /// A thumbnail paired with the fused pose closest to it in time.
  struct GroundTruth {
    geo::LocalPose actual;
    geo::LocalPose expected;
    std::int64_t timestamp_ms = 0;
  };
  struct User {
    ConnectionId connection = 0;
    protocol::ClientHello hello;
    tracking::PoseFusion fusion;
    std::optional<protocol::Telemetry> telemetry;
    std::optional<GroundTruth> truth;
    /// Recent fused outputs, for pairing with thumbnails.
    std::deque<tracking::FusedPose> history;
    std::int64_t last_seen_ms = 0;
  };

  void handle(ConnectionId id, Connection& conn, const protocol::Message& m, std::int64_t now);
  void on_hello(ConnectionId id, Connection& conn, const protocol::Message& m,
                const protocol::ClientHello& hello, std::int64_t now);
  void on_pose(Connection& conn, const protocol::Message& m, const protocol::PoseUpdate& u,
               std::int64_t now);
  void on_thumbnail(Connection& conn, const protocol::FrameThumbnail& t, std::int64_t now);
  void on_edit(ConnectionId id, Connection& conn, const protocol::Message& m,
               const protocol::EditCommand& e);
  void on_registry_change(const content::ChangeEvent& event);
  void rebuild_scene();
  void drop_user(const std::string& client_id, std::string_view reason, bool close_connection);

  void send(ConnectionId id, protocol::Body body);
  void send_error(ConnectionId id, protocol::ErrorCode code, std::string detail,
                  std::string path, std::optional<std::uint64_t> ref_seq);
  void send_snapshot(ConnectionId id);
  void broadcast_designers(const protocol::Body& body);

  [[nodiscard]] protocol::UserView user_view(const User& user) const;

  ServerConfig config_;
  content::ContentRegistry registry_;
  std::optional<viewsim::WalkableSet> walkable_;
  Outbox& outbox_;
  ChangeHook change_hook_;

  viewsim::Scene scene_;
  tracking::FiducialCatalog fiducials_;
  std::vector<geo::LocalPosition> content_points_;

  std::map<ConnectionId, Connection> connections_;
  std::map<std::string, User> users_;
  std::uint64_t tick_ = 0;
};

}  // namespace arstage::server
