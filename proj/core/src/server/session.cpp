#include "arstage/server/session.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <tuple>

namespace arstage::server {

namespace {

using protocol::ErrorCode;
using protocol::Role;

/// Fused outputs kept per user for pairing with thumbnails.
constexpr std::size_t kHistoryLength = 64;

bool server_only(const protocol::Body& body) {
  return std::holds_alternative<protocol::ContentSnapshot>(body) ||
         std::holds_alternative<protocol::ContentDelta>(body) ||
         std::holds_alternative<protocol::UserJoined>(body) ||
         std::holds_alternative<protocol::UserLeft>(body) ||
         std::holds_alternative<protocol::Ack>(body) ||
         std::holds_alternative<protocol::ErrorMessage>(body) ||
         std::holds_alternative<protocol::MonitorFrame>(body);
}

void sort_issues(std::vector<viewsim::Issue>& issues) {
  std::sort(issues.begin(), issues.end(), [](const viewsim::Issue& a, const viewsim::Issue& b) {
    return std::tie(a.kind, a.item_a, a.item_b) < std::tie(b.kind, b.item_a, b.item_b);
  });
}

}  // namespace

Session::Session(ServerConfig config, content::Project project,
                 std::optional<viewsim::WalkableSet> walkable, Outbox& outbox)
    : config_(std::move(config)),
      registry_(std::move(project)),
      walkable_(std::move(walkable)),
      outbox_(outbox) {
  validate_config(config_);
  rebuild_scene();
  registry_.subscribe([this](const content::ChangeEvent& e) { on_registry_change(e); });
}

void Session::open(ConnectionId connection, std::int64_t /*now_ms*/) {
  connections_[connection] = Connection{};
}

void Session::receive(ConnectionId connection, std::string_view bytes, std::int64_t now_ms) {
  if (!connections_.count(connection)) return;
  protocol::Message message;
  try {
    message = protocol::decode(bytes);
  } catch (const protocol::ProtocolError& e) {
    send(connection, e.to_message());
    return;
  }
  receive(connection, message, now_ms);
}

void Session::receive(ConnectionId connection, const protocol::Message& message,
                      std::int64_t now_ms) {
  auto it = connections_.find(connection);
  if (it == connections_.end()) return;
  Connection& conn = it->second;
  try {
    conn.incoming.check(message.seq);
  } catch (const protocol::ProtocolError& e) {
    send(connection, e.to_message(message.seq));
    return;
  }
  handle(connection, conn, message, now_ms);
}

void Session::handle(ConnectionId id, Connection& conn, const protocol::Message& m,
                     std::int64_t now) {
  if (const auto* hello = std::get_if<protocol::ClientHello>(&m.body)) {
    if (conn.client_id) {
      send_error(id, ErrorCode::BadMessage, "already registered on this connection", "t", m.seq);
      return;
    }
    on_hello(id, conn, m, *hello, now);
    return;
  }
  if (!conn.client_id) {
    send_error(id, ErrorCode::NotRegistered, "send hello first", "", m.seq);
    return;
  }
  if (server_only(m.body)) {
    send_error(id, ErrorCode::BadMessage,
               "'" + std::string(protocol::tag_of(m.body)) + "' is sent by the server only", "t",
               m.seq);
    return;
  }
  User& user = users_.at(*conn.client_id);
  user.last_seen_ms = now;

  if (const auto* e = std::get_if<protocol::EditCommand>(&m.body)) {
    if (conn.role != Role::Designer) {
      send_error(id, ErrorCode::Forbidden, "only designers may edit content", "t", m.seq);
      return;
    }
    on_edit(id, conn, m, *e);
    return;
  }
  // Everything else is AR-client telemetry.
  if (conn.role != Role::Client) {
    send_error(id, ErrorCode::Forbidden, "designers do not report poses", "t", m.seq);
    return;
  }
  const std::string* claimed = nullptr;
  if (const auto* p = std::get_if<protocol::PoseUpdate>(&m.body)) claimed = &p->client_id;
  if (const auto* t = std::get_if<protocol::Telemetry>(&m.body)) claimed = &t->client_id;
  if (const auto* f = std::get_if<protocol::FrameThumbnail>(&m.body)) claimed = &f->client_id;
  if (claimed != nullptr && *claimed != *conn.client_id) {
    send_error(id, ErrorCode::BadMessage, "does not match the registered client_id",
               "body.client_id", m.seq);
    return;
  }
  if (const auto* p = std::get_if<protocol::PoseUpdate>(&m.body)) {
    on_pose(conn, m, *p, now);
  } else if (const auto* t = std::get_if<protocol::Telemetry>(&m.body)) {
    user.telemetry = *t;
  } else if (const auto* f = std::get_if<protocol::FrameThumbnail>(&m.body)) {
    on_thumbnail(conn, *f, now);
  }
}

void Session::on_hello(ConnectionId id, Connection& conn, const protocol::Message& m,
                       const protocol::ClientHello& hello, std::int64_t now) {
  if (hello.protocol_version.major != protocol::kProtocolVersion.major) {
    send_error(id, ErrorCode::VersionMismatch,
               "server speaks " + protocol::to_string(protocol::kProtocolVersion) +
                   ", client sent " + protocol::to_string(hello.protocol_version),
               "body.protocol_version", m.seq);
    outbox_.close(id);
    connections_.erase(id);
    return;
  }
  try {
    viewsim::validate_profile(hello.profile);
  } catch (const ValidationError& e) {
    send_error(id, ErrorCode::BadMessage, e.what(), "body.profile", m.seq);
    return;
  }
  if (auto existing = users_.find(hello.client_id); existing != users_.end()) {
    const ConnectionId old = existing->second.connection;
    send_error(old, ErrorCode::Replaced, "a newer connection registered the same client_id", "",
               std::nullopt);
    drop_user(hello.client_id, "replaced", true);
  }

  conn.client_id = hello.client_id;
  conn.role = hello.role;
  User user;
  user.connection = id;
  user.hello = hello;
  user.fusion = tracking::PoseFusion(config_.fusion);
  user.last_seen_ms = now;
  users_.emplace(hello.client_id, std::move(user));

  send(id, protocol::Ack{m.seq});
  send_snapshot(id);
  if (hello.role == Role::Client) {
    broadcast_designers(protocol::UserJoined{{hello.client_id, hello.role, hello.profile}});
  } else {
    for (const auto& [cid, u] : users_) {
      if (u.hello.role == Role::Client) {
        send(id, protocol::UserJoined{{cid, u.hello.role, u.hello.profile}});
      }
    }
  }
}

void Session::on_pose(Connection& conn, const protocol::Message& m,
                      const protocol::PoseUpdate& update, std::int64_t /*now*/) {
  User& user = users_.at(*conn.client_id);
  const ConnectionId id = user.connection;
  tracking::FusionContext context{&registry_.anchor(), &fiducials_, content_points_};
  try {
    const tracking::FusedPose fused = user.fusion.ingest(update.evidence, context);
    user.history.push_back(fused);
    if (user.history.size() > kHistoryLength) user.history.pop_front();
  } catch (const tracking::TimestampRegression& e) {
    send_error(id, ErrorCode::TimestampRegression, e.what(), "body.evidence.timestamp_ms", m.seq);
  } catch (const NotFoundError& e) {
    send_error(id, ErrorCode::UnknownItem, e.what(), "body.evidence.fiducial_id", m.seq);
  } catch (const ValidationError& e) {
    send_error(id, ErrorCode::BadMessage, e.what(), "body.evidence", m.seq);
  }
}

void Session::on_thumbnail(Connection& conn, const protocol::FrameThumbnail& t,
                           std::int64_t /*now*/) {
  User& user = users_.at(*conn.client_id);
  const tracking::FusedPose* nearest = nullptr;
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  for (const auto& f : user.history) {
    const std::int64_t gap = std::llabs(f.timestamp_ms - t.timestamp_ms);
    if (gap < best) {
      best = gap;
      nearest = &f;
    }
  }
  if (nearest == nullptr || best > config_.fusion.staleness_ms) {
    user.truth.reset();
    return;
  }
  geo::GeoPosition where;
  try {
    where = geo::validated(t.geo);
  } catch (const ValidationError& e) {
    send_error(user.connection, ErrorCode::BadMessage, e.what(), "body", std::nullopt);
    return;
  }
  user.truth = GroundTruth{{registry_.anchor().to_local(where), t.orientation}, nearest->pose,
                           t.timestamp_ms};
}

void Session::on_edit(ConnectionId id, Connection& /*conn*/, const protocol::Message& m,
                      const protocol::EditCommand& e) {
  try {
    if (e.op == protocol::EditOp::Remove) {
      registry_.remove_item(e.item_id);
    } else {
      content::ItemUpdate update;
      update.geo = e.geo;
      update.orientation = e.orientation;
      update.scale = e.scale;
      registry_.update_item(e.item_id, update);
    }
  } catch (const NotFoundError& err) {
    send_error(id, ErrorCode::UnknownItem, err.what(), "body.item_id", m.seq);
    return;
  } catch (const ValidationError& err) {
    send_error(id, ErrorCode::BadMessage, err.what(), "body", m.seq);
    return;
  }
  send(id, protocol::Ack{m.seq});
  if (change_hook_) change_hook_(registry_.project());
}

void Session::on_registry_change(const content::ChangeEvent& event) {
  rebuild_scene();
  protocol::ContentDelta delta;
  delta.revision = event.revision;
  if (event.after) {
    delta.changed.push_back(*event.after);
  } else {
    delta.removed.push_back(event.id);
  }
  for (const auto& [id, conn] : connections_) {
    if (conn.client_id) send(id, delta);
  }
}

void Session::rebuild_scene() {
  const auto& items = registry_.list_items();
  scene_ = viewsim::build_scene(registry_.anchor(), items);
  fiducials_ = tracking::build_fiducial_catalog(items, registry_.anchor());
  content_points_.clear();
  for (const auto& item : items) {
    if (content::is_renderable(item)) content_points_.push_back(registry_.local_position(item));
  }
}

void Session::close(ConnectionId connection, std::int64_t /*now_ms*/) {
  auto it = connections_.find(connection);
  if (it == connections_.end()) return;
  if (it->second.client_id) {
    auto u = users_.find(*it->second.client_id);
    if (u != users_.end() && u->second.connection == connection) {
      drop_user(u->first, "closed", false);
    }
  }
  connections_.erase(connection);
}

void Session::drop_user(const std::string& client_id, std::string_view reason,
                        bool close_connection) {
  auto it = users_.find(client_id);
  if (it == users_.end()) return;
  const ConnectionId connection = it->second.connection;
  const bool was_client = it->second.hello.role == Role::Client;
  users_.erase(it);
  if (close_connection) {
    outbox_.close(connection);
    connections_.erase(connection);
  } else if (auto c = connections_.find(connection); c != connections_.end()) {
    c->second.client_id.reset();
  }
  if (was_client) broadcast_designers(protocol::UserLeft{client_id, std::string(reason)});
}

void Session::tick(std::int64_t now_ms) {
  ++tick_;
  std::vector<std::string> silent;
  for (const auto& [id, user] : users_) {
    if (user.hello.role == Role::Client &&
        now_ms - user.last_seen_ms > config_.client_timeout_ms) {
      silent.push_back(id);
    }
  }
  for (const auto& id : silent) drop_user(id, "timeout", true);

  bool any_designer = false;
  for (const auto& [id, conn] : connections_) {
    any_designer = any_designer || (conn.client_id && conn.role == Role::Designer);
  }
  if (!any_designer) return;
  const protocol::MonitorFrame frame = monitoring_snapshot(now_ms);
  for (auto& [id, conn] : connections_) {
    if (!conn.client_id || conn.role != Role::Designer) continue;
    auto chunks = protocol::encode_monitor_chunks(frame, conn.next_seq);
    conn.next_seq += chunks.size();
    for (auto& c : chunks) outbox_.send(id, std::move(c));
  }
}

protocol::MonitorFrame Session::monitoring_snapshot(std::int64_t now_ms) const {
  protocol::MonitorFrame frame;
  frame.tick = tick_;
  frame.time_ms = now_ms;
  frame.revision = registry_.revision();
  for (const auto& [id, user] : users_) {
    if (user.hello.role == Role::Client) frame.users.push_back(user_view(user));
  }
  return frame;
}

protocol::UserView Session::user_view(const User& user) const {
  protocol::UserView v;
  v.client_id = user.hello.client_id;
  v.profile = user.hello.profile;
  v.fused = user.fusion.last();
  v.avatar_mode = config_.avatar_mode;
  v.telemetry = user.telemetry;
  v.frustum = {user.hello.profile.camera_vfov_deg, user.hello.profile.aspect(),
               viewsim::kNearPlaneM, viewsim::kFarPlaneM};
  v.last_seen_ms = user.last_seen_ms;
  v.avatar.position = {0.0, config_.eye_height_m, 0.0};
  if (!v.fused) return v;

  v.avatar = v.fused->pose;
  if (config_.avatar_mode == protocol::AvatarMode::FiveDof) {
    v.avatar.position.y = config_.eye_height_m;
  }
  const viewsim::ViewReport report =
      viewsim::render_expected_view(v.fused->pose, v.profile, scene_, config_.thresholds);
  v.visible = report.visible;
  v.issues = report.issues;
  if (user.truth) v.divergence = viewsim::diagnose(user.truth->expected, user.truth->actual,
                                                   config_.thresholds);
  // Content is judged where this user actually sees it: a device that
  // mislocates itself renders everything displaced by the same error.
  if (walkable_) {
    for (const auto& item : scene_) {
      viewsim::SceneItem seen = item;
      if (user.truth) {
        seen.pose = viewsim::apparent_pose(user.truth->expected, user.truth->actual, item.pose);
      }
      if (auto off = viewsim::walkability_check(seen, &*walkable_)) v.issues.push_back(*off);
    }
    sort_issues(v.issues);
  }
  return v;
}

Health Session::health() const {
  Health h;
  h.revision = registry_.revision();
  for (const auto& [id, user] : users_) h.users += user.hello.role == Role::Client ? 1 : 0;
  return h;
}

void Session::send(ConnectionId id, protocol::Body body) {
  auto it = connections_.find(id);
  if (it == connections_.end()) return;
  protocol::Message m{it->second.next_seq++, std::move(body)};
  outbox_.send(id, protocol::encode(m));
}

void Session::send_error(ConnectionId id, ErrorCode code, std::string detail, std::string path,
                         std::optional<std::uint64_t> ref_seq) {
  send(id, protocol::ErrorMessage{code, std::move(detail), std::move(path), ref_seq});
}

void Session::send_snapshot(ConnectionId id) {
  auto it = connections_.find(id);
  if (it == connections_.end()) return;
  protocol::ContentSnapshot snapshot;
  snapshot.revision = registry_.revision();
  snapshot.project_name = registry_.project().name;
  snapshot.origin = registry_.project().anchor_origin;
  snapshot.items = registry_.list_items();
  std::vector<std::string> chunks;
  try {
    chunks = protocol::encode_snapshot_chunks(snapshot, it->second.next_seq);
  } catch (const protocol::ProtocolError& e) {
    send(id, e.to_message());
    return;
  }
  it->second.next_seq += chunks.size();
  for (auto& c : chunks) outbox_.send(id, std::move(c));
}

void Session::broadcast_designers(const protocol::Body& body) {
  for (const auto& [id, conn] : connections_) {
    if (conn.client_id && conn.role == Role::Designer) send(id, body);
  }
}

}  // namespace arstage::server
