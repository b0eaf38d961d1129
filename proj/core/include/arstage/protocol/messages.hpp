#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "arstage/content/content_item.hpp"
#include "arstage/geo/geodesy.hpp"
#include "arstage/geo/pose.hpp"
#include "arstage/tracking/evidence.hpp"
#include "arstage/tracking/fusion.hpp"
#include "arstage/viewsim/device_profile.hpp"
#include "arstage/viewsim/view.hpp"

namespace arstage::protocol {

struct ProtocolVersion {
  int major = 1;
  int minor = 0;
  bool operator==(const ProtocolVersion&) const = default;
};

inline constexpr ProtocolVersion kProtocolVersion{1, 0};
/// Largest encoded message; snapshots and monitor frames are chunked below it.
inline constexpr std::size_t kMaxMessageBytes = 64 * 1024;

std::string to_string(ProtocolVersion version);
/// Parses "major.minor". Throws ValidationError.
ProtocolVersion parse_protocol_version(std::string_view text);

/// AR devices connect as clients; the staging console connects as a designer.
enum class Role { Client, Designer };
std::string_view to_string(Role role);
Role role_from_string(std::string_view name);

enum class ErrorCode {
  BadMessage,
  SeqRegression,
  NotRegistered,
  VersionMismatch,
  UnknownItem,
  TimestampRegression,
  Unauthorized,
  Forbidden,
  TooLarge,
  Replaced,
};
std::string_view to_string(ErrorCode code);
ErrorCode error_code_from_string(std::string_view name);

struct ClientHello {
  std::string client_id;
  Role role = Role::Client;
  viewsim::DeviceProfile profile;
  ProtocolVersion protocol_version = kProtocolVersion;
  bool operator==(const ClientHello&) const = default;
};

struct PoseUpdate {
  std::string client_id;
  tracking::PoseEvidence evidence;
  bool operator==(const PoseUpdate&) const = default;
};

/// Client-reported performance counters, passed through uninterpreted.
struct Telemetry {
  std::string client_id;
  double render_fps = 0.0;
  double tracking_fps = 0.0;
  tracking::TrackingMode active_mode = tracking::TrackingMode::SensorBased;
  std::optional<double> horizontal_accuracy_m;
  std::optional<double> battery_pct;
  bool operator==(const Telemetry&) const = default;
};

/// Full content state at `revision`, possibly split over several messages
/// (`chunk_index` of `chunk_count`); the project header repeats in every chunk.
struct ContentSnapshot {
  std::uint64_t revision = 0;
  std::string project_name;
  geo::GeoPosition origin;
  std::vector<content::ContentItem> items;
  std::uint32_t chunk_index = 0;
  std::uint32_t chunk_count = 1;
  bool operator==(const ContentSnapshot&) const = default;
};

/// One registry revision: items added or changed, and ids removed.
struct ContentDelta {
  std::uint64_t revision = 0;
  std::vector<content::ContentItem> changed;
  std::vector<std::string> removed;
  bool operator==(const ContentDelta&) const = default;
};

enum class EditOp { Update, Remove };
std::string_view to_string(EditOp op);
EditOp edit_op_from_string(std::string_view name);

/// Designer request to move, rotate, rescale or remove an item. Unset fields
/// keep their value.
struct EditCommand {
  std::string item_id;
  EditOp op = EditOp::Update;
  std::optional<geo::GeoPosition> geo;
  std::optional<geo::Orientation> orientation;
  std::optional<geo::Vec3> scale;
  std::string editor_id;
  bool operator==(const EditCommand&) const = default;
};

struct UserSummary {
  std::string client_id;
  Role role = Role::Client;
  viewsim::DeviceProfile profile;
  bool operator==(const UserSummary&) const = default;
};

struct UserJoined {
  UserSummary user;
  bool operator==(const UserJoined&) const = default;
};

struct UserLeft {
  std::string client_id;
  /// "closed", "timeout" or "replaced".
  std::string reason;
  bool operator==(const UserLeft&) const = default;
};

struct Ack {
  std::uint64_t ref_seq = 0;
  bool operator==(const Ack&) const = default;
};

struct ErrorMessage {
  ErrorCode code = ErrorCode::BadMessage;
  std::string detail;
  /// Offending field path for BAD_MESSAGE, e.g. "body.evidence.horizontal_accuracy_m".
  std::string path;
  std::optional<std::uint64_t> ref_seq;
  bool operator==(const ErrorMessage&) const = default;
};

/// Stand-in for the live camera feed: the pose the device truly had when the
/// frame was captured, plus an optional small base64 image (passed through).
struct FrameThumbnail {
  std::string client_id;
  std::int64_t timestamp_ms = 0;
  geo::GeoPosition geo;
  geo::Orientation orientation;
  std::string image_b64;
  bool operator==(const FrameThumbnail&) const = default;
};

enum class AvatarMode { FiveDof, SixDof };
std::string_view to_string(AvatarMode mode);
AvatarMode avatar_mode_from_string(std::string_view name);

struct FrustumParams {
  double vfov_deg = 0.0;
  double aspect = 0.0;
  double near_m = viewsim::kNearPlaneM;
  double far_m = viewsim::kFarPlaneM;
  bool operator==(const FrustumParams&) const = default;
};

/// One connected user as the designer console sees it.
struct UserView {
  std::string client_id;
  viewsim::DeviceProfile profile;
  std::optional<tracking::FusedPose> fused;
  /// Avatar pose; FiveDof avatars sit at eye height.
  geo::LocalPose avatar;
  AvatarMode avatar_mode = AvatarMode::FiveDof;
  std::optional<Telemetry> telemetry;
  FrustumParams frustum;
  std::optional<viewsim::DivergenceReport> divergence;
  std::vector<viewsim::VisibleItem> visible;
  std::vector<viewsim::Issue> issues;
  std::int64_t last_seen_ms = 0;
  bool operator==(const UserView&) const = default;
};

/// Designer feed, one per tick, chunked by users if large.
struct MonitorFrame {
  std::uint64_t tick = 0;
  std::int64_t time_ms = 0;
  std::uint64_t revision = 0;
  std::vector<UserView> users;
  std::uint32_t chunk_index = 0;
  std::uint32_t chunk_count = 1;
  bool operator==(const MonitorFrame&) const = default;
};

using Body = std::variant<ClientHello, PoseUpdate, Telemetry, ContentSnapshot, ContentDelta,
                          EditCommand, UserJoined, UserLeft, Ack, ErrorMessage, FrameThumbnail,
                          MonitorFrame>;

/// A message on the wire: per-sender sequence number plus a tagged body.
struct Message {
  std::uint64_t seq = 0;
  Body body;
  bool operator==(const Message&) const = default;
};

/// Wire tag of the body ("hello", "pose", ...).
std::string_view tag_of(const Body& body);
std::vector<std::string_view> all_tags();

}  // namespace arstage::protocol
