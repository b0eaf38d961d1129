#include "arstage/protocol/schema.hpp"

#include <algorithm>
#include <sstream>

#include "arstage/protocol/messages.hpp"

namespace arstage::protocol::schema {

namespace {

constexpr std::string_view R = "required";
constexpr std::string_view O = "optional";

}  // namespace

const std::vector<ObjectType>& object_types() {
  static const std::vector<ObjectType> types{
      {"Envelope",
       "Every WebSocket text frame carries exactly one envelope.",
       {{"t", "enum<MessageTag>", "", R, "Message tag; selects the body type."},
        {"seq", "integer", "", R,
         "Per-sender sequence number, strictly increasing per connection; gaps allowed."},
        {"body", "object", "", R, "Tag-specific payload."}}},
      {"GeoPosition",
       "WGS84 geodetic position.",
       {{"lat", "number", "deg", R, "Latitude in [-90, 90]."},
        {"lon", "number", "deg", R, "Longitude; normalized to (-180, 180]."},
        {"height", "number", "m", O, "Ellipsoidal height; default 0."}}},
      {"LocalPose",
       "Rigid transform in the project's local tangent frame (x east, y up, z north).",
       {{"position", "number[3]", "m", R, "[x, y, z]."},
        {"orientation", "number[4]", "", R,
         "Unit quaternion [w, x, y, z] (norm within 1e-6 of 1). Identity looks north (+z) with +y up."}}},
      {"DeviceProfile",
       "Device panel fields and camera model of an AR client.",
       {{"model", "string", "", R, "Device model name."},
        {"os", "string", "", R, "Operating system and version."},
        {"screen_w_px", "integer", "px", R, "Screen width, > 0."},
        {"screen_h_px", "integer", "px", R, "Screen height, > 0. Aspect = screen_w_px / screen_h_px."},
        {"camera_vfov_deg", "number", "deg", R, "Vertical camera field of view, in (10, 170)."},
        {"camera_res_w_px", "integer", "px", R, "Camera image width, > 0."},
        {"camera_res_h_px", "integer", "px", R, "Camera image height, > 0."}}},
      {"PoseEvidence",
       "One tracking observation. Fields depend on `mode`.",
       {{"timestamp_ms", "integer", "ms", R,
         "Device clock; must not decrease per client (TIMESTAMP_REGRESSION otherwise)."},
        {"mode", "enum<TrackingMode>", "", R, "Evidence kind."},
        {"lat", "number", "deg", "when mode=sensor", "GPS latitude."},
        {"lon", "number", "deg", "when mode=sensor", "GPS longitude."},
        {"height", "number", "m", "when mode=sensor", "GPS ellipsoidal height (optional, default 0)."},
        {"horizontal_accuracy_m", "number", "m", "when mode=sensor",
         "Radius of the horizontal position uncertainty circle, > 0."},
        {"orientation", "number[4]", "", "when mode=sensor",
         "Absolute device orientation from IMU/compass, local frame, [w, x, y, z]."},
        {"fiducial_id", "string", "", "when mode=target", "Id of the detected fiducial content item."},
        {"relative_pose", "LocalPose", "fiducial widths", "when mode=target",
         "Camera pose in the fiducial's frame; translation in multiples of the fiducial width. "
         "The fiducial faces its own -z axis."},
        {"confidence", "number", "", "when mode=target", "Detector confidence in [0, 1]."},
        {"delta_pose", "LocalPose", "m", "when mode=slam",
         "Camera motion since the previous SLAM frame, expressed in the previous camera frame."},
        {"tracking_quality", "number", "", "when mode=slam", "In [0, 1]; 0 means tracking lost."}}},
      {"ContentItem",
       "A geo-anchored piece of AR content (same fields as in the project file).",
       {{"id", "string", "", R, "Unique within the project."},
        {"kind", "enum<ContentKind>", "", R, "Content kind."},
        {"lat", "number", "deg", R, "Anchor latitude."},
        {"lon", "number", "deg", R, "Anchor longitude."},
        {"height", "number", "m", O, "Anchor ellipsoidal height; default 0."},
        {"orientation", "number[4]", "", O, "Unit quaternion [w, x, y, z]; default identity."},
        {"scale", "number[3]", "m", O,
         "Size along the item's x, y, z axes, each > 0; default [1, 1, 1]. "
         "For fiducials scale[0] is the printed width."},
        {"asset_ref", "string", "", O, "Opaque asset reference."},
        {"metadata", "map<string,string>", "", O, "Free-form string metadata."}}},
      {"FusedPose",
       "Server-side fused camera pose of a client.",
       {{"pose", "LocalPose", "m", R, "Fused camera pose."},
        {"horizontal_accuracy_m", "number", "m", O,
         "Accuracy circle radius; absent until the first absolute fix."},
        {"active_mode", "enum<TrackingMode>", "", R, "Camera currently driving the pose."},
        {"blend_weight", "number", "", R, "1 when settled; below 1 while cross-fading between modes."},
        {"timestamp_ms", "integer", "ms", R, "Timestamp of the evidence that produced it."}}},
      {"Frustum",
       "Perspective frustum of a client's camera, for drawing its wireframe.",
       {{"vfov_deg", "number", "deg", R, "Vertical field of view."},
        {"aspect", "number", "", R, "Width / height."},
        {"near_m", "number", "m", R, "Near plane distance."},
        {"far_m", "number", "m", R, "Far plane distance."}}},
      {"Divergence",
       "Expected view (fused pose) versus actual view (reported camera pose).",
       {{"rotational_error_deg", "number", "deg", R, "Quaternion geodesic angle, >= 0."},
        {"positional_error_m", "number", "m", R, "Euclidean distance, >= 0."},
        {"verdict", "enum<Verdict>", "", R,
         "rotational_mismatch suggests magnetic interference or gyro drift; positional_mismatch suggests bad GPS."}}},
      {"VisibleItem",
       "An item inside the expected view.",
       {{"item_id", "string", "", R, "Content item id."},
        {"distance_m", "number", "m", R, "Camera to item center, > 0."},
        {"angular_height_deg", "number", "deg", R, "2·atan((scale[1] / 2) / distance_m)."},
        {"screen_bbox", "number[4]", "normalized", R,
         "[u_min, v_min, u_max, v_max]; screen is [0,1]², u right, v down. May extend past the screen."}}},
      {"Issue",
       "A content-presentation problem.",
       {{"kind", "enum<IssueKind>", "", R, "Problem kind."},
        {"item_a", "string", "", R, "Item concerned; empty for clutter."},
        {"item_b", "string", "", R, "Second item for overlap; otherwise empty."},
        {"value", "number", "", R,
         "too_close: distance m; off_ground: m outside walkable space; unreadable: angular height deg; "
         "overlap: fraction of the smaller box; clutter: visible count; not_visible: distance m."}}},
      {"Telemetry",
       "Client performance counters (also the body of `telemetry`). Sent at about 1 Hz.",
       {{"client_id", "string", "", R, "Sender id."},
        {"render_fps", "number", "Hz", R, "Rendering frame rate, >= 0."},
        {"tracking_fps", "number", "Hz", R, "Tracking frame rate as reported by the client, >= 0."},
        {"active_mode", "enum<TrackingMode>", "", R, "Mode the client itself considers active."},
        {"horizontal_accuracy_m", "number", "m", O, "Client-side accuracy estimate, > 0."},
        {"battery_pct", "number", "%", O, "Battery level in [0, 100]."}}},
      {"UserSummary",
       "Identity of a connected user.",
       {{"client_id", "string", "", R, "User id."},
        {"role", "enum<Role>", "", R, "client or designer."},
        {"profile", "DeviceProfile", "", R, "Device profile from the hello."}}},
      {"UserView",
       "One connected AR client in the designer feed.",
       {{"client_id", "string", "", R, "User id."},
        {"profile", "DeviceProfile", "", R, "Device panel fields."},
        {"fused", "FusedPose", "", O, "Absent until the first pose update."},
        {"avatar", "LocalPose", "m", R, "Avatar pose; 5dof avatars have y fixed at eye height."},
        {"avatar_mode", "enum<AvatarMode>", "", R, "5dof or 6dof."},
        {"telemetry", "Telemetry", "", O, "Latest telemetry."},
        {"frustum", "Frustum", "", R, "Camera frustum parameters."},
        {"divergence", "Divergence", "", O, "Present once the client has sent a thumbnail."},
        {"visible", "array<VisibleItem>", "", R, "Expected view: items in the frustum, sorted by id."},
        {"issues", "array<Issue>", "", R, "Issues for this user's expected view."},
        {"last_seen_ms", "integer", "ms", R, "Server time of the last message from this user."}}},
      {"hello",
       "First message on every connection.",
       {{"client_id", "string", "", R, "Stable user id. A second connection with the same id replaces the first."},
        {"role", "enum<Role>", "", R, "client (AR device) or designer (console)."},
        {"profile", "DeviceProfile", "", R, "Device description."},
        {"protocol_version", "string", "", R, "\"MAJOR.MINOR\"; an unknown MAJOR is rejected."}}},
      {"pose",
       "Tracking evidence from a client (up to 30 Hz).",
       {{"client_id", "string", "", R, "Must match the hello."},
        {"evidence", "PoseEvidence", "", R, "The observation."}}},
      {"snapshot",
       "Full content state. Sent after hello; chunked when over the size limit.",
       {{"revision", "integer", "", R, "Registry revision the items reflect."},
        {"project_name", "string", "", R, "Project name."},
        {"origin", "GeoPosition", "", R, "Local frame origin."},
        {"items", "array<ContentItem>", "", R, "Items of this chunk."},
        {"chunk_index", "integer", "", R, "0-based chunk index."},
        {"chunk_count", "integer", "", R, "Number of chunks, >= 1."}}},
      {"delta",
       "One registry revision, broadcast to every connection. Revisions are consecutive.",
       {{"revision", "integer", "", R, "New revision."},
        {"changed", "array<ContentItem>", "", R, "Items added or modified (full state)."},
        {"removed", "array<string>", "", R, "Ids removed."}}},
      {"edit",
       "Live-authoring request. Accepted from designers only.",
       {{"item_id", "string", "", R, "Target item."},
        {"op", "enum<EditOp>", "", R, "update or remove."},
        {"geo", "GeoPosition", "", O, "New anchor position."},
        {"orientation", "number[4]", "", O, "New orientation [w, x, y, z]."},
        {"scale", "number[3]", "m", O, "New scale, each > 0."},
        {"editor_id", "string", "", R, "Id of the editing designer."}}},
      {"user_joined",
       "A user connected (sent to designers only).",
       {{"user", "UserSummary", "", R, "The new user."}}},
      {"user_left",
       "A user disconnected (sent to designers only).",
       {{"client_id", "string", "", R, "User id."},
        {"reason", "string", "", O, "closed, timeout or replaced."}}},
      {"ack",
       "Acknowledges an accepted hello or edit.",
       {{"ref_seq", "integer", "", R, "Sequence number of the acknowledged message."}}},
      {"error",
       "A rejected message.",
       {{"code", "enum<ErrorCode>", "", R, "Error class."},
        {"detail", "string", "", R, "Human-readable explanation."},
        {"path", "string", "", O, "Offending field path for BAD_MESSAGE, e.g. body.evidence.horizontal_accuracy_m."},
        {"ref_seq", "integer", "", O, "Sequence number of the rejected message, when known."}}},
      {"thumbnail",
       "Stand-in for the live camera feed: the pose the device actually had when the frame was taken.",
       {{"client_id", "string", "", R, "Sender id."},
        {"timestamp_ms", "integer", "ms", R, "Capture time (device clock)."},
        {"geo", "GeoPosition", "", R, "Camera position."},
        {"orientation", "number[4]", "", R, "Camera orientation [w, x, y, z], local frame."},
        {"image_b64", "string", "", O, "Small base64 image; passed through, not interpreted."}}},
      {"monitor",
       "Designer feed frame, once per server tick (default 10 Hz); chunked by users when large.",
       {{"tick", "integer", "", R, "Tick counter."},
        {"time_ms", "integer", "ms", R, "Server time."},
        {"revision", "integer", "", R, "Registry revision at this tick."},
        {"users", "array<UserView>", "", R, "Connected AR clients of this chunk, sorted by id."},
        {"chunk_index", "integer", "", R, "0-based chunk index."},
        {"chunk_count", "integer", "", R, "Number of chunks, >= 1."}}},
  };
  return types;
}

const std::vector<EnumType>& enum_types() {
  static const std::vector<EnumType> enums{
      {"MessageTag", all_tags()},
      {"TrackingMode", {"sensor", "target", "slam"}},
      {"Role", {"client", "designer"}},
      {"ContentKind", {"image_quad", "video_quad", "mesh", "spatial_audio", "fiducial"}},
      {"EditOp", {"update", "remove"}},
      {"AvatarMode", {"5dof", "6dof"}},
      {"Verdict", {"nominal", "rotational_mismatch", "positional_mismatch", "both"}},
      {"IssueKind", {"not_visible", "too_close", "unreadable", "overlap", "clutter", "off_ground"}},
      {"ErrorCode",
       {"BAD_MESSAGE", "SEQ_REGRESSION", "NOT_REGISTERED", "VERSION_MISMATCH", "UNKNOWN_ITEM",
        "TIMESTAMP_REGRESSION", "UNAUTHORIZED", "FORBIDDEN", "TOO_LARGE", "REPLACED"}},
  };
  return enums;
}

const std::vector<MessageType>& message_types() {
  static const std::vector<MessageType> messages{
      {"hello", "client, designer", "hello", "Registers the connection."},
      {"pose", "client", "pose", "Tracking evidence."},
      {"telemetry", "client", "Telemetry", "Performance counters."},
      {"snapshot", "server", "snapshot", "Content state."},
      {"delta", "server", "delta", "Content change."},
      {"edit", "designer", "edit", "Live authoring."},
      {"user_joined", "server", "user_joined", "User connected."},
      {"user_left", "server", "user_left", "User disconnected."},
      {"ack", "server", "ack", "Acknowledgement."},
      {"error", "server", "error", "Rejection."},
      {"thumbnail", "client", "thumbnail", "Actual camera pose (video stand-in)."},
      {"monitor", "server", "monitor", "Designer feed."},
  };
  return messages;
}

const ObjectType* find_object(std::string_view name) {
  for (const auto& t : object_types()) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

const EnumType* find_enum(std::string_view name) {
  for (const auto& e : enum_types()) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

namespace {

void field_table(std::ostringstream& out, const ObjectType& type) {
  out << "| Field | Type | Unit | Presence | Description |\n";
  out << "|---|---|---|---|---|\n";
  for (const auto& f : type.fields) {
    out << "| `" << f.name << "` | `" << f.type << "` | " << (f.unit.empty() ? "—" : f.unit)
        << " | " << f.presence << " | " << f.description << " |\n";
  }
  out << "\n";
}

}  // namespace

std::string reference_markdown() {
  std::ostringstream out;
  out << "# arstage wire protocol " << to_string(kProtocolVersion) << "\n\n"
      << "<!-- Generated by `arstage export-protocol-doc`; do not edit by hand. -->\n\n"
      << "This is the interoperability contract between the staging server, AR clients and "
         "the designer console.\n\n"
      << "## Transport\n\n"
      << "- WebSocket endpoint `/ws`; one UTF-8 JSON envelope per text frame.\n"
      << "- When the server is configured with a token, it must be presented as "
         "`Authorization: Bearer <token>` or as the `token` query parameter; otherwise the "
         "upgrade is refused with HTTP 401.\n"
      << "- For byte streams without message boundaries, each envelope is preceded by its "
         "length as a 4-byte big-endian unsigned integer.\n"
      << "- HTTP `GET /healthz` returns `{\"status\": \"ok\", \"users\": <connected AR clients>, "
         "\"revision\": <registry revision>}`; `GET /` serves the console bundle.\n\n"
      << "## Rules\n\n"
      << "- Encoding is canonical: keys sorted, no whitespace, numbers in shortest round-trip "
         "form. Re-encoding a decoded message reproduces it byte for byte.\n"
      << "- Every message is at most " << kMaxMessageBytes
      << " bytes. `snapshot` and `monitor` are split into chunks below that limit.\n"
      << "- Unknown fields are ignored; unknown tags are rejected with `BAD_MESSAGE`.\n"
      << "- `seq` must increase strictly per sender and connection; duplicates and regressions "
         "are rejected with `SEQ_REGRESSION`, gaps are allowed.\n"
      << "- The first message must be `hello`; anything else first gets `NOT_REGISTERED`. "
         "A hello with an unknown major version gets `VERSION_MISMATCH` and the connection is "
         "closed.\n"
      << "- Clients never receive other users' positions; only designers receive "
         "`user_joined`, `user_left` and `monitor`.\n"
      << "- Only designers may send `edit` (`FORBIDDEN` otherwise). Concurrent edits are applied "
         "in server arrival order (last writer wins). Each accepted edit produces exactly one "
         "`delta`, delivered once to every connection after its snapshot.\n"
      << "- Clients are dropped after 10 s of silence (configurable).\n"
      << "- Suggested rates: `pose` up to 30 Hz, `telemetry` 1 Hz; the server does not enforce "
         "them.\n\n"
      << "## Envelope\n\n";
  field_table(out, *find_object("Envelope"));
  out << "## Messages\n\n| Tag | Sent by | Body |\n|---|---|---|\n";
  for (const auto& m : message_types()) {
    out << "| `" << m.tag << "` | " << m.sender << " | [" << m.body << "](#" << m.body << ") |\n";
  }
  out << "\n";
  for (const auto& m : message_types()) {
    const ObjectType* body = find_object(m.body);
    out << "### " << m.tag << "\n\n" << body->description << "\n\n";
    if (m.body != m.tag) {
      out << "Body: [" << m.body << "](#" << m.body << ").\n\n";
    } else {
      field_table(out, *body);
    }
  }
  out << "## Types\n\n";
  for (const auto& t : object_types()) {
    if (t.name == "Envelope" || std::find_if(message_types().begin(), message_types().end(),
                                        [&](const MessageType& m) {
                                          return m.body == t.name && m.tag == t.name;
                                        }) != message_types().end()) {
      continue;
    }
    out << "### " << t.name << "\n\n" << t.description << "\n\n";
    field_table(out, t);
  }
  out << "## Enumerations\n\n";
  for (const auto& e : enum_types()) {
    out << "- `" << e.name << "`: ";
    for (std::size_t i = 0; i < e.values.size(); ++i) {
      out << (i ? ", " : "") << "`" << e.values[i] << "`";
    }
    out << "\n";
  }
  out << "\n## Error codes\n\n"
      << "| Code | Meaning |\n|---|---|\n"
      << "| `BAD_MESSAGE` | Malformed JSON, unknown tag, or invalid field (see `path`). |\n"
      << "| `SEQ_REGRESSION` | Duplicate or decreasing `seq`. |\n"
      << "| `NOT_REGISTERED` | Message before a successful `hello`, or `client_id` mismatch. |\n"
      << "| `VERSION_MISMATCH` | Unsupported major protocol version; connection closed. |\n"
      << "| `UNKNOWN_ITEM` | Edit names an item that does not exist. |\n"
      << "| `TIMESTAMP_REGRESSION` | Pose evidence older than the previous one; state unchanged. |\n"
      << "| `UNAUTHORIZED` | Missing or wrong token. |\n"
      << "| `FORBIDDEN` | Message not allowed for this role (e.g. edit from a client). |\n"
      << "| `TOO_LARGE` | Message over the size limit. |\n"
      << "| `REPLACED` | Another connection registered the same `client_id`; this one is closed. |\n";
  return out.str();
}

}  // namespace arstage::protocol::schema
