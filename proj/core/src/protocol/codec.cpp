#include "arstage/protocol/codec.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include <nlohmann/json.hpp>

#include "detail/content_json.hpp"
#include "detail/json_fields.hpp"
#include "detail/profile_json.hpp"

namespace arstage::protocol {

namespace {

using namespace arstage::detail;
using tracking::TrackingMode;

// ---------------------------------------------------------------------------
// Names

template <class E, std::size_t N>
E from_table(std::string_view name, const std::array<std::pair<E, std::string_view>, N>& table,
             const char* what) {
  for (const auto& [value, text] : table) {
    if (text == name) return value;
  }
  throw ValidationError(std::string("unknown ") + what + " '" + std::string(name) + "'");
}

template <class E, std::size_t N>
std::string_view to_table(E value, const std::array<std::pair<E, std::string_view>, N>& table) {
  for (const auto& [v, text] : table) {
    if (v == value) return text;
  }
  return "unknown";
}

constexpr std::array<std::pair<ErrorCode, std::string_view>, 10> kErrorCodes{{
    {ErrorCode::BadMessage, "BAD_MESSAGE"},
    {ErrorCode::SeqRegression, "SEQ_REGRESSION"},
    {ErrorCode::NotRegistered, "NOT_REGISTERED"},
    {ErrorCode::VersionMismatch, "VERSION_MISMATCH"},
    {ErrorCode::UnknownItem, "UNKNOWN_ITEM"},
    {ErrorCode::TimestampRegression, "TIMESTAMP_REGRESSION"},
    {ErrorCode::Unauthorized, "UNAUTHORIZED"},
    {ErrorCode::Forbidden, "FORBIDDEN"},
    {ErrorCode::TooLarge, "TOO_LARGE"},
    {ErrorCode::Replaced, "REPLACED"},
}};
constexpr std::array<std::pair<Role, std::string_view>, 2> kRoles{{
    {Role::Client, "client"},
    {Role::Designer, "designer"},
}};
constexpr std::array<std::pair<EditOp, std::string_view>, 2> kEditOps{{
    {EditOp::Update, "update"},
    {EditOp::Remove, "remove"},
}};
constexpr std::array<std::pair<AvatarMode, std::string_view>, 2> kAvatarModes{{
    {AvatarMode::FiveDof, "5dof"},
    {AvatarMode::SixDof, "6dof"},
}};

// Body tags, in variant order.
constexpr std::array<std::string_view, std::variant_size_v<Body>> kTags{
    "hello", "pose",     "telemetry", "snapshot", "delta",     "edit",
    "user_joined", "user_left", "ack", "error", "thumbnail", "monitor"};

// ---------------------------------------------------------------------------
// Encoding. nlohmann::json keeps object keys sorted, which makes dump() canonical.

json geo_json(const geo::GeoPosition& g) {
  return {{"lat", g.latitude_deg}, {"lon", g.longitude_deg}, {"height", g.height_m}};
}

json pose_json(const geo::LocalPose& p) {
  return {{"position", to_json(p.position)}, {"orientation", to_json(p.orientation)}};
}

json evidence_json(const tracking::PoseEvidence& e) {
  json j{{"timestamp_ms", e.timestamp_ms}, {"mode", tracking::to_string(e.mode())}};
  if (const auto* s = std::get_if<tracking::SensorReading>(&e.payload)) {
    j["lat"] = s->geo.latitude_deg;
    j["lon"] = s->geo.longitude_deg;
    j["height"] = s->geo.height_m;
    j["horizontal_accuracy_m"] = s->horizontal_accuracy_m;
    j["orientation"] = to_json(s->orientation);
  } else if (const auto* t = std::get_if<tracking::TargetDetection>(&e.payload)) {
    j["fiducial_id"] = t->fiducial_id;
    j["relative_pose"] = pose_json(t->relative_pose);
    j["confidence"] = t->confidence;
  } else {
    const auto& d = std::get<tracking::SlamDelta>(e.payload);
    j["delta_pose"] = pose_json(d.delta_pose);
    j["tracking_quality"] = d.tracking_quality;
  }
  return j;
}

json telemetry_json(const Telemetry& t) {
  json j{{"client_id", t.client_id},
         {"render_fps", t.render_fps},
         {"tracking_fps", t.tracking_fps},
         {"active_mode", tracking::to_string(t.active_mode)}};
  if (t.horizontal_accuracy_m) j["horizontal_accuracy_m"] = *t.horizontal_accuracy_m;
  if (t.battery_pct) j["battery_pct"] = *t.battery_pct;
  return j;
}

json items_json(const std::vector<content::ContentItem>& items) {
  json arr = json::array();
  for (const auto& item : items) arr.push_back(item_to_json<json>(item));
  return arr;
}

json fused_json(const tracking::FusedPose& f) {
  json j{{"pose", pose_json(f.pose)},
         {"active_mode", tracking::to_string(f.active_mode)},
         {"blend_weight", f.blend_weight},
         {"timestamp_ms", f.timestamp_ms}};
  if (f.horizontal_accuracy_m) j["horizontal_accuracy_m"] = *f.horizontal_accuracy_m;
  return j;
}

json user_view_json(const UserView& u) {
  json j{{"client_id", u.client_id},
         {"profile", profile_json(u.profile)},
         {"avatar", pose_json(u.avatar)},
         {"avatar_mode", to_string(u.avatar_mode)},
         {"frustum",
          {{"vfov_deg", u.frustum.vfov_deg},
           {"aspect", u.frustum.aspect},
           {"near_m", u.frustum.near_m},
           {"far_m", u.frustum.far_m}}},
         {"last_seen_ms", u.last_seen_ms},
         {"visible", json::array()},
         {"issues", json::array()}};
  if (u.fused) j["fused"] = fused_json(*u.fused);
  if (u.telemetry) j["telemetry"] = telemetry_json(*u.telemetry);
  if (u.divergence) {
    j["divergence"] = {{"rotational_error_deg", u.divergence->rotational_error_deg},
                       {"positional_error_m", u.divergence->positional_error_m},
                       {"verdict", viewsim::to_string(u.divergence->verdict)}};
  }
  for (const auto& v : u.visible) {
    j["visible"].push_back({{"item_id", v.item_id},
                            {"distance_m", v.distance_m},
                            {"angular_height_deg", v.angular_height_deg},
                            {"screen_bbox",
                             {v.screen_bbox.u_min, v.screen_bbox.v_min, v.screen_bbox.u_max,
                              v.screen_bbox.v_max}}});
  }
  for (const auto& i : u.issues) {
    j["issues"].push_back({{"kind", viewsim::to_string(i.kind)},
                           {"item_a", i.item_a},
                           {"item_b", i.item_b},
                           {"value", i.value}});
  }
  return j;
}

struct BodyEncoder {
  json operator()(const ClientHello& m) const {
    return {{"client_id", m.client_id},
            {"role", to_string(m.role)},
            {"profile", profile_json(m.profile)},
            {"protocol_version", to_string(m.protocol_version)}};
  }
  json operator()(const PoseUpdate& m) const {
    return {{"client_id", m.client_id}, {"evidence", evidence_json(m.evidence)}};
  }
  json operator()(const Telemetry& m) const { return telemetry_json(m); }
  json operator()(const ContentSnapshot& m) const {
    return {{"revision", m.revision},
            {"project_name", m.project_name},
            {"origin", geo_json(m.origin)},
            {"items", items_json(m.items)},
            {"chunk_index", m.chunk_index},
            {"chunk_count", m.chunk_count}};
  }
  json operator()(const ContentDelta& m) const {
    return {{"revision", m.revision}, {"changed", items_json(m.changed)}, {"removed", m.removed}};
  }
  json operator()(const EditCommand& m) const {
    json j{{"item_id", m.item_id}, {"op", to_string(m.op)}, {"editor_id", m.editor_id}};
    if (m.geo) j["geo"] = geo_json(*m.geo);
    if (m.orientation) j["orientation"] = to_json(*m.orientation);
    if (m.scale) j["scale"] = to_json(*m.scale);
    return j;
  }
  json operator()(const UserJoined& m) const {
    return {{"user",
             {{"client_id", m.user.client_id},
              {"role", to_string(m.user.role)},
              {"profile", profile_json(m.user.profile)}}}};
  }
  json operator()(const UserLeft& m) const {
    return {{"client_id", m.client_id}, {"reason", m.reason}};
  }
  json operator()(const Ack& m) const { return {{"ref_seq", m.ref_seq}}; }
  json operator()(const ErrorMessage& m) const {
    json j{{"code", to_string(m.code)}, {"detail", m.detail}, {"path", m.path}};
    if (m.ref_seq) j["ref_seq"] = *m.ref_seq;
    return j;
  }
  json operator()(const FrameThumbnail& m) const {
    return {{"client_id", m.client_id},
            {"timestamp_ms", m.timestamp_ms},
            {"geo", geo_json(m.geo)},
            {"orientation", to_json(m.orientation)},
            {"image_b64", m.image_b64}};
  }
  json operator()(const MonitorFrame& m) const {
    json users = json::array();
    for (const auto& u : m.users) users.push_back(user_view_json(u));
    return {{"tick", m.tick},
            {"time_ms", m.time_ms},
            {"revision", m.revision},
            {"users", users},
            {"chunk_index", m.chunk_index},
            {"chunk_count", m.chunk_count}};
  }
};

void require_finite(const json& j) {
  if (j.is_number_float() && !std::isfinite(j.get<double>())) {
    throw ValidationError("cannot encode a non-finite number");
  }
  if (j.is_structured()) {
    for (const auto& child : j) require_finite(child);
  }
}

std::string dump(const json& j) {
  try {
    return j.dump();
  } catch (const json::type_error& e) {
    throw ValidationError(std::string("cannot encode message: ") + e.what());
  }
}

json envelope(const Message& m) {
  json body = std::visit(BodyEncoder{}, m.body);
  require_finite(body);
  return {{"t", tag_of(m.body)}, {"seq", m.seq}, {"body", std::move(body)}};
}

// ---------------------------------------------------------------------------
// Decoding. Every failure surfaces as FieldError(path) and is mapped to
// BAD_MESSAGE at the top.

template <class F>
auto named(const json& obj, std::string_view key, const std::string& path, F&& parse) {
  const std::string p = join(path, key);
  const std::string text = as_string(require(obj, key, path), p);
  try {
    return parse(text);
  } catch (const ValidationError& e) {
    throw FieldError(p, e.what());
  }
}

std::string nonempty_string(const json& obj, std::string_view key, const std::string& path) {
  std::string s = string_field(obj, key, path);
  if (s.empty()) throw FieldError(join(path, key), "must not be empty");
  return s;
}

double finite_number(const json& obj, std::string_view key, const std::string& path) {
  const double v = number_field(obj, key, path);
  if (!std::isfinite(v)) throw FieldError(join(path, key), "must be finite");
  return v;
}

double ranged(const json& obj, std::string_view key, const std::string& path, double lo, double hi,
              const char* rule) {
  const double v = number_field(obj, key, path);
  if (!(v >= lo && v <= hi)) throw FieldError(join(path, key), rule);
  return v;
}

double positive(const json& obj, std::string_view key, const std::string& path) {
  const double v = number_field(obj, key, path);
  if (!(v > 0.0) || !std::isfinite(v)) throw FieldError(join(path, key), "must be > 0");
  return v;
}

std::optional<double> optional_number(const json& obj, std::string_view key,
                                      const std::string& path) {
  if (const json* v = optional(obj, key)) return as_number(*v, join(path, key));
  return std::nullopt;
}

std::uint32_t small_uint(const json& obj, std::string_view key, const std::string& path) {
  const auto v = as_uint(require(obj, key, path), join(path, key));
  if (v > 1'000'000) throw FieldError(join(path, key), "must be <= 1000000");
  return static_cast<std::uint32_t>(v);
}

geo::GeoPosition parse_geo_fields(const json& obj, const std::string& path) {
  geo::GeoPosition g{number_field(obj, "lat", path), number_field(obj, "lon", path),
                     number_field_or(obj, "height", path, 0.0)};
  if (!(g.latitude_deg >= -90.0 && g.latitude_deg <= 90.0)) {
    throw FieldError(join(path, "lat"), "must be in [-90, 90]");
  }
  if (!std::isfinite(g.longitude_deg)) throw FieldError(join(path, "lon"), "must be finite");
  if (!std::isfinite(g.height_m)) throw FieldError(join(path, "height"), "must be finite");
  return geo::validated(g);
}

geo::GeoPosition parse_geo(const json& j, const std::string& path) {
  return parse_geo_fields(require_object(j, path), path);
}

geo::LocalPose parse_pose(const json& j, const std::string& path) {
  require_object(j, path);
  geo::LocalPose p;
  p.position = as_vec3(require(j, "position", path), join(path, "position"));
  p.orientation = as_orientation(require(j, "orientation", path), join(path, "orientation"));
  return p;
}

tracking::TrackingMode parse_mode(const json& obj, std::string_view key, const std::string& path) {
  return named(obj, key, path, [](const std::string& s) {
    return tracking::tracking_mode_from_string(s);
  });
}

tracking::PoseEvidence parse_evidence(const json& j, const std::string& path) {
  require_object(j, path);
  tracking::PoseEvidence e;
  e.timestamp_ms = as_int(require(j, "timestamp_ms", path), join(path, "timestamp_ms"));
  switch (parse_mode(j, "mode", path)) {
    case TrackingMode::SensorBased: {
      tracking::SensorReading s;
      s.geo = parse_geo_fields(j, path);
      s.horizontal_accuracy_m = positive(j, "horizontal_accuracy_m", path);
      s.orientation = as_orientation(require(j, "orientation", path), join(path, "orientation"));
      e.payload = s;
      break;
    }
    case TrackingMode::TargetBased: {
      tracking::TargetDetection t;
      t.fiducial_id = nonempty_string(j, "fiducial_id", path);
      t.relative_pose = parse_pose(require(j, "relative_pose", path), join(path, "relative_pose"));
      t.confidence = ranged(j, "confidence", path, 0.0, 1.0, "must be in [0, 1]");
      e.payload = t;
      break;
    }
    case TrackingMode::SlamBased: {
      tracking::SlamDelta d;
      d.delta_pose = parse_pose(require(j, "delta_pose", path), join(path, "delta_pose"));
      d.tracking_quality = ranged(j, "tracking_quality", path, 0.0, 1.0, "must be in [0, 1]");
      e.payload = d;
      break;
    }
  }
  return e;
}

Telemetry parse_telemetry(const json& j, const std::string& path) {
  require_object(j, path);
  Telemetry t;
  t.client_id = nonempty_string(j, "client_id", path);
  t.render_fps = ranged(j, "render_fps", path, 0.0, 1e6, "must be in [0, 1e6]");
  t.tracking_fps = ranged(j, "tracking_fps", path, 0.0, 1e6, "must be in [0, 1e6]");
  t.active_mode = parse_mode(j, "active_mode", path);
  t.horizontal_accuracy_m = optional_number(j, "horizontal_accuracy_m", path);
  if (t.horizontal_accuracy_m && !(*t.horizontal_accuracy_m > 0.0 &&
                                   std::isfinite(*t.horizontal_accuracy_m))) {
    throw FieldError(join(path, "horizontal_accuracy_m"), "must be > 0");
  }
  t.battery_pct = optional_number(j, "battery_pct", path);
  if (t.battery_pct && !(*t.battery_pct >= 0.0 && *t.battery_pct <= 100.0)) {
    throw FieldError(join(path, "battery_pct"), "must be in [0, 100]");
  }
  return t;
}

std::vector<content::ContentItem> parse_items(const json& obj, std::string_view key,
                                              const std::string& path) {
  const std::string p = join(path, key);
  const json& arr = as_array(require(obj, key, path), p);
  std::vector<content::ContentItem> items;
  items.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    items.push_back(parse_item(arr[i], index(p, i), /*strict=*/false, nullptr));
  }
  return items;
}

std::vector<std::string> parse_strings(const json& obj, std::string_view key,
                                       const std::string& path) {
  const std::string p = join(path, key);
  const json& arr = as_array(require(obj, key, path), p);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(as_string(arr[i], index(p, i)));
  return out;
}

void check_chunk(std::uint32_t index_, std::uint32_t count, const std::string& path) {
  if (count == 0) throw FieldError(join(path, "chunk_count"), "must be >= 1");
  if (index_ >= count) throw FieldError(join(path, "chunk_index"), "must be < chunk_count");
}

tracking::FusedPose parse_fused(const json& j, const std::string& path) {
  require_object(j, path);
  tracking::FusedPose f;
  f.pose = parse_pose(require(j, "pose", path), join(path, "pose"));
  f.active_mode = parse_mode(j, "active_mode", path);
  f.blend_weight = ranged(j, "blend_weight", path, 0.0, 1.0, "must be in [0, 1]");
  f.timestamp_ms = as_int(require(j, "timestamp_ms", path), join(path, "timestamp_ms"));
  f.horizontal_accuracy_m = optional_number(j, "horizontal_accuracy_m", path);
  return f;
}

UserView parse_user_view(const json& j, const std::string& path) {
  require_object(j, path);
  UserView u;
  u.client_id = nonempty_string(j, "client_id", path);
  u.profile = parse_profile(require(j, "profile", path), join(path, "profile"));
  u.avatar = parse_pose(require(j, "avatar", path), join(path, "avatar"));
  u.avatar_mode = named(j, "avatar_mode", path, avatar_mode_from_string);
  const std::string fp = join(path, "frustum");
  const json& fr = require_object(require(j, "frustum", path), fp);
  u.frustum = {finite_number(fr, "vfov_deg", fp), finite_number(fr, "aspect", fp),
               finite_number(fr, "near_m", fp), finite_number(fr, "far_m", fp)};
  u.last_seen_ms = as_int(require(j, "last_seen_ms", path), join(path, "last_seen_ms"));
  if (const json* f = optional(j, "fused")) u.fused = parse_fused(*f, join(path, "fused"));
  if (const json* t = optional(j, "telemetry")) u.telemetry = parse_telemetry(*t, join(path, "telemetry"));
  if (const json* d = optional(j, "divergence")) {
    const std::string dp = join(path, "divergence");
    require_object(*d, dp);
    u.divergence = viewsim::DivergenceReport{
        finite_number(*d, "rotational_error_deg", dp), finite_number(*d, "positional_error_m", dp),
        named(*d, "verdict", dp, viewsim::verdict_from_string)};
  }
  const std::string vp = join(path, "visible");
  const json& vis = as_array(require(j, "visible", path), vp);
  for (std::size_t i = 0; i < vis.size(); ++i) {
    const std::string p = index(vp, i);
    require_object(vis[i], p);
    const std::string bp = join(p, "screen_bbox");
    const json& box = as_array(require(vis[i], "screen_bbox", p), bp, 4);
    u.visible.push_back({string_field(vis[i], "item_id", p), finite_number(vis[i], "distance_m", p),
                         finite_number(vis[i], "angular_height_deg", p),
                         {as_number(box[0], index(bp, 0)), as_number(box[1], index(bp, 1)),
                          as_number(box[2], index(bp, 2)), as_number(box[3], index(bp, 3))}});
  }
  const std::string ip = join(path, "issues");
  const json& issues = as_array(require(j, "issues", path), ip);
  for (std::size_t i = 0; i < issues.size(); ++i) {
    const std::string p = index(ip, i);
    require_object(issues[i], p);
    u.issues.push_back({named(issues[i], "kind", p, viewsim::issue_kind_from_string),
                        string_field(issues[i], "item_a", p), string_field(issues[i], "item_b", p),
                        finite_number(issues[i], "value", p)});
  }
  return u;
}

Body parse_body(std::size_t tag, const json& b) {
  const std::string path = "body";
  require_object(b, path);
  switch (tag) {
    case 0: {
      ClientHello m;
      m.client_id = nonempty_string(b, "client_id", path);
      m.role = named(b, "role", path, role_from_string);
      m.profile = parse_profile(require(b, "profile", path), join(path, "profile"));
      m.protocol_version = named(b, "protocol_version", path, parse_protocol_version);
      return m;
    }
    case 1: {
      PoseUpdate m;
      m.client_id = nonempty_string(b, "client_id", path);
      m.evidence = parse_evidence(require(b, "evidence", path), join(path, "evidence"));
      return m;
    }
    case 2:
      return parse_telemetry(b, path);
    case 3: {
      ContentSnapshot m;
      m.revision = as_uint(require(b, "revision", path), join(path, "revision"));
      m.project_name = string_field(b, "project_name", path);
      m.origin = parse_geo(require(b, "origin", path), join(path, "origin"));
      m.items = parse_items(b, "items", path);
      m.chunk_index = small_uint(b, "chunk_index", path);
      m.chunk_count = small_uint(b, "chunk_count", path);
      check_chunk(m.chunk_index, m.chunk_count, path);
      return m;
    }
    case 4: {
      ContentDelta m;
      m.revision = as_uint(require(b, "revision", path), join(path, "revision"));
      m.changed = parse_items(b, "changed", path);
      m.removed = parse_strings(b, "removed", path);
      return m;
    }
    case 5: {
      EditCommand m;
      m.item_id = nonempty_string(b, "item_id", path);
      m.op = named(b, "op", path, edit_op_from_string);
      m.editor_id = string_field(b, "editor_id", path);
      if (const json* g = optional(b, "geo")) m.geo = parse_geo(*g, join(path, "geo"));
      if (const json* q = optional(b, "orientation")) {
        m.orientation = as_orientation(*q, join(path, "orientation"));
      }
      if (const json* s = optional(b, "scale")) {
        const std::string sp = join(path, "scale");
        m.scale = as_vec3(*s, sp);
        const double c[3] = {m.scale->x, m.scale->y, m.scale->z};
        for (int k = 0; k < 3; ++k) {
          if (!(c[k] > 0.0)) throw FieldError(index(sp, k), "must be > 0");
        }
      }
      return m;
    }
    case 6: {
      const std::string up = join(path, "user");
      const json& u = require_object(require(b, "user", path), up);
      return UserJoined{{nonempty_string(u, "client_id", up), named(u, "role", up, role_from_string),
                         parse_profile(require(u, "profile", up), join(up, "profile"))}};
    }
    case 7: {
      UserLeft m;
      m.client_id = nonempty_string(b, "client_id", path);
      if (const json* r = optional(b, "reason")) m.reason = as_string(*r, join(path, "reason"));
      return m;
    }
    case 8:
      return Ack{as_uint(require(b, "ref_seq", path), join(path, "ref_seq"))};
    case 9: {
      ErrorMessage m;
      m.code = named(b, "code", path, error_code_from_string);
      m.detail = string_field(b, "detail", path);
      if (const json* p = optional(b, "path")) m.path = as_string(*p, join(path, "path"));
      if (const json* r = optional(b, "ref_seq")) m.ref_seq = as_uint(*r, join(path, "ref_seq"));
      return m;
    }
    case 10: {
      FrameThumbnail m;
      m.client_id = nonempty_string(b, "client_id", path);
      m.timestamp_ms = as_int(require(b, "timestamp_ms", path), join(path, "timestamp_ms"));
      m.geo = parse_geo(require(b, "geo", path), join(path, "geo"));
      m.orientation = as_orientation(require(b, "orientation", path), join(path, "orientation"));
      if (const json* i = optional(b, "image_b64")) m.image_b64 = as_string(*i, join(path, "image_b64"));
      return m;
    }
    default: {
      MonitorFrame m;
      m.tick = as_uint(require(b, "tick", path), join(path, "tick"));
      m.time_ms = as_int(require(b, "time_ms", path), join(path, "time_ms"));
      m.revision = as_uint(require(b, "revision", path), join(path, "revision"));
      const std::string up = join(path, "users");
      const json& users = as_array(require(b, "users", path), up);
      for (std::size_t i = 0; i < users.size(); ++i) {
        m.users.push_back(parse_user_view(users[i], index(up, i)));
      }
      m.chunk_index = small_uint(b, "chunk_index", path);
      m.chunk_count = small_uint(b, "chunk_count", path);
      check_chunk(m.chunk_index, m.chunk_count, path);
      return m;
    }
  }
}

// Greedy packing of `parts` (already-encoded element sizes) under `budget`.
std::vector<std::pair<std::size_t, std::size_t>> pack(const std::vector<std::size_t>& sizes,
                                                     std::size_t budget) {
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  std::size_t begin = 0, used = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const std::size_t need = sizes[i] + 1;  // separator
    if (i > begin && used + need > budget) {
      ranges.emplace_back(begin, i);
      begin = i;
      used = 0;
    }
    used += need;
  }
  ranges.emplace_back(begin, sizes.size());
  return ranges;
}

template <class Frame, class Element, class Size>
std::vector<std::string> encode_chunked(const Frame& frame, std::vector<Element> Frame::*member,
                                        std::uint64_t first_seq, std::size_t max_bytes,
                                        Size&& element_size) {
  const auto& elements = frame.*member;
  std::vector<std::size_t> sizes;
  sizes.reserve(elements.size());
  for (const auto& e : elements) sizes.push_back(element_size(e));
  Frame header = frame;
  (header.*member).clear();
  header.chunk_index = 1'000'000;
  header.chunk_count = 1'000'000;
  const std::size_t overhead = dump(envelope({first_seq + 1'000'000, header})).size();
  if (overhead >= max_bytes) {
    throw ProtocolError(ErrorCode::TooLarge, "", "message header exceeds the size limit");
  }
  for (std::size_t budget = max_bytes - overhead;;) {
    const auto ranges = pack(sizes, budget);
    std::vector<std::string> out;
    bool fits = true;
    for (std::size_t c = 0; c < ranges.size() && fits; ++c) {
      Frame chunk = header;
      chunk.chunk_index = static_cast<std::uint32_t>(c);
      chunk.chunk_count = static_cast<std::uint32_t>(ranges.size());
      (chunk.*member).assign(elements.begin() + static_cast<std::ptrdiff_t>(ranges[c].first),
                             elements.begin() + static_cast<std::ptrdiff_t>(ranges[c].second));
      std::string bytes = dump(envelope({first_seq + c, chunk}));
      if (bytes.size() > max_bytes) {
        if (ranges[c].second - ranges[c].first <= 1) {
          throw ProtocolError(ErrorCode::TooLarge, "",
                              "a single element exceeds the " + std::to_string(max_bytes) +
                                  "-byte message limit");
        }
        fits = false;
      }
      out.push_back(std::move(bytes));
    }
    if (fits) return out;
    budget = budget * 3 / 4;
  }
}

}  // namespace

// ---------------------------------------------------------------------------

std::string to_string(ProtocolVersion v) {
  return std::to_string(v.major) + "." + std::to_string(v.minor);
}

ProtocolVersion parse_protocol_version(std::string_view text) {
  ProtocolVersion v{};
  const auto dot = text.find('.');
  auto parse = [&](std::string_view part, int& out) {
    const auto* end = part.data() + part.size();
    auto [ptr, ec] = std::from_chars(part.data(), end, out);
    return ec == std::errc{} && ptr == end && !part.empty() && out >= 0;
  };
  if (dot == std::string_view::npos || !parse(text.substr(0, dot), v.major) ||
      !parse(text.substr(dot + 1), v.minor)) {
    throw ValidationError("protocol_version must look like MAJOR.MINOR, got '" +
                          std::string(text) + "'");
  }
  return v;
}

std::string_view to_string(Role role) { return to_table(role, kRoles); }
Role role_from_string(std::string_view name) { return from_table(name, kRoles, "role"); }
std::string_view to_string(ErrorCode code) { return to_table(code, kErrorCodes); }
ErrorCode error_code_from_string(std::string_view name) {
  return from_table(name, kErrorCodes, "error code");
}
std::string_view to_string(EditOp op) { return to_table(op, kEditOps); }
EditOp edit_op_from_string(std::string_view name) { return from_table(name, kEditOps, "edit op"); }
std::string_view to_string(AvatarMode mode) { return to_table(mode, kAvatarModes); }
AvatarMode avatar_mode_from_string(std::string_view name) {
  return from_table(name, kAvatarModes, "avatar mode");
}

std::string_view tag_of(const Body& body) { return kTags[body.index()]; }
std::vector<std::string_view> all_tags() { return {kTags.begin(), kTags.end()}; }

std::string encode(const Message& message) {
  std::string out = dump(envelope(message));
  if (out.size() > kMaxMessageBytes) {
    throw ProtocolError(ErrorCode::TooLarge, "",
                        "encoded message is " + std::to_string(out.size()) + " bytes (limit " +
                            std::to_string(kMaxMessageBytes) + ")");
  }
  return out;
}

Message decode(std::string_view bytes) {
  if (bytes.size() > kMaxMessageBytes) {
    throw ProtocolError(ErrorCode::TooLarge, "",
                        "message is " + std::to_string(bytes.size()) + " bytes (limit " +
                            std::to_string(kMaxMessageBytes) + ")");
  }
  json root = json::parse(bytes.begin(), bytes.end(), nullptr, /*allow_exceptions=*/false);
  if (root.is_discarded()) throw ProtocolError(ErrorCode::BadMessage, "", "malformed JSON");
  try {
    require_object(root, "");
    const std::string tag = string_field(root, "t", "");
    const auto it = std::find(kTags.begin(), kTags.end(), tag);
    if (it == kTags.end()) throw FieldError("t", "unknown message tag '" + tag + "'");
    Message m;
    m.seq = as_uint(require(root, "seq", ""), "seq");
    m.body = parse_body(static_cast<std::size_t>(it - kTags.begin()), require(root, "body", ""));
    return m;
  } catch (const FieldError& e) {
    throw ProtocolError(ErrorCode::BadMessage, e.path(), e.detail());
  } catch (const ValidationError& e) {
    throw ProtocolError(ErrorCode::BadMessage, "body", e.what());
  }
}

std::vector<std::string> encode_snapshot_chunks(const ContentSnapshot& snapshot,
                                                std::uint64_t first_seq, std::size_t max_bytes) {
  return encode_chunked(snapshot, &ContentSnapshot::items, first_seq, max_bytes,
                        [](const content::ContentItem& item) {
                          return dump(item_to_json<json>(item)).size();
                        });
}

std::vector<std::string> encode_monitor_chunks(const MonitorFrame& frame, std::uint64_t first_seq,
                                               std::size_t max_bytes) {
  return encode_chunked(frame, &MonitorFrame::users, first_seq, max_bytes,
                        [](const UserView& u) { return dump(user_view_json(u)).size(); });
}

std::optional<ContentSnapshot> SnapshotAssembler::add(const ContentSnapshot& chunk) {
  if (chunk.chunk_index == 0 || !pending_ || pending_->revision != chunk.revision ||
      pending_->chunk_count != chunk.chunk_count) {
    if (chunk.chunk_index != 0) {
      pending_.reset();  // joined mid-sequence: wait for the next snapshot
      return std::nullopt;
    }
    pending_ = chunk;
  } else {
    if (chunk.chunk_index != pending_->chunk_index + 1) {
      pending_.reset();
      return std::nullopt;
    }
    pending_->items.insert(pending_->items.end(), chunk.items.begin(), chunk.items.end());
    pending_->chunk_index = chunk.chunk_index;
  }
  if (pending_->chunk_index + 1 == pending_->chunk_count) {
    ContentSnapshot done = std::move(*pending_);
    pending_.reset();
    done.chunk_index = 0;
    done.chunk_count = 1;
    return done;
  }
  return std::nullopt;
}

std::string frame_length_prefixed(std::string_view encoded) {
  const auto n = static_cast<std::uint32_t>(encoded.size());
  std::string out;
  out.reserve(encoded.size() + 4);
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<char>((n >> shift) & 0xFF));
  out.append(encoded);
  return out;
}

std::vector<std::string> unframe_length_prefixed(std::string& buffer) {
  std::vector<std::string> frames;
  std::size_t pos = 0;
  while (buffer.size() - pos >= 4) {
    std::uint32_t n = 0;
    for (int i = 0; i < 4; ++i) n = (n << 8) | static_cast<unsigned char>(buffer[pos + i]);
    if (n > kMaxMessageBytes) {
      throw ProtocolError(ErrorCode::TooLarge, "",
                          "declared frame length " + std::to_string(n) + " exceeds the limit");
    }
    if (buffer.size() - pos - 4 < n) break;
    frames.emplace_back(buffer, pos + 4, n);
    pos += 4 + n;
  }
  buffer.erase(0, pos);
  return frames;
}

void SequenceValidator::check(std::uint64_t seq) {
  if (last_ && seq <= *last_) {
    throw ProtocolError(ErrorCode::SeqRegression, "seq",
                        "sequence " + std::to_string(seq) + " does not follow " +
                            std::to_string(*last_));
  }
  last_ = seq;
}

}  // namespace arstage::protocol
