#include "arstage/viewsim/view.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "arstage/error.hpp"

namespace arstage::viewsim {

namespace {

using geo::Vec3;

struct HalfSpace {
  Vec3 n;
  double d;  // n·p <= d
};

// The view frustum in camera space (looking along +z).
class Frustum {
 public:
  explicit Frustum(const DeviceProfile& profile) {
    ty_ = std::tan(geo::deg_to_rad(profile.camera_vfov_deg) / 2.0);
    tx_ = ty_ * profile.aspect();
    planes_ = {{{{0, 0, -1}, -kNearPlaneM},
                {{0, 0, 1}, kFarPlaneM},
                {{1, 0, -tx_}, 0},
                {{-1, 0, -tx_}, 0},
                {{0, 1, -ty_}, 0},
                {{0, -1, -ty_}, 0}}};
    for (int i = 0; i < 4; ++i) {
      const double sx = (i & 1) ? 1.0 : -1.0;
      const double sy = (i & 2) ? 1.0 : -1.0;
      corners_[i] = {sx * tx_ * kNearPlaneM, sy * ty_ * kNearPlaneM, kNearPlaneM};
      corners_[i + 4] = {sx * tx_ * kFarPlaneM, sy * ty_ * kFarPlaneM, kFarPlaneM};
    }
  }

  [[nodiscard]] bool contains(const Vec3& p, double eps = 0.0) const {
    return std::all_of(planes_.begin(), planes_.end(), [&](const HalfSpace& h) {
      return h.n.dot(p) - h.d <= eps * h.n.norm();
    });
  }

  // Exact Euclidean distance from p to the (closed, convex) frustum.
  [[nodiscard]] double distance(const Vec3& p) const {
    if (contains(p)) return 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& h : planes_) {
      const double n2 = h.n.dot(h.n);
      const Vec3 q = p - h.n * ((h.n.dot(p) - h.d) / n2);
      if (contains(q, 1e-9)) best = std::min(best, geo::distance(p, q));
    }
    static constexpr int kEdges[12][2] = {{0, 1}, {2, 3}, {0, 2}, {1, 3}, {4, 5}, {6, 7},
                                          {4, 6}, {5, 7}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};
    for (const auto& e : kEdges) {
      const Vec3& a = corners_[e[0]];
      const Vec3 ab = corners_[e[1]] - a;
      const double t = std::clamp((p - a).dot(ab) / ab.dot(ab), 0.0, 1.0);
      best = std::min(best, geo::distance(p, a + ab * t));
    }
    return best;
  }

 private:
  double tx_ = 0, ty_ = 0;
  std::array<HalfSpace, 6> planes_;
  std::array<Vec3, 8> corners_;
};

std::array<Vec3, 8> box_corners(const SceneItem& item) {
  std::array<Vec3, 8> out;
  for (int i = 0; i < 8; ++i) {
    const Vec3 local{(i & 1 ? 0.5 : -0.5) * item.scale.x, (i & 2 ? 0.5 : -0.5) * item.scale.y,
                     (i & 4 ? 0.5 : -0.5) * item.scale.z};
    out[i] = geo::transform_point(item.pose, local);
  }
  return out;
}

ScreenBox clip_to_screen(const ScreenBox& b) { return b.intersect({0, 0, 1, 1}); }

bool renderable(const SceneItem& item) { return item.kind != content::ContentKind::Fiducial; }

void sort_issues(std::vector<Issue>& issues) {
  std::sort(issues.begin(), issues.end(), [](const Issue& a, const Issue& b) {
    return std::tie(a.kind, a.item_a, a.item_b) < std::tie(b.kind, b.item_a, b.item_b);
  });
}

}  // namespace

double ScreenBox::area() const {
  return std::max(0.0, u_max - u_min) * std::max(0.0, v_max - v_min);
}

ScreenBox ScreenBox::intersect(const ScreenBox& o) const {
  return {std::max(u_min, o.u_min), std::max(v_min, o.v_min), std::min(u_max, o.u_max),
          std::min(v_max, o.v_max)};
}

bool ScreenBox::intersects_screen() const {
  return u_max >= 0.0 && u_min <= 1.0 && v_max >= 0.0 && v_min <= 1.0;
}

std::string_view to_string(IssueKind kind) {
  switch (kind) {
    case IssueKind::NotVisible: return "not_visible";
    case IssueKind::TooClose: return "too_close";
    case IssueKind::Unreadable: return "unreadable";
    case IssueKind::Overlap: return "overlap";
    case IssueKind::Clutter: return "clutter";
    case IssueKind::OffGround: return "off_ground";
  }
  return "unknown";
}

IssueKind issue_kind_from_string(std::string_view name) {
  for (auto k : {IssueKind::NotVisible, IssueKind::TooClose, IssueKind::Unreadable,
                 IssueKind::Overlap, IssueKind::Clutter, IssueKind::OffGround}) {
    if (to_string(k) == name) return k;
  }
  throw ValidationError("unknown issue kind '" + std::string(name) + "'");
}

Severity severity_of(IssueKind kind) {
  switch (kind) {
    case IssueKind::NotVisible:
    case IssueKind::OffGround: return Severity::Error;
    case IssueKind::TooClose:
    case IssueKind::Unreadable:
    case IssueKind::Overlap: return Severity::Warning;
    case IssueKind::Clutter: return Severity::Info;
  }
  return Severity::Error;
}

std::string_view to_string(Severity severity) {
  switch (severity) {
    case Severity::Info: return "info";
    case Severity::Warning: return "warning";
    case Severity::Error: return "error";
  }
  return "unknown";
}

Severity severity_from_string(std::string_view name) {
  for (auto s : {Severity::Info, Severity::Warning, Severity::Error}) {
    if (to_string(s) == name) return s;
  }
  throw ValidationError("unknown severity '" + std::string(name) + "'");
}

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::Nominal: return "nominal";
    case Verdict::RotationalMismatch: return "rotational_mismatch";
    case Verdict::PositionalMismatch: return "positional_mismatch";
    case Verdict::Both: return "both";
  }
  return "unknown";
}

Verdict verdict_from_string(std::string_view name) {
  for (auto v : {Verdict::Nominal, Verdict::RotationalMismatch, Verdict::PositionalMismatch,
                 Verdict::Both}) {
    if (to_string(v) == name) return v;
  }
  throw ValidationError("unknown verdict '" + std::string(name) + "'");
}

Scene build_scene(const geo::FrameAnchor& anchor, std::span<const content::ContentItem> items) {
  Scene scene;
  scene.reserve(items.size());
  for (const auto& item : items) {
    scene.push_back({item.id, item.kind, {anchor.to_local(item.geo), item.orientation}, item.scale});
  }
  return scene;
}

bool frustum_test(const geo::LocalPose& camera, const DeviceProfile& profile,
                  const geo::LocalPosition& point) {
  const Vec3 c = geo::transform_point(geo::inverse(camera), point);
  const double ty = std::tan(geo::deg_to_rad(profile.camera_vfov_deg) / 2.0);
  const double tx = ty * profile.aspect();
  return c.z >= kNearPlaneM && c.z <= kFarPlaneM && std::abs(c.x) <= c.z * tx &&
         std::abs(c.y) <= c.z * ty;
}

std::array<double, 2> project_to_screen(const Vec3& c, const DeviceProfile& profile) {
  const double ty = std::tan(geo::deg_to_rad(profile.camera_vfov_deg) / 2.0);
  const double tx = ty * profile.aspect();
  return {0.5 + 0.5 * c.x / (c.z * tx), 0.5 - 0.5 * c.y / (c.z * ty)};
}

std::optional<ScreenBox> item_screen_box(const geo::LocalPose& camera,
                                         const DeviceProfile& profile, const SceneItem& item) {
  const geo::LocalPose view = geo::inverse(camera);
  auto corners = box_corners(item);
  for (auto& p : corners) p = geo::transform_point(view, p);

  std::vector<Vec3> kept;
  for (const auto& p : corners) {
    if (p.z >= kNearPlaneM) kept.push_back(p);
  }
  // Edges of the box: corner pairs differing in exactly one index bit.
  for (int i = 0; i < 8; ++i) {
    for (int bit : {1, 2, 4}) {
      const int j = i | bit;
      if (j == i) continue;
      const Vec3& a = corners[i];
      const Vec3& b = corners[j];
      if ((a.z < kNearPlaneM) != (b.z < kNearPlaneM)) {
        const double t = (kNearPlaneM - a.z) / (b.z - a.z);
        Vec3 q = a + (b - a) * t;
        q.z = kNearPlaneM;
        kept.push_back(q);
      }
    }
  }
  if (kept.empty()) return std::nullopt;
  ScreenBox box{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                -std::numeric_limits<double>::infinity(),
                -std::numeric_limits<double>::infinity()};
  for (const auto& p : kept) {
    const auto [u, v] = project_to_screen(p, profile);
    box.u_min = std::min(box.u_min, u);
    box.u_max = std::max(box.u_max, u);
    box.v_min = std::min(box.v_min, v);
    box.v_max = std::max(box.v_max, v);
  }
  return box;
}

ViewReport render_expected_view(const geo::LocalPose& camera, const DeviceProfile& profile,
                                const Scene& scene, const ViewThresholds& thresholds,
                                const WalkableSet* walkable) {
  ViewReport report;
  report.camera = camera;
  const Frustum frustum(profile);
  const geo::LocalPose view = geo::inverse(camera);

  for (const auto& item : scene) {
    if (!renderable(item)) continue;
    const Vec3 c = geo::transform_point(view, item.pose.position);
    const double distance = c.norm();
    bool visible = false;
    if (frustum.distance(c) <= item.bounding_radius()) {
      const auto box = item_screen_box(camera, profile, item);
      if (box && box->intersects_screen() && distance > 0.0) {
        const double angular =
            geo::rad_to_deg(2.0 * std::atan((item.scale.y / 2.0) / distance));
        report.visible.push_back({item.id, distance, angular, *box});
        visible = true;
      }
    }
    if (visible || distance == 0.0) {
      if (distance < thresholds.too_close_m) {
        report.issues.push_back({IssueKind::TooClose, item.id, {}, distance});
      }
    } else if (thresholds.attention_radius_m > 0 &&
               geo::horizontal_distance(camera.position, item.pose.position) <
                   thresholds.attention_radius_m) {
      report.issues.push_back({IssueKind::NotVisible, item.id, {}, distance});
    }
    if (auto off = walkability_check(item, walkable)) report.issues.push_back(*off);
  }

  std::sort(report.visible.begin(), report.visible.end(),
            [](const VisibleItem& a, const VisibleItem& b) { return a.item_id < b.item_id; });
  for (std::size_t i = 0; i < report.visible.size(); ++i) {
    const auto& a = report.visible[i];
    if (a.angular_height_deg < thresholds.unreadable_deg) {
      report.issues.push_back({IssueKind::Unreadable, a.item_id, {}, a.angular_height_deg});
    }
    const ScreenBox ca = clip_to_screen(a.screen_bbox);
    for (std::size_t j = i + 1; j < report.visible.size(); ++j) {
      const auto& b = report.visible[j];
      const ScreenBox cb = clip_to_screen(b.screen_bbox);
      const double smaller = std::min(ca.area(), cb.area());
      if (smaller <= 0.0) continue;
      const double frac = ca.intersect(cb).area() / smaller;
      if (frac > thresholds.overlap_frac) {
        report.issues.push_back({IssueKind::Overlap, a.item_id, b.item_id, frac});
      }
    }
  }
  if (report.visible.size() > thresholds.clutter_n) {
    report.issues.push_back(
        {IssueKind::Clutter, {}, {}, static_cast<double>(report.visible.size())});
  }
  sort_issues(report.issues);
  return report;
}

std::optional<Issue> walkability_check(const SceneItem& item, const WalkableSet* walkable) {
  if (walkable == nullptr || !renderable(item)) return std::nullopt;
  const double outside = walkable->distance_outside(item.pose.position.x, item.pose.position.z);
  if (outside <= 0.0) return std::nullopt;
  return Issue{IssueKind::OffGround, item.id, {}, outside};
}

DivergenceReport diagnose(const geo::LocalPose& expected, const geo::LocalPose& actual,
                          const ViewThresholds& thresholds) {
  DivergenceReport r;
  r.rotational_error_deg = geo::rad_to_deg(expected.orientation.angle_to(actual.orientation));
  r.positional_error_m = geo::distance(expected.position, actual.position);
  const bool rot = r.rotational_error_deg > thresholds.rot_deg;
  const bool pos = r.positional_error_m > thresholds.pos_m;
  r.verdict = rot && pos ? Verdict::Both
              : rot      ? Verdict::RotationalMismatch
              : pos      ? Verdict::PositionalMismatch
                         : Verdict::Nominal;
  return r;
}

geo::LocalPose apparent_pose(const geo::LocalPose& expected, const geo::LocalPose& actual,
                             const geo::LocalPose& item) {
  return geo::compose(geo::compose(actual, geo::inverse(expected)), item);
}

}  // namespace arstage::viewsim
