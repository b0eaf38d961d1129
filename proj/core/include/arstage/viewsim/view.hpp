#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "arstage/content/content_item.hpp"
#include "arstage/geo/geodesy.hpp"
#include "arstage/geo/pose.hpp"
#include "arstage/viewsim/device_profile.hpp"
#include "arstage/viewsim/walkable.hpp"

namespace arstage::viewsim {

inline constexpr double kNearPlaneM = 0.1;
inline constexpr double kFarPlaneM = 2000.0;

/// Tunable limits for presentation issues and divergence verdicts.
struct ViewThresholds {
  double too_close_m = 0.5;
  double unreadable_deg = 1.5;
  /// Fraction of the smaller screen box covered by the intersection.
  double overlap_frac = 0.3;
  /// Clutter is raised when more than this many items are visible at once.
  std::size_t clutter_n = 8;
  double rot_deg = 10.0;
  double pos_m = 5.0;
  /// Live views report NotVisible for renderable content closer than this
  /// (horizontally) that is outside the frustum. 0 disables.
  double attention_radius_m = 15.0;

  bool operator==(const ViewThresholds&) const = default;
};

/// Axis-aligned rectangle in normalized screen coordinates: u grows right,
/// v grows down, the screen is [0,1]².
struct ScreenBox {
  double u_min = 0, v_min = 0, u_max = 0, v_max = 0;

  [[nodiscard]] double area() const;
  [[nodiscard]] ScreenBox intersect(const ScreenBox& o) const;
  [[nodiscard]] bool intersects_screen() const;
  bool operator==(const ScreenBox&) const = default;
};

enum class IssueKind { NotVisible, TooClose, Unreadable, Overlap, Clutter, OffGround };

std::string_view to_string(IssueKind kind);
/// Throws ValidationError for an unknown name.
IssueKind issue_kind_from_string(std::string_view name);

enum class Severity { Info, Warning, Error };
Severity severity_of(IssueKind kind);
std::string_view to_string(Severity severity);
Severity severity_from_string(std::string_view name);

/// One presentation problem. `value` carries the kind's parameter: distance
/// (TooClose, OffGround: meters outside walkable space), angular height in
/// degrees (Unreadable), overlap fraction (Overlap), item count (Clutter).
/// `item_b` is only set for Overlap; `item_a` is empty for Clutter.
struct Issue {
  IssueKind kind = IssueKind::NotVisible;
  std::string item_a;
  std::string item_b;
  double value = 0.0;
  bool operator==(const Issue&) const = default;
};

struct VisibleItem {
  std::string item_id;
  double distance_m = 0.0;
  double angular_height_deg = 0.0;
  ScreenBox screen_bbox;
  bool operator==(const VisibleItem&) const = default;
};

struct ViewReport {
  geo::LocalPose camera;
  std::vector<VisibleItem> visible;
  std::vector<Issue> issues;
  bool operator==(const ViewReport&) const = default;
};

/// Content resolved into the local frame once, for repeated evaluation.
struct SceneItem {
  std::string id;
  content::ContentKind kind = content::ContentKind::ImageQuad;
  geo::LocalPose pose;
  geo::Vec3 scale{1, 1, 1};

  [[nodiscard]] double bounding_radius() const { return 0.5 * scale.norm(); }
};
using Scene = std::vector<SceneItem>;

Scene build_scene(const geo::FrameAnchor& anchor, std::span<const content::ContentItem> items);

/// Perspective frustum membership (near 0.1 m, far 2000 m, aspect
/// screen_w/screen_h). The camera looks along its +z axis with +y up.
bool frustum_test(const geo::LocalPose& camera, const DeviceProfile& profile,
                  const geo::LocalPosition& point);

/// Normalized screen position of a camera-space point with z > 0.
std::array<double, 2> project_to_screen(const geo::Vec3& camera_point,
                                        const DeviceProfile& profile);

/// Screen box of an item's oriented box, clipped at the near plane. Empty
/// when the whole box lies behind the near plane.
std::optional<ScreenBox> item_screen_box(const geo::LocalPose& camera,
                                         const DeviceProfile& profile, const SceneItem& item);

/// What a device at `camera` is expected to see. Fiducials are never listed.
/// Visible items are sorted by id; issues by (kind, item_a, item_b).
ViewReport render_expected_view(const geo::LocalPose& camera, const DeviceProfile& profile,
                                const Scene& scene, const ViewThresholds& thresholds = {},
                                const WalkableSet* walkable = nullptr);

/// OffGround when the item's ground projection (x, z) is outside every
/// walkable polygon; empty when inside or when `walkable` is null.
std::optional<Issue> walkability_check(const SceneItem& item, const WalkableSet* walkable);

enum class Verdict { Nominal, RotationalMismatch, PositionalMismatch, Both };
std::string_view to_string(Verdict verdict);
Verdict verdict_from_string(std::string_view name);

struct DivergenceReport {
  double rotational_error_deg = 0.0;
  double positional_error_m = 0.0;
  Verdict verdict = Verdict::Nominal;
  bool operator==(const DivergenceReport&) const = default;
};

/// Compares the view inferred from telemetry with the view the device truly
/// has. A rotational mismatch points at magnetic or gyroscope trouble, a
/// positional one at GPS.
DivergenceReport diagnose(const geo::LocalPose& expected, const geo::LocalPose& actual,
                          const ViewThresholds& thresholds = {});

/// Where content rendered by a device that believes it is at `expected` while
/// truly at `actual` appears in the world.
geo::LocalPose apparent_pose(const geo::LocalPose& expected, const geo::LocalPose& actual,
                             const geo::LocalPose& item);

}  // namespace arstage::viewsim
