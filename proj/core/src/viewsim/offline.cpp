#include "arstage/viewsim/offline.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "arstage/error.hpp"

namespace arstage::viewsim {

namespace {

struct ItemStats {
  bool seen = false;
  double min_distance = std::numeric_limits<double>::infinity();
  double max_angular = 0.0;
};

struct PairStats {
  int covisible = 0;
  std::vector<double> overlapping;
};

}  // namespace

OfflineReport validate_offline(const Scene& scene, const DeviceProfile& profile,
                               const ViewThresholds& thresholds, const WalkableSet* walkable,
                               const OfflineOptions& options) {
  validate_profile(profile);
  if (!(options.grid_spacing_m > 0.0) || options.headings < 1 || !(options.margin_m >= 0.0)) {
    throw ValidationError("offline options need grid_spacing_m > 0, margin_m >= 0, headings >= 1");
  }
  OfflineReport report;

  double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
  double z_min = x_min, z_max = -x_min;
  std::map<std::string, ItemStats> items;
  for (const auto& item : scene) {
    if (item.kind == content::ContentKind::Fiducial) continue;
    items[item.id];
    x_min = std::min(x_min, item.pose.position.x);
    x_max = std::max(x_max, item.pose.position.x);
    z_min = std::min(z_min, item.pose.position.z);
    z_max = std::max(z_max, item.pose.position.z);
    if (auto off = walkability_check(item, walkable)) report.issues.push_back(*off);
  }

  ViewThresholds live = thresholds;
  live.attention_radius_m = 0.0;  // aggregated below instead
  std::map<std::pair<std::string, std::string>, PairStats> pairs;
  std::size_t max_count = 0;

  if (!items.empty()) {
    const double s = options.grid_spacing_m;
    const auto i0 = static_cast<long>(std::ceil((x_min - options.margin_m) / s));
    const auto i1 = static_cast<long>(std::floor((x_max + options.margin_m) / s));
    const auto k0 = static_cast<long>(std::ceil((z_min - options.margin_m) / s));
    const auto k1 = static_cast<long>(std::floor((z_max + options.margin_m) / s));
    for (long i = i0; i <= i1; ++i) {
      for (long k = k0; k <= k1; ++k) {
        for (int h = 0; h < options.headings; ++h) {
          const double heading = 360.0 * h / options.headings;
          const geo::LocalPose camera{{static_cast<double>(i) * s, options.eye_height_m,
                                       static_cast<double>(k) * s},
                                      geo::heading_to_orientation(heading)};
          const ViewReport view = render_expected_view(camera, profile, scene, live);
          ++report.viewpoints;
          max_count = std::max(max_count, view.visible.size());
          for (const auto& v : view.visible) {
            auto& st = items[v.item_id];
            st.seen = true;
            st.min_distance = std::min(st.min_distance, v.distance_m);
            st.max_angular = std::max(st.max_angular, v.angular_height_deg);
          }
          for (std::size_t a = 0; a < view.visible.size(); ++a) {
            for (std::size_t b = a + 1; b < view.visible.size(); ++b) {
              pairs[{view.visible[a].item_id, view.visible[b].item_id}].covisible++;
            }
          }
          for (const auto& issue : view.issues) {
            if (issue.kind == IssueKind::Overlap) {
              pairs[{issue.item_a, issue.item_b}].overlapping.push_back(issue.value);
            }
          }
        }
      }
    }
  }

  for (const auto& [id, st] : items) {
    if (!st.seen) {
      report.issues.push_back({IssueKind::NotVisible, id, {}, 0.0});
      continue;
    }
    if (st.min_distance < thresholds.too_close_m) {
      report.issues.push_back({IssueKind::TooClose, id, {}, st.min_distance});
    }
    if (st.max_angular < thresholds.unreadable_deg) {
      report.issues.push_back({IssueKind::Unreadable, id, {}, st.max_angular});
    }
  }
  for (auto& [key, st] : pairs) {
    if (2 * static_cast<int>(st.overlapping.size()) > st.covisible) {
      auto& f = st.overlapping;
      std::sort(f.begin(), f.end());
      report.issues.push_back({IssueKind::Overlap, key.first, key.second, f[f.size() / 2]});
    }
  }
  if (max_count > thresholds.clutter_n) {
    report.issues.push_back({IssueKind::Clutter, {}, {}, static_cast<double>(max_count)});
  }
  std::sort(report.issues.begin(), report.issues.end(), [](const Issue& a, const Issue& b) {
    return std::tie(a.kind, a.item_a, a.item_b) < std::tie(b.kind, b.item_a, b.item_b);
  });
  return report;
}

}  // namespace arstage::viewsim
