#pragma once

#include <cstddef>
#include <vector>

#include "arstage/viewsim/view.hpp"

namespace arstage::viewsim {

/// Candidate viewpoints for authoring-time validation: a square grid aligned
/// to the frame origin (multiples of `grid_spacing_m`) covering the content's
/// horizontal extent plus `margin_m`, at `eye_height_m`, each looking level in
/// `headings` evenly spaced directions starting north.
struct OfflineOptions {
  double grid_spacing_m = 5.0;
  double margin_m = 10.0;
  double eye_height_m = 1.6;
  int headings = 8;
};

struct OfflineReport {
  std::size_t viewpoints = 0;
  std::vector<Issue> issues;
  bool operator==(const OfflineReport&) const = default;
};

/// Aggregates per-viewpoint views into one deterministic issue list:
///   NotVisible  visible from no viewpoint;
///   TooClose    closer than the limit from at least one viewpoint (value: minimum distance);
///   Unreadable  too small from every viewpoint that sees it (value: largest angular height);
///   Overlap     overlapping in a majority of the views showing both (value: median fraction);
///   Clutter     more than the limit visible at once somewhere (value: largest count);
///   OffGround   nominal placement outside walkable space.
OfflineReport validate_offline(const Scene& scene, const DeviceProfile& profile,
                               const ViewThresholds& thresholds = {},
                               const WalkableSet* walkable = nullptr,
                               const OfflineOptions& options = {});

}  // namespace arstage::viewsim
