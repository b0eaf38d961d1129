#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "arstage/geo/geodesy.hpp"
#include "arstage/geo/orientation.hpp"
#include "arstage/geo/vec3.hpp"

namespace arstage::content {

enum class ContentKind { ImageQuad, VideoQuad, Mesh, SpatialAudio, Fiducial };

std::string_view to_string(ContentKind kind);
/// Throws ValidationError for an unknown name.
ContentKind content_kind_from_string(std::string_view name);

/// A geo-anchored virtual object.
///
/// `scale` is the item's size in meters (width, height, depth). For fiducials
/// it is the real-world size of the printed/photographed target, which is what
/// makes absolute pose inference from a detection possible.
///
/// Fiducials face -z in their own frame: a camera standing in front of one,
/// looking at it, sits at negative z with an identity relative orientation.
struct ContentItem {
  std::string id;
  ContentKind kind = ContentKind::ImageQuad;
  geo::GeoPosition geo;
  geo::Orientation orientation;
  geo::Vec3 scale{1.0, 1.0, 1.0};
  std::string asset_ref;
  std::map<std::string, std::string> metadata;

  bool operator==(const ContentItem&) const = default;
};

/// Throws ValidationError on non-positive scale or invalid geo.
void validate_item(const ContentItem& item);

/// Items rendered by clients (everything except fiducials).
inline bool is_renderable(const ContentItem& item) { return item.kind != ContentKind::Fiducial; }

/// Radius of the item's bounding sphere: half the diagonal of its scale box.
double bounding_radius(const ContentItem& item);

struct Project {
  static constexpr int kFormatVersion = 1;

  std::string name;
  geo::GeoPosition anchor_origin;
  std::vector<ContentItem> items;
  int format_version = kFormatVersion;

  bool operator==(const Project&) const = default;
};

/// Checks anchor validity and id uniqueness, then every item.
void validate_project(const Project& project);

}  // namespace arstage::content
