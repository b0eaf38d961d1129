#include "arstage/content/content_item.hpp"

#include <cmath>
#include <set>

#include "arstage/error.hpp"

namespace arstage::content {

std::string_view to_string(ContentKind kind) {
  switch (kind) {
    case ContentKind::ImageQuad:
      return "image_quad";
    case ContentKind::VideoQuad:
      return "video_quad";
    case ContentKind::Mesh:
      return "mesh";
    case ContentKind::SpatialAudio:
      return "spatial_audio";
    case ContentKind::Fiducial:
      return "fiducial";
  }
  return "image_quad";
}

ContentKind content_kind_from_string(std::string_view name) {
  for (auto k : {ContentKind::ImageQuad, ContentKind::VideoQuad, ContentKind::Mesh,
                 ContentKind::SpatialAudio, ContentKind::Fiducial}) {
    if (to_string(k) == name) return k;
  }
  throw ValidationError("unknown content kind '" + std::string(name) + "'");
}

void validate_item(const ContentItem& item) {
  const auto& s = item.scale;
  if (!s.finite() || s.x <= 0.0 || s.y <= 0.0 || s.z <= 0.0) {
    throw ValidationError("item '" + item.id + "': scale components must be > 0");
  }
  try {
    (void)geo::validated(item.geo);
  } catch (const ValidationError& e) {
    throw ValidationError("item '" + item.id + "': " + e.what());
  }
}

double bounding_radius(const ContentItem& item) { return 0.5 * item.scale.norm(); }

void validate_project(const Project& project) {
  (void)geo::validated(project.anchor_origin);
  std::set<std::string> ids;
  for (const auto& item : project.items) {
    if (item.id.empty()) throw ValidationError("item with empty id");
    if (!ids.insert(item.id).second) {
      throw ValidationError("duplicate item id '" + item.id + "'");
    }
    validate_item(item);
  }
}

}  // namespace arstage::content
