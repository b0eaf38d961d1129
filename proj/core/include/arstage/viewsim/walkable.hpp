#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace arstage::viewsim {

/// A closed polygon in the local frame's horizontal plane; vertices are (x, z)
/// in meters. The closing edge from the last vertex back to the first is implied.
struct WalkablePolygon {
  std::string name;
  std::vector<std::array<double, 2>> vertices;
};

/// The set of areas a pedestrian can reach (plazas, sidewalks).
class WalkableSet {
 public:
  WalkableSet() = default;
  /// Throws ValidationError for a polygon with fewer than three vertices or
  /// non-finite coordinates.
  explicit WalkableSet(std::vector<WalkablePolygon> polygons);

  [[nodiscard]] const std::vector<WalkablePolygon>& polygons() const { return polygons_; }

  /// Inside any polygon. Boundaries are inclusive (within 1e-9 m).
  [[nodiscard]] bool contains(double x, double z) const;
  /// Distance from the point to the closest polygon boundary; 0 when inside.
  [[nodiscard]] double distance_outside(double x, double z) const;

 private:
  std::vector<WalkablePolygon> polygons_;
};

/// Parses `[{"name": ..., "vertices": [[x, z], ...]}, ...]`. Throws
/// content::ProjectFileError with the offending path on malformed input.
WalkableSet walkable_from_json(std::string_view text);
std::string walkable_to_json(const WalkableSet& set);

/// Empty when the file does not exist (the walkability check is then skipped);
/// throws for an unreadable or malformed file.
std::optional<WalkableSet> load_walkable(const std::filesystem::path& path);

}  // namespace arstage::viewsim
