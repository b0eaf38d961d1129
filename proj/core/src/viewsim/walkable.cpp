#include "arstage/viewsim/walkable.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "arstage/content/project_file.hpp"
#include "arstage/error.hpp"
#include "detail/json_fields.hpp"

namespace arstage::viewsim {

namespace {

constexpr double kBoundaryEps = 1e-9;

using Point = std::array<double, 2>;

double segment_distance(const Point& p, const Point& a, const Point& b) {
  const double dx = b[0] - a[0], dz = b[1] - a[1];
  const double len2 = dx * dx + dz * dz;
  double t = len2 > 0 ? ((p[0] - a[0]) * dx + (p[1] - a[1]) * dz) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p[0] - (a[0] + t * dx), p[1] - (a[1] + t * dz));
}

double boundary_distance(const WalkablePolygon& poly, const Point& p) {
  double best = std::numeric_limits<double>::infinity();
  const auto& v = poly.vertices;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    best = std::min(best, segment_distance(p, v[j], v[i]));
  }
  return best;
}

// Even-odd crossing test; callers handle the boundary separately.
bool strictly_inside(const WalkablePolygon& poly, const Point& p) {
  bool inside = false;
  const auto& v = poly.vertices;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    if ((v[i][1] > p[1]) != (v[j][1] > p[1])) {
      const double x = v[j][0] + (p[1] - v[j][1]) * (v[i][0] - v[j][0]) / (v[i][1] - v[j][1]);
      if (p[0] < x) inside = !inside;
    }
  }
  return inside;
}

}  // namespace

WalkableSet::WalkableSet(std::vector<WalkablePolygon> polygons) : polygons_(std::move(polygons)) {
  for (const auto& poly : polygons_) {
    if (poly.vertices.size() < 3) {
      throw ValidationError("walkable polygon '" + poly.name + "' needs at least 3 vertices");
    }
    for (const auto& v : poly.vertices) {
      if (!std::isfinite(v[0]) || !std::isfinite(v[1])) {
        throw ValidationError("walkable polygon '" + poly.name + "' has a non-finite vertex");
      }
    }
  }
}

bool WalkableSet::contains(double x, double z) const {
  const Point p{x, z};
  return std::any_of(polygons_.begin(), polygons_.end(), [&](const WalkablePolygon& poly) {
    return boundary_distance(poly, p) <= kBoundaryEps || strictly_inside(poly, p);
  });
}

double WalkableSet::distance_outside(double x, double z) const {
  if (contains(x, z)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& poly : polygons_) best = std::min(best, boundary_distance(poly, {x, z}));
  return best;
}

WalkableSet walkable_from_json(std::string_view text) {
  using namespace arstage::detail;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_col(text, e.byte == 0 ? 0 : e.byte - 1);
    throw content::ProjectFileError(
        "line " + std::to_string(line) + ", column " + std::to_string(col), "malformed JSON");
  }
  try {
    std::vector<WalkablePolygon> polygons;
    const json& list = as_array(doc, "$");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string path = index("", i);
      require_object(list[i], path);
      WalkablePolygon poly;
      poly.name = string_field(list[i], "name", path);
      const std::string vpath = join(path, "vertices");
      const json& verts = as_array(require(list[i], "vertices", path), vpath);
      if (verts.size() < 3) throw FieldError(vpath, "needs at least 3 vertices");
      for (std::size_t k = 0; k < verts.size(); ++k) {
        const std::string p = index(vpath, k);
        const json& xz = as_array(verts[k], p, 2);
        poly.vertices.push_back({as_number(xz[0], index(p, 0)), as_number(xz[1], index(p, 1))});
      }
      polygons.push_back(std::move(poly));
    }
    return WalkableSet(std::move(polygons));
  } catch (const FieldError& e) {
    throw content::ProjectFileError(e.path(), e.detail());
  }
}

std::string walkable_to_json(const WalkableSet& set) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& poly : set.polygons()) {
    nlohmann::ordered_json verts = nlohmann::ordered_json::array();
    for (const auto& v : poly.vertices) verts.push_back({v[0], v[1]});
    out.push_back({{"name", poly.name}, {"vertices", verts}});
  }
  return out.dump(2) + "\n";
}

std::optional<WalkableSet> load_walkable(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return std::nullopt;
  std::ifstream in(path);
  if (!in) throw Error("cannot read walkable file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return walkable_from_json(buffer.str());
}

}  // namespace arstage::viewsim
