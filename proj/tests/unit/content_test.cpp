#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "arstage/content/project_file.hpp"
#include "arstage/content/registry.hpp"
#include "arstage/error.hpp"
#include "oracles/geodesy_oracle.hpp"

namespace {

using namespace arstage;
using namespace arstage::content;

const geo::GeoPosition kChicago{41.8781, -87.6298, 0.0};

Project chicago_project() {
  Project p;
  p.name = "riverwalk";
  p.anchor_origin = kChicago;
  return p;
}

ContentItem make_item(std::string id, ContentKind kind, geo::GeoPosition g) {
  ContentItem item;
  item.id = std::move(id);
  item.kind = kind;
  item.geo = g;
  item.scale = {2.0, 1.5, 0.01};
  item.asset_ref = "assets/" + item.id + ".png";
  return item;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("arstage_" + name);
}

TEST(Registry, AddThenGetIsIdentity) {
  ContentRegistry reg(chicago_project());
  auto item = make_item("sign", ContentKind::ImageQuad, kChicago);
  item.metadata["riddle"] = "What has keys but no locks?";
  const auto id = reg.add_item(item);
  EXPECT_EQ(id, "sign");
  EXPECT_EQ(reg.get_item(id), item);
  EXPECT_EQ(reg.revision(), 1u);
}

TEST(Registry, GeneratedIdsAreUnique) {
  ContentRegistry reg(chicago_project());
  auto a = reg.add_item(make_item("", ContentKind::Mesh, kChicago));
  auto b = reg.add_item(make_item("", ContentKind::Mesh, kChicago));
  EXPECT_NE(a, b);
  EXPECT_FALSE(a.empty());
}

TEST(Registry, FailedMutationsAreTransactional) {
  ContentRegistry reg(chicago_project());
  reg.add_item(make_item("a", ContentKind::ImageQuad, kChicago));
  int events = 0;
  reg.subscribe([&](const ChangeEvent&) { ++events; });
  const auto before = reg.project();

  EXPECT_THROW(reg.add_item(make_item("a", ContentKind::Mesh, kChicago)), ValidationError);
  auto bad = make_item("b", ContentKind::Mesh, kChicago);
  bad.scale.y = 0.0;
  EXPECT_THROW(reg.add_item(bad), ValidationError);
  EXPECT_THROW(reg.update_item("a", {.scale = geo::Vec3{1, -1, 1}}), ValidationError);
  EXPECT_THROW(reg.update_item("missing", {}), NotFoundError);
  EXPECT_THROW(reg.remove_item("missing"), NotFoundError);
  EXPECT_THROW(reg.clone_item("missing", {}), NotFoundError);
  EXPECT_THROW(reg.update_item("a", {.geo = geo::GeoPosition{95, 0, 0}}), ValidationError);

  EXPECT_EQ(reg.revision(), 1u);
  EXPECT_EQ(events, 0);
  EXPECT_EQ(reg.project(), before);
}

TEST(Registry, RevisionBumpsByOneAndEventsCarryBeforeAfter) {
  ContentRegistry reg(chicago_project());
  std::vector<ChangeEvent> events;
  reg.subscribe([&](const ChangeEvent& e) { events.push_back(e); });
  reg.add_item(make_item("a", ContentKind::ImageQuad, kChicago));
  reg.update_item("a", {.scale = geo::Vec3{3, 3, 3}});
  reg.clone_item("a", {0, 0, 5});
  reg.remove_item("a");
  ASSERT_EQ(events.size(), 4u);
  for (std::size_t i = 0; i < events.size(); ++i) EXPECT_EQ(events[i].revision, i + 1);
  EXPECT_FALSE(events[0].before.has_value());
  EXPECT_EQ(events[1].before->scale, (geo::Vec3{2.0, 1.5, 0.01}));
  EXPECT_EQ(events[1].after->scale, (geo::Vec3{3, 3, 3}));
  EXPECT_FALSE(events[3].after.has_value());
  EXPECT_EQ(reg.revision(), 4u);
}

TEST(Registry, CloneZeroOffsetDuplicatesGeo) {
  ContentRegistry reg(chicago_project());
  reg.add_item(make_item("a", ContentKind::Mesh, {41.879, -87.63, 3.0}));
  const auto id = reg.clone_item("a", {0, 0, 0});
  EXPECT_NE(id, "a");
  auto copy = reg.get_item(id);
  EXPECT_EQ(copy.geo, reg.get_item("a").geo);
  copy.id = "a";
  EXPECT_EQ(copy, reg.get_item("a"));
}

TEST(Registry, Clone100mNorthAtChicago) {
  ContentRegistry reg(chicago_project());
  reg.add_item(make_item("a", ContentKind::ImageQuad, kChicago));
  const auto& c = reg.get_item(reg.clone_item("a", {0, 0, 100}));
  // Meridian-arc oracle: 0.001 deg spans 111.0709 m here.
  const double per_deg = static_cast<double>(oracle::meridian_arc(41.8781L, 41.8791L)) / 0.001;
  EXPECT_NEAR(c.geo.latitude_deg - kChicago.latitude_deg, 100.0 / per_deg, 1e-8);
  EXPECT_NEAR(c.geo.latitude_deg - kChicago.latitude_deg, 0.0009, 1e-5);
  EXPECT_NEAR(c.geo.longitude_deg, kChicago.longitude_deg, 1e-10);
}

TEST(Registry, CloneKeepsFiducialKind) {
  ContentRegistry reg(chicago_project());
  reg.add_item(make_item("facade", ContentKind::Fiducial, kChicago));
  const auto& c = reg.get_item(reg.clone_item("facade", {1, 0, 0}));
  EXPECT_EQ(c.kind, ContentKind::Fiducial);
  EXPECT_FALSE(is_renderable(c));
}

TEST(Registry, QueryRadiusContainsItemAtCenter) {
  ContentRegistry reg(chicago_project());
  reg.add_item(make_item("a", ContentKind::ImageQuad, {41.88, -87.63, 10}));
  const auto hits = reg.query_radius({41.88, -87.63, 10}, 1.0);
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0].id, "a");
}

TEST(Registry, QueryRadiusMatchesGeodesicLinearScan) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> d(-0.02, 0.02), r(50.0, 1500.0);
  for (int trial = 0; trial < 20; ++trial) {
    ContentRegistry reg(chicago_project());
    for (int i = 0; i < 100; ++i) {
      reg.add_item(make_item("", ContentKind::Mesh,
                             {kChicago.latitude_deg + d(rng), kChicago.longitude_deg + d(rng), 0}));
    }
    const geo::GeoPosition center{kChicago.latitude_deg + d(rng), kChicago.longitude_deg + d(rng),
                                  0};
    const double radius = r(rng);
    std::set<std::string> expected;
    for (const auto& item : reg.list_items()) {
      const double dist = oracle::vincenty_distance(center.latitude_deg, center.longitude_deg,
                                                    item.geo.latitude_deg, item.geo.longitude_deg);
      // Tangent-plane and geodesic distance differ by < 1e-4 m at this range.
      ASSERT_GT(std::abs(dist - radius), 1e-3) << "sample too close to boundary; reseed";
      if (dist <= radius) expected.insert(item.id);
    }
    std::set<std::string> got;
    for (const auto& item : reg.query_radius(center, radius)) got.insert(item.id);
    EXPECT_EQ(got, expected);
  }
}

Project one_of_each() {
  Project p = chicago_project();
  int i = 0;
  for (auto k : {ContentKind::ImageQuad, ContentKind::VideoQuad, ContentKind::Mesh,
                 ContentKind::SpatialAudio, ContentKind::Fiducial}) {
    auto item = make_item("item" + std::to_string(i), k,
                          {41.8781 + 1e-4 * i, -87.6298 - 3.3e-5 * i, 0.25 * i});
    item.orientation = geo::heading_to_orientation(17.0 * i, 3.0, -1.0);
    item.metadata["note"] = "héllo ✓ 北京 " + std::to_string(i);
    ++i;
    p.items.push_back(item);
  }
  p.items[3].metadata["trigger_radius_m"] = "7.5";
  return p;
}

TEST(ProjectFile, EmptyProjectRoundTrip) {
  const auto p = chicago_project();
  const auto path = temp_path("empty.json");
  save_project(p, path);
  EXPECT_EQ(load_project(path), p);
}

TEST(ProjectFile, EveryKindAndUnicodeRoundTrip) {
  const auto p = one_of_each();
  const auto path = temp_path("kinds.json");
  save_project(p, path);
  const auto loaded = load_project(path, {.strict = true});
  EXPECT_EQ(loaded, p);
  EXPECT_EQ(project_to_json(loaded), project_to_json(p));
}

TEST(ProjectFile, HandWrittenMinimalFixture) {
  const auto p = load_project(ARSTAGE_FIXTURE_DIR "/minimal_project.json", {.strict = true});
  EXPECT_EQ(p.name, "minimal");
  EXPECT_DOUBLE_EQ(p.anchor_origin.latitude_deg, 41.8781);
  EXPECT_DOUBLE_EQ(p.anchor_origin.longitude_deg, -87.6298);
  ASSERT_EQ(p.items.size(), 2u);
  EXPECT_EQ(p.items[0].id, "welcome-sign");
  EXPECT_EQ(p.items[0].kind, ContentKind::ImageQuad);
  EXPECT_DOUBLE_EQ(p.items[0].geo.height_m, 2.0);
  EXPECT_EQ(p.items[0].scale, (geo::Vec3{2.0, 1.0, 0.05}));
  EXPECT_EQ(p.items[0].metadata.at("riddle"), "Find the bridge");
  EXPECT_EQ(p.items[1].kind, ContentKind::Fiducial);
  EXPECT_EQ(p.items[1].orientation, geo::Orientation::identity());
  EXPECT_EQ(p.items[1].scale, (geo::Vec3{1.0, 0.75, 0.01}));
  EXPECT_EQ(p.items[1].asset_ref, "");
}

TEST(ProjectFile, MalformedJsonReportsLine) {
  try {
    project_from_json("{\n  \"format_version\": 1,\n  \"name\": \"x\",\n  oops\n}");
    FAIL();
  } catch (const ProjectFileError& e) {
    EXPECT_EQ(e.where().rfind("line 4", 0), 0u) << e.what();
  }
}

TEST(ProjectFile, FieldErrorsNamePath) {
  const std::string text = R"({"format_version":1,"name":"x","origin":{"lat":1,"lon":2},
    "items":[{"id":"a","kind":"mesh","lat":1,"lon":2,"scale":[1,0,1]}]})";
  try {
    project_from_json(text);
    FAIL();
  } catch (const ProjectFileError& e) {
    EXPECT_EQ(e.where(), "items[0].scale[1]");
  }
  const std::string bad_kind = R"({"format_version":1,"name":"x","origin":{"lat":1,"lon":2},
    "items":[{"id":"a","kind":"hologram","lat":1,"lon":2}]})";
  try {
    project_from_json(bad_kind);
    FAIL();
  } catch (const ProjectFileError& e) {
    EXPECT_EQ(e.where(), "items[0].kind");
  }
}

TEST(ProjectFile, VersionMismatchIsExplicit) {
  EXPECT_THROW(project_from_json(R"({"format_version":2,"name":"x","origin":{"lat":1,"lon":2},"items":[]})"),
               VersionMismatchError);
}

TEST(ProjectFile, DuplicateIdsRejected) {
  const std::string text = R"({"format_version":1,"name":"x","origin":{"lat":1,"lon":2},
    "items":[{"id":"a","kind":"mesh","lat":1,"lon":2},{"id":"a","kind":"mesh","lat":1,"lon":2}]})";
  try {
    project_from_json(text);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("'a'"), std::string::npos);
  }
}

TEST(ProjectFile, UnknownFieldsStrictVsLenient) {
  const std::string text = R"({"format_version":1,"name":"x","origin":{"lat":1,"lon":2},
    "items":[{"id":"a","kind":"mesh","lat":1,"lon":2,"colour":"red"}],"extra":true})";
  std::vector<std::string> warnings;
  const auto p = project_from_json(text, {.strict = false}, &warnings);
  EXPECT_EQ(p.items.size(), 1u);
  ASSERT_EQ(warnings.size(), 2u);
  EXPECT_NE(warnings[0].find("extra"), std::string::npos);
  EXPECT_NE(warnings[1].find("items[0].colour"), std::string::npos);
  EXPECT_THROW(project_from_json(text, {.strict = true}), ProjectFileError);
}

TEST(ProjectFile, MissingFileIsError) {
  EXPECT_THROW(load_project("/nonexistent/arstage/project.json"), Error);
}

}  // namespace
