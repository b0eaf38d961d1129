#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "arstage/content/content_item.hpp"

namespace arstage::content {

/// One successful mutation. `before` is empty for additions, `after` for removals.
struct ChangeEvent {
  std::uint64_t revision = 0;
  std::string id;
  std::optional<ContentItem> before;
  std::optional<ContentItem> after;
};

/// Partial update; unset fields keep their current value.
struct ItemUpdate {
  std::optional<geo::GeoPosition> geo;
  std::optional<geo::Orientation> orientation;
  std::optional<geo::Vec3> scale;
  std::optional<std::string> asset_ref;
  std::optional<std::map<std::string, std::string>> metadata;
};

/// Authoritative store for one project.
///
/// Every successful mutation bumps the revision by exactly one and notifies
/// subscribers synchronously, in mutation order. A failed mutation throws and
/// leaves both state and revision untouched. Not internally synchronized: the
/// owner serializes mutations (the server does so through its session queue).
class ContentRegistry {
 public:
  using Listener = std::function<void(const ChangeEvent&)>;

  explicit ContentRegistry(Project project, std::uint64_t revision = 0);

  [[nodiscard]] const Project& project() const { return project_; }
  [[nodiscard]] const geo::FrameAnchor& anchor() const { return anchor_; }
  [[nodiscard]] std::uint64_t revision() const { return revision_; }

  /// Adds an item. An empty id is replaced with a generated one.
  /// Throws ValidationError on a duplicate id or invalid item.
  std::string add_item(ContentItem item);
  ContentItem update_item(const std::string& id, const ItemUpdate& update);
  void remove_item(const std::string& id);
  /// Copies an item with a new id, displaced by `offset` in the local frame.
  std::string clone_item(const std::string& id, const geo::LocalPosition& offset);

  [[nodiscard]] const ContentItem& get_item(const std::string& id) const;
  [[nodiscard]] const ContentItem* find_item(const std::string& id) const;
  [[nodiscard]] const std::vector<ContentItem>& list_items() const { return project_.items; }

  /// Items whose horizontal distance from `center` (measured in the tangent
  /// plane at `center`) is at most `radius_m`. Linear scan.
  [[nodiscard]] std::vector<ContentItem> query_radius(const geo::GeoPosition& center,
                                                      double radius_m) const;

  [[nodiscard]] geo::LocalPosition local_position(const ContentItem& item) const;

  /// Returns a subscription id.
  int subscribe(Listener listener);
  void unsubscribe(int subscription);

 private:
  std::vector<ContentItem>::iterator find_it(const std::string& id);
  std::string next_id();
  void emit(const std::string& id, std::optional<ContentItem> before,
            std::optional<ContentItem> after);

  Project project_;
  geo::FrameAnchor anchor_;
  std::uint64_t revision_ = 0;
  std::uint64_t id_counter_ = 0;
  int next_subscription_ = 1;
  std::vector<std::pair<int, Listener>> listeners_;
};

}  // namespace arstage::content
