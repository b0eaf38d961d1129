#include "arstage/content/registry.hpp"

#include <algorithm>
#include <utility>

#include "arstage/error.hpp"

namespace arstage::content {

ContentRegistry::ContentRegistry(Project project, std::uint64_t revision)
    : project_(std::move(project)),
      anchor_(geo::make_anchor(project_.anchor_origin)),
      revision_(revision) {
  validate_project(project_);
}

std::vector<ContentItem>::iterator ContentRegistry::find_it(const std::string& id) {
  return std::find_if(project_.items.begin(), project_.items.end(),
                      [&](const ContentItem& i) { return i.id == id; });
}

const ContentItem* ContentRegistry::find_item(const std::string& id) const {
  auto it = std::find_if(project_.items.begin(), project_.items.end(),
                         [&](const ContentItem& i) { return i.id == id; });
  return it == project_.items.end() ? nullptr : &*it;
}

const ContentItem& ContentRegistry::get_item(const std::string& id) const {
  if (const auto* item = find_item(id)) return *item;
  throw NotFoundError("unknown item id '" + id + "'");
}

std::string ContentRegistry::next_id() {
  std::string id;
  do {
    id = "item-" + std::to_string(++id_counter_);
  } while (find_item(id) != nullptr);
  return id;
}

void ContentRegistry::emit(const std::string& id, std::optional<ContentItem> before,
                           std::optional<ContentItem> after) {
  ++revision_;
  const ChangeEvent ev{revision_, id, std::move(before), std::move(after)};
  // Copy so a listener may unsubscribe from inside its callback.
  const auto listeners = listeners_;
  for (const auto& [sub, fn] : listeners) fn(ev);
}

std::string ContentRegistry::add_item(ContentItem item) {
  if (item.id.empty()) {
    item.id = next_id();
  } else if (find_item(item.id) != nullptr) {
    throw ValidationError("duplicate item id '" + item.id + "'");
  }
  item.geo = geo::validated(item.geo);
  validate_item(item);
  project_.items.push_back(item);
  emit(item.id, std::nullopt, item);
  return item.id;
}

ContentItem ContentRegistry::update_item(const std::string& id, const ItemUpdate& update) {
  auto it = find_it(id);
  if (it == project_.items.end()) throw NotFoundError("unknown item id '" + id + "'");
  ContentItem next = *it;
  if (update.geo) next.geo = geo::validated(*update.geo);
  if (update.orientation) next.orientation = *update.orientation;
  if (update.scale) next.scale = *update.scale;
  if (update.asset_ref) next.asset_ref = *update.asset_ref;
  if (update.metadata) next.metadata = *update.metadata;
  validate_item(next);
  ContentItem before = std::exchange(*it, next);
  emit(id, std::move(before), next);
  return next;
}

void ContentRegistry::remove_item(const std::string& id) {
  auto it = find_it(id);
  if (it == project_.items.end()) throw NotFoundError("unknown item id '" + id + "'");
  ContentItem before = std::move(*it);
  project_.items.erase(it);
  emit(id, std::move(before), std::nullopt);
}

std::string ContentRegistry::clone_item(const std::string& id, const geo::LocalPosition& offset) {
  ContentItem copy = get_item(id);
  if (!offset.finite()) throw ValidationError("clone offset must be finite");
  if (offset != geo::Vec3{}) {
    copy.geo = geo::local_to_geo(anchor_, local_position(copy) + offset);
  }
  copy.id.clear();
  return add_item(std::move(copy));
}

geo::LocalPosition ContentRegistry::local_position(const ContentItem& item) const {
  return anchor_.to_local(item.geo);
}

std::vector<ContentItem> ContentRegistry::query_radius(const geo::GeoPosition& center,
                                                       double radius_m) const {
  const geo::FrameAnchor at_center = geo::make_anchor(center);
  std::vector<ContentItem> out;
  for (const auto& item : project_.items) {
    const geo::Vec3 p = at_center.to_local(item.geo);
    if (std::hypot(p.x, p.z) <= radius_m) out.push_back(item);
  }
  return out;
}

int ContentRegistry::subscribe(Listener listener) {
  const int sub = next_subscription_++;
  listeners_.emplace_back(sub, std::move(listener));
  return sub;
}

void ContentRegistry::unsubscribe(int subscription) {
  std::erase_if(listeners_, [&](const auto& p) { return p.first == subscription; });
}

}  // namespace arstage::content
