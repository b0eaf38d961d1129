#pragma once

// Random valid protocol messages for property tests.

#include <random>
#include <string>

#include "arstage/protocol/messages.hpp"

namespace testgen {

using namespace arstage;
using namespace arstage::protocol;

class MessageGen {
 public:
  explicit MessageGen(std::uint64_t seed) : rng_(seed) {}

  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  /// Finite doubles across many magnitudes, including awkward ones.
  double any_real() {
    switch (pick(6)) {
      case 0: return 0.0;
      case 1: return -0.0;
      case 2: return real(-1, 1);
      case 3: return real(-1e6, 1e6);
      case 4: return std::ldexp(real(-1, 1), static_cast<int>(pick(200)) - 100);
      default: return std::nextafter(1.0, 2.0) * real(-1e-3, 1e-3);
    }
  }
  double positive_real() { return std::abs(any_real()) + 1e-9; }
  std::uint64_t pick(std::uint64_t n) { return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(rng_); }
  std::int64_t any_int() {
    return std::uniform_int_distribution<std::int64_t>(-(std::int64_t{1} << 53), std::int64_t{1} << 53)(rng_);
  }

  std::string text(std::size_t max_len = 12, bool nonempty = false) {
    static const char32_t pool[] = {U'a', U'z', U'0', U'-', U'_', U' ', U'"', U'\\', U'/',
                                    U'\n', U'\t', U'\x01', U'é', U'ß', U'北', U'京', U'🙂', U'Ω'};
    std::size_t n = pick(max_len + 1);
    if (nonempty && n == 0) n = 1;
    std::string out;
    for (std::size_t i = 0; i < n; ++i) append_utf8(out, pool[pick(std::size(pool))]);
    return out;
  }

  geo::Orientation orientation() {
    std::normal_distribution<double> n;
    return geo::Orientation::from_components(n(rng_), n(rng_), n(rng_), n(rng_));
  }
  geo::Vec3 vec() { return {any_real(), any_real(), any_real()}; }
  geo::LocalPose pose() { return {vec(), orientation()}; }
  geo::GeoPosition geo_position() {
    return {real(-90, 90), real(-179.999999, 180), real(-500, 9000)};
  }

  viewsim::DeviceProfile profile() {
    return {text(), text(), static_cast<int>(1 + pick(4000)), static_cast<int>(1 + pick(4000)),
            real(10.001, 169.999), static_cast<int>(1 + pick(4000)), static_cast<int>(1 + pick(4000))};
  }

  tracking::PoseEvidence evidence() {
    tracking::PoseEvidence e;
    e.timestamp_ms = any_int();
    switch (pick(3)) {
      case 0: e.payload = tracking::SensorReading{geo_position(), positive_real(), orientation()}; break;
      case 1: e.payload = tracking::TargetDetection{text(12, true), pose(), real(0, 1)}; break;
      default: e.payload = tracking::SlamDelta{pose(), real(0, 1)}; break;
    }
    return e;
  }

  content::ContentItem item() {
    content::ContentItem it;
    it.id = text(10, true);
    it.kind = static_cast<content::ContentKind>(pick(5));
    it.geo = geo_position();
    it.orientation = orientation();
    it.scale = {positive_real(), positive_real(), positive_real()};
    it.asset_ref = text();
    for (std::uint64_t i = 0, n = pick(3); i < n; ++i) it.metadata[text()] = text();
    return it;
  }

  std::vector<content::ContentItem> items(std::size_t max_n = 4) {
    std::vector<content::ContentItem> out;
    for (std::uint64_t i = 0, n = pick(max_n + 1); i < n; ++i) out.push_back(item());
    return out;
  }

  template <class T>
  std::optional<T> maybe(T value) {
    return pick(2) ? std::optional<T>(std::move(value)) : std::nullopt;
  }

  Telemetry telemetry() {
    return {text(8, true), real(0, 240), real(0, 240), static_cast<tracking::TrackingMode>(pick(3)),
            maybe(positive_real()), maybe(real(0, 100))};
  }

  tracking::FusedPose fused() {
    return {pose(), maybe(positive_real()), static_cast<tracking::TrackingMode>(pick(3)), real(0, 1),
            any_int()};
  }

  UserView user_view() {
    UserView u;
    u.client_id = text(8, true);
    u.profile = profile();
    if (pick(2)) u.fused = fused();
    u.avatar = pose();
    u.avatar_mode = static_cast<AvatarMode>(pick(2));
    if (pick(2)) u.telemetry = telemetry();
    u.frustum = {any_real(), any_real(), any_real(), any_real()};
    if (pick(2)) {
      u.divergence = viewsim::DivergenceReport{std::abs(any_real()), std::abs(any_real()),
                                               static_cast<viewsim::Verdict>(pick(4))};
    }
    for (std::uint64_t i = 0, n = pick(3); i < n; ++i) {
      u.visible.push_back({text(), any_real(), any_real(), {any_real(), any_real(), any_real(), any_real()}});
    }
    for (std::uint64_t i = 0, n = pick(3); i < n; ++i) {
      u.issues.push_back({static_cast<viewsim::IssueKind>(pick(6)), text(), text(), any_real()});
    }
    u.last_seen_ms = any_int();
    return u;
  }

  Body body(std::size_t variant) {
    switch (variant) {
      case 0: return ClientHello{text(8, true), static_cast<Role>(pick(2)), profile(),
                                 {static_cast<int>(pick(5)), static_cast<int>(pick(20))}};
      case 1: return PoseUpdate{text(8, true), evidence()};
      case 2: return telemetry();
      case 3: {
        const auto count = static_cast<std::uint32_t>(1 + pick(4));
        return ContentSnapshot{pick(1u << 31), text(), geo_position(), items(),
                               static_cast<std::uint32_t>(pick(count)), count};
      }
      case 4: {
        std::vector<std::string> removed;
        for (std::uint64_t i = 0, n = pick(3); i < n; ++i) removed.push_back(text());
        return ContentDelta{pick(1u << 31), items(), removed};
      }
      case 5: {
        EditCommand e{text(8, true), static_cast<EditOp>(pick(2)), std::nullopt, std::nullopt,
                      std::nullopt, text()};
        if (pick(2)) e.geo = geo_position();
        if (pick(2)) e.orientation = orientation();
        if (pick(2)) e.scale = geo::Vec3{positive_real(), positive_real(), positive_real()};
        return e;
      }
      case 6: return UserJoined{{text(8, true), static_cast<Role>(pick(2)), profile()}};
      case 7: return UserLeft{text(8, true), text()};
      case 8: return Ack{pick(1u << 31)};
      case 9: return ErrorMessage{static_cast<ErrorCode>(pick(10)), text(), text(),
                                  maybe<std::uint64_t>(pick(1000))};
      case 10: return FrameThumbnail{text(8, true), any_int(), geo_position(), orientation(), text(40)};
      default: {
        MonitorFrame m{pick(1u << 31), any_int(), pick(1u << 31), {}, 0, 1};
        for (std::uint64_t i = 0, n = pick(3); i < n; ++i) m.users.push_back(user_view());
        const auto count = static_cast<std::uint32_t>(1 + pick(3));
        m.chunk_count = count;
        m.chunk_index = static_cast<std::uint32_t>(pick(count));
        return m;
      }
    }
  }

  Message message(std::size_t variant) { return {pick(1ull << 53), body(variant)}; }
  Message message() { return message(pick(std::variant_size_v<Body>)); }

 private:
  static void append_utf8(std::string& out, char32_t c) {
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
    } else if (c < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (c >> 6)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else if (c < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (c >> 12)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (c >> 18)));
      out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    }
  }

  std::mt19937_64 rng_;
};

}  // namespace testgen
