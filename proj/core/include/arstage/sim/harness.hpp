#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "arstage/content/content_item.hpp"
#include "arstage/protocol/messages.hpp"
#include "arstage/server/config.hpp"
#include "arstage/server/session.hpp"
#include "arstage/sim/client.hpp"
#include "arstage/sim/scenario.hpp"
#include "arstage/sim/summary.hpp"
#include "arstage/viewsim/walkable.hpp"

namespace arstage::sim {

/// A designer connection that records what the console would see: complete
/// monitor frames (chunks merged), deltas, joins and leaves. Transport-independent.
class MonitorObserver {
 public:
  explicit MonitorObserver(std::string id = "observer") : id_(std::move(id)) {}

  [[nodiscard]] const std::string& id() const { return id_; }
  std::string hello();
  /// Encodes an edit from this designer.
  std::string edit(protocol::EditCommand command);
  void on_wire(const std::string& encoded);

  [[nodiscard]] const std::vector<protocol::MonitorFrame>& frames() const { return frames_; }
  [[nodiscard]] const std::vector<protocol::ContentDelta>& deltas() const { return deltas_; }
  [[nodiscard]] const std::vector<protocol::ErrorMessage>& errors() const { return errors_; }
  [[nodiscard]] const std::vector<std::string>& joined() const { return joined_; }
  [[nodiscard]] const std::vector<protocol::UserLeft>& left() const { return left_; }
  [[nodiscard]] std::uint64_t revision() const { return revision_; }

 private:
  std::string id_;
  std::uint64_t next_seq_ = 1;
  std::optional<protocol::MonitorFrame> pending_;
  std::vector<protocol::MonitorFrame> frames_;
  std::vector<protocol::ContentDelta> deltas_;
  std::vector<protocol::ErrorMessage> errors_;
  std::vector<std::string> joined_;
  std::vector<protocol::UserLeft> left_;
  std::uint64_t revision_ = 0;
};

/// Runs a server session, scripted clients and an observing designer in one
/// process on a simulated clock. Every message still goes through the wire
/// codec in both directions; delivery is immediate and in order.
///
/// At equal times, client frames run first, then scheduled edits, then the
/// server tick, so a tick always sees the poses sent at its own instant.
class InProcessHarness {
 public:
  InProcessHarness(server::ServerConfig config, content::Project project,
                   std::optional<viewsim::WalkableSet> walkable = std::nullopt);
  ~InProcessHarness();
  InProcessHarness(const InProcessHarness&) = delete;
  InProcessHarness& operator=(const InProcessHarness&) = delete;

  /// The client connects at `start_ms`; its scenario clock starts there.
  std::size_t add_client(Scenario scenario, std::int64_t start_ms = 0);
  /// Connects a designer at time 0.
  void add_observer(std::string id = "observer");
  /// The observer sends `command` at `at_ms`. Requires add_observer().
  void schedule_edit(std::int64_t at_ms, protocol::EditCommand command);

  /// Runs until every client has finished its scenario and the session has
  /// ticked twice more.
  void run();
  /// Runs every event up to and including `t_ms`.
  void run_until(std::int64_t t_ms);

  [[nodiscard]] std::int64_t now_ms() const { return now_ms_; }
  [[nodiscard]] server::Session& session() { return *session_; }
  [[nodiscard]] std::size_t client_count() const { return clients_.size(); }
  [[nodiscard]] SimClient& client(std::size_t i) { return *clients_.at(i).client; }
  [[nodiscard]] const SimClient& client(std::size_t i) const { return *clients_.at(i).client; }
  [[nodiscard]] std::int64_t client_start_ms(std::size_t i) const { return clients_.at(i).start_ms; }
  [[nodiscard]] MonitorObserver& observer() { return *observer_; }
  /// Per-client traces for summarize().
  [[nodiscard]] std::vector<ClientTrace> traces() const;

 private:
  struct Entry {
    std::unique_ptr<SimClient> client;
    std::int64_t start_ms = 0;
    bool connected = false;
  };
  class Wire;

  [[nodiscard]] std::optional<std::int64_t> next_event() const;
  void run_at(std::int64_t t);
  void flush();

  std::unique_ptr<Wire> wire_;
  std::unique_ptr<server::Session> session_;
  std::vector<Entry> clients_;
  std::unique_ptr<MonitorObserver> observer_;
  std::multimap<std::int64_t, protocol::EditCommand> edits_;
  std::int64_t tick_ms_;
  std::int64_t next_tick_ms_;
  std::int64_t now_ms_ = 0;
};

}  // namespace arstage::sim
