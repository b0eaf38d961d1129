#include "arstage/sim/harness.hpp"

#include <algorithm>
#include <deque>

namespace arstage::sim {

namespace {

constexpr server::ConnectionId kObserverConnection = 1'000'000'000;

}  // namespace

std::string MonitorObserver::hello() {
  return protocol::encode({next_seq_++, protocol::ClientHello{id_, protocol::Role::Designer,
                                                              viewsim::profile_preset("ipad-pro"),
                                                              protocol::kProtocolVersion}});
}

std::string MonitorObserver::edit(protocol::EditCommand command) {
  command.editor_id = id_;
  return protocol::encode({next_seq_++, std::move(command)});
}

void MonitorObserver::on_wire(const std::string& encoded) {
  const protocol::Message m = protocol::decode(encoded);
  if (const auto* f = std::get_if<protocol::MonitorFrame>(&m.body)) {
    if (f->chunk_index == 0) {
      pending_ = *f;
    } else if (pending_ && pending_->tick == f->tick &&
               pending_->chunk_index + 1 == f->chunk_index) {
      pending_->users.insert(pending_->users.end(), f->users.begin(), f->users.end());
      pending_->chunk_index = f->chunk_index;
    } else {
      pending_.reset();
      return;
    }
    if (pending_->chunk_index + 1 == pending_->chunk_count) {
      pending_->chunk_index = 0;
      pending_->chunk_count = 1;
      frames_.push_back(std::move(*pending_));
      pending_.reset();
    }
  } else if (const auto* d = std::get_if<protocol::ContentDelta>(&m.body)) {
    deltas_.push_back(*d);
    revision_ = d->revision;
  } else if (const auto* s = std::get_if<protocol::ContentSnapshot>(&m.body)) {
    revision_ = s->revision;
  } else if (const auto* j = std::get_if<protocol::UserJoined>(&m.body)) {
    joined_.push_back(j->user.client_id);
  } else if (const auto* l = std::get_if<protocol::UserLeft>(&m.body)) {
    left_.push_back(*l);
  } else if (const auto* e = std::get_if<protocol::ErrorMessage>(&m.body)) {
    errors_.push_back(*e);
  }
}

/// In-memory transport: queues outgoing messages per connection until flushed.
class InProcessHarness::Wire : public server::Outbox {
 public:
  void send(server::ConnectionId connection, std::string encoded) override {
    queue_.emplace_back(connection, std::move(encoded));
  }
  void close(server::ConnectionId connection) override { closed_.push_back(connection); }

  std::deque<std::pair<server::ConnectionId, std::string>> queue_;
  std::vector<server::ConnectionId> closed_;
};

InProcessHarness::InProcessHarness(server::ServerConfig config, content::Project project,
                                   std::optional<viewsim::WalkableSet> walkable)
    : wire_(std::make_unique<Wire>()),
      tick_ms_(config.tick_ms()),
      next_tick_ms_(config.tick_ms()) {
  session_ = std::make_unique<server::Session>(std::move(config), std::move(project),
                                               std::move(walkable), *wire_);
}

InProcessHarness::~InProcessHarness() = default;

std::size_t InProcessHarness::add_client(Scenario scenario, std::int64_t start_ms) {
  clients_.push_back({std::make_unique<SimClient>(std::move(scenario)), start_ms, false});
  return clients_.size() - 1;
}

void InProcessHarness::add_observer(std::string id) {
  observer_ = std::make_unique<MonitorObserver>(std::move(id));
  session_->open(kObserverConnection, now_ms_);
  session_->receive(kObserverConnection, observer_->hello(), now_ms_);
  flush();
}

void InProcessHarness::schedule_edit(std::int64_t at_ms, protocol::EditCommand command) {
  edits_.emplace(at_ms, std::move(command));
}

void InProcessHarness::flush() {
  while (!wire_->queue_.empty()) {
    auto [connection, text] = std::move(wire_->queue_.front());
    wire_->queue_.pop_front();
    if (connection == kObserverConnection) {
      if (observer_) observer_->on_wire(text);
    } else if (connection >= 1 && connection <= clients_.size()) {
      clients_[connection - 1].client->on_wire(text);
    }
  }
  for (auto connection : wire_->closed_) {
    if (connection >= 1 && connection <= clients_.size()) {
      clients_[connection - 1].connected = false;
    }
  }
  wire_->closed_.clear();
}

std::optional<std::int64_t> InProcessHarness::next_event() const {
  std::optional<std::int64_t> next;
  auto consider = [&](std::int64_t t) { next = next ? std::min(*next, t) : t; };
  for (const auto& e : clients_) {
    if (!e.connected && !e.client->ready()) {
      consider(e.start_ms);
    } else if (e.connected && e.client->ready() && !e.client->done()) {
      consider(e.start_ms + e.client->next_time_ms());
    }
  }
  if (!edits_.empty()) consider(edits_.begin()->first);
  return next;
}

void InProcessHarness::run_at(std::int64_t t) {
  now_ms_ = t;
  for (std::size_t i = 0; i < clients_.size(); ++i) {
    Entry& e = clients_[i];
    const server::ConnectionId connection = i + 1;
    if (!e.connected && !e.client->ready() && e.start_ms == t) {
      e.connected = true;
      session_->open(connection, t);
      session_->receive(connection, e.client->hello(), t);
      flush();
    }
    if (e.connected && e.client->ready() && !e.client->done() &&
        e.start_ms + e.client->next_time_ms() == t) {
      for (const auto& text : e.client->step()) session_->receive(connection, text, t);
      flush();
    }
  }
  while (!edits_.empty() && edits_.begin()->first == t) {
    if (observer_) session_->receive(kObserverConnection, observer_->edit(edits_.begin()->second), t);
    edits_.erase(edits_.begin());
    flush();
  }
  if (next_tick_ms_ == t) {
    session_->tick(t);
    next_tick_ms_ += tick_ms_;
    flush();
  }
}

void InProcessHarness::run_until(std::int64_t t_ms) {
  while (true) {
    std::optional<std::int64_t> next = next_event();
    next = next ? std::min(*next, next_tick_ms_) : next_tick_ms_;
    if (*next > t_ms) break;
    run_at(*next);
  }
  now_ms_ = std::max(now_ms_, t_ms);
}

std::vector<ClientTrace> InProcessHarness::traces() const {
  std::vector<ClientTrace> out;
  for (const auto& e : clients_) {
    const SimClient& c = *e.client;
    out.push_back({c.client_id(), c.truth(), c.scenario().faults, c.done() && !c.closed(),
                   c.errors().size(), c.deltas().size()});
  }
  return out;
}

void InProcessHarness::run() {
  while (auto next = next_event()) run_until(*next);
  run_until(next_tick_ms_ + tick_ms_);
}

}  // namespace arstage::sim
