#include "arstage/net/client.hpp"

#include <deque>
#include <functional>
#include <thread>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/steady_timer.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <spdlog/spdlog.h>

namespace arstage::net {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

constexpr std::size_t kReadLimit = 16 * protocol::kMaxMessageBytes;
constexpr auto kConnectTimeout = std::chrono::seconds(5);
constexpr auto kSendTimeout = std::chrono::seconds(10);

std::string host_header(const Endpoint& e) { return e.host + ":" + std::to_string(e.port); }

void decorate(websocket::request_type& req, const Endpoint& e) {
  req.set(http::field::user_agent, "arstage");
  if (!e.token.empty()) req.set(http::field::authorization, "Bearer " + e.token);
}

/// Runs `ioc` until `done` or the deadline. Returns false on timeout.
bool run_until(asio::io_context& ioc, const bool& done, std::chrono::steady_clock::time_point end) {
  ioc.restart();
  while (!done) {
    const auto now = std::chrono::steady_clock::now();
    if (now >= end) return false;
    if (ioc.run_one_for(end - now) == 0 && ioc.stopped()) {
      if (done) break;
      ioc.restart();
    }
  }
  return true;
}

/// A refusal of the upgrade, reported with its HTTP status.
std::string declined(const websocket::response_type& res) {
  return "server refused the WebSocket upgrade: HTTP " +
         std::to_string(static_cast<unsigned>(res.result_int())) + " " +
         std::string(res.reason());
}

}  // namespace

Endpoint parse_endpoint(const std::string& text) {
  std::string_view rest = text;
  for (std::string_view scheme : {"ws://", "http://"}) {
    if (rest.substr(0, scheme.size()) == scheme) rest.remove_prefix(scheme.size());
  }
  if (rest.find("://") != std::string_view::npos) {
    throw ValidationError("unsupported scheme in endpoint '" + text + "' (use ws:// or http://)");
  }
  rest = rest.substr(0, rest.find('/'));
  Endpoint e;
  std::string_view host = rest;
  std::string_view port;
  if (!rest.empty() && rest.front() == '[') {
    const auto close = rest.find(']');
    if (close == std::string_view::npos) throw ValidationError("bad endpoint '" + text + "'");
    host = rest.substr(1, close - 1);
    if (close + 1 < rest.size()) {
      if (rest[close + 1] != ':') throw ValidationError("bad endpoint '" + text + "'");
      port = rest.substr(close + 2);
    }
  } else if (const auto colon = rest.rfind(':'); colon != std::string_view::npos) {
    host = rest.substr(0, colon);
    port = rest.substr(colon + 1);
  }
  if (host.empty()) throw ValidationError("endpoint '" + text + "' has no host");
  e.host = std::string(host);
  if (!port.empty()) {
    unsigned long value = 0;
    try {
      std::size_t used = 0;
      value = std::stoul(std::string(port), &used);
      if (used != port.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ValidationError("endpoint '" + text + "' has a bad port");
    }
    if (value == 0 || value > 65535) throw ValidationError("endpoint '" + text + "' port out of range");
    e.port = static_cast<std::uint16_t>(value);
  }
  return e;
}

HttpResponse http_get(const Endpoint& endpoint, const std::string& target,
                      std::chrono::milliseconds timeout) {
  asio::io_context ioc;
  beast::tcp_stream stream(ioc);
  beast::flat_buffer buffer;
  http::request<http::empty_body> req{http::verb::get, target, 11};
  req.set(http::field::host, host_header(endpoint));
  req.set(http::field::user_agent, "arstage");
  if (!endpoint.token.empty()) req.set(http::field::authorization, "Bearer " + endpoint.token);
  http::response<http::string_body> res;

  beast::error_code failure;
  bool done = false;
  tcp::resolver resolver(ioc);
  stream.expires_after(timeout);
  resolver.async_resolve(endpoint.host, std::to_string(endpoint.port),
                         [&](beast::error_code ec, tcp::resolver::results_type results) {
    if (ec) { failure = ec; done = true; return; }
    stream.async_connect(results, [&](beast::error_code ec, const tcp::endpoint&) {
      if (ec) { failure = ec; done = true; return; }
      http::async_write(stream, req, [&](beast::error_code ec, std::size_t) {
        if (ec) { failure = ec; done = true; return; }
        http::async_read(stream, buffer, res, [&](beast::error_code ec, std::size_t) {
          failure = ec;
          done = true;
        });
      });
    });
  });
  if (!run_until(ioc, done, std::chrono::steady_clock::now() + timeout)) {
    throw ConnectError("GET " + target + ": timed out");
  }
  if (failure) throw ConnectError("GET " + target + ": " + failure.message());
  beast::error_code ignored;
  stream.socket().shutdown(tcp::socket::shutdown_both, ignored);

  HttpResponse out;
  out.status = res.result_int();
  for (const auto& field : res) {
    out.headers[std::string(field.name_string())] = std::string(field.value());
  }
  out.body = std::move(res.body());
  return out;
}

// ---------------------------------------------------------------------------

class WsClient::Impl {
 public:
  explicit Impl(const Endpoint& endpoint) : endpoint_(endpoint) {}

  /// One attempt. Returns an error message, empty on success; `fatal` is set
  /// when retrying cannot help.
  std::string try_connect(bool& fatal) {
    fatal = false;
    ws_.emplace(ioc_);
    beast::error_code ec;
    tcp::resolver resolver(ioc_);
    const auto results = resolver.resolve(endpoint_.host, std::to_string(endpoint_.port), ec);
    if (ec) return "resolve " + endpoint_.host + ": " + ec.message();

    auto& tcp_layer = beast::get_lowest_layer(*ws_);
    // Abandons the attempt; handlers still queued must run while the locals
    // they point at are alive.
    auto fail = [&](std::string message) {
      beast::error_code ignored;
      tcp_layer.socket().close(ignored);
      ioc_.restart();
      ioc_.run();
      return message;
    };
    bool done = false;
    tcp_layer.expires_after(kConnectTimeout);
    tcp_layer.async_connect(results, [&](beast::error_code e, const tcp::endpoint&) {
      ec = e;
      done = true;
    });
    if (!run_until(ioc_, done, std::chrono::steady_clock::now() + kConnectTimeout) || ec) {
      return fail("connect " + host_header(endpoint_) + ": " + (ec ? ec.message() : "timed out"));
    }

    websocket::response_type res;
    ws_->set_option(websocket::stream_base::decorator(
        [e = endpoint_](websocket::request_type& req) { decorate(req, e); }));
    ws_->read_message_max(kReadLimit);
    done = false;
    ws_->async_handshake(res, host_header(endpoint_), "/ws", [&](beast::error_code e) {
      ec = e;
      done = true;
    });
    if (!run_until(ioc_, done, std::chrono::steady_clock::now() + kConnectTimeout)) {
      return fail("handshake: timed out");
    }
    tcp_layer.expires_never();
    if (ec == websocket::error::upgrade_declined) {
      fatal = true;
      return fail(declined(res));
    }
    if (ec) return fail("handshake: " + ec.message());
    ws_->text(true);
    open_ = true;
    return {};
  }

  void send(const std::string& text) {
    if (!open_) throw ConnectError("send on a closed connection");
    bool done = false;
    beast::error_code ec;
    ws_->async_write(asio::buffer(text), [&](beast::error_code e, std::size_t) {
      ec = e;
      done = true;
    });
    if (!run_until(ioc_, done, std::chrono::steady_clock::now() + kSendTimeout)) {
      open_ = false;
      throw ConnectError("send: timed out");
    }
    if (ec) {
      open_ = false;
      throw ConnectError("send: " + ec.message());
    }
  }

  std::optional<std::string> receive(std::chrono::milliseconds timeout) {
    if (!read_result_ && !reading_) {
      if (!open_) throw ConnectError("connection closed");
      reading_ = true;
      ws_->async_read(buffer_, [this](beast::error_code ec, std::size_t) {
        reading_ = false;
        read_result_ = ec;
      });
    }
    ioc_.restart();
    const auto end = std::chrono::steady_clock::now() + timeout;
    while (!read_result_) {
      const auto now = std::chrono::steady_clock::now();
      if (now >= end) return std::nullopt;
      if (ioc_.run_one_for(end - now) == 0) ioc_.restart();
    }
    const beast::error_code ec = *read_result_;
    read_result_.reset();
    if (ec) {
      open_ = false;
      throw ConnectError(ec == websocket::error::closed ? "connection closed by server"
                                                         : "receive: " + ec.message());
    }
    std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    return text;
  }

  void close() {
    if (!open_) return;
    open_ = false;
    bool done = false;
    ws_->async_close(websocket::close_code::normal, [&](beast::error_code) { done = true; });
    run_until(ioc_, done, std::chrono::steady_clock::now() + std::chrono::seconds(1));
    beast::error_code ignored;
    beast::get_lowest_layer(*ws_).socket().close(ignored);
    // Let a pending read observe the close before the stream goes away.
    ioc_.restart();
    ioc_.poll();
  }

  Endpoint endpoint_;
  asio::io_context ioc_;
  std::optional<websocket::stream<beast::tcp_stream>> ws_;
  beast::flat_buffer buffer_;
  bool reading_ = false;
  std::optional<beast::error_code> read_result_;
  bool open_ = false;
};

WsClient::WsClient(const Endpoint& endpoint, int retries, std::chrono::milliseconds first_delay)
    : impl_(std::make_unique<Impl>(endpoint)) {
  auto delay = first_delay;
  for (int attempt = 0;; ++attempt) {
    bool fatal = false;
    const std::string error = impl_->try_connect(fatal);
    if (error.empty()) return;
    if (fatal || attempt >= retries) throw ConnectError(error);
    spdlog::debug("{}; retrying in {} ms", error, delay.count());
    std::this_thread::sleep_for(delay);
    delay *= 2;
  }
}

WsClient::~WsClient() {
  try {
    impl_->close();
  } catch (...) {  // NOLINT(bugprone-empty-catch): best effort on teardown
  }
}

void WsClient::send(const std::string& text) { impl_->send(text); }
std::optional<std::string> WsClient::receive(std::chrono::milliseconds timeout) {
  return impl_->receive(timeout);
}
void WsClient::close() { impl_->close(); }
bool WsClient::is_open() const { return impl_->open_; }

// ---------------------------------------------------------------------------

namespace {

/// One fleet connection: a scripted client or the observer.
class Peer : public std::enable_shared_from_this<Peer> {
 public:
  using Clock = std::chrono::steady_clock;

  Peer(asio::io_context& ioc, const FleetOptions& options, std::string id,
       sim::SimClient* client, sim::MonitorObserver* observer)
      : ioc_(ioc),
        options_(options),
        id_(std::move(id)),
        client_(client),
        observer_(observer),
        timer_(ioc),
        delay_(options.retry_delay) {}

  std::function<void(Peer&)> on_finished;
  std::function<void(Peer&)> on_open;

  [[nodiscard]] const std::string& id() const { return id_; }
  [[nodiscard]] bool finished() const { return finished_; }
  [[nodiscard]] const std::string& failure() const { return failure_; }

  void start() { connect(); }

  /// Closes the connection and then calls `done` (at once if not open).
  void close(std::function<void()> done) {
    timer_.cancel();
    if (!ws_ || !open_ || closing_) return done();
    closing_ = true;
    ws_->async_close(websocket::close_code::normal,
                     [self = shared_from_this(), done = std::move(done)](beast::error_code) {
                       beast::error_code ignored;
                       beast::get_lowest_layer(*self->ws_).socket().close(ignored);
                       done();
                     });
  }

 private:
  void connect() {
    ws_.emplace(ioc_);
    auto& tcp_layer = beast::get_lowest_layer(*ws_);
    tcp_layer.expires_after(kConnectTimeout);
    auto resolver = std::make_shared<tcp::resolver>(ioc_);
    resolver->async_resolve(
        options_.endpoint.host, std::to_string(options_.endpoint.port),
        [self = shared_from_this(), resolver](beast::error_code ec,
                                              tcp::resolver::results_type results) {
          if (ec) return self->retry("resolve: " + ec.message(), false);
          beast::get_lowest_layer(*self->ws_).async_connect(
              results, [self](beast::error_code ec, const tcp::endpoint&) {
                if (ec) return self->retry("connect: " + ec.message(), false);
                self->handshake();
              });
        });
  }

  void handshake() {
    ws_->set_option(websocket::stream_base::decorator(
        [e = options_.endpoint](websocket::request_type& req) { decorate(req, e); }));
    ws_->read_message_max(kReadLimit);
    auto res = std::make_shared<websocket::response_type>();
    ws_->async_handshake(*res, host_header(options_.endpoint), "/ws",
                         [self = shared_from_this(), res](beast::error_code ec) {
                           if (ec == websocket::error::upgrade_declined) {
                             return self->retry(declined(*res), true);
                           }
                           if (ec) return self->retry("handshake: " + ec.message(), false);
                           self->opened();
                         });
  }

  void retry(const std::string& error, bool fatal) {
    if (fatal || attempts_ >= options_.connect_retries) {
      failure_ = error;
      return finish();
    }
    ++attempts_;
    spdlog::debug("{}: {}; retrying in {} ms", id_, error, delay_.count());
    timer_.expires_after(delay_);
    delay_ *= 2;
    timer_.async_wait([self = shared_from_this()](beast::error_code ec) {
      if (!ec) self->connect();
    });
  }

  void opened() {
    open_ = true;
    beast::get_lowest_layer(*ws_).expires_never();
    ws_->text(true);
    enqueue(client_ ? client_->hello() : observer_->hello());
    read();
    if (on_open) on_open(*this);
  }

  void read() {
    ws_->async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->open_ = false;
        self->timer_.cancel();
        return self->finish();
      }
      const std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      self->deliver(text);
      self->read();
    });
  }

  void deliver(const std::string& text) {
    if (observer_) return observer_->on_wire(text);
    client_->on_wire(text);
    if (!stepping_ && client_->ready() && !client_->done()) {
      stepping_ = true;
      epoch_ = Clock::now();
      schedule_step();
    }
  }

  void schedule_step() {
    const double scaled_ms = static_cast<double>(client_->next_time_ms()) / options_.time_scale;
    timer_.expires_at(epoch_ + std::chrono::microseconds(static_cast<std::int64_t>(scaled_ms * 1000)));
    timer_.async_wait([self = shared_from_this()](beast::error_code ec) {
      if (ec || !self->open_) return;
      for (auto& text : self->client_->step()) self->enqueue(std::move(text));
      if (self->client_->done()) return self->finish();
      self->schedule_step();
    });
  }

  void enqueue(std::string text) {
    queue_.push_back(std::move(text));
    if (!writing_) write_next();
  }

  void write_next() {
    if (queue_.empty() || !open_) return;
    writing_ = true;
    ws_->async_write(asio::buffer(queue_.front()),
                     [self = shared_from_this()](beast::error_code ec, std::size_t) {
                       self->writing_ = false;
                       if (ec) {
                         self->queue_.clear();
                         return;
                       }
                       self->queue_.pop_front();
                       self->write_next();
                     });
  }

  void finish() {
    if (finished_) return;
    finished_ = true;
    if (on_finished) on_finished(*this);
  }

  asio::io_context& ioc_;
  const FleetOptions& options_;
  std::string id_;
  sim::SimClient* client_;
  sim::MonitorObserver* observer_;
  std::optional<websocket::stream<beast::tcp_stream>> ws_;
  beast::flat_buffer buffer_;
  std::deque<std::string> queue_;
  asio::steady_timer timer_;
  std::chrono::milliseconds delay_;
  int attempts_ = 0;
  Clock::time_point epoch_;
  bool open_ = false;
  bool writing_ = false;
  bool closing_ = false;
  bool stepping_ = false;
  bool finished_ = false;
  std::string failure_;
};

}  // namespace

FleetReport run_fleet(const std::vector<sim::SimClient*>& clients, sim::MonitorObserver* observer,
                      const FleetOptions& options) {
  if (!(options.time_scale > 0)) throw ValidationError("time_scale must be > 0");
  asio::io_context ioc;
  FleetReport report;
  std::vector<std::shared_ptr<Peer>> peers;
  std::shared_ptr<Peer> watcher;
  std::size_t remaining = clients.size();
  asio::steady_timer linger(ioc);
  asio::steady_timer deadline(ioc);
  std::size_t closing = 0;

  auto shutdown = [&] {
    linger.expires_after(options.linger);
    linger.async_wait([&](beast::error_code) {
      // Close handshakes normally finish at once; do not wait on a stuck peer.
      deadline.expires_after(std::chrono::seconds(2));
      deadline.async_wait([&](beast::error_code ec) {
        if (!ec) ioc.stop();
      });
      closing = peers.size() + (watcher ? 1 : 0);
      auto closed = [&] {
        if (--closing == 0) deadline.cancel();
      };
      for (auto& p : peers) p->close(closed);
      if (watcher) watcher->close(closed);
    });
  };

  auto start_clients = [&] {
    if (clients.empty()) return shutdown();
    for (auto* c : clients) {
      auto peer = std::make_shared<Peer>(ioc, options, c->client_id(), c, nullptr);
      peer->on_finished = [&](Peer& p) {
        if (!p.failure().empty()) report.failures[p.id()] = p.failure();
        if (--remaining == 0) shutdown();
      };
      peers.push_back(peer);
      peer->start();
    }
  };

  if (observer) {
    watcher = std::make_shared<Peer>(ioc, options, observer->id(), nullptr, observer);
    bool started = false;
    auto once = [&](Peer&) {
      if (std::exchange(started, true)) return;
      start_clients();
    };
    watcher->on_open = once;
    watcher->on_finished = [&, once](Peer& p) {
      if (!p.failure().empty()) report.failures[p.id()] = p.failure();
      once(p);
    };
    watcher->start();
  } else {
    start_clients();
  }
  ioc.run();
  return report;
}

}  // namespace arstage::net
