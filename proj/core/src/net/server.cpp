#include "arstage/net/server.hpp"

#include <atomic>
#include <chrono>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <thread>

#include <boost/asio/dispatch.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/asio/steady_timer.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "net/http_util.hpp"

namespace arstage::net {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

/// Frames above this are refused by the transport. Frames between the
/// protocol limit and this reach the session, which answers TOO_LARGE and
/// keeps the connection.
constexpr std::size_t kTransportFrameLimit = 16 * protocol::kMaxMessageBytes;
constexpr std::size_t kHttpHeaderLimit = 16 * 1024;
constexpr auto kHttpTimeout = std::chrono::seconds(30);

constexpr const char* kPlaceholderPage = R"(<!doctype html>
<html><head><meta charset="utf-8"><title>arstage</title></head>
<body><h1>arstage staging server</h1>
<p>No console bundle is configured (<code>static_dir</code>).</p>
<p>WebSocket endpoint: <code>/ws</code> &middot; health: <a href="/healthz"><code>/healthz</code></a></p>
</body></html>
)";

}  // namespace

class WsConnection;

/// Everything the connections share: the loop, the session and its strand.
class ServerState : public server::Outbox, public std::enable_shared_from_this<ServerState> {
 public:
  ServerState(server::ServerConfig config, content::Project project,
       std::optional<viewsim::WalkableSet> walkable)
      : config_(config),
        strand_(asio::make_strand(ioc_)),
        acceptor_(ioc_),
        ticker_(strand_),
        session_(std::move(config), std::move(project), std::move(walkable), *this),
        epoch_(std::chrono::steady_clock::now()) {}

  // Outbox: only ever called on strand_.
  void send(server::ConnectionId id, std::string encoded) override;
  void close(server::ConnectionId id) override;

  std::int64_t now_ms() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() -
                                                                 epoch_)
        .count();
  }

  std::uint16_t start();
  void accept();
  void schedule_tick();
  void shutdown();

  asio::io_context ioc_;
  server::ServerConfig config_;
  asio::strand<asio::io_context::executor_type> strand_;
  tcp::acceptor acceptor_;
  asio::steady_timer ticker_;
  std::chrono::steady_clock::time_point next_tick_;
  server::Session session_;
  std::chrono::steady_clock::time_point epoch_;
  /// Live WebSocket connections; strand_ only.
  std::map<server::ConnectionId, std::weak_ptr<WsConnection>> sockets_;
  std::atomic<server::ConnectionId> next_id_{1};
  std::atomic<bool> stopped_{false};
};

/// One upgraded connection. Reads are forwarded to the session strand;
/// writes are queued on this connection's own strand.
class WsConnection : public std::enable_shared_from_this<WsConnection> {
 public:
  WsConnection(tcp::socket&& socket, std::shared_ptr<ServerState> server)
      : ws_(std::move(socket)), server_(std::move(server)), id_(server_->next_id_++) {}

  void run(http::request<http::string_body> request) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.read_message_max(kTransportFrameLimit);
    ws_.async_accept(request,
                     beast::bind_front_handler(&WsConnection::on_accept, shared_from_this()));
  }

  /// Any thread.
  void enqueue(std::string text) {
    asio::dispatch(ws_.get_executor(), [self = shared_from_this(), text = std::move(text)]() mutable {
      if (self->closing_) return;
      self->queue_.push_back(std::move(text));
      if (!self->writing_) self->write_next();
    });
  }

  /// Any thread. Flushes queued frames first.
  void close_after_flush() {
    asio::dispatch(ws_.get_executor(), [self = shared_from_this()] {
      self->close_requested_ = true;
      if (!self->writing_) self->write_next();
    });
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) {
      spdlog::debug("ws {}: handshake failed: {}", id_, ec.message());
      return;
    }
    auto server = server_;
    asio::post(server->strand_, [server, self = shared_from_this()] {
      server->sockets_[self->id_] = self;
      server->session_.open(self->id_, server->now_ms());
    });
    spdlog::info("ws {}: connected from {}", id_, remote());
    read();
  }

  void read() {
    ws_.async_read(buffer_, beast::bind_front_handler(&WsConnection::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t /*bytes*/) {
    if (ec) {
      if (ec != websocket::error::closed) spdlog::debug("ws {}: read: {}", id_, ec.message());
      gone();
      return;
    }
    std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    auto server = server_;
    asio::post(server->strand_, [server, id = id_, text = std::move(text)] {
      server->session_.receive(id, text, server->now_ms());
    });
    read();
  }

  void write_next() {
    if (queue_.empty()) {
      if (close_requested_ && !closing_) {
        closing_ = true;
        ws_.async_close(websocket::close_code::normal,
                        [self = shared_from_this()](beast::error_code) {});
      }
      return;
    }
    writing_ = true;
    ws_.text(true);
    ws_.async_write(asio::buffer(queue_.front()),
                    beast::bind_front_handler(&WsConnection::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t /*bytes*/) {
    writing_ = false;
    if (ec) {
      spdlog::debug("ws {}: write: {}", id_, ec.message());
      queue_.clear();
      return;
    }
    queue_.pop_front();
    write_next();
  }

  void gone() {
    auto server = server_;
    asio::post(server->strand_, [server, id = id_] {
      server->sockets_.erase(id);
      server->session_.close(id, server->now_ms());
    });
    spdlog::info("ws {}: disconnected", id_);
  }

  std::string remote() const {
    beast::error_code ec;
    const auto ep = beast::get_lowest_layer(ws_).socket().remote_endpoint(ec);
    return ec ? std::string("?") : ep.address().to_string() + ":" + std::to_string(ep.port());
  }

  websocket::stream<beast::tcp_stream> ws_;
  std::shared_ptr<ServerState> server_;
  server::ConnectionId id_;
  beast::flat_buffer buffer_;
  std::deque<std::string> queue_;
  bool writing_ = false;
  bool close_requested_ = false;
  bool closing_ = false;
};

void ServerState::send(server::ConnectionId id, std::string encoded) {
  auto it = sockets_.find(id);
  if (it == sockets_.end()) return;
  if (auto ws = it->second.lock()) ws->enqueue(std::move(encoded));
}

void ServerState::close(server::ConnectionId id) {
  auto it = sockets_.find(id);
  if (it == sockets_.end()) return;
  if (auto ws = it->second.lock()) ws->close_after_flush();
  sockets_.erase(it);
}

/// Plain HTTP on one TCP connection, until it upgrades or closes.
class HttpConnection : public std::enable_shared_from_this<HttpConnection> {
 public:
  HttpConnection(tcp::socket&& socket, std::shared_ptr<ServerState> server)
      : stream_(std::move(socket)), server_(std::move(server)) {}

  void run() {
    asio::dispatch(stream_.get_executor(),
                   beast::bind_front_handler(&HttpConnection::read, shared_from_this()));
  }

 private:
  void read() {
    parser_.emplace();
    parser_->header_limit(kHttpHeaderLimit);
    parser_->body_limit(kHttpHeaderLimit);
    stream_.expires_after(kHttpTimeout);
    http::async_read(stream_, buffer_, *parser_,
                     beast::bind_front_handler(&HttpConnection::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t /*bytes*/) {
    if (ec == http::error::end_of_stream) {
      beast::error_code ignored;
      stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
      return;
    }
    if (ec) return;
    http::request<http::string_body> req = parser_->release();
    const auto [path, query] = split_target(std::string_view(req.target().data(), req.target().size()));

    if (websocket::is_upgrade(req)) {
      if (path != "/ws") return reply(text_response(req, http::status::not_found, "not found\n"));
      if (!authorized(req, query, server_->config_.auth_token)) {
        spdlog::warn("rejected upgrade without a valid token");
        return reply(text_response(req, http::status::unauthorized, "unauthorized\n"));
      }
      stream_.expires_never();
      std::make_shared<WsConnection>(stream_.release_socket(), server_)->run(std::move(req));
      return;
    }
    if (req.method() != http::verb::get && req.method() != http::verb::head) {
      return reply(text_response(req, http::status::method_not_allowed, "method not allowed\n"));
    }
    if (path == "/healthz") {
      // Health is read on the session strand, then written back here.
      auto server = server_;
      asio::post(server->strand_, [server, self = shared_from_this(), req = std::move(req)] {
        const server::Health h = server->session_.health();
        const std::string body =
            nlohmann::json{{"status", h.status}, {"users", h.users}, {"revision", h.revision}}
                .dump();
        asio::post(self->stream_.get_executor(), [self, req, body] {
          self->reply(text_response(req, http::status::ok, body, "application/json"));
        });
      });
      return;
    }
    serve_static(req, path);
  }

  void serve_static(const http::request<http::string_body>& req, const std::string& path) {
    const std::string& root = server_->config_.static_dir;
    if (root.empty()) {
      if (path == "/" || path == "/index.html") {
        return reply(text_response(req, http::status::ok, kPlaceholderPage, "text/html"));
      }
      return reply(text_response(req, http::status::not_found, "not found\n"));
    }
    const auto file = resolve_static(root, path);
    if (!file) return reply(text_response(req, http::status::not_found, "not found\n"));

    http::file_body::value_type body;
    beast::error_code ec;
    body.open(file->c_str(), beast::file_mode::scan, ec);
    if (ec) return reply(text_response(req, http::status::not_found, "not found\n"));
    const auto size = body.size();
    if (req.method() == http::verb::head) {
      http::response<http::empty_body> res{http::status::ok, req.version()};
      res.set(http::field::content_type, std::string(mime_type(file->string())));
      res.content_length(size);
      res.keep_alive(req.keep_alive());
      return reply(std::move(res));
    }
    http::response<http::file_body> res{std::piecewise_construct, std::make_tuple(std::move(body)),
                                        std::make_tuple(http::status::ok, req.version())};
    res.set(http::field::content_type, std::string(mime_type(file->string())));
    res.content_length(size);
    res.keep_alive(req.keep_alive());
    reply(std::move(res));
  }

  template <class Body>
  void reply(http::response<Body>&& res) {
    auto sp = std::make_shared<http::response<Body>>(std::move(res));
    http::async_write(stream_, *sp,
                      [self = shared_from_this(), sp](beast::error_code ec, std::size_t) {
                        if (ec) return;
                        if (sp->need_eof()) {
                          beast::error_code ignored;
                          self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
                          return;
                        }
                        self->read();
                      });
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  std::optional<http::request_parser<http::string_body>> parser_;
  std::shared_ptr<ServerState> server_;
};

std::uint16_t ServerState::start() {
  const auto colon = config_.bind_addr.rfind(':');
  std::string host = config_.bind_addr.substr(0, colon);
  if (host.size() >= 2 && host.front() == '[' && host.back() == ']') {
    host = host.substr(1, host.size() - 2);
  }
  unsigned long port = 0;
  try {
    port = std::stoul(config_.bind_addr.substr(colon + 1));
  } catch (const std::exception&) {
    throw BindError("bind_addr: bad port in '" + config_.bind_addr + "'");
  }
  if (port > 65535) throw BindError("bind_addr: port out of range");

  beast::error_code ec;
  tcp::resolver resolver(ioc_);
  const auto results = resolver.resolve(host.empty() ? "0.0.0.0" : host, std::to_string(port),
                                        tcp::resolver::passive, ec);
  if (ec || results.empty()) {
    throw BindError("cannot resolve '" + host + "': " + ec.message());
  }
  const tcp::endpoint endpoint = results.begin()->endpoint();
  acceptor_.open(endpoint.protocol(), ec);
  if (!ec) acceptor_.set_option(asio::socket_base::reuse_address(true), ec);
  if (!ec) acceptor_.bind(endpoint, ec);
  if (!ec) acceptor_.listen(asio::socket_base::max_listen_connections, ec);
  if (ec) throw BindError("cannot listen on " + config_.bind_addr + ": " + ec.message());

  accept();
  next_tick_ = std::chrono::steady_clock::now();
  asio::post(strand_, [self = shared_from_this()] { self->schedule_tick(); });
  const auto bound = acceptor_.local_endpoint().port();
  spdlog::info("listening on {}:{}", endpoint.address().to_string(), bound);
  return bound;
}

void ServerState::accept() {
  acceptor_.async_accept(asio::make_strand(ioc_), [self = shared_from_this()](
                                                      beast::error_code ec, tcp::socket socket) {
    if (ec) {
      if (ec != asio::error::operation_aborted) spdlog::warn("accept: {}", ec.message());
      if (!self->acceptor_.is_open()) return;
    } else {
      std::make_shared<HttpConnection>(std::move(socket), self)->run();
    }
    self->accept();
  });
}

void ServerState::schedule_tick() {
  // Fixed-rate schedule: a slow tick does not shift the ones after it.
  next_tick_ += std::chrono::milliseconds(config_.tick_ms());
  ticker_.expires_at(next_tick_);
  ticker_.async_wait([self = shared_from_this()](beast::error_code ec) {
    if (ec || self->stopped_) return;
    self->session_.tick(self->now_ms());
    self->schedule_tick();
  });
}

void ServerState::shutdown() {
  if (stopped_.exchange(true)) return;
  asio::post(strand_, [self = shared_from_this()] {
    beast::error_code ignored;
    self->acceptor_.close(ignored);
    self->ticker_.cancel();
    for (auto& [id, weak] : self->sockets_) {
      if (auto ws = weak.lock()) ws->close_after_flush();
    }
    self->sockets_.clear();
  });
  // Give the close frames a moment, then stop the loop regardless.
  auto timer = std::make_shared<asio::steady_timer>(ioc_, std::chrono::milliseconds(200));
  timer->async_wait([self = shared_from_this(), timer](beast::error_code) { self->ioc_.stop(); });
}

class StagingServer::Impl : public ServerState {
 public:
  using ServerState::ServerState;
};

StagingServer::StagingServer(server::ServerConfig config, content::Project project,
                             std::optional<viewsim::WalkableSet> walkable)
    : impl_(std::make_shared<Impl>(std::move(config), std::move(project), std::move(walkable))) {}

StagingServer::~StagingServer() {
  impl_->shutdown();
  impl_->ioc_.stop();
}

void StagingServer::set_change_hook(server::Session::ChangeHook hook) {
  impl_->session_.set_change_hook(std::move(hook));
}

std::uint16_t StagingServer::start() { return impl_->start(); }

void StagingServer::run(unsigned threads) {
  std::vector<std::thread> helpers;
  for (unsigned i = 1; i < threads; ++i) helpers.emplace_back([this] { impl_->ioc_.run(); });
  impl_->ioc_.run();
  for (auto& t : helpers) t.join();
}

void StagingServer::stop() { impl_->shutdown(); }

std::uint16_t StagingServer::port() const {
  beast::error_code ec;
  const auto ep = impl_->acceptor_.local_endpoint(ec);
  return ec ? 0 : ep.port();
}

}  // namespace arstage::net
