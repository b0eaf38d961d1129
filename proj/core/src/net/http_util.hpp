#pragma once

#include <algorithm>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include <boost/beast/http.hpp>

namespace arstage::net {

/// Splits a request target into its path and raw query string.
inline std::pair<std::string, std::string> split_target(std::string_view target) {
  const auto q = target.find('?');
  if (q == std::string_view::npos) return {std::string(target), {}};
  return {std::string(target.substr(0, q)), std::string(target.substr(q + 1))};
}

/// Decodes %XX escapes and '+' (as space). Malformed escapes are kept verbatim.
inline std::string percent_decode(std::string_view in) {
  auto hex = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  std::string out;
  out.reserve(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (in[i] == '%' && i + 2 < in.size() && hex(in[i + 1]) >= 0 && hex(in[i + 2]) >= 0) {
      out.push_back(static_cast<char>(hex(in[i + 1]) * 16 + hex(in[i + 2])));
      i += 2;
    } else if (in[i] == '+') {
      out.push_back(' ');
    } else {
      out.push_back(in[i]);
    }
  }
  return out;
}

/// The decoded value of `key` in a query string.
inline std::optional<std::string> query_param(std::string_view query, std::string_view key) {
  while (!query.empty()) {
    const auto amp = query.find('&');
    const std::string_view pair = query.substr(0, amp);
    const auto eq = pair.find('=');
    if (pair.substr(0, eq) == key) {
      return eq == std::string_view::npos ? std::string() : percent_decode(pair.substr(eq + 1));
    }
    if (amp == std::string_view::npos) break;
    query.remove_prefix(amp + 1);
  }
  return std::nullopt;
}

/// Compares without an early exit, so timing does not leak the prefix length.
inline bool constant_time_equal(std::string_view a, std::string_view b) {
  unsigned char diff = a.size() == b.size() ? 0 : 1;
  const std::size_t n = std::max(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned char x = i < a.size() ? static_cast<unsigned char>(a[i]) : 0;
    const unsigned char y = i < b.size() ? static_cast<unsigned char>(b[i]) : 0;
    diff |= static_cast<unsigned char>(x ^ y);
  }
  return diff == 0;
}

/// True when no token is configured, or the request carries it as a bearer
/// header or a `token` query parameter.
template <class Body>
bool authorized(const boost::beast::http::request<Body>& req, std::string_view query,
                const std::string& token) {
  if (token.empty()) return true;
  const auto header = req[boost::beast::http::field::authorization];
  constexpr std::string_view kBearer = "Bearer ";
  if (header.size() > kBearer.size() &&
      std::string_view(header.data(), kBearer.size()) == kBearer &&
      constant_time_equal(std::string_view(header.data(), header.size()).substr(kBearer.size()),
                          token)) {
    return true;
  }
  const auto param = query_param(query, "token");
  return param && constant_time_equal(*param, token);
}

template <class Body>
boost::beast::http::response<boost::beast::http::string_body> text_response(
    const boost::beast::http::request<Body>& req, boost::beast::http::status status,
    std::string body, std::string_view content_type = "text/plain") {
  namespace http = boost::beast::http;
  http::response<http::string_body> res{status, req.version()};
  res.set(http::field::content_type, std::string(content_type));
  res.set(http::field::cache_control, "no-store");
  res.keep_alive(req.keep_alive());
  if (req.method() == http::verb::head) {
    res.content_length(body.size());
  } else {
    res.body() = std::move(body);
    res.prepare_payload();
  }
  return res;
}

inline std::string_view mime_type(std::string_view path) {
  const auto dot = path.rfind('.');
  const std::string_view ext = dot == std::string_view::npos ? "" : path.substr(dot);
  if (ext == ".html" || ext == ".htm") return "text/html";
  if (ext == ".js" || ext == ".mjs") return "application/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json" || ext == ".map") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".gif") return "image/gif";
  if (ext == ".ico") return "image/x-icon";
  if (ext == ".wasm") return "application/wasm";
  if (ext == ".woff2") return "font/woff2";
  if (ext == ".txt" || ext == ".md") return "text/plain";
  return "application/octet-stream";
}

/// Maps a URL path to a regular file under `root`, or empty when the path is
/// malformed, escapes the root, or names nothing. "/" and directories map to
/// their index.html.
inline std::optional<std::filesystem::path> resolve_static(const std::string& root,
                                                           const std::string& url_path) {
  namespace fs = std::filesystem;
  const std::string decoded = percent_decode(url_path);
  if (decoded.empty() || decoded.front() != '/' || decoded.find('\0') != std::string::npos) {
    return std::nullopt;
  }
  std::error_code ec;
  const fs::path base = fs::canonical(fs::path(root), ec);
  if (ec) return std::nullopt;
  fs::path candidate = fs::weakly_canonical(base / fs::path(decoded).relative_path(), ec);
  if (ec) return std::nullopt;
  // Containment check on the canonical paths (handles "..", symlinks).
  const auto [root_end, ignored] =
      std::mismatch(base.begin(), base.end(), candidate.begin(), candidate.end());
  if (root_end != base.end()) return std::nullopt;
  if (fs::is_directory(candidate, ec)) candidate /= "index.html";
  if (!fs::is_regular_file(candidate, ec)) return std::nullopt;
  return candidate;
}

}  // namespace arstage::net
