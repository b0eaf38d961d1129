#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "arstage/error.hpp"
#include "arstage/protocol/messages.hpp"

namespace arstage::protocol {

/// A message could not be accepted. `path` names the offending field for
/// BAD_MESSAGE (dotted, from the envelope root, e.g. "body.items[3].scale[1]").
class ProtocolError : public Error {
 public:
  ProtocolError(ErrorCode code, std::string path, const std::string& detail)
      : Error(std::string(to_string(code)) + (path.empty() ? "" : " at " + path) + ": " + detail),
        code_(code),
        path_(std::move(path)),
        detail_(detail) {}
  [[nodiscard]] ErrorCode code() const { return code_; }
  [[nodiscard]] const std::string& path() const { return path_; }
  [[nodiscard]] const std::string& detail() const { return detail_; }
  [[nodiscard]] ErrorMessage to_message(std::optional<std::uint64_t> ref_seq = {}) const {
    return {code_, detail_, path_, ref_seq};
  }

 private:
  ErrorCode code_;
  std::string path_;
  std::string detail_;
};

/// Canonical encoding: compact UTF-8 JSON `{"body":{...},"seq":n,"t":"tag"}`
/// with keys sorted and numbers in shortest round-trip form, so
/// encode(decode(encode(m))) == encode(m). Throws ProtocolError(TOO_LARGE)
/// above kMaxMessageBytes and ValidationError for non-finite numbers.
std::string encode(const Message& message);

/// Strict on known fields, tolerant of unknown ones; unknown tags are
/// rejected. Throws ProtocolError(BAD_MESSAGE or TOO_LARGE); never crashes
/// on arbitrary input.
Message decode(std::string_view bytes);

/// Splits a snapshot into consecutive messages no larger than `max_bytes`,
/// numbered from `first_seq`. Throws ProtocolError(TOO_LARGE) if a single
/// item cannot fit.
std::vector<std::string> encode_snapshot_chunks(const ContentSnapshot& snapshot,
                                                std::uint64_t first_seq,
                                                std::size_t max_bytes = kMaxMessageBytes);
/// Same, by users, for the designer feed.
std::vector<std::string> encode_monitor_chunks(const MonitorFrame& frame, std::uint64_t first_seq,
                                               std::size_t max_bytes = kMaxMessageBytes);

/// Reassembles chunked snapshots in arrival order. Chunks of a newer revision
/// discard an incomplete older one.
class SnapshotAssembler {
 public:
  /// Returns the complete snapshot once its last chunk arrives.
  std::optional<ContentSnapshot> add(const ContentSnapshot& chunk);

 private:
  std::optional<ContentSnapshot> pending_;
};

/// Stream framing for transports without message boundaries: a 4-byte
/// big-endian length followed by the encoded message.
std::string frame_length_prefixed(std::string_view encoded);
/// Extracts complete frames from `buffer`, leaving a partial tail in place.
/// Throws ProtocolError(TOO_LARGE) for an oversized declared length.
std::vector<std::string> unframe_length_prefixed(std::string& buffer);

/// Per-sender sequence check: strictly increasing, gaps allowed.
class SequenceValidator {
 public:
  /// Throws ProtocolError(SEQ_REGRESSION) for a duplicate or regression.
  void check(std::uint64_t seq);
  [[nodiscard]] bool accepts(std::uint64_t seq) const { return !last_ || seq > *last_; }
  [[nodiscard]] std::optional<std::uint64_t> last() const { return last_; }

 private:
  std::optional<std::uint64_t> last_;
};

}  // namespace arstage::protocol
