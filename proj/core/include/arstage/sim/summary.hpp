#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "arstage/geo/pose.hpp"
#include "arstage/protocol/messages.hpp"
#include "arstage/sim/scenario.hpp"
#include "arstage/viewsim/view.hpp"

namespace arstage::sim {

/// What one client did, as needed to score it against the designer feed.
struct ClientTrace {
  std::string client_id;
  /// Ground truth keyed by scenario time (the evidence timestamps).
  std::map<std::int64_t, geo::LocalPose> truth;
  std::vector<FaultInjection> faults;
  bool completed = false;
  std::size_t errors = 0;
  std::size_t deltas = 0;
};

struct ClientSummary {
  std::string client_id;
  /// Distinct fused poses in the feed that matched a ground-truth sample.
  std::size_t samples = 0;
  double mean_position_error_m = 0.0;
  double max_position_error_m = 0.0;
  double max_orientation_error_deg = 0.0;
  /// Divergence verdicts over every feed frame that carried one.
  std::map<viewsim::Verdict, std::size_t> verdicts;
  /// The same, restricted to frames whose fused pose falls in a fault window.
  std::map<viewsim::Verdict, std::size_t> fault_verdicts;
  bool completed = false;
  std::size_t errors = 0;
  std::size_t deltas = 0;

  /// Most frequent verdict of `histogram`; ties go to the earlier enumerator.
  static std::optional<viewsim::Verdict> majority(
      const std::map<viewsim::Verdict, std::size_t>& histogram);
};

/// Scores each trace against the designer feed: fused poses are compared
/// with ground truth at their own timestamps.
std::vector<ClientSummary> summarize(const std::vector<ClientTrace>& traces,
                                     const std::vector<protocol::MonitorFrame>& frames);

/// Human-readable table, one row per client.
std::string format_summary_table(const std::vector<ClientSummary>& summaries);
/// Machine-readable form: `{"clients":[{...}, ...]}`.
std::string summary_to_json(const std::vector<ClientSummary>& summaries);

}  // namespace arstage::sim
