#include "arstage/sim/summary.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include <nlohmann/json.hpp>

namespace arstage::sim {

namespace {

constexpr viewsim::Verdict kVerdicts[] = {
    viewsim::Verdict::Nominal, viewsim::Verdict::RotationalMismatch,
    viewsim::Verdict::PositionalMismatch, viewsim::Verdict::Both};

bool in_fault(const ClientTrace& trace, std::int64_t t_ms) {
  const double t_s = static_cast<double>(t_ms) / 1000.0;
  return std::any_of(trace.faults.begin(), trace.faults.end(),
                     [&](const FaultInjection& f) { return f.active_at(t_s); });
}

std::string histogram_text(const std::map<viewsim::Verdict, std::size_t>& h) {
  std::string out;
  for (auto v : kVerdicts) {
    auto it = h.find(v);
    if (it == h.end()) continue;
    if (!out.empty()) out += " ";
    out += std::string(viewsim::to_string(v)) + "=" + std::to_string(it->second);
  }
  return out.empty() ? "-" : out;
}

nlohmann::json histogram_json(const std::map<viewsim::Verdict, std::size_t>& h) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [v, n] : h) j[std::string(viewsim::to_string(v))] = n;
  return j;
}

}  // namespace

std::optional<viewsim::Verdict> ClientSummary::majority(
    const std::map<viewsim::Verdict, std::size_t>& histogram) {
  std::optional<viewsim::Verdict> best;
  std::size_t best_n = 0;
  for (auto v : kVerdicts) {
    auto it = histogram.find(v);
    if (it != histogram.end() && it->second > best_n) {
      best = v;
      best_n = it->second;
    }
  }
  return best;
}

std::vector<ClientSummary> summarize(const std::vector<ClientTrace>& traces,
                                     const std::vector<protocol::MonitorFrame>& frames) {
  std::vector<ClientSummary> out;
  for (const auto& trace : traces) {
    ClientSummary s;
    s.client_id = trace.client_id;
    s.completed = trace.completed;
    s.errors = trace.errors;
    s.deltas = trace.deltas;
    std::set<std::int64_t> scored;
    double sum = 0.0;
    for (const auto& frame : frames) {
      for (const auto& user : frame.users) {
        if (user.client_id != trace.client_id || !user.fused) continue;
        const std::int64_t t = user.fused->timestamp_ms;
        if (user.divergence) {
          ++s.verdicts[user.divergence->verdict];
          if (in_fault(trace, t)) ++s.fault_verdicts[user.divergence->verdict];
        }
        auto truth = trace.truth.find(t);
        if (truth == trace.truth.end() || !scored.insert(t).second) continue;
        const double err = geo::distance(user.fused->pose.position, truth->second.position);
        const double rot = geo::rad_to_deg(
            user.fused->pose.orientation.angle_to(truth->second.orientation));
        sum += err;
        s.max_position_error_m = std::max(s.max_position_error_m, err);
        s.max_orientation_error_deg = std::max(s.max_orientation_error_deg, rot);
      }
    }
    s.samples = scored.size();
    s.mean_position_error_m = scored.empty() ? 0.0 : sum / static_cast<double>(scored.size());
    out.push_back(std::move(s));
  }
  return out;
}

std::string format_summary_table(const std::vector<ClientSummary>& summaries) {
  std::string out;
  char line[512];
  std::snprintf(line, sizeof line, "%-20s %8s %12s %12s %5s %6s  %s\n", "client", "samples",
                "mean_err_m", "max_err_m", "done", "errors", "verdicts (fault window)");
  out += line;
  for (const auto& s : summaries) {
    std::string verdicts = histogram_text(s.verdicts);
    if (!s.fault_verdicts.empty()) verdicts += " (" + histogram_text(s.fault_verdicts) + ")";
    std::snprintf(line, sizeof line, "%-20s %8zu %12.3g %12.3g %5s %6zu  %s\n",
                  s.client_id.c_str(), s.samples, s.mean_position_error_m,
                  s.max_position_error_m, s.completed ? "yes" : "no", s.errors, verdicts.c_str());
    out += line;
  }
  return out;
}

std::string summary_to_json(const std::vector<ClientSummary>& summaries) {
  nlohmann::json root{{"clients", nlohmann::json::array()}};
  for (const auto& s : summaries) {
    nlohmann::json j{{"client_id", s.client_id},
                     {"samples", s.samples},
                     {"mean_position_error_m", s.mean_position_error_m},
                     {"max_position_error_m", s.max_position_error_m},
                     {"max_orientation_error_deg", s.max_orientation_error_deg},
                     {"verdicts", histogram_json(s.verdicts)},
                     {"fault_verdicts", histogram_json(s.fault_verdicts)},
                     {"completed", s.completed},
                     {"errors", s.errors},
                     {"deltas", s.deltas}};
    if (auto m = ClientSummary::majority(s.verdicts)) j["majority"] = viewsim::to_string(*m);
    root["clients"].push_back(j);
  }
  return root.dump(2) + "\n";
}

}  // namespace arstage::sim
