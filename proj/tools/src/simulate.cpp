#include <filesystem>
#include <fstream>
#include <memory>

#include <spdlog/spdlog.h>

#include "arstage/net/client.hpp"
#include "arstage/sim/harness.hpp"
#include "arstage/sim/summary.hpp"
#include "cli.hpp"

namespace arstage::cli {

namespace {

sim::ClientTrace trace_of(const sim::SimClient& c) {
  return {c.client_id(),  c.truth(), c.scenario().faults, c.done() && !c.closed(),
          c.errors().size(), c.deltas().size()};
}

void write_logs(const std::string& dir, const std::vector<const sim::SimClient*>& clients) {
  std::filesystem::create_directories(dir);
  for (const auto* c : clients) {
    const auto path = std::filesystem::path(dir) / (c->client_id() + ".jsonl");
    std::ofstream file(path);
    if (!file) throw Error("cannot write " + path.string());
    sim::write_log(file, c->log());
  }
}

}  // namespace

int simulate(const SimulateOptions& options, std::ostream& out, std::ostream& err) {
  std::vector<sim::Scenario> scenarios;
  for (const auto& path : options.scenarios) {
    if (!std::filesystem::exists(path)) throw InputError("scenario file not found: " + path);
    scenarios.push_back(sim::load_scenario(path));
  }

  std::vector<sim::ClientTrace> traces;
  std::vector<protocol::MonitorFrame> frames;
  std::vector<const sim::SimClient*> logged;
  bool connected_all = true;

  // Both branches keep their clients alive until the logs are written.
  std::unique_ptr<sim::InProcessHarness> harness;
  std::vector<std::unique_ptr<sim::SimClient>> live;
  sim::MonitorObserver observer("simulate");

  if (options.server.empty()) {
    if (options.project.empty()) {
      throw InputError("--project is required without --server (the in-process session needs content)");
    }
    harness = std::make_unique<sim::InProcessHarness>(resolve_config(options.config, {}),
                                                      read_project(options.project),
                                                      read_walkable(options.walkable, err));
    harness->add_observer("simulate");
    for (auto& s : scenarios) harness->add_client(std::move(s));
    harness->run();
    traces = harness->traces();
    frames = harness->observer().frames();
    for (std::size_t i = 0; i < harness->client_count(); ++i) logged.push_back(&harness->client(i));
  } else {
    net::FleetOptions fleet;
    fleet.endpoint = net::parse_endpoint(options.server);
    fleet.endpoint.token = options.token;
    fleet.time_scale = options.time_scale;
    std::vector<sim::SimClient*> clients;
    for (auto& s : scenarios) {
      live.push_back(std::make_unique<sim::SimClient>(std::move(s)));
      clients.push_back(live.back().get());
    }
    const net::FleetReport report = net::run_fleet(clients, &observer, fleet);
    for (const auto& [id, why] : report.failures) {
      err << "error: " << id << ": " << why << "\n";
      connected_all = false;
    }
    for (const auto* c : clients) {
      traces.push_back(trace_of(*c));
      logged.push_back(c);
    }
    frames = observer.frames();
  }

  if (!options.log_dir.empty()) write_logs(options.log_dir, logged);

  const auto summary = sim::summarize(traces, frames);
  if (options.json) {
    out << sim::summary_to_json(summary) << "\n";
  } else {
    out << sim::format_summary_table(summary);
  }
  const bool complete = std::all_of(summary.begin(), summary.end(),
                                    [](const sim::ClientSummary& s) { return s.completed; });
  if (!complete) err << "error: not every scenario completed\n";
  return complete && connected_all ? kOk : kRuntimeFailure;
}

}  // namespace arstage::cli
