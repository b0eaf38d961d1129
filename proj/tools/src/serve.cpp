#include <chrono>
#include <thread>

#include <spdlog/spdlog.h>

#include "arstage/content/project_file.hpp"
#include "arstage/net/server.hpp"
#include "cli.hpp"

namespace arstage::cli {

int serve(const ServeOptions& options, std::ostream& out, std::ostream& err) {
  const server::ServerConfig config = resolve_config(options.config, options.overrides);
  content::Project project = read_project(options.project);
  auto walkable = read_walkable(options.walkable, err);

  net::StagingServer server(config, project, std::move(walkable));
  if (config.autosave) {
    server.set_change_hook([path = options.project](const content::Project& updated) {
      try {
        content::save_project(updated, path);
      } catch (const std::exception& e) {
        spdlog::error("autosave failed: {}", e.what());
      }
    });
  }
  const std::uint16_t port = server.start();
  const std::string host = config.bind_addr.substr(0, config.bind_addr.rfind(':'));
  out << "serving project '" << project.name << "' (" << project.items.size() << " items) on http://"
      << host << ":" << port << "  (WebSocket: /ws, health: /healthz)" << std::endl;

  std::thread io([&] { server.run(options.threads); });
  while (!shutdown_requested()) std::this_thread::sleep_for(std::chrono::milliseconds(50));
  spdlog::info("shutting down");
  server.stop();
  io.join();
  reset_shutdown();
  return kOk;
}

}  // namespace arstage::cli
