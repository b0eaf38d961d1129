#include <csignal>
#include <iostream>

#include "cli.hpp"

namespace {

extern "C" void on_signal(int /*signal*/) { arstage::cli::request_shutdown(); }

}  // namespace

int main(int argc, char** argv) {
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  return arstage::cli::run(argc, argv, std::cout, std::cerr);
}
