#include <csignal>
#include <cstdlib>
#include <iostream>
#include <memory>
#include <string>
#include <thread>

#include "commands.hpp"
#include "facedit/config.hpp"
#include "facedit/engine.hpp"
#include "facedit/log.hpp"
#include "facedit/service.hpp"

namespace facedit::cli {

namespace {

volatile std::sig_atomic_t g_signal = 0;

void on_signal(int sig) { g_signal = sig; }

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

struct ServeArgs {
  std::string bundle;
  std::string gallery;
  std::string host = "127.0.0.1";
  int port = 8080;
  int stream_port = -1;
  std::string log_level = "info";
};

}  // namespace

std::function<int()> add_serve_command(CLI::App& app) {
  auto args = std::make_shared<ServeArgs>();
  args->bundle = env_or("FACEDIT_BUNDLE", "");
  args->gallery = env_or("FACEDIT_GALLERY", "");
  args->port = std::stoi(env_or("FACEDIT_PORT", "8080"));

  auto* cmd = app.add_subcommand("serve", "Serve the HTTP endpoints and the /session stream");
  cmd->add_option("--bundle", args->bundle, "Run directory (env FACEDIT_BUNDLE)");
  cmd->add_option("--gallery", args->gallery, "Appearance PNG directory (env FACEDIT_GALLERY)");
  cmd->add_option("--host", args->host, "Bind address");
  cmd->add_option("--port", args->port, "HTTP port (env FACEDIT_PORT)");
  cmd->add_option("--stream-port", args->stream_port, "Websocket port, default port + 1");
  cmd->add_option("--log-level", args->log_level, "trace|debug|info|warn|error");

  return [cmd, args]() -> int {
    if (!*cmd) return kUsage;
    log::set_level(args->log_level);
    std::shared_ptr<const Engine> engine;
    ServiceOptions opts;
    if (!args->bundle.empty()) {
      engine = Engine::load(args->bundle);
    } else {
      log::warn("no --bundle given: model endpoints answer 503");
      opts.resolution = RunConfig{}.resolution;
    }
    opts.host = args->host;
    opts.port = args->port;
    opts.stream_port = args->stream_port;
    opts.gallery = args->gallery;

    Service service(engine, opts);
    service.start();
    std::cout << "http " << service.port() << " stream " << service.stream_port() << std::endl;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    while (g_signal == 0) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    service.stop();
    return kOk;
  };
}

}  // namespace facedit::cli
