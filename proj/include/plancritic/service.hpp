#pragma once

// HTTP session service for interactive refinement. Bodies are JSON.

#include <filesystem>
#include <memory>
#include <string>

#include <json.hpp>

#include "plancritic/engine.hpp"

namespace plancritic {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  EngineConfig engine;
  std::filesystem::path pack_root = default_pack_root();
};

nlohmann::json session_view(const Session& session, const PhraseTable& phrases);

class SessionService {
 public:
  explicit SessionService(ServiceConfig config);
  ~SessionService();
  SessionService(const SessionService&) = delete;
  SessionService& operator=(const SessionService&) = delete;

  // Binds and serves on a background thread; returns the bound port.
  // Throws std::runtime_error when the port cannot be bound.
  int start();
  // Binds and serves on the calling thread until stop().
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace plancritic
