#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "emolens/error.hpp"
#include "emolens/service.hpp"

namespace emolens::service {

// JSON-over-HTTP front for SessionService.
//
//   POST /patients                      {"display_name": "..."}
//   GET  /patients
//   GET  /patients/{id}/sessions
//   POST /patients/{id}/sessions        multipart: "audio" (WAV), optional "transcript" (.words.json)
//   GET  /sessions/{id}
//   GET  /sessions/{id}/analysis[?emotions=happy,sad]
//   GET  /sessions/{id}/audio
//   GET  /palette
//
// Errors come back as {"schema_version":1,"error":{"code":..,"message":..}}.
class HttpServer {
 public:
  explicit HttpServer(SessionService& service);
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Serves a prebuilt dashboard bundle under "/".
  void mount_static(const std::filesystem::path& dir);

  // Binds to `port`, or to a free port when port == 0. Returns the bound port
  // or -1 on failure.
  int bind(const std::string& host, int port);
  // Blocks until stop() is called.
  bool listen_after_bind();
  void stop();
  bool is_running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// HTTP status used for an error kind.
int http_status_for(ErrorKind kind) noexcept;

}  // namespace emolens::service
