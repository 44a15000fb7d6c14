#include "emolens/http_server.hpp"

#include "emolens/error.hpp"
#include "httplib.h"
#include "json.hpp"

namespace emolens::service {

namespace {

using json = nlohmann::ordered_json;

constexpr const char* kJson = "application/json";

void send_error(httplib::Response& res, ErrorKind kind, const std::string& message) {
  json j;
  j["schema_version"] = pipeline::kSchemaVersion;
  j["error"]["code"] = to_string(kind);
  j["error"]["message"] = message;
  res.status = http_status_for(kind);
  res.set_content(j.dump(), kJson);
}

template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const Error& e) {
      send_error(res, e.kind(), e.what());
    } catch (const json::exception& e) {
      send_error(res, ErrorKind::kInvalidArgument, e.what());
    } catch (const std::exception& e) {
      json j;
      j["schema_version"] = pipeline::kSchemaVersion;
      j["error"]["code"] = "Internal";
      j["error"]["message"] = e.what();
      res.status = 500;
      res.set_content(j.dump(), kJson);
    }
  };
}

}  // namespace

int http_status_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kNotFound:
    case ErrorKind::kUnknownPatient: return 404;
    case ErrorKind::kNotReady: return 409;
    case ErrorKind::kAnalysisFailed: return 422;
    case ErrorKind::kIo: return 500;
    default: return 400;
  }
}

struct HttpServer::Impl {
  SessionService& service;
  httplib::Server server;

  explicit Impl(SessionService& s) : service(s) { routes(); }

  void routes() {
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});

    server.Post("/patients", guarded([this](const httplib::Request& req, httplib::Response& res) {
      std::string name;
      if (!req.body.empty()) {
        const auto body = json::parse(req.body);
        if (body.contains("display_name")) name = body.at("display_name").get<std::string>();
      }
      if (name.empty()) throw Error(ErrorKind::kInvalidArgument, "display_name is required");
      res.status = 201;
      res.set_content(to_json(service.create_patient(name)), kJson);
    }));

    server.Get("/patients", guarded([this](const httplib::Request&, httplib::Response& res) {
      const auto patients = service.list_patients();
      res.set_content(to_json(std::span<const Patient>(patients)), kJson);
    }));

    server.Get(R"(/patients/([^/]+)/sessions)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto sessions = service.list_sessions(req.matches[1]);
      res.set_content(to_json(std::span<const SessionRecord>(sessions)), kJson);
    }));

    server.Post(R"(/patients/([^/]+)/sessions)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      std::string audio;
      std::optional<std::string> transcript;
      if (req.is_multipart_form_data()) {
        if (!req.has_file("audio")) throw Error(ErrorKind::kMalformedAudio, "multipart field 'audio' is missing");
        audio = req.get_file_value("audio").content;
        if (req.has_file("transcript")) transcript = req.get_file_value("transcript").content;
      } else {
        audio = req.body;
      }
      const auto record = service.upload_session(
          req.matches[1], std::span(reinterpret_cast<const std::uint8_t*>(audio.data()), audio.size()), transcript);
      res.status = 201;
      res.set_content(to_json(record), kJson);
    }));

    server.Get(R"(/sessions/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      res.set_content(to_json(service.get_session(req.matches[1])), kJson);
    }));

    server.Get(R"(/sessions/([^/]+)/analysis)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      std::optional<EmotionSet> filter;
      if (req.has_param("emotions")) filter = pipeline::parse_emotion_list(req.get_param_value("emotions"));
      res.set_content(service.get_analysis(req.matches[1], filter), kJson);
    }));

    server.Get(R"(/sessions/([^/]+)/audio)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto bytes = service.get_audio(req.matches[1]);
      res.set_content(std::string(bytes.begin(), bytes.end()), "audio/wav");
    }));

    server.Get("/palette", guarded([](const httplib::Request&, httplib::Response& res) {
      res.set_content(palette_json(), kJson);
    }));
  }
};

HttpServer::HttpServer(SessionService& service) : impl_(std::make_unique<Impl>(service)) {}

HttpServer::~HttpServer() { stop(); }

void HttpServer::mount_static(const std::filesystem::path& dir) { impl_->server.set_mount_point("/", dir.string()); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen_after_bind() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

bool HttpServer::is_running() const { return impl_->server.is_running(); }

}  // namespace emolens::service
