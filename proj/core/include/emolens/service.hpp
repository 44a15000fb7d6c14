#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "emolens/emotion.hpp"
#include "emolens/nn.hpp"
#include "emolens/pipeline.hpp"

namespace emolens::service {

enum class SessionStatus : std::uint8_t { kProcessing, kReady, kFailed };

std::string_view to_string(SessionStatus status) noexcept;

struct Patient {
  std::string id;
  std::string display_name;
  std::int64_t created_at_ms = 0;

  friend bool operator==(const Patient&, const Patient&) = default;
};

struct SessionRecord {
  std::string id;
  std::string patient_id;
  std::int64_t uploaded_at_ms = 0;
  std::string audio_file = "audio.wav";  // relative to the session directory
  SessionStatus status = SessionStatus::kProcessing;
  std::string failure_reason;            // set when status == kFailed
  bool has_transcript = false;

  friend bool operator==(const SessionRecord&, const SessionRecord&) = default;
};

// Builds the transcriber for one upload. `sidecar_json` is the transcript
// uploaded with the audio, if any.
using TranscriberFactory = std::function<std::unique_ptr<pipeline::TranscriberInterface>(
    const std::filesystem::path& audio_path, const std::optional<std::string>& sidecar_json)>;

// Uploaded sidecar when present, otherwise an empty transcript.
TranscriberFactory mock_transcriber_factory();
// Never produces words.
TranscriberFactory no_transcriber_factory();

struct ServiceConfig {
  std::filesystem::path store_dir;
  std::uint64_t id_seed = 0;
  bool deferred_processing = false;
  pipeline::AnalyzeOptions analyze;
  TranscriberFactory transcriber = mock_transcriber_factory();
  std::function<std::int64_t()> clock;  // ms since epoch; system clock when empty
};

// Patient/session store with on-disk persistence:
//   <store>/patients/<pid>/patient.json
//   <store>/patients/<pid>/sessions/<sid>/{audio.wav, meta.json, analysis.json, transcript.words.json}
// Every file is written to a temporary name and renamed into place.
class SessionService {
 public:
  SessionService(ServiceConfig config, nn::Model model);
  ~SessionService();

  SessionService(const SessionService&) = delete;
  SessionService& operator=(const SessionService&) = delete;

  // Throws Error(kInvalidArgument) for a blank name.
  Patient create_patient(const std::string& display_name);
  std::vector<Patient> list_patients() const;
  // Throws Error(kUnknownPatient).
  std::vector<SessionRecord> list_sessions(const std::string& patient_id) const;

  // Stores the audio and analyses it (synchronously unless deferred).
  // Throws Error(kUnknownPatient) or Error(kMalformedAudio); analysis
  // failures are recorded on the returned session instead of thrown.
  SessionRecord upload_session(const std::string& patient_id, std::span<const std::uint8_t> wav_bytes,
                               const std::optional<std::string>& sidecar_json = std::nullopt);

  // Throws Error(kNotFound).
  SessionRecord get_session(const std::string& session_id) const;

  // Analysis JSON, optionally with an emotion filter applied. Throws
  // Error(kNotFound), Error(kNotReady) while processing, or
  // Error(kAnalysisFailed) carrying the stored reason.
  std::string get_analysis(const std::string& session_id, std::optional<EmotionSet> filter = std::nullopt) const;

  std::vector<std::uint8_t> get_audio(const std::string& session_id) const;

  // Blocks until the deferred queue is drained.
  void wait_idle();

  const ServiceConfig& config() const noexcept { return config_; }

 private:
  struct SessionEntry {
    SessionRecord record;
    std::shared_ptr<const std::string> analysis_json;
  };

  std::filesystem::path patient_dir(const std::string& patient_id) const;
  std::filesystem::path session_dir(const SessionRecord& record) const;
  std::int64_t now_ms() const;
  std::string next_id(char prefix);
  void reload();
  void process(const std::string& session_id);
  void finish(const std::string& session_id, SessionStatus status, std::string reason,
              std::shared_ptr<const std::string> analysis);
  std::mutex& patient_mutex(const std::string& patient_id);
  void worker_loop(std::stop_token stop);

  ServiceConfig config_;
  nn::Model model_;

  mutable std::shared_mutex index_mutex_;
  std::map<std::string, Patient> patients_;
  std::map<std::string, SessionEntry> sessions_;
  std::map<std::string, std::unique_ptr<std::mutex>> patient_locks_;

  std::mutex id_mutex_;
  std::uint64_t id_counter_ = 0;

  std::mutex queue_mutex_;
  std::condition_variable_any queue_cv_;
  std::condition_variable idle_cv_;
  std::deque<std::string> queue_;
  std::size_t in_flight_ = 0;
  std::jthread worker_;
};

std::string to_json(const Patient& patient);
std::string to_json(const SessionRecord& record);
std::string to_json(std::span<const Patient> patients);
std::string to_json(std::span<const SessionRecord> records);
// {"schema_version":1,"palette":{"neutral":"#9E9E9E",...}}
std::string palette_json();

}  // namespace emolens::service
