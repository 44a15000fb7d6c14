#include "emolens/service.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "emolens/audio_io.hpp"
#include "emolens/error.hpp"
#include "json.hpp"

namespace emolens::service {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr std::string_view kAnalysisFile = "analysis.json";
constexpr std::string_view kMetaFile = "meta.json";
constexpr std::string_view kPatientFile = "patient.json";
constexpr std::string_view kTranscriptFile = "transcript.words.json";

void write_atomic(const fs::path& path, std::span<const std::uint8_t> bytes) {
  std::ostringstream tmp_name;
  tmp_name << path.filename().string() << ".tmp-" << std::this_thread::get_id();
  const fs::path tmp = path.parent_path() / tmp_name.str();
  audio::write_file(tmp, bytes);
  fs::rename(tmp, path);
}

void write_atomic(const fs::path& path, std::string_view text) {
  write_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string read_text(const fs::path& path) {
  const auto bytes = audio::read_file(path);
  return {bytes.begin(), bytes.end()};
}

json patient_json(const Patient& p) {
  json j;
  j["schema_version"] = pipeline::kSchemaVersion;
  j["id"] = p.id;
  j["display_name"] = p.display_name;
  j["created_at_ms"] = p.created_at_ms;
  return j;
}

json record_json(const SessionRecord& r) {
  json j;
  j["schema_version"] = pipeline::kSchemaVersion;
  j["id"] = r.id;
  j["patient_id"] = r.patient_id;
  j["uploaded_at_ms"] = r.uploaded_at_ms;
  j["audio"] = r.audio_file;
  j["status"] = to_string(r.status);
  j["failure_reason"] = r.status == SessionStatus::kFailed ? json(r.failure_reason) : json(nullptr);
  j["has_transcript"] = r.has_transcript;
  return j;
}

Patient patient_from_json(const json& j) {
  return {j.at("id").get<std::string>(), j.at("display_name").get<std::string>(),
          j.at("created_at_ms").get<std::int64_t>()};
}

SessionStatus status_from_string(const std::string& s) {
  if (s == "ready") return SessionStatus::kReady;
  if (s == "failed") return SessionStatus::kFailed;
  return SessionStatus::kProcessing;
}

SessionRecord record_from_json(const json& j) {
  SessionRecord r;
  r.id = j.at("id").get<std::string>();
  r.patient_id = j.at("patient_id").get<std::string>();
  r.uploaded_at_ms = j.at("uploaded_at_ms").get<std::int64_t>();
  r.audio_file = j.at("audio").get<std::string>();
  r.status = status_from_string(j.at("status").get<std::string>());
  if (const auto& reason = j.at("failure_reason"); reason.is_string()) r.failure_reason = reason.get<std::string>();
  r.has_transcript = j.at("has_transcript").get<bool>();
  return r;
}

std::string base36(std::uint64_t v) {
  constexpr std::string_view kDigits = "0123456789abcdefghijklmnopqrstuvwxyz";
  std::string out;
  do {
    out.insert(out.begin(), kDigits[v % 36]);
    v /= 36;
  } while (v);
  return out;
}

std::uint64_t id_counter_of(const std::string& id) {
  const auto dash = id.find_last_of('-');
  if (dash == std::string::npos) return 0;
  try {
    return std::stoull(id.substr(dash + 1), nullptr, 16);
  } catch (const std::exception&) {
    return 0;
  }
}

class EmptyTranscriber final : public pipeline::TranscriberInterface {
 public:
  pipeline::TimedTranscript transcribe(const audio::AudioClip&) override { return {}; }
};

}  // namespace

std::string_view to_string(SessionStatus status) noexcept {
  switch (status) {
    case SessionStatus::kProcessing: return "processing";
    case SessionStatus::kReady: return "ready";
    case SessionStatus::kFailed: return "failed";
  }
  return "processing";
}

TranscriberFactory mock_transcriber_factory() {
  return [](const fs::path&, const std::optional<std::string>& sidecar) -> std::unique_ptr<pipeline::TranscriberInterface> {
    if (sidecar) return std::make_unique<pipeline::FixedTranscriber>(pipeline::parse_sidecar(*sidecar));
    return std::make_unique<EmptyTranscriber>();
  };
}

TranscriberFactory no_transcriber_factory() {
  return [](const fs::path&, const std::optional<std::string>&) -> std::unique_ptr<pipeline::TranscriberInterface> {
    return std::make_unique<EmptyTranscriber>();
  };
}

SessionService::SessionService(ServiceConfig config, nn::Model model)
    : config_(std::move(config)), model_(std::move(model)) {
  if (config_.store_dir.empty()) throw Error(ErrorKind::kInvalidArgument, "service: store_dir is required");
  if (!config_.transcriber) config_.transcriber = mock_transcriber_factory();
  fs::create_directories(config_.store_dir / "patients");
  id_counter_ = config_.id_seed;
  reload();
  if (config_.deferred_processing) {
    worker_ = std::jthread([this](std::stop_token stop) { worker_loop(stop); });
  }
}

SessionService::~SessionService() {
  if (worker_.joinable()) {
    worker_.request_stop();
    queue_cv_.notify_all();
  }
}

fs::path SessionService::patient_dir(const std::string& patient_id) const {
  return config_.store_dir / "patients" / patient_id;
}

fs::path SessionService::session_dir(const SessionRecord& record) const {
  return patient_dir(record.patient_id) / "sessions" / record.id;
}

std::int64_t SessionService::now_ms() const {
  if (config_.clock) return config_.clock();
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::string SessionService::next_id(char prefix) {
  const auto stamp = static_cast<std::uint64_t>(std::max<std::int64_t>(0, now_ms()));
  std::lock_guard lock(id_mutex_);
  char counter[24];
  std::snprintf(counter, sizeof(counter), "%06llx", static_cast<unsigned long long>(id_counter_++));
  return std::string(1, prefix) + "-" + base36(stamp) + "-" + counter;
}

std::mutex& SessionService::patient_mutex(const std::string& patient_id) {
  std::unique_lock lock(index_mutex_);
  auto& slot = patient_locks_[patient_id];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

void SessionService::reload() {
  const fs::path root = config_.store_dir / "patients";
  std::vector<std::string> pending;
  std::uint64_t max_counter = 0;
  bool any = false;
  for (const auto& pdir : fs::directory_iterator(root)) {
    if (!pdir.is_directory() || !fs::exists(pdir.path() / kPatientFile)) continue;
    const auto patient = patient_from_json(json::parse(read_text(pdir.path() / kPatientFile)));
    max_counter = std::max(max_counter, id_counter_of(patient.id));
    any = true;
    patients_[patient.id] = patient;
    const fs::path sroot = pdir.path() / "sessions";
    if (!fs::exists(sroot)) continue;
    for (const auto& sdir : fs::directory_iterator(sroot)) {
      if (!sdir.is_directory() || !fs::exists(sdir.path() / kMetaFile)) continue;
      SessionEntry entry{record_from_json(json::parse(read_text(sdir.path() / kMetaFile))), nullptr};
      max_counter = std::max(max_counter, id_counter_of(entry.record.id));
      if (entry.record.status == SessionStatus::kReady) {
        entry.analysis_json = std::make_shared<const std::string>(read_text(sdir.path() / kAnalysisFile));
      } else if (entry.record.status == SessionStatus::kProcessing) {
        pending.push_back(entry.record.id);
      }
      sessions_[entry.record.id] = std::move(entry);
    }
  }
  if (any) id_counter_ = std::max(id_counter_, max_counter + 1);
  // Sessions interrupted mid-analysis are analysed again.
  for (const auto& id : pending) {
    if (config_.deferred_processing) {
      queue_.push_back(id);
    } else {
      process(id);
    }
  }
}

Patient SessionService::create_patient(const std::string& display_name) {
  if (display_name.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw Error(ErrorKind::kInvalidArgument, "display_name must not be blank");
  }
  Patient p;
  p.display_name = display_name;
  p.created_at_ms = now_ms();
  std::unique_lock lock(index_mutex_);
  do {
    p.id = next_id('p');
  } while (patients_.count(p.id));
  fs::create_directories(patient_dir(p.id) / "sessions");
  write_atomic(patient_dir(p.id) / kPatientFile, patient_json(p).dump(2) + "\n");
  patients_[p.id] = p;
  return p;
}

std::vector<Patient> SessionService::list_patients() const {
  std::shared_lock lock(index_mutex_);
  std::vector<Patient> out;
  for (const auto& [id, p] : patients_) out.push_back(p);
  return out;
}

std::vector<SessionRecord> SessionService::list_sessions(const std::string& patient_id) const {
  std::shared_lock lock(index_mutex_);
  if (!patients_.count(patient_id)) throw Error(ErrorKind::kUnknownPatient, "no patient '" + patient_id + "'");
  std::vector<SessionRecord> out;
  for (const auto& [id, entry] : sessions_) {
    if (entry.record.patient_id == patient_id) out.push_back(entry.record);
  }
  return out;
}

SessionRecord SessionService::upload_session(const std::string& patient_id, std::span<const std::uint8_t> wav_bytes,
                                             const std::optional<std::string>& sidecar_json) {
  {
    std::shared_lock lock(index_mutex_);
    if (!patients_.count(patient_id)) throw Error(ErrorKind::kUnknownPatient, "no patient '" + patient_id + "'");
  }
  try {
    audio::parse_wav(wav_bytes);
  } catch (const Error& e) {
    throw Error(ErrorKind::kMalformedAudio, e.what());
  }

  SessionRecord record;
  {
    std::lock_guard patient_lock(patient_mutex(patient_id));
    record.patient_id = patient_id;
    record.uploaded_at_ms = now_ms();
    record.has_transcript = sidecar_json.has_value();
    {
      std::shared_lock lock(index_mutex_);
      do {
        record.id = next_id('s');
      } while (sessions_.count(record.id));
    }
    const fs::path dir = session_dir(record);
    fs::create_directories(dir);
    write_atomic(dir / record.audio_file, wav_bytes);
    if (sidecar_json) write_atomic(dir / kTranscriptFile, *sidecar_json);
    write_atomic(dir / kMetaFile, record_json(record).dump(2) + "\n");
    std::unique_lock lock(index_mutex_);
    sessions_[record.id] = SessionEntry{record, nullptr};
  }

  if (config_.deferred_processing) {
    {
      std::lock_guard lock(queue_mutex_);
      queue_.push_back(record.id);
    }
    queue_cv_.notify_one();
  } else {
    process(record.id);
  }
  return get_session(record.id);
}

void SessionService::process(const std::string& session_id) {
  const SessionRecord record = get_session(session_id);
  const fs::path dir = session_dir(record);
  try {
    const auto clip = audio::read_wav_file(dir / record.audio_file);
    std::optional<std::string> sidecar;
    if (record.has_transcript) sidecar = read_text(dir / kTranscriptFile);
    auto asr = config_.transcriber(dir / record.audio_file, sidecar);
    const auto analysis = pipeline::analyze(clip, model_, *asr, config_.analyze);
    auto text = std::make_shared<const std::string>(pipeline::to_json(analysis));
    write_atomic(dir / kAnalysisFile, *text);
    finish(session_id, SessionStatus::kReady, {}, std::move(text));
  } catch (const std::exception& e) {
    finish(session_id, SessionStatus::kFailed, e.what(), nullptr);
  }
}

void SessionService::finish(const std::string& session_id, SessionStatus status, std::string reason,
                            std::shared_ptr<const std::string> analysis) {
  SessionRecord record = get_session(session_id);
  std::lock_guard patient_lock(patient_mutex(record.patient_id));
  record.status = status;
  record.failure_reason = std::move(reason);
  write_atomic(session_dir(record) / kMetaFile, record_json(record).dump(2) + "\n");
  std::unique_lock lock(index_mutex_);
  sessions_[session_id] = SessionEntry{record, std::move(analysis)};
}

SessionRecord SessionService::get_session(const std::string& session_id) const {
  std::shared_lock lock(index_mutex_);
  const auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw Error(ErrorKind::kNotFound, "no session '" + session_id + "'");
  return it->second.record;
}

std::string SessionService::get_analysis(const std::string& session_id, std::optional<EmotionSet> filter) const {
  std::shared_ptr<const std::string> analysis;
  {
    std::shared_lock lock(index_mutex_);
    const auto it = sessions_.find(session_id);
    if (it == sessions_.end()) throw Error(ErrorKind::kNotFound, "no session '" + session_id + "'");
    const auto& record = it->second.record;
    if (record.status == SessionStatus::kProcessing) {
      throw Error(ErrorKind::kNotReady, "session '" + session_id + "' is still processing");
    }
    if (record.status == SessionStatus::kFailed) throw Error(ErrorKind::kAnalysisFailed, record.failure_reason);
    analysis = it->second.analysis_json;
  }
  if (!filter || *filter == EmotionSet::all()) return *analysis;
  return pipeline::to_json(pipeline::filter_view(pipeline::analysis_from_json(*analysis), *filter));
}

std::vector<std::uint8_t> SessionService::get_audio(const std::string& session_id) const {
  const auto record = get_session(session_id);
  return audio::read_file(session_dir(record) / record.audio_file);
}

void SessionService::wait_idle() {
  std::unique_lock lock(queue_mutex_);
  idle_cv_.wait(lock, [this] { return queue_.empty() && in_flight_ == 0; });
}

void SessionService::worker_loop(std::stop_token stop) {
  while (true) {
    std::string id;
    {
      std::unique_lock lock(queue_mutex_);
      if (!queue_cv_.wait(lock, stop, [this] { return !queue_.empty(); })) return;
      id = std::move(queue_.front());
      queue_.pop_front();
      ++in_flight_;
    }
    process(id);
    {
      std::lock_guard lock(queue_mutex_);
      --in_flight_;
    }
    idle_cv_.notify_all();
  }
}

std::string to_json(const Patient& patient) { return patient_json(patient).dump(); }

std::string to_json(const SessionRecord& record) { return record_json(record).dump(); }

std::string to_json(std::span<const Patient> patients) {
  json j;
  j["schema_version"] = pipeline::kSchemaVersion;
  j["patients"] = json::array();
  for (const auto& p : patients) j["patients"].push_back(patient_json(p));
  return j.dump();
}

std::string to_json(std::span<const SessionRecord> records) {
  json j;
  j["schema_version"] = pipeline::kSchemaVersion;
  j["sessions"] = json::array();
  for (const auto& r : records) j["sessions"].push_back(record_json(r));
  return j.dump();
}

std::string palette_json() {
  json j;
  j["schema_version"] = pipeline::kSchemaVersion;
  json palette;
  for (Emotion e : kAllEmotions) palette[std::string(to_string(e))] = palette_color(e);
  j["palette"] = std::move(palette);
  j["labels"] = json::array();
  for (Emotion e : kAllEmotions) j["labels"].push_back(to_string(e));
  return j.dump();
}

}  // namespace emolens::service
