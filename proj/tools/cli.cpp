#include "cli.hpp"

#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "emolens/audio_io.hpp"
#include "emolens/corpus.hpp"
#include "emolens/error.hpp"
#include "emolens/evalmetrics.hpp"
#include "emolens/features.hpp"
#include "emolens/fixtures.hpp"
#include "emolens/http_server.hpp"
#include "emolens/nn.hpp"
#include "emolens/pipeline.hpp"
#include "emolens/service.hpp"

namespace emolens::cli {

namespace fs = std::filesystem;

namespace {

struct TrainArgs {
  std::string manifest;
  std::string arch = "dnn";
  std::size_t epochs = 600;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  double train_fraction = 0.7;
  std::uint64_t seed = 0;
  std::string out;
  std::string loss_csv;
  std::string lexicon;
  bool verbose = false;
};

struct EvalArgs {
  std::string model;
  std::string manifest;
  std::string split = "test";
  double train_fraction = 0.7;
  std::uint64_t seed = 0;
  std::string format = "text";
  std::string out;
  std::string lexicon;
  bool confusion = false;
};

struct AnalyzeArgs {
  std::string model;
  std::string wav;
  std::string sidecar;
  std::string emotions;
  std::string lexicon;
  std::string out;
};

struct FixturesArgs {
  std::string out_dir;
  fixtures::FixtureOptions options;
};

struct ServeArgs {
  std::string model;
  std::string store;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string transcriber = "mock";
  std::string static_dir;
  std::uint64_t id_seed = 0;
  bool deferred = false;
};

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kEmptyClip:
    case ErrorKind::kTranscriberUnavailable:
    case ErrorKind::kInvalidTimings:
    case ErrorKind::kAnalysisFailed: return kExitAnalysis;
    default: return kExitData;
  }
}

features::Lexicon lexicon_from(const std::string& path) {
  return path.empty() ? features::Lexicon::builtin() : features::Lexicon::load(path);
}

void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
  if (out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(out_path, std::ios::trunc | std::ios::binary);
  if (!f) throw Error(ErrorKind::kIo, "cannot write " + out_path);
  f << text;
}

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

int cmd_train(const TrainArgs& args, std::ostream& out, std::ostream& err) {
  const auto lexicon = lexicon_from(args.lexicon);
  const features::FeatureConfig config;
  const auto arch = nn::arch_from_string(args.arch);
  const auto entries = corpus::load_manifest(args.manifest);
  const auto split = corpus::stratified_split(entries, args.train_fraction, args.seed);

  const std::size_t width = pipeline::feature_width(arch, config, lexicon);
  nn::ModelSpec spec;
  switch (arch) {
    case nn::Arch::kDnn: spec = nn::default_dnn_spec(width); break;
    case nn::Arch::kCnn: spec = nn::default_cnn_spec(width); break;
    case nn::Arch::kFused: spec = nn::default_fused_spec(2 * config.num_columns(), lexicon.size()); break;
  }
  const auto examples = pipeline::build_examples(split.train, args.manifest, spec, config, lexicon);

  nn::TrainConfig tc;
  tc.epochs = args.epochs;
  tc.batch_size = args.batch_size;
  tc.learning_rate = args.learning_rate;
  tc.seed = args.seed;
  nn::EpochCallback progress;
  if (args.verbose) {
    progress = [&err](std::size_t epoch, double loss) { err << "epoch " << epoch << " loss " << loss << "\n"; };
  }
  const auto result = nn::train(examples, spec, tc, progress);
  nn::save_model(result.model, args.out);
  if (!args.loss_csv.empty()) emit(nn::loss_history_csv(result.loss_history), args.loss_csv, out);

  out << "trained " << nn::to_string(arch) << " on " << examples.size() << " clips for " << args.epochs
      << " epochs (seed " << args.seed << "), final loss " << result.loss_history.back() << "\n"
      << "model written to " << args.out << "\n";
  return kExitOk;
}

int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream&) {
  const auto lexicon = lexicon_from(args.lexicon);
  const features::FeatureConfig config;
  const auto model = nn::load_model(args.model);
  const auto entries = corpus::load_manifest(args.manifest);

  std::vector<corpus::ManifestEntry> chosen;
  if (args.split == "all") {
    chosen = entries;
  } else {
    auto split = corpus::stratified_split(entries, args.train_fraction, args.seed);
    chosen = args.split == "train" ? std::move(split.train) : std::move(split.test);
  }
  const auto examples = pipeline::build_examples(chosen, args.manifest, model.spec, config, lexicon);

  std::vector<Emotion> predicted;
  std::vector<Emotion> truth;
  for (const auto& ex : examples) {
    predicted.push_back(nn::predict_label(model, ex.input));
    truth.push_back(ex.label);
  }
  const auto matrix = metrics::confusion(predicted, truth);
  const std::array<metrics::ErrorColumn, 1> columns = {
      metrics::ErrorColumn{upper(nn::to_string(model.spec.arch)), metrics::per_emotion_error(matrix)}};

  std::string report;
  if (args.format == "csv") {
    report = metrics::render_error_csv(columns);
  } else if (args.format == "json") {
    report = metrics::render_error_json(columns);
  } else {
    std::ostringstream head;
    head << "# split=" << args.split << " entries=" << examples.size() << " seed=" << args.seed
         << " accuracy=" << metrics::overall_accuracy(matrix) << "\n";
    report = head.str() + metrics::render_error_table(columns);
  }
  if (args.confusion) report += "\n" + metrics::render_confusion(matrix);
  emit(report, args.out, out);
  return kExitOk;
}

int cmd_analyze(const AnalyzeArgs& args, std::ostream& out, std::ostream&) {
  const auto lexicon = lexicon_from(args.lexicon);
  const auto model = nn::load_model(args.model);
  const auto clip = audio::read_wav_file(args.wav);

  fs::path sidecar = args.sidecar.empty() ? pipeline::MockTranscriber::sidecar_for(args.wav) : fs::path(args.sidecar);
  std::unique_ptr<pipeline::TranscriberInterface> asr;
  if (args.sidecar.empty() && !fs::exists(sidecar)) {
    asr = std::make_unique<pipeline::FixedTranscriber>(pipeline::TimedTranscript{});
  } else {
    asr = std::make_unique<pipeline::MockTranscriber>(sidecar);
  }

  pipeline::AnalyzeOptions options;
  options.lexicon = &lexicon;
  auto analysis = pipeline::analyze(clip, model, *asr, options);
  if (!args.emotions.empty()) analysis = pipeline::filter_view(analysis, pipeline::parse_emotion_list(args.emotions));
  emit(pipeline::to_json(analysis) + "\n", args.out, out);
  return kExitOk;
}

int cmd_fixtures(const FixturesArgs& args, std::ostream& out, std::ostream&) {
  const auto set = fixtures::generate_fixtures(args.out_dir, args.options);
  out << "wrote " << set.entries.size() << " clips, manifest " << set.manifest.string() << ", session "
      << set.session_wav.string() << "\n";
  return kExitOk;
}

service::HttpServer* g_server = nullptr;

extern "C" void handle_stop_signal(int) {
  if (g_server) g_server->stop();
}

int cmd_serve(const ServeArgs& args, std::ostream& out, std::ostream& err) {
  service::ServiceConfig config;
  config.store_dir = args.store;
  config.id_seed = args.id_seed;
  config.deferred_processing = args.deferred;
  config.transcriber =
      args.transcriber == "none" ? service::no_transcriber_factory() : service::mock_transcriber_factory();
  service::SessionService svc(config, nn::load_model(args.model));
  service::HttpServer server(svc);
  if (!args.static_dir.empty()) server.mount_static(args.static_dir);
  const int port = server.bind(args.host, args.port);
  if (port < 0) {
    err << "error: cannot bind " << args.host << ":" << args.port << "\n";
    return kExitData;
  }
  out << "serving on http://" << args.host << ":" << port << " (store " << args.store << ")" << std::endl;
  g_server = &server;
  std::signal(SIGINT, handle_stop_signal);
  std::signal(SIGTERM, handle_stop_signal);
  server.listen_after_bind();
  g_server = nullptr;
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Speech emotion analysis: training, evaluation, session analysis and serving"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Train a classifier on the train split of a manifest");
  t->add_option("--manifest", train.manifest, "Manifest CSV (filepath,emotion,actor_id,dataset)")->required();
  t->add_option("--arch", train.arch, "dnn | cnn | fused")->check(CLI::IsMember({"dnn", "cnn", "fused"}));
  t->add_option("--epochs", train.epochs)->check(CLI::PositiveNumber);
  t->add_option("--batch-size", train.batch_size)->check(CLI::PositiveNumber);
  t->add_option("--learning-rate", train.learning_rate)->check(CLI::PositiveNumber);
  t->add_option("--train-fraction", train.train_fraction)->check(CLI::Range(0.01, 0.99));
  t->add_option("--seed", train.seed, "Seeds the split, initialisation and shuffling");
  t->add_option("--out", train.out, "Model file to write")->required();
  t->add_option("--loss-csv", train.loss_csv, "Write the epoch,loss history here");
  t->add_option("--lexicon", train.lexicon, "Affect lexicon file (FUSED)");
  t->add_flag("--verbose", train.verbose, "Print one loss line per epoch to stderr");

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "Per-emotion error table for a model on a manifest split");
  e->add_option("--model", eval.model)->required();
  e->add_option("--manifest", eval.manifest)->required();
  e->add_option("--split", eval.split, "train | test | all")->check(CLI::IsMember({"train", "test", "all"}));
  e->add_option("--train-fraction", eval.train_fraction)->check(CLI::Range(0.01, 0.99));
  e->add_option("--seed", eval.seed, "Split seed (use the one given to train)");
  e->add_option("--format", eval.format, "text | csv | json")->check(CLI::IsMember({"text", "csv", "json"}));
  e->add_option("--out", eval.out);
  e->add_option("--lexicon", eval.lexicon);
  e->add_flag("--confusion", eval.confusion, "Append the confusion matrix");

  AnalyzeArgs analyze;
  auto* a = app.add_subcommand("analyze", "Analyse one recording and print the session JSON");
  a->add_option("--model", analyze.model)->required();
  a->add_option("--wav", analyze.wav)->required();
  a->add_option("--sidecar", analyze.sidecar, "Transcript .words.json (default: next to the WAV, if present)");
  a->add_option("--emotions", analyze.emotions, "Comma-separated emotion filter");
  a->add_option("--lexicon", analyze.lexicon);
  a->add_option("--out", analyze.out);

  FixturesArgs fx;
  auto* f = app.add_subcommand("fixtures", "Write the synthetic tone corpus, manifest and a test session");
  f->add_option("--out-dir", fx.out_dir)->required();
  f->add_option("--seed", fx.options.seed);
  f->add_option("--clips-per-emotion", fx.options.clips_per_emotion)->check(CLI::PositiveNumber);
  f->add_option("--clip-seconds", fx.options.clip_seconds)->check(CLI::PositiveNumber);
  f->add_option("--session-seconds", fx.options.session_seconds)->check(CLI::PositiveNumber);

  ServeArgs serve;
  auto* s = app.add_subcommand("serve", "Run the HTTP session service");
  s->add_option("--model", serve.model)->required();
  s->add_option("--store", serve.store)->required();
  s->add_option("--host", serve.host);
  s->add_option("--port", serve.port)->check(CLI::Range(0, 65535));
  s->add_option("--transcriber", serve.transcriber, "mock | none")->check(CLI::IsMember({"mock", "none"}));
  s->add_option("--static-dir", serve.static_dir, "Serve a built dashboard bundle from this directory");
  s->add_option("--id-seed", serve.id_seed);
  s->add_flag("--deferred", serve.deferred, "Analyse uploads on a background worker");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& ex) {
    err << "error: " << ex.what() << "\n" << "run with --help for usage\n";
    return kExitUsage;
  }

  try {
    if (*t) return cmd_train(train, out, err);
    if (*e) return cmd_eval(eval, out, err);
    if (*a) return cmd_analyze(analyze, out, err);
    if (*f) return cmd_fixtures(fx, out, err);
    if (*s) return cmd_serve(serve, out, err);
  } catch (const Error& ex) {
    err << "error: " << ex.what() << "\n";
    return exit_code_for(ex.kind());
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace emolens::cli
