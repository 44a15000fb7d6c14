#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "json.hpp"
#include "emolens/audio_io.hpp"
#include "emolens/nn.hpp"
#include "support/test_support.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "emolens");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  Result r;
  r.code = emolens::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> table_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

// Shared fixture corpus and trained DNN, built once per process.
struct Trained {
  fs::path dir;
  fs::path manifest;
  fs::path model;
};

const Trained& trained() {
  static const Trained t = [] {
    Trained out;
    out.dir = emolens::testing::scratch_dir("cli");
    REQUIRE(run({"fixtures", "--out-dir", (out.dir / "fx").string()}).code == 0);
    out.manifest = out.dir / "fx" / "manifest.csv";
    out.model = out.dir / "dnn.emov";
    const auto r = run({"train", "--manifest", out.manifest.string(), "--seed", "3", "--out", out.model.string(),
                        "--loss-csv", (out.dir / "loss.csv").string()});
    REQUIRE(r.code == 0);
    return out;
  }();
  return t;
}

}  // namespace

TEST_CASE("usage errors exit 2") {
  CHECK(run({}).code == 2);
  CHECK(run({"train"}).code == 2);
  CHECK(run({"train", "--manifest", "m.csv", "--out", "x", "--arch", "rnn"}).code == 2);
  CHECK(run({"eval", "--model", "m", "--manifest", "x", "--split", "validation"}).code == 2);
  CHECK(run({"bogus"}).code == 2);
  CHECK(run({"analyze", "-m", "x"}).code == 2);
  const auto help = run({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("fixtures") != std::string::npos);
}

TEST_CASE("data errors exit 3") {
  const auto dir = emolens::testing::scratch_dir("cli_data_errors");
  CHECK(run({"train", "--manifest", (dir / "missing.csv").string(), "--out", (dir / "m").string()}).code == 3);
  std::ofstream(dir / "bad.csv") << "filepath,emotion,actor_id,dataset\na.wav,joyful,01,other\n";
  const auto r = run({"train", "--manifest", (dir / "bad.csv").string(), "--out", (dir / "m").string()});
  CHECK(r.code == 3);
  CHECK(r.err.find("joyful") != std::string::npos);
  std::ofstream(dir / "garbage.emov") << "nope";
  CHECK(run({"analyze", "--model", (dir / "garbage.emov").string(), "--wav", "x.wav"}).code == 3);
}

TEST_CASE("train then eval on the training split") {
  const auto& t = trained();
  const auto loss = slurp(t.dir / "loss.csv");
  CHECK(loss.rfind("epoch,loss\n1,", 0) == 0);
  CHECK(table_lines(loss).size() == 601);

  const auto r = run({"eval", "--model", t.model.string(), "--manifest", t.manifest.string(), "--split", "train",
                      "--seed", "3"});
  REQUIRE(r.code == 0);
  const auto lines = table_lines(r.out);
  REQUIRE(lines.size() == 10);
  CHECK(lines[0].rfind("# split=train entries=112 seed=3 accuracy=", 0) == 0);
  CHECK(lines[1] == "Emotion\tDNN (Err %)");
  for (std::size_t i = 2; i < lines.size(); ++i) {
    const auto tab = lines[i].find('\t');
    REQUIRE(tab != std::string::npos);
    CHECK(std::stoi(lines[i].substr(tab + 1)) <= 5);
  }
  std::ifstream golden(std::string(EMOLENS_GOLDEN_DIR) + "/fixture_eval_train.txt");
  std::stringstream expected;
  expected << golden.rdbuf();
  CHECK(r.out == expected.str());
}

TEST_CASE("training is reproducible") {
  const auto& t = trained();
  const auto again = t.dir / "dnn_again.emov";
  REQUIRE(run({"train", "--manifest", t.manifest.string(), "--seed", "3", "--out", again.string()}).code == 0);
  CHECK(slurp(again) == slurp(t.model));
}

TEST_CASE("eval of an untrained model") {
  const auto& t = trained();
  const auto zero = t.dir / "zero.emov";
  emolens::nn::save_model(emolens::nn::zero_model(emolens::nn::default_dnn_spec(28)), zero);
  const auto r = run({"eval", "--model", zero.string(), "--manifest", t.manifest.string(), "--split", "all"});
  REQUIRE(r.code == 0);
  const auto lines = table_lines(r.out);
  REQUIRE(lines.size() == 10);
  // Every prediction is neutral; one eighth of the clips really are neutral.
  CHECK(lines[2] == "Neutral\t88");
  for (std::size_t i = 3; i < lines.size(); ++i) CHECK(lines[i].substr(lines[i].find('\t') + 1) == "\xE2\x80\x94");
}

TEST_CASE("eval output formats") {
  const auto& t = trained();
  const auto csv = run({"eval", "--model", t.model.string(), "--manifest", t.manifest.string(), "--seed", "3",
                        "--format", "csv"});
  REQUIRE(csv.code == 0);
  CHECK(csv.out.rfind("emotion,dnn_err\n", 0) == 0);

  const auto out_file = t.dir / "report.json";
  const auto js = run({"eval", "--model", t.model.string(), "--manifest", t.manifest.string(), "--seed", "3",
                       "--format", "json", "--out", out_file.string()});
  REQUIRE(js.code == 0);
  CHECK(js.out.empty());
  const auto report = json::parse(slurp(out_file));
  CHECK(report["rows"].size() == 8);

  const auto conf = run({"eval", "--model", t.model.string(), "--manifest", t.manifest.string(), "--seed", "3",
                         "--confusion"});
  CHECK(conf.out.find("truth\\pred") != std::string::npos);
}

TEST_CASE("analyze") {
  const auto& t = trained();
  const auto wav = (t.dir / "fx" / "session.wav").string();
  const auto r = run({"analyze", "--model", t.model.string(), "--wav", wav});
  REQUIRE(r.code == 0);
  const auto a = json::parse(r.out);
  CHECK(a["segments"].size() == 10);
  CHECK(a["spans"].size() >= 1);
  CHECK(run({"analyze", "--model", t.model.string(), "--wav", wav}).out == r.out);

  const auto filtered = json::parse(run({"analyze", "--model", t.model.string(), "--wav", wav, "--emotions", "sad"}).out);
  CHECK(filtered["filter"] == json::array({"sad"}));

  // A WAV without a sidecar analyses with an empty transcript.
  const auto lone = t.dir / "lone.wav";
  fs::copy_file(wav, lone, fs::copy_options::overwrite_existing);
  const auto no_words = run({"analyze", "--model", t.model.string(), "--wav", lone.string()});
  REQUIRE(no_words.code == 0);
  CHECK(json::parse(no_words.out)["spans"].empty());

  std::ofstream(t.dir / "overlap.words.json")
      << R"([{"text":"a","start_s":0.0,"end_s":0.5},{"text":"b","start_s":0.4,"end_s":0.8}])";
  CHECK(run({"analyze", "--model", t.model.string(), "--wav", wav, "--sidecar", (t.dir / "overlap.words.json").string()})
            .code == 4);
  CHECK(run({"analyze", "--model", t.model.string(), "--wav", wav, "--sidecar", (t.dir / "absent.words.json").string()})
            .code == 4);
  CHECK(run({"analyze", "--model", t.model.string(), "--wav", (t.dir / "absent.wav").string()}).code == 3);
  CHECK(run({"analyze", "--model", t.model.string(), "--wav", wav, "--emotions", "bored"}).code == 3);

  const auto empty_wav = t.dir / "empty.wav";
  const auto bytes = emolens::audio::write_wav({{}, 16000});
  emolens::audio::write_file(empty_wav, bytes);
  CHECK(run({"analyze", "--model", t.model.string(), "--wav", empty_wav.string()}).code == 4);
}

TEST_CASE("fixtures command") {
  const auto dir = emolens::testing::scratch_dir("cli_fixtures");
  const auto r = run({"fixtures", "--out-dir", dir.string(), "--clips-per-emotion", "2", "--clip-seconds", "0.5",
                      "--session-seconds", "4"});
  REQUIRE(r.code == 0);
  CHECK(fs::exists(dir / "manifest.csv"));
  CHECK(fs::exists(dir / "lexicon.txt"));
  CHECK(fs::exists(dir / "clips" / "surprised_01.wav"));
  CHECK(fs::exists(dir / "clips" / "surprised_01.words.json"));
  CHECK(emolens::audio::read_wav_file(dir / "session.wav").duration_s() == 4.0);
  const auto first = slurp(dir / "clips" / "happy_00.wav");
  REQUIRE(run({"fixtures", "--out-dir", dir.string(), "--clips-per-emotion", "2", "--clip-seconds", "0.5",
               "--session-seconds", "4"}).code == 0);
  CHECK(slurp(dir / "clips" / "happy_00.wav") == first);
}
