#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "cwl/config.hpp"
#include "helpers.hpp"

using namespace cwl;
using testing::error_code_of;
using testing::error_message_of;
namespace fs = std::filesystem;

namespace {

const char* kSmallConfig =
    "# short sessions, small models\n"
    "synth_lead_rest_s = 4\n"
    "synth_task_block_s = 6\n"
    "synth_rest_s = 4\n"
    "synth_eeg_channels = 2\n"
    "synth_fnirs_channels = 2\n"
    "cwt_scales = 16\n"
    "image_h = 32\n"
    "image_w = 32\n"
    "pretrain_samples = 40\n"
    "pretrain_epochs = 2\n"
    "stage1_epochs = 3\n"
    "stage2_epochs = 2\n"
    "elm_hidden = 32\n"
    "melm_layers = 32\n"
    "melm_hidden = 32\n"
    "repeats = 2\n"
    "epoch_pre_s = 1\n"
    "epoch_post_s = 4\n";

fs::path write_config(const fs::path& dir) {
  const fs::path p = dir / "small.cfg";
  std::ofstream(p) << kSmallConfig;
  return p;
}

struct CliResult {
  int exit_code = -1;
  std::string err;
};

CliResult run_cli(const std::string& args, const fs::path& scratch) {
  const fs::path err = scratch / "stderr.txt";
  const std::string cmd = std::string("\"") + CWL_CLI_PATH + "\" " + args + " 2> \"" + err.string() + "\" > /dev/null";
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(err);
  std::stringstream ss;
  ss << in.rdbuf();
  r.err = ss.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

bool same_tree(const fs::path& a, const fs::path& b) {
  std::set<fs::path> names;
  for (const auto& e : fs::recursive_directory_iterator(a))
    if (e.is_regular_file()) names.insert(fs::relative(e.path(), a));
  std::size_t count_b = 0;
  for (const auto& e : fs::recursive_directory_iterator(b))
    if (e.is_regular_file()) ++count_b;
  if (names.size() != count_b || names.empty()) return false;
  for (const auto& n : names) {
    if (!fs::exists(b / n) || slurp(a / n) != slurp(b / n)) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("config keys and values are validated") {
  RunConfig c;
  CHECK(c.seed == 7);
  CHECK(c.subjects == 5);
  CHECK(c.repeats == 5);
  CHECK(error_code_of([&] { c.set("no_such_key", "1"); }) == "UnknownKey");
  CHECK(error_code_of([&] { c.set("stage2_epochs", "ten"); }) == "InvalidConfig");
  CHECK(error_code_of([&] { c.set("models", "tl,svm"); }) == "InvalidConfig");
  c.set("stage2_epochs", " 12 ");
  CHECK(c.cascade_config().stage2.epochs == 12);
  const auto keys = RunConfig::keys();
  for (const char* k : {"seed", "subjects", "repeats", "models", "impute_c", "stage1_lr", "train_fraction"}) {
    CHECK_MESSAGE(std::find(keys.begin(), keys.end(), k) != keys.end(), k);
  }
}

TEST_CASE("config file errors carry the line number") {
  const auto dir = testing::scratch_dir("cli_cfg_errors");
  std::ofstream(dir / "bad.cfg") << "seed = 3\n\n# fine\nbogus = 1\n";
  RunConfig c;
  CHECK(error_code_of([&] { c.load_file(dir / "bad.cfg"); }) == "UnknownKey");
  CHECK(error_message_of([&] { RunConfig().load_file(dir / "bad.cfg"); }).find(":4:") != std::string::npos);
  std::ofstream(dir / "noeq.cfg") << "seed 3\n";
  CHECK(error_code_of([&] { RunConfig().load_file(dir / "noeq.cfg"); }) == "InvalidConfig");
  CHECK(error_code_of([&] { RunConfig().load_file(dir / "absent.cfg"); }) == "MissingFile");
}

TEST_CASE("command-line values override the file, which overrides defaults") {
  const auto dir = testing::scratch_dir("cli_precedence");
  std::ofstream(dir / "a.cfg") << "seed = 11\nrepeats = 3 # trailing comment\n";
  RunConfig c;
  c.load_file(dir / "a.cfg");
  CHECK(c.seed == 11);
  CHECK(c.repeats == 3);
  CHECK(c.subjects == 5);
  c.set("seed", "12");
  CHECK(c.seed == 12);
  CHECK(c.repeats == 3);
}

TEST_CASE("resolved config text loads back to the same settings") {
  const auto dir = testing::scratch_dir("cli_roundtrip");
  RunConfig c;
  c.load_file(write_config(dir));
  c.set("seed", "99");
  std::ofstream(dir / "resolved.cfg") << c.to_text();
  RunConfig d;
  d.load_file(dir / "resolved.cfg");
  CHECK(d.to_text() == c.to_text());
  CHECK(d.seed == 99);
}

TEST_CASE("derived paths follow the output directory") {
  RunConfig c;
  c.out = "x";
  CHECK(c.sessions() == fs::path("x/sessions"));
  CHECK(c.features() == fs::path("x/features"));
  CHECK(c.surgtlx() == fs::path("x/sessions/surgtlx.csv"));
  c.sessions_dir = "s";
  CHECK(c.surgtlx() == fs::path("s/surgtlx.csv"));
  CHECK(c.subject_id(0) == "S01");
  CHECK(c.subject_id(11) == "S12");
  CHECK(c.synth_for(1).subject_id == "S02");
  CHECK(c.synth_for(1).seed == c.seed);
}

TEST_CASE("usage errors exit with status 2") {
  const auto dir = testing::scratch_dir("cli_usage");
  const std::string out = " --out \"" + (dir / "o").string() + "\"";
  auto r = run_cli("generate --subjects 0" + out, dir);
  CHECK(r.exit_code == 2);
  CHECK(r.err.rfind("ERROR Usage:", 0) == 0);
  r = run_cli("generate --no-such-flag" + out, dir);
  CHECK(r.exit_code == 2);
  r = run_cli("generate --set bogus=1" + out, dir);
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("ERROR UnknownKey:") != std::string::npos);
  r = run_cli("train-eval --models svm" + out, dir);
  CHECK(r.exit_code == 2);
  r = run_cli("", dir);
  CHECK(r.exit_code == 2);
}

TEST_CASE("runtime errors exit with status 1") {
  const auto dir = testing::scratch_dir("cli_runtime");
  const auto r = run_cli("study --out \"" + (dir / "empty").string() + "\"", dir);
  CHECK(r.exit_code == 1);
  CHECK(r.err.rfind("ERROR ", 0) == 0);
}

TEST_CASE("generate is byte-identical for one seed") {
  const auto dir = testing::scratch_dir("cli_generate");
  const std::string cfg = " --config \"" + write_config(dir).string() + "\"";
  REQUIRE(run_cli("generate --subjects 2 --seed 4 --out \"" + (dir / "a").string() + "\"" + cfg, dir).exit_code == 0);
  REQUIRE(run_cli("generate --subjects 2 --seed 4 --out \"" + (dir / "b").string() + "\"" + cfg, dir).exit_code == 0);
  REQUIRE(run_cli("generate --subjects 2 --seed 5 --out \"" + (dir / "c").string() + "\"" + cfg, dir).exit_code == 0);
  CHECK(same_tree(dir / "a", dir / "b"));
  CHECK_FALSE(same_tree(dir / "a", dir / "c"));
  for (const char* f : {"S01/eeg.csv", "S02/pupil.csv", "S01/events.csv", "surgtlx.csv"}) {
    CHECK_MESSAGE(fs::exists(dir / "a/sessions" / f), f);
  }
}

TEST_CASE("end-to-end run over every subcommand") {
  const auto dir = testing::scratch_dir("cli_e2e");
  const std::string common =
      " --seed 3 --out \"" + (dir / "o").string() + "\" --config \"" + write_config(dir).string() + "\"";
  REQUIRE(run_cli("generate --subjects 2" + common, dir).exit_code == 0);
  REQUIRE(run_cli("preprocess" + common, dir).exit_code == 0);
  CHECK(fs::exists(dir / "o/features/S01.csv"));
  CHECK(fs::exists(dir / "o/features/S02.csv"));
  CHECK(lines_of(dir / "o/features/preprocess_log.txt").size() == 2);

  const auto r = run_cli("train-eval --models elm,melm,cnn1d" + common, dir);
  REQUIRE(r.exit_code == 0);
  std::set<std::string> models;
  for (const auto& line : lines_of(dir / "o/report/table.csv")) {
    models.insert(line.substr(0, line.find(',')));
  }
  CHECK(models == std::set<std::string>{"model", "elm", "melm", "cnn1d"});
  CHECK_FALSE(fs::exists(dir / "o/report/stage1.ckpt"));
  CHECK(fs::exists(dir / "o/report/config_resolved.txt"));

  REQUIRE(run_cli("study" + common, dir).exit_code == 0);
  CHECK(fs::exists(dir / "o/study/surgtlx_scores.csv"));
  CHECK(fs::exists(dir / "o/study/hemo_summary.csv"));

  REQUIRE(run_cli("dump-scalograms --count 2" + common, dir).exit_code == 0);
  std::size_t pgm = 0;
  for (const auto& e : fs::directory_iterator(dir / "o/scalograms")) pgm += e.path().extension() == ".pgm";
  CHECK(pgm == 4);
}

}  // TEST_SUITE
