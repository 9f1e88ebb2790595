#include <CLI11.hpp>

#include <iostream>
#include <optional>

#include "cwl/commands.hpp"
#include "cwl/error.hpp"

namespace {

bool is_usage_code(const std::string& code) {
  return code == "Usage" || code == "UnknownKey" || code == "InvalidConfig";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multimodal cognitive-workload pipeline"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "key = value config file");
  app.add_option("--seed", seed, "root seed");
  app.add_option("--out", out, "output directory");
  app.add_option("--set", overrides, "override a config key (key=value), repeatable");

  std::optional<int> subjects, repeats, impute_c, count;
  std::optional<double> impute_m;
  std::optional<std::uint64_t> impute_seed;
  std::optional<std::string> models;

  auto* gen = app.add_subcommand("generate", "write synthetic sessions");
  gen->add_option("--subjects", subjects, "number of subjects");

  auto* pre = app.add_subcommand("preprocess", "sessions -> feature windows");
  pre->add_option("--impute-c", impute_c, "FCM clusters");
  pre->add_option("--impute-m", impute_m, "FCM fuzzifier");
  pre->add_option("--impute-seed", impute_seed, "FCM seed");

  auto* te = app.add_subcommand("train-eval", "cascade experiment and baselines");
  te->add_option("--repeats", repeats, "random 70/30 splits");
  te->add_option("--models", models, "comma list of tl, cnn1d, cascade, elm, melm");

  auto* st = app.add_subcommand("study", "SURG-TLX scores and hemodynamic summary");

  auto* dump = app.add_subcommand("dump-scalograms", "write window scalograms as PGM");
  dump->add_option("--count", count, "windows per subject");
  std::optional<std::string> dump_dir;
  dump->add_option("--dir", dump_dir, "image directory (default <out>/scalograms)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "ERROR Usage: " << e.what() << '\n';
    return 2;
  }

  try {
    cwl::RunConfig cfg;
    if (!config_path.empty()) cfg.load_file(config_path);
    for (const std::string& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw cwl::Error("Usage", "--set expects key=value, got '" + kv + "'");
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (seed) cfg.seed = *seed;
    if (out) cfg.out = *out;
    if (subjects) cfg.subjects = *subjects;
    if (repeats) cfg.repeats = *repeats;
    if (models) cfg.set("models", *models);
    if (impute_c) cfg.preprocess.fcm.n_clusters = *impute_c;
    if (impute_m) cfg.preprocess.fcm.fuzzifier = *impute_m;
    if (impute_seed) cfg.impute_seed = *impute_seed;
    if (count) cfg.dump_count = *count;
    if (dump_dir) cfg.scalograms_dir = *dump_dir;

    const cwl::LineSink log = [](const std::string& line) { std::cerr << line << '\n'; };
    if (gen->parsed()) cwl::cmd_generate(cfg, log);
    if (pre->parsed()) {
      cfg.preprocess.fcm.validate();
      cwl::cmd_preprocess(cfg, log);
    }
    if (te->parsed()) cwl::cmd_train_eval(cfg, log);
    if (st->parsed()) cwl::cmd_study(cfg, log);
    if (dump->parsed()) cwl::cmd_dump_scalograms(cfg, log);
  } catch (const cwl::Error& e) {
    std::cerr << "ERROR " << e.code() << ": " << e.what() << '\n';
    return is_usage_code(e.code()) ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "ERROR Internal: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
