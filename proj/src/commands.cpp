#include "cwl/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "cwl/error.hpp"
#include "cwl/study.hpp"

namespace cwl {

namespace fs = std::filesystem;

namespace {

void emit(const LineSink& log, const std::string& line) {
  if (log) log(line);
}

// Subdirectories holding a manifest, sorted by name.
std::vector<fs::path> session_dirs(const fs::path& root) {
  if (!fs::is_directory(root)) throw Error("MissingFile", "sessions directory " + root.string() + " not found");
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.is_directory() && fs::exists(e.path() / "manifest.txt")) dirs.push_back(e.path());
  }
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty()) throw Error("MissingFile", "no session directories under " + root.string());
  return dirs;
}

std::vector<fs::path> feature_files(const fs::path& root) {
  if (!fs::is_directory(root)) throw Error("MissingFile", "features directory " + root.string() + " not found");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error("MissingFile", "no feature files under " + root.string());
  return files;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("IoError", "cannot write " + path.string());
  out << text;
}

}  // namespace

void cmd_generate(const RunConfig& cfg, const LineSink& log) {
  if (cfg.subjects < 1) throw Error("Usage", "--subjects must be >= 1");
  const fs::path root = cfg.sessions();
  fs::create_directories(root);
  for (int i = 0; i < cfg.subjects; ++i) {
    try {
      const SynthSession s = generate_session(cfg.synth_for(i));
      const fs::path dir = root / s.recording.subject_id;
      write_session(s, dir);
      emit(log, "generated " + dir.string());
    } catch (const Error& e) {
      throw Error(e.code(), "subject " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  write_surgtlx_csv(generate_surgtlx(cfg.subjects, cfg.seed, cfg.synth.hbo2_amplitude),
                    root / "surgtlx.csv");
  emit(log, "generated " + (root / "surgtlx.csv").string());
}

void cmd_preprocess(const RunConfig& cfg, const LineSink& log) {
  const PreprocessConfig pc = cfg.preprocess_config();
  const fs::path out = cfg.features();
  const auto dirs = session_dirs(cfg.sessions());
  fs::create_directories(out);
  std::string stage_text;
  for (const fs::path& dir : dirs) {
    try {
      const MultimodalRecording rec = load_recording(dir);
      std::vector<std::string> stages;
      const auto windows = preprocess(rec, pc, &stages);
      write_features_csv(windows, out / (rec.subject_id + ".csv"));
      std::string line = rec.subject_id + ":";
      for (std::size_t i = 0; i < stages.size(); ++i) line += (i ? " -> " : " ") + stages[i];
      line += " (" + std::to_string(windows.size()) + " windows)";
      stage_text += line + '\n';
      emit(log, line);
    } catch (const Error& e) {
      throw Error(e.code(), dir.string() + ": " + e.what());
    }
  }
  write_text(out / "preprocess_log.txt", stage_text);
}

void cmd_train_eval(const RunConfig& cfg, const LineSink& log, ExperimentReport* report_out) {
  if (cfg.repeats < 1) throw Error("Usage", "--repeats must be >= 1");
  const ModelSelection models = parse_model_selection(cfg.models);
  std::vector<FeatureWindow> dataset;
  for (const fs::path& f : feature_files(cfg.features())) {
    auto windows = read_features_csv(f);
    emit(log, "loaded " + std::to_string(windows.size()) + " windows from " + f.string());
    dataset.insert(dataset.end(), std::make_move_iterator(windows.begin()),
                   std::make_move_iterator(windows.end()));
  }
  ExperimentReport report = run_experiment(dataset, cfg.cascade_config(), cfg.repeats, models, log);
  const fs::path dir = cfg.out / "report";
  write_experiment(report, dir);
  if (report.last_model.trained()) {
    nn::save_checkpoint(report.last_model.stage1, dir / "stage1.ckpt");
    nn::save_checkpoint(report.last_model.stage2, dir / "stage2.ckpt");
  }
  write_text(dir / "config_resolved.txt", cfg.to_text());
  emit(log, "reports written to " + dir.string());
  if (report_out) *report_out = std::move(report);
}

void cmd_study(const RunConfig& cfg, const LineSink& log) {
  const fs::path dir = cfg.out / "study";
  fs::create_directories(dir);
  auto rows = read_surgtlx_csv(cfg.surgtlx());
  for (auto& r : rows) r.response.rating_max = cfg.rating_max;
  write_surgtlx_scores(rows, dir / "surgtlx_scores.csv");
  emit(log, std::to_string(rows.size()) + " SURG-TLX scores written");

  std::vector<EpochAverage> per_subject;
  for (const fs::path& s : session_dirs(cfg.sessions())) {
    try {
      per_subject.push_back(epoch_average(load_recording(s), cfg.epoch_pre_s, cfg.epoch_post_s));
    } catch (const Error& e) {
      throw Error(e.code(), s.string() + ": " + e.what());
    }
  }
  const EpochAverage combined = combine_subjects(per_subject);
  write_hemo_summary(task_summary_stats(combined), dir / "hemo_summary.csv");
  emit(log, "hemodynamic summary over " + std::to_string(per_subject.size()) + " subjects written");
}

void cmd_dump_scalograms(const RunConfig& cfg, const LineSink& log) {
  if (cfg.dump_count < 1) throw Error("Usage", "--count must be >= 1");
  const CascadeConfig cc = cfg.cascade_config();
  const MorletBank bank(cc.cwt, cc.signal_fs_hz);
  const fs::path dir = cfg.scalograms();
  fs::create_directories(dir);
  for (const fs::path& f : feature_files(cfg.features())) {
    const auto windows = read_features_csv(f);
    if (windows.empty()) continue;
    const std::size_t count = std::min<std::size_t>(windows.size(), static_cast<std::size_t>(cfg.dump_count));
    for (std::size_t k = 0; k < count; ++k) {
      const FeatureWindow& w = windows[k * windows.size() / count];
      const long long t_ms = std::llround(w.t_start_s * 1000.0);
      const std::string name = w.subject_id + "_" + std::to_string(t_ms) + "_" +
                               std::string(to_string(w.task_label)) + ".pgm";
      write_pgm(scalogram_image(bank, w.vector), dir / name);
    }
    emit(log, std::to_string(count) + " scalograms from " + f.string());
  }
}

}  // namespace cwl
