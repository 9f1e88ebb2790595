#include "cwl/config.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "cwl/csv.hpp"
#include "cwl/error.hpp"
#include "cwl/seed.hpp"

namespace cwl {

namespace {

struct Field {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

std::string trim(std::string_view s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string_view::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return std::string(s.substr(a, b - a + 1));
}

double num(const std::string& v, const std::string& key) { return csv::parse_number(v, key); }

int integer(const std::string& v, const std::string& key) {
  const long long x = csv::parse_integer(v, key);
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
    throw Error("InvalidConfig", key + ": value out of range");
  }
  return static_cast<int>(x);
}

std::uint64_t unsigned_integer(const std::string& v, const std::string& key) {
  const long long x = csv::parse_integer(v, key);
  if (x < 0) throw Error("InvalidConfig", key + ": must be >= 0");
  return static_cast<std::uint64_t>(x);
}

bool boolean(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error("InvalidConfig", key + ": expected true or false");
}

template <std::size_t N>
std::array<double, N> numbers(const std::string& v, const std::string& key) {
  const auto parts = csv::split(v, ',');
  if (parts.size() != N) {
    throw Error("InvalidConfig", key + ": expected " + std::to_string(N) + " comma-separated values");
  }
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = num(trim(parts[i]), key);
  return out;
}

template <std::size_t N>
std::string join(const std::array<double, N>& values) {
  std::string s;
  for (std::size_t i = 0; i < N; ++i) s += (i ? "," : "") + csv::format(values[i]);
  return s;
}

#define CWL_NUM(key, member)                                                        \
  {key, {[](RunConfig& c, const std::string& v) { c.member = num(v, key); },       \
         [](const RunConfig& c) { return csv::format(c.member); }}}
#define CWL_INT(key, member)                                                        \
  {key, {[](RunConfig& c, const std::string& v) { c.member = integer(v, key); },   \
         [](const RunConfig& c) { return std::to_string(c.member); }}}

const std::map<std::string, Field>& table() {
  static const std::map<std::string, Field> t = {
      {"seed", {[](RunConfig& c, const std::string& v) { c.seed = unsigned_integer(v, "seed"); },
                [](const RunConfig& c) { return std::to_string(c.seed); }}},
      CWL_INT("subjects", subjects),
      {"out", {[](RunConfig& c, const std::string& v) { c.out = v; },
               [](const RunConfig& c) { return c.out.string(); }}},
      {"sessions_dir", {[](RunConfig& c, const std::string& v) { c.sessions_dir = v; },
                        [](const RunConfig& c) { return c.sessions_dir.string(); }}},
      {"features_dir", {[](RunConfig& c, const std::string& v) { c.features_dir = v; },
                        [](const RunConfig& c) { return c.features_dir.string(); }}},
      {"scalograms_dir", {[](RunConfig& c, const std::string& v) { c.scalograms_dir = v; },
                          [](const RunConfig& c) { return c.scalograms_dir.string(); }}},
      {"surgtlx_path", {[](RunConfig& c, const std::string& v) { c.surgtlx_path = v; },
                        [](const RunConfig& c) { return c.surgtlx_path.string(); }}},

      // synth
      CWL_NUM("synth_eeg_fs_hz", synth.eeg_fs_hz),
      CWL_NUM("synth_fnirs_fs_hz", synth.fnirs_fs_hz),
      CWL_NUM("synth_pupil_fs_hz", synth.pupil_fs_hz),
      CWL_INT("synth_eeg_channels", synth.eeg_channels),
      CWL_INT("synth_fnirs_channels", synth.fnirs_channels),
      CWL_NUM("synth_lead_rest_s", synth.lead_rest_s),
      CWL_NUM("synth_task_block_s", synth.task_block_s),
      CWL_NUM("synth_rest_s", synth.rest_s),
      {"synth_shuffle_order",
       {[](RunConfig& c, const std::string& v) { c.synth.shuffle_task_order = boolean(v, "synth_shuffle_order"); },
        [](const RunConfig& c) { return std::string(c.synth.shuffle_task_order ? "true" : "false"); }}},
      CWL_NUM("synth_eeg_noise_uv", synth.eeg_noise_uv),
      CWL_NUM("synth_eeg_phase_diffusion", synth.eeg_phase_diffusion),
      {"synth_fnirs_design",
       {[](RunConfig& c, const std::string& v) {
          if (v == "block") c.synth.fnirs_design = FnirsDesign::Block;
          else if (v == "impulse") c.synth.fnirs_design = FnirsDesign::Impulse;
          else throw Error("InvalidConfig", "synth_fnirs_design: expected block or impulse");
        },
        [](const RunConfig& c) {
          return std::string(c.synth.fnirs_design == FnirsDesign::Block ? "block" : "impulse");
        }}},
      {"synth_hbo2_amplitude",
       {[](RunConfig& c, const std::string& v) { c.synth.hbo2_amplitude = numbers<4>(v, "synth_hbo2_amplitude"); },
        [](const RunConfig& c) { return join(c.synth.hbo2_amplitude); }}},
      CWL_NUM("synth_hbr_ratio", synth.hbr_ratio),
      CWL_NUM("synth_fnirs_noise", synth.fnirs_noise),
      CWL_NUM("synth_fnirs_drift", synth.fnirs_drift),
      {"synth_pupil_dilation_mm",
       {[](RunConfig& c, const std::string& v) { c.synth.pupil_dilation_mm = numbers<4>(v, "synth_pupil_dilation_mm"); },
        [](const RunConfig& c) { return join(c.synth.pupil_dilation_mm); }}},
      CWL_NUM("synth_pupil_noise_mm", synth.pupil_noise_mm),
      CWL_NUM("synth_blink_rate_per_min", synth.blink_rate_per_min),
      CWL_NUM("synth_blink_min_s", synth.blink_min_s),
      CWL_NUM("synth_blink_max_s", synth.blink_max_s),

      // preprocessing
      CWL_INT("filter_order", preprocess.filter_order),
      CWL_NUM("highpass_hz", preprocess.highpass_hz),
      CWL_NUM("target_fs_hz", preprocess.target_fs_hz),
      CWL_INT("impute_c", preprocess.fcm.n_clusters),
      CWL_NUM("impute_m", preprocess.fcm.fuzzifier),
      CWL_NUM("impute_tol", preprocess.fcm.tol),
      CWL_INT("impute_max_iter", preprocess.fcm.max_iter),
      CWL_INT("impute_embed_dim", preprocess.fcm.embed_dim),
      {"impute_seed",
       {[](RunConfig& c, const std::string& v) {
         if (v == "derived") c.impute_seed.reset();
         else c.impute_seed = unsigned_integer(v, "impute_seed");
       },
        [](const RunConfig& c) { return c.impute_seed ? std::to_string(*c.impute_seed) : std::string("derived"); }}},
      CWL_INT("window_samples", preprocess.window.window_samples),
      CWL_INT("stride_samples", preprocess.window.stride_samples),
      {"label_rule",
       {[](RunConfig& c, const std::string& v) {
          if (v == "majority") c.preprocess.window.label_rule = LabelRule::Majority;
          else if (v == "center") c.preprocess.window.label_rule = LabelRule::Center;
          else throw Error("InvalidConfig", "label_rule: expected majority or center");
        },
        [](const RunConfig& c) {
          return std::string(c.preprocess.window.label_rule == LabelRule::Majority ? "majority" : "center");
        }}},
      CWL_NUM("pupil_feature_fs_hz", preprocess.window.pupil_fs_hz),
      {"fnirs_species",
       {[](RunConfig& c, const std::string& v) {
          if (v == "HbO2") c.preprocess.window.fnirs_species = FnirsSpecies::HbO2;
          else if (v == "HbR") c.preprocess.window.fnirs_species = FnirsSpecies::HbR;
          else throw Error("InvalidConfig", "fnirs_species: expected HbO2 or HbR");
        },
        [](const RunConfig& c) {
          return std::string(c.preprocess.window.fnirs_species == FnirsSpecies::HbO2 ? "HbO2" : "HbR");
        }}},

      // scalograms
      CWL_INT("cwt_scales", cascade.cwt.n_scales),
      CWL_NUM("cwt_freq_min_hz", cascade.cwt.freq_min_hz),
      CWL_NUM("cwt_freq_max_hz", cascade.cwt.freq_max_hz),
      CWL_NUM("cwt_omega0", cascade.cwt.omega0),
      CWL_INT("image_h", cascade.cwt.image_h),
      CWL_INT("image_w", cascade.cwt.image_w),

      // training
      CWL_INT("repeats", repeats),
      {"models", {[](RunConfig& c, const std::string& v) {
                    parse_model_selection(v);
                    c.models = v;
                  },
                  [](const RunConfig& c) { return c.models; }}},
      CWL_NUM("train_fraction", cascade.train_fraction),
      CWL_INT("trainable_tail", cascade.trainable_tail),
      {"pretrain_samples",
       {[](RunConfig& c, const std::string& v) {
          c.cascade.pretrain.n_samples = static_cast<std::size_t>(unsigned_integer(v, "pretrain_samples"));
        },
        [](const RunConfig& c) { return std::to_string(c.cascade.pretrain.n_samples); }}},
      CWL_INT("pretrain_epochs", cascade.pretrain_train.epochs),
      CWL_NUM("pretrain_lr", cascade.pretrain_train.lr),
      CWL_INT("pretrain_batch", cascade.pretrain_train.batch_size),
      CWL_INT("stage1_epochs", cascade.stage1.epochs),
      CWL_NUM("stage1_lr", cascade.stage1.lr),
      CWL_INT("stage1_batch", cascade.stage1.batch_size),
      CWL_INT("stage2_epochs", cascade.stage2.epochs),
      CWL_NUM("stage2_lr", cascade.stage2.lr),
      CWL_INT("stage2_batch", cascade.stage2.batch_size),
      CWL_INT("elm_hidden", cascade.baselines.elm_hidden),
      {"melm_layers",
       {[](RunConfig& c, const std::string& v) {
          std::vector<int> dims;
          for (const auto& part : csv::split(v, ',')) {
            const int d = integer(trim(part), "melm_layers");
            if (d < 1) throw Error("InvalidConfig", "melm_layers: sizes must be >= 1");
            dims.push_back(d);
          }
          c.cascade.baselines.melm_layers = dims;
        },
        [](const RunConfig& c) {
          std::string s;
          for (std::size_t i = 0; i < c.cascade.baselines.melm_layers.size(); ++i) {
            s += (i ? "," : "") + std::to_string(c.cascade.baselines.melm_layers[i]);
          }
          return s;
        }}},
      CWL_INT("melm_hidden", cascade.baselines.melm_hidden),
      CWL_NUM("ridge", cascade.baselines.ridge),

      // study
      CWL_NUM("epoch_pre_s", epoch_pre_s),
      CWL_NUM("epoch_post_s", epoch_post_s),
      CWL_NUM("rating_max", rating_max),
      CWL_INT("dump_count", dump_count),
  };
  return t;
}

#undef CWL_NUM
#undef CWL_INT

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  const auto it = table().find(key);
  if (it == table().end()) throw Error("UnknownKey", "unknown config key '" + key + "'");
  it->second.set(*this, trim(value));
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("MissingFile", "cannot open config " + path.string());
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string text = trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    const std::string where = path.string() + ":" + std::to_string(line_no) + ": ";
    if (eq == std::string::npos) throw Error("InvalidConfig", where + "expected key = value");
    try {
      set(trim(std::string_view(text).substr(0, eq)), text.substr(eq + 1));
    } catch (const Error& e) {
      throw Error(e.code(), where + e.what());
    }
  }
}

std::vector<std::string> RunConfig::keys() {
  std::vector<std::string> k;
  for (const auto& [name, field] : table()) k.push_back(name);
  return k;
}

std::string RunConfig::to_text() const {
  std::ostringstream out;
  for (const auto& [name, field] : table()) out << name << " = " << field.get(*this) << '\n';
  return out.str();
}

std::filesystem::path RunConfig::sessions() const {
  return sessions_dir.empty() ? out / "sessions" : sessions_dir;
}

std::filesystem::path RunConfig::features() const {
  return features_dir.empty() ? out / "features" : features_dir;
}

std::filesystem::path RunConfig::surgtlx() const {
  return surgtlx_path.empty() ? sessions() / "surgtlx.csv" : surgtlx_path;
}

std::filesystem::path RunConfig::scalograms() const {
  return scalograms_dir.empty() ? out / "scalograms" : scalograms_dir;
}

std::string RunConfig::subject_id(int index) const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "S%02d", index + 1);
  return buf;
}

SynthConfig RunConfig::synth_for(int index) const {
  SynthConfig s = synth;
  s.seed = seed;
  s.subject_id = subject_id(index);
  return s;
}

PreprocessConfig RunConfig::preprocess_config() const {
  PreprocessConfig p = preprocess;
  p.fcm.seed = impute_seed ? *impute_seed : derive_seed(seed, "impute");
  return p;
}

CascadeConfig RunConfig::cascade_config() const {
  CascadeConfig c = cascade;
  c.seed = seed;
  c.signal_fs_hz = preprocess.target_fs_hz;
  return c;
}

}  // namespace cwl
