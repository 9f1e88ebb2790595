#include "cwl/features.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "cwl/csv.hpp"
#include "cwl/error.hpp"

namespace cwl {

void WindowSpec::validate() const {
  if (window_samples < 1 || stride_samples < 1 || stride_samples > window_samples) {
    throw Error("InvalidConfig", "window spec requires 0 < stride <= window");
  }
  if (!(pupil_fs_hz > 0.0)) throw Error("InvalidConfig", "pupil feature rate must be > 0");
}

std::size_t WindowSpec::pupil_samples(double signal_fs_hz) const {
  return static_cast<std::size_t>(std::llround(window_samples / signal_fs_hz * pupil_fs_hz));
}

std::size_t WindowSpec::feature_length(double signal_fs_hz) const {
  return 2 * static_cast<std::size_t>(window_samples) + pupil_samples(signal_fs_hz);
}

namespace {

void zscore_channel(ChannelStream& ch) {
  if (ch.samples.empty()) return;
  const double first = ch.samples.front();
  if (std::all_of(ch.samples.begin(), ch.samples.end(), [&](double v) { return v == first; })) {
    std::fill(ch.samples.begin(), ch.samples.end(), 0.0);
    return;
  }
  const double n = static_cast<double>(ch.samples.size());
  const double mean = std::accumulate(ch.samples.begin(), ch.samples.end(), 0.0) / n;
  double var = 0.0;
  for (double v : ch.samples) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / n);
  for (double& v : ch.samples) v = sd > 0.0 ? (v - mean) / sd : 0.0;
}

std::vector<double> channel_mean(const std::vector<ChannelStream>& group) {
  if (group.empty()) throw Error("InvalidStream", "cannot average an empty channel group");
  std::vector<double> mean(group.front().size(), 0.0);
  for (const auto& ch : group) {
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += ch.samples[i];
  }
  const double scale = 1.0 / static_cast<double>(group.size());
  for (double& v : mean) v *= scale;
  return mean;
}

}  // namespace

MultimodalRecording zscore_per_channel(const MultimodalRecording& rec) {
  MultimodalRecording out = rec;
  for (auto* group : {&out.eeg, &out.fnirs_hbo2, &out.fnirs_hbr, &out.pupil}) {
    for (auto& ch : *group) {
      if (ch.has_missing()) {
        throw Error("UnimputedInput", ch.name + ": impute missing samples before z-scoring");
      }
      zscore_channel(ch);
    }
  }
  return out;
}

std::size_t window_count(std::size_t n, std::size_t window, std::size_t stride) {
  if (n < window) return 0;
  return (n - window) / stride + 1;
}

std::vector<FeatureWindow> segment(const MultimodalRecording& rec, const WindowSpec& spec) {
  spec.validate();
  rec.validate();
  if (rec.eeg.empty() || rec.fnirs_hbo2.empty()) {
    throw Error("InvalidStream", "segmentation needs EEG and fNIRS channels");
  }
  const double fs = rec.eeg.front().fs_hz;
  if (rec.fnirs_hbo2.front().fs_hz != fs) {
    throw Error("InconsistentRate", "EEG and fNIRS must share one rate before segmentation");
  }
  for (const auto& ch : rec.pupil) {
    if (ch.has_missing()) throw Error("UnimputedInput", ch.name + ": pupil must be imputed");
  }

  const std::vector<double> eeg = channel_mean(rec.eeg);
  const std::vector<double> fnirs = channel_mean(
      spec.fnirs_species == FnirsSpecies::HbO2 ? rec.fnirs_hbo2 : rec.fnirs_hbr);
  ChannelStream pupil = ChannelStream::complete("pupil_mean", rec.pupil.front().fs_hz,
                                                channel_mean(rec.pupil));
  pupil = resample(pupil, spec.pupil_fs_hz);

  const auto w = static_cast<std::size_t>(spec.window_samples);
  const auto s = static_cast<std::size_t>(spec.stride_samples);
  const std::size_t p_len = spec.pupil_samples(fs);
  const std::size_t n_total = std::min(eeg.size(), fnirs.size());

  std::vector<FeatureWindow> out;
  for (const auto& iv : rec.events.intervals) {
    const auto i0 = static_cast<std::size_t>(std::ceil(iv.start_s * fs - 1e-9));
    const auto i1 = std::min(n_total, static_cast<std::size_t>(std::floor(iv.end_s * fs + 1e-9)));
    if (i0 >= i1 || i1 - i0 < w) {
      throw Error("RegionTooShort", std::string(to_string(iv.label)) + " interval at " +
                                        csv::format(iv.start_s) + " s spans fewer than " +
                                        std::to_string(w) + " samples");
    }
    const std::size_t count = window_count(i1 - i0, w, s);
    for (std::size_t k = 0; k < count; ++k) {
      const std::size_t start = i0 + k * s;
      const double t_start = static_cast<double>(start) / fs;
      const auto p0 = static_cast<std::size_t>(std::llround(t_start * spec.pupil_fs_hz));
      if (p0 + p_len > pupil.size()) continue;

      TaskLabel label = iv.label;
      if (spec.label_rule == LabelRule::Center) {
        const double t_center = (static_cast<double>(start) + 0.5 * w) / fs;
        label = rec.events.label_at(t_center).value_or(iv.label);
      } else {
        std::array<std::size_t, kNumTaskLabels> votes{};
        for (std::size_t i = start; i < start + w; ++i) {
          if (auto l = rec.events.label_at(static_cast<double>(i) / fs)) ++votes[index_of(*l)];
        }
        const auto best = std::max_element(votes.begin(), votes.end()) - votes.begin();
        if (votes[best] > 0) label = static_cast<TaskLabel>(best);
      }

      FeatureWindow fw;
      fw.subject_id = rec.subject_id;
      fw.t_start_s = t_start;
      fw.task_label = label;
      fw.binary_label = binary_of(label);
      fw.vector.reserve(2 * w + p_len);
      fw.vector.insert(fw.vector.end(), eeg.begin() + start, eeg.begin() + start + w);
      fw.vector.insert(fw.vector.end(), fnirs.begin() + start, fnirs.begin() + start + w);
      fw.vector.insert(fw.vector.end(), pupil.samples.begin() + p0,
                       pupil.samples.begin() + p0 + p_len);
      out.push_back(std::move(fw));
    }
  }
  return out;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    const std::vector<FeatureWindow>& windows, double train_frac, std::uint64_t seed) {
  if (!(train_frac > 0.0) || !(train_frac < 1.0)) {
    throw Error("InvalidConfig", "train fraction must lie strictly between 0 and 1");
  }
  std::array<std::vector<std::size_t>, kNumTaskLabels> by_label;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    by_label[index_of(windows[i].task_label)].push_back(i);
  }
  for (TaskLabel l : kAllTaskLabels) {
    if (by_label[index_of(l)].empty()) {
      throw Error("ClassEmpty", "no windows labeled " + std::string(to_string(l)));
    }
  }
  std::mt19937_64 rng(seed);
  std::vector<std::uint8_t> in_train(windows.size(), 0);
  for (auto& indices : by_label) {
    std::shuffle(indices.begin(), indices.end(), rng);
    const auto n_train = static_cast<std::size_t>(
        std::llround(train_frac * static_cast<double>(indices.size())));
    for (std::size_t j = 0; j < n_train; ++j) in_train[indices[j]] = 1;
  }
  std::pair<std::vector<std::size_t>, std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    (in_train[i] ? out.first : out.second).push_back(i);
  }
  return out;
}

std::pair<std::vector<FeatureWindow>, std::vector<FeatureWindow>> split_train_test(
    const std::vector<FeatureWindow>& windows, double train_frac, std::uint64_t seed) {
  const auto [train_idx, test_idx] = split_indices(windows, train_frac, seed);
  std::pair<std::vector<FeatureWindow>, std::vector<FeatureWindow>> out;
  for (std::size_t i : train_idx) out.first.push_back(windows[i]);
  for (std::size_t i : test_idx) out.second.push_back(windows[i]);
  return out;
}

void write_features_csv(const std::vector<FeatureWindow>& windows,
                        const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("IoError", "cannot write " + path.string());
  const std::size_t len = windows.empty() ? kDefaultFeatureLength : windows.front().vector.size();
  std::string line = "subject_id,t_start_s,task_label,binary_label";
  for (std::size_t i = 0; i < len; ++i) line += ",v" + std::to_string(i);
  out << line << '\n';
  for (const auto& w : windows) {
    if (w.vector.size() != len) throw Error("ShapeMismatch", "feature vectors differ in length");
    line = w.subject_id + ',' + csv::format(w.t_start_s) + ',' +
           std::string(to_string(w.task_label)) + ',' + std::string(to_string(w.binary_label));
    for (double v : w.vector) {
      line += ',';
      line += csv::format(v);
    }
    out << line << '\n';
  }
}

std::vector<FeatureWindow> read_features_csv(const std::filesystem::path& path) {
  std::vector<FeatureWindow> out;
  bool header = true;
  csv::for_each_row(path, [&](std::size_t row, std::span<const std::string_view> cells) {
    if (header) {
      if (cells.size() < 5 || cells[0] != "subject_id") {
        throw Error("MalformedCsv", path.string() + ": unexpected features header");
      }
      header = false;
      return;
    }
    FeatureWindow w;
    w.subject_id = std::string(cells[0]);
    w.t_start_s = csv::parse_cell(cells[1], path, row).value_or(0.0);
    w.task_label = parse_task_label(cells[2]);
    w.binary_label = parse_binary_label(cells[3]);
    if (w.binary_label != binary_of(w.task_label)) {
      throw Error("MalformedCsv", path.string() + ": row " + std::to_string(row) +
                                      " has inconsistent binary and task labels");
    }
    w.vector.reserve(cells.size() - 4);
    for (std::size_t i = 4; i < cells.size(); ++i) {
      auto v = csv::parse_cell(cells[i], path, row);
      if (!v) {
        throw Error("MalformedCsv", path.string() + ": row " + std::to_string(row) +
                                        " has an empty feature value");
      }
      w.vector.push_back(*v);
    }
    out.push_back(std::move(w));
  });
  return out;
}

}  // namespace cwl
