#include "cwl/pipeline.hpp"

#include "cwl/error.hpp"

namespace cwl {

void PreprocessConfig::validate() const {
  if (filter_order < 1) throw Error("InvalidConfig", "filter order must be >= 1");
  if (!(target_fs_hz > 0.0)) throw Error("InvalidConfig", "target rate must be > 0");
  fcm.validate();
  window.validate();
}

namespace {

void highpass_group(std::vector<ChannelStream>& group, int order, double cutoff) {
  if (group.empty()) return;
  const FilterCoefficients c = design_butterworth_highpass(order, cutoff, group.front().fs_hz);
  for (auto& ch : group) ch = filter_forward(c, ch);
}

void resample_group(std::vector<ChannelStream>& group, double fs) {
  for (auto& ch : group) ch = resample(ch, fs);
}

}  // namespace

MultimodalRecording condition(const MultimodalRecording& raw, const PreprocessConfig& cfg,
                              std::vector<std::string>* stage_log) {
  cfg.validate();
  raw.validate();
  auto log = [&](const char* stage) {
    if (stage_log) stage_log->emplace_back(stage);
  };
  MultimodalRecording rec = raw;

  for (auto& ch : rec.pupil) {
    if (ch.has_missing()) ch = impute_pupil(ch, cfg.fcm);
  }
  log("impute");

  highpass_group(rec.eeg, cfg.filter_order, cfg.highpass_hz);
  highpass_group(rec.fnirs_hbo2, cfg.filter_order, cfg.highpass_hz);
  highpass_group(rec.fnirs_hbr, cfg.filter_order, cfg.highpass_hz);
  highpass_group(rec.pupil, cfg.filter_order, cfg.highpass_hz);
  log("filter");

  resample_group(rec.eeg, cfg.target_fs_hz);
  resample_group(rec.fnirs_hbo2, cfg.target_fs_hz);
  resample_group(rec.fnirs_hbr, cfg.target_fs_hz);
  log("resample");

  rec = zscore_per_channel(rec);
  log("zscore");
  return rec;
}

std::vector<FeatureWindow> preprocess(const MultimodalRecording& raw, const PreprocessConfig& cfg,
                                      std::vector<std::string>* stage_log) {
  const MultimodalRecording rec = condition(raw, cfg, stage_log);
  auto windows = segment(rec, cfg.window);
  if (stage_log) stage_log->emplace_back("segment");
  return windows;
}

}  // namespace cwl
