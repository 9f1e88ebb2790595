#pragma once

#include <string>
#include <vector>

#include "cwl/features.hpp"
#include "cwl/impute.hpp"
#include "cwl/signals.hpp"

namespace cwl {

struct PreprocessConfig {
  int filter_order = 5;
  double highpass_hz = 0.5;
  double target_fs_hz = 500.0;  // EEG and fNIRS
  FcmConfig fcm;
  WindowSpec window;

  void validate() const;
};

// impute (pupil) -> high-pass -> resample -> z-score -> segment. Each stage
// appends its name to stage_log.
std::vector<FeatureWindow> preprocess(const MultimodalRecording& raw, const PreprocessConfig& cfg,
                                      std::vector<std::string>* stage_log = nullptr);

// Intermediate result after the signal stages (before segmentation).
MultimodalRecording condition(const MultimodalRecording& raw, const PreprocessConfig& cfg,
                              std::vector<std::string>* stage_log = nullptr);

}  // namespace cwl
