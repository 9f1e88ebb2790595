#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cwl/cwt.hpp"
#include "cwl/signals.hpp"
#include "cwl/study.hpp"

namespace cwl {

// Double-gamma haemodynamic response: gamma(peak_shape, scale) minus
// undershoot_ratio * gamma(undershoot_shape, scale), rescaled to a unit peak.
struct HrfParams {
  double peak_shape = 7.0;        // mode (peak_shape - 1) * scale = 6 s
  double undershoot_shape = 17.0;  // mode 16 s
  double scale_s = 1.0;
  double undershoot_ratio = 1.0 / 6.0;
  double duration_s = 32.0;  // support used for convolution
};

double hrf_raw(double t_s, const HrfParams& p);
// Time of the maximum of the combined response (grid search at 1 ms).
double hrf_peak_time(const HrfParams& p);
// Unit-peak response value.
double hrf_unit(double t_s, const HrfParams& p);

enum class FnirsDesign {
  Block,    // boxcar over each task interval convolved with the HRF; plateau = amplitude
  Impulse,  // one unit-peak HRF per task onset scaled by amplitude
};

struct SynthConfig {
  std::string subject_id = "S01";
  std::uint64_t seed = 1;
  double eeg_fs_hz = 1000.0;
  double fnirs_fs_hz = 1000.0;
  double pupil_fs_hz = 120.0;
  int eeg_channels = 18;
  int fnirs_channels = 22;

  // Timeline: lead rest, then each of Task1..Task4 followed by a rest block.
  double lead_rest_s = 60.0;
  double task_block_s = 120.0;
  double rest_s = 60.0;
  bool shuffle_task_order = true;

  // EEG: pink background plus channel-coherent band oscillators whose
  // amplitudes depend on the active label. Gains are indexed [label][band].
  double eeg_noise_uv = 5.0;
  std::array<double, 5> eeg_band_hz = {6.0, 10.0, 14.0, 22.0, 32.0};
  std::array<std::array<double, 5>, 5> eeg_gain_uv = {{
      {8.0, 2.0, 0.0, 0.0, 0.0},  // Task1
      {0.0, 2.0, 0.0, 8.0, 0.0},  // Task2
      {0.0, 2.0, 8.0, 0.0, 0.0},  // Task3
      {0.0, 2.0, 0.0, 0.0, 8.0},  // Task4
      {0.0, 2.0, 0.0, 0.0, 0.0},  // NoTask
  }};
  double eeg_phase_diffusion = 1.0;  // rad / sqrt(s)

  // fNIRS (umol/L)
  FnirsDesign fnirs_design = FnirsDesign::Block;
  HrfParams hrf;
  std::array<double, 4> hbo2_amplitude = {1.0, 2.0, 1.0, 2.0};
  double hbr_ratio = -0.3;
  double fnirs_noise = 0.05;
  double fnirs_drift = 0.3;
  double mayer_amplitude = 0.1;

  // Pupil (mm)
  double pupil_baseline_mm = 3.5;
  std::array<double, 4> pupil_dilation_mm = {0.2, 0.4, 0.3, 0.5};
  double pupil_response_tau_s = 2.0;
  double pupil_noise_mm = 0.02;
  double pupil_drift_mm = 0.1;
  double blink_rate_per_min = 12.0;
  double blink_min_s = 0.08;
  double blink_max_s = 0.2;  // gaps must stay below 1 s

  void validate() const;
  double session_s() const { return lead_rest_s + 4.0 * (task_block_s + rest_s); }
};

struct GroundTruth {
  EventSchedule schedule;
  std::array<double, 4> hbo2_amplitude{};
  std::array<double, 4> pupil_dilation_mm{};
  FnirsDesign fnirs_design = FnirsDesign::Block;
  double hrf_peak_s = 0.0;
  std::array<std::vector<double>, 2> pupil_clean;  // left, right before blink masking
};

struct SynthSession {
  MultimodalRecording recording;
  GroundTruth truth;
};

SynthSession generate_session(const SynthConfig& cfg);

// Session directory as read by load_recording, plus ground_truth.csv.
void write_session(const SynthSession& session, const std::filesystem::path& dir);
void write_ground_truth(const SynthSession& session, const std::filesystem::path& path);

// Questionnaire answers for participants S01.. under Task1..Task4. Ratings
// are integers in [0, 20] that rise with the task's HbO2 amplitude.
std::vector<SurgTlxRow> generate_surgtlx(int participants, std::uint64_t seed,
                                         const std::array<double, 4>& task_load = {1.0, 2.0, 1.0, 2.0});

// Surrogate image task for stage-1 pretraining: class 0 holds low-frequency
// tone mixtures, class 1 high-frequency ones, both rendered with the CWT.
struct PretrainConfig {
  std::size_t n_samples = 400;
  std::size_t signal_length = 848;
  std::uint64_t seed = 1;
  std::array<double, 2> low_band_hz = {1.0, 8.0};
  std::array<double, 2> high_band_hz = {12.0, 60.0};
  int tones = 3;
  double noise = 0.2;
};

struct PretrainSample {
  GrayImage image;
  int label = 0;
};

// Labels alternate 0, 1, 0, ... so the classes are balanced.
std::vector<PretrainSample> generate_pretraining_set(const PretrainConfig& cfg,
                                                     const MorletBank& bank);

}  // namespace cwl
