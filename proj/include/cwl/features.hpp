#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "cwl/labels.hpp"
#include "cwl/signals.hpp"

namespace cwl {

enum class LabelRule { Majority, Center };
enum class FnirsSpecies { HbO2, HbR };

struct WindowSpec {
  int window_samples = 400;  // at the EEG/fNIRS rate (500 Hz by default)
  int stride_samples = 200;
  LabelRule label_rule = LabelRule::Majority;
  double pupil_fs_hz = 60.0;  // pupil block rate inside the feature vector
  FnirsSpecies fnirs_species = FnirsSpecies::HbO2;

  void validate() const;
  // Samples in the pupil block for a window at `signal_fs_hz`.
  std::size_t pupil_samples(double signal_fs_hz) const;
  // [EEG mean | fNIRS mean | pupil eye-mean]; 400 + 400 + 48 = 848 by default.
  std::size_t feature_length(double signal_fs_hz) const;
};

inline constexpr std::size_t kDefaultFeatureLength = 848;

struct FeatureWindow {
  std::vector<double> vector;
  BinaryLabel binary_label = BinaryLabel::NoTask;
  TaskLabel task_label = TaskLabel::NoTask;
  double t_start_s = 0.0;
  std::string subject_id;
};

// Standardizes every channel to zero mean and unit (population) standard
// deviation over the session; constant channels become all zeros.
MultimodalRecording zscore_per_channel(const MultimodalRecording& rec);

// Number of windows a region of n samples yields (0 when n < window).
std::size_t window_count(std::size_t n, std::size_t window, std::size_t stride);

// Slides windows inside every labeled interval of the schedule. EEG and fNIRS
// must share one rate; pupil must be imputed (any rate, resampled here).
std::vector<FeatureWindow> segment(const MultimodalRecording& rec, const WindowSpec& spec);

// Stratified by task label, deterministic under seed. Both halves keep the
// input order.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    const std::vector<FeatureWindow>& windows, double train_frac, std::uint64_t seed);
std::pair<std::vector<FeatureWindow>, std::vector<FeatureWindow>> split_train_test(
    const std::vector<FeatureWindow>& windows, double train_frac, std::uint64_t seed);

void write_features_csv(const std::vector<FeatureWindow>& windows,
                        const std::filesystem::path& path);
std::vector<FeatureWindow> read_features_csv(const std::filesystem::path& path);

}  // namespace cwl
