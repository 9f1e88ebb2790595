#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "cwl/labels.hpp"
#include "cwl/signals.hpp"

namespace cwl {

// SURG-TLX dimensions in canonical order.
enum class TlxDimension : int {
  MentalDemand = 0,
  PhysicalDemand = 1,
  TemporalDemand = 2,
  TaskComplexity = 3,
  SituationalStress = 4,
  Distractions = 5,
};
inline constexpr int kTlxDimensions = 6;
inline constexpr int kTlxPairs = 15;

std::string_view tlx_code(TlxDimension d);  // MD, PD, TD, TC, SS, DI
TlxDimension parse_tlx_code(std::string_view code);

struct PairChoice {
  TlxDimension winner;
  TlxDimension loser;
};

struct SurgTlxResponse {
  std::array<double, kTlxDimensions> ratings{};
  std::vector<PairChoice> pairwise;
  double rating_max = 20.0;
};

struct SurgTlxScore {
  std::array<int, kTlxDimensions> weights{};
  double weighted_score = 0.0;
  double raw_mean = 0.0;
};

// weight_d = pairs won by d; weighted score = sum rating_d * weight_d / 15.
SurgTlxScore surgtlx_score(const SurgTlxResponse& r);

// Pair cell format "<winner>><loser>", e.g. "MD>PD".
PairChoice parse_pair_choice(std::string_view cell);

struct SurgTlxRow {
  std::string participant;
  std::string task;
  SurgTlxResponse response;
};

// surgtlx.csv: participant,task,MD,PD,TD,TC,SS,DI,p1..p15. Validation errors
// carry the 1-based file row.
std::vector<SurgTlxRow> read_surgtlx_csv(const std::filesystem::path& path);
void write_surgtlx_csv(const std::vector<SurgTlxRow>& rows, const std::filesystem::path& path);
// participant,task,w_MD..w_DI,weighted_score,raw_mean
void write_surgtlx_scores(const std::vector<SurgTlxRow>& rows, const std::filesystem::path& path);

// Onset-locked, baseline-corrected averages of fNIRS channels per task.
struct EpochAverage {
  double fs_hz = 0.0;
  double pre_s = 0.0;
  double post_s = 0.0;
  std::size_t length = 0;  // samples per epoch = round((pre + post) * fs)
  std::vector<std::string> channel_names;
  std::map<TaskLabel, std::vector<std::vector<double>>> hbo2;  // [task][channel][t]
  std::map<TaskLabel, std::vector<std::vector<double>>> hbr;
  std::map<TaskLabel, std::size_t> epoch_count;
  std::map<TaskLabel, std::size_t> dropped_count;

  double time_of(std::size_t i) const { return static_cast<double>(i) / fs_hz - pre_s; }
};

// Epochs span [onset - pre_s, onset + post_s) and are corrected by the mean of
// their pre-onset part. Epochs leaving the recording are dropped and counted.
// With no explicit task list every task label present in the schedule except
// NoTask is averaged.
EpochAverage epoch_average(const MultimodalRecording& rec, double pre_s, double post_s,
                           const std::vector<TaskLabel>& tasks = {});

// Equal-weight mean of per-subject averages with identical layouts.
EpochAverage combine_subjects(const std::vector<EpochAverage>& per_subject);

struct HemoSummaryRow {
  TaskLabel task = TaskLabel::NoTask;
  std::string channel;  // channel name, or "mean" for the channel average
  std::string modality;  // HbO2 or HbR
  double mean = 0.0;
  double peak = 0.0;  // signed post-onset value of largest magnitude
  double time_to_peak_s = 0.0;
};

// Post-onset statistics per (task, channel, modality), channel-mean rows first.
std::vector<HemoSummaryRow> task_summary_stats(const EpochAverage& ea);
void write_hemo_summary(const std::vector<HemoSummaryRow>& rows, const std::filesystem::path& path);

}  // namespace cwl
