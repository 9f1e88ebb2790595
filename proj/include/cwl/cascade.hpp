#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "cwl/cwt.hpp"
#include "cwl/features.hpp"
#include "cwl/nn/model.hpp"
#include "cwl/synth.hpp"

namespace cwl {

// Conv2D(8,5,2) ReLU MaxPool2D(2) Conv2D(16,3,2) ReLU Flatten Dense(32) ReLU Dense(2) Softmax
std::vector<nn::LayerSpec> default_stage1_arch();
// Conv1D(16,7,2) ReLU MaxPool1D(2) Conv1D(32,5,2) ReLU MaxPool1D(2) Flatten Dense(64) ReLU
// Dense(5) Softmax
std::vector<nn::LayerSpec> default_stage2_arch();

struct CascadeModel {
  nn::Model stage1;  // [1, H, W] image -> {NoTask, CWL}
  nn::Model stage2;  // [1, L] window -> {Task1..Task4, NoTask}
  std::shared_ptr<const MorletBank> bank;

  bool trained() const { return !stage1.empty() && !stage2.empty() && bank; }
  void validate() const;  // ModelNotTrained / ShapeMismatch
};

nn::Tensor image_tensor(const GrayImage& image);  // [1, H, W], pixel / 255
nn::Tensor signal_tensor(const FeatureWindow& w);  // [1, L]

struct GateCounter {
  std::size_t stage1_calls = 0;
  std::size_t stage1_positive = 0;
  std::size_t stage2_calls = 0;
};

struct CascadePrediction {
  TaskLabel label = TaskLabel::NoTask;
  std::array<double, 2> stage1_probs{};
  bool stage2_invoked = false;
  std::array<double, 5> stage2_probs{};  // zeros unless invoked
};

// Applies the gating rule to stage-1 probabilities: NoTask stops, otherwise
// stage 2 runs and its argmax over Task1..Task4 is returned.
CascadePrediction gate(const std::array<double, 2>& stage1_probs, const nn::Model& stage2,
                       const nn::Tensor& signal, GateCounter* counter = nullptr);

CascadePrediction predict(const CascadeModel& model, const FeatureWindow& w,
                          GateCounter* counter = nullptr);

// Counts are real-valued so averaged matrices keep the type; single
// evaluations hold whole numbers.
struct ConfusionMatrix {
  std::vector<std::string> class_names;
  std::vector<std::vector<double>> counts;  // [true][predicted]

  explicit ConfusionMatrix(std::vector<std::string> names = {});
  std::size_t size() const { return class_names.size(); }
  void add(std::size_t truth, std::size_t predicted, double weight = 1.0);
  double total() const;
  double row_sum(std::size_t k) const;
  double col_sum(std::size_t k) const;
  double accuracy() const;
  double precision(std::size_t k) const;  // 0 when the column is empty
  double recall(std::size_t k) const;     // 0 when the row is empty
};

struct Metrics {
  double accuracy = 0.0;
  std::vector<double> precision;
  std::vector<double> recall;
};

Metrics metrics_of(const ConfusionMatrix& cm);
ConfusionMatrix confusion_from(const std::vector<int>& truth, const std::vector<int>& predicted,
                               std::vector<std::string> names);
std::vector<std::string> task_class_names();
std::vector<std::string> binary_class_names();

struct CascadeEvaluation {
  ConfusionMatrix multiclass;  // cascade output vs task label
  ConfusionMatrix binary;      // stage-1 output vs binary label
  GateCounter counter;
};

CascadeEvaluation evaluate(const CascadeModel& model, const std::vector<FeatureWindow>& windows);

struct ModelSelection {
  bool tl = true;     // stage 1 alone (binary)
  bool cnn1d = true;  // stage 2 alone (multiclass, un-gated)
  bool elm = true;
  bool melm = true;
  bool cascade() const { return tl && cnn1d; }
};

// Comma-separated subset of tl, cnn1d, elm, melm.
ModelSelection parse_model_selection(std::string_view list);

struct BaselineConfig {
  int elm_hidden = 256;
  std::vector<int> melm_layers = {256, 128};
  int melm_hidden = 256;
  double ridge = 1e-6;
};

struct CascadeConfig {
  CwtConfig cwt;
  double signal_fs_hz = 500.0;
  std::vector<nn::LayerSpec> stage1_arch = default_stage1_arch();
  std::vector<nn::LayerSpec> stage2_arch = default_stage2_arch();
  PretrainConfig pretrain;
  nn::TrainConfig pretrain_train;
  nn::TrainConfig stage1;
  nn::TrainConfig stage2;
  int trainable_tail = 1;
  double train_fraction = 0.7;
  std::uint64_t seed = 7;
  BaselineConfig baselines;

  CascadeConfig();
};

struct ResultRow {
  std::string model;  // tl, cnn1d, cascade, elm, melm
  std::string task;   // binary or multiclass
  std::string split;  // train or test
  Metrics metrics;
  ConfusionMatrix confusion;
};

struct RepeatReport {
  int repeat = 0;
  std::uint64_t seed = 0;
  std::vector<ResultRow> rows;
  GateCounter test_gating;
  nn::TrainHistory stage1_history;
  nn::TrainHistory stage2_history;
  std::uint64_t stage1_frozen_checksum = 0;  // frozen prefix after fine-tuning
  std::map<std::string, double> fit_seconds;  // wall clock, not reproducible
};

struct ExperimentReport {
  std::vector<RepeatReport> repeats;
  std::vector<ResultRow> mean;  // element-wise mean over repeats
  nn::TrainHistory pretrain_history;
  std::uint64_t pretrain_frozen_checksum = 0;  // frozen prefix right after pretraining
  double pretrain_seconds = 0.0;
  CascadeModel last_model;  // models of the final repeat

  const ResultRow* find_mean(std::string_view model, std::string_view task,
                             std::string_view split) const;
};

using ProgressLog = std::function<void(const std::string&)>;

// Repeats the stratified split with seeds seed..seed+n-1. The stage-1 feature
// extractor is pretrained once and shared; every repeat fine-tunes its last
// layer, trains stage 2 from scratch and fits the selected baselines.
ExperimentReport run_experiment(const std::vector<FeatureWindow>& dataset,
                                const CascadeConfig& cfg, int n_repeats,
                                const ModelSelection& models = {},
                                const ProgressLog& log = {});

// report.csv, confusion_<split>.csv, confusion_binary_<split>.csv,
// loss_history.csv, summary.txt and table.csv (mean accuracies with wall-clock
// fit times, so it is the one file that differs between identical runs).
void write_experiment(const ExperimentReport& report, const std::filesystem::path& dir);

}  // namespace cwl
