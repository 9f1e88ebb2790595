#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "cwl/nn/layers.hpp"
#include "cwl/nn/tensor.hpp"

namespace cwl::nn {

// Sequential network. Layers with index < frozen_prefix are never updated.
class Model {
 public:
  Model() = default;
  Model(Shape input_shape, const std::vector<LayerSpec>& specs, std::uint64_t seed);
  Model(const Model& other);
  Model& operator=(const Model& other);
  Model(Model&&) noexcept = default;
  Model& operator=(Model&&) noexcept = default;

  const Shape& input_shape() const { return input_shape_; }
  const Shape& output_shape() const;
  std::size_t layer_count() const { return layers_.size(); }
  Layer& layer(std::size_t i) { return *layers_[i]; }
  const Layer& layer(std::size_t i) const { return *layers_[i]; }
  std::vector<LayerSpec> specs() const;
  bool empty() const { return layers_.empty(); }

  std::size_t frozen_prefix() const { return frozen_prefix_; }
  void set_frozen_prefix(std::size_t n);

  Tensor forward(const Tensor& x) const;
  // acts[i] is the input of layer i (i >= first); acts.back() is the output.
  std::vector<Tensor> forward_trace(const Tensor& x, std::size_t first = 0) const;
  // Runs layers [begin, end); x must match the input of layer `begin`.
  Tensor forward_range(const Tensor& x, std::size_t begin, std::size_t end) const;

  std::size_t parameter_count() const;
  // FNV-1a over the bit patterns of the parameters of layers [begin, end).
  std::uint64_t checksum(std::size_t begin, std::size_t end) const;
  std::uint64_t checksum() const { return checksum(0, layers_.size()); }

  // Rounds every parameter to the nearest float (checkpoint precision).
  void round_to_storage_precision();

 private:
  Shape input_shape_;
  std::vector<std::unique_ptr<Layer>> layers_;
  std::size_t frozen_prefix_ = 0;
};

// Per-layer parameter gradients; empty for parameter-free or frozen layers.
using Gradients = std::vector<std::vector<double>>;

std::size_t argmax(std::span<const double> values);  // lowest index wins ties
std::vector<double> one_hot(int label, std::size_t classes);
double cross_entropy(const Tensor& probs, std::span<const double> y_onehot);

// Mean softmax cross-entropy gradient over a batch. The loss treats the
// input of a trailing Softmax layer (or the raw output when there is none)
// as logits.
Gradients backward_batch(const Model& model, std::span<const Tensor> xs,
                         std::span<const std::vector<double>> ys, double* mean_loss = nullptr);
Gradients backward(const Model& model, const Tensor& x, std::span<const double> y_onehot,
                   double* loss = nullptr);
// Gradients for an arbitrary upstream gradient at the model output.
Gradients backward_from_output(const Model& model, const Tensor& x, const Tensor& grad_output);

Gradients zero_gradients(const Model& model);

struct TrainConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int batch_size = 32;
  int epochs = 10;
  std::uint64_t seed = 0;
  std::size_t frozen_prefix = 0;  // combined with the model's own prefix (max)

  void validate() const;
};

struct AdamMoments {
  std::vector<double> m;
  std::vector<double> v;
};

// Bias-corrected Adam update for one parameter block; step t >= 1.
void adam_step(std::span<double> params, std::span<const double> grads, AdamMoments& state,
               const TrainConfig& cfg, long t);

struct Dataset {
  std::vector<Tensor> inputs;
  std::vector<int> labels;
  std::size_t classes = 0;

  std::size_t size() const { return inputs.size(); }
};

struct TrainHistory {
  std::vector<double> loss;      // mean batch loss per epoch
  std::vector<double> accuracy;  // running train accuracy per epoch
};

// Mini-batch Adam over shuffled epochs; deterministic under cfg.seed. Outputs
// of the frozen prefix are computed once and reused across epochs. Parameters
// are rounded to checkpoint precision when training ends.
TrainHistory train(Model& model, const Dataset& data, const TrainConfig& cfg);
// Same as train() with the frozen-prefix outputs supplied by the caller.
TrainHistory train_from_prefix(Model& model, const std::vector<Tensor>& prefix_outputs,
                               const std::vector<int>& labels, const TrainConfig& cfg);

int predict_class(const Model& model, const Tensor& x);
double accuracy(const Model& model, const Dataset& data);

// Index of the k-th parametric layer counted from the tail; everything before
// it is frozen. k = 0 freezes the whole network.
std::size_t freeze_boundary(const Model& model, int k_trainable_tail);

// Trains on the surrogate task, then freezes all but the last k parametric
// layers.
Model pretrain_and_freeze(Model model, const Dataset& surrogate, const TrainConfig& cfg,
                          int k_trainable_tail, TrainHistory* history = nullptr);

// Checkpoint: "CWLNN1", input shape, frozen prefix, layer specs and float32
// little-endian parameter blobs.
void save_checkpoint(const Model& model, const std::filesystem::path& path);
Model load_checkpoint(const std::filesystem::path& path);

}  // namespace cwl::nn
