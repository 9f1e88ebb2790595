#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cwl/nn/tensor.hpp"

namespace cwl::nn {

enum class LayerKind : std::uint8_t {
  Conv1D = 1,
  Conv2D = 2,
  MaxPool1D = 3,
  MaxPool2D = 4,
  ReLU = 5,
  Flatten = 6,
  Dense = 7,
  Softmax = 8,
};

struct LayerSpec {
  LayerKind kind = LayerKind::ReLU;
  int out = 0;     // output channels (conv) or units (dense)
  int kernel = 1;  // conv kernel width (square for 2-D)
  int stride = 1;
  int size = 1;  // pooling window (and stride)

  static LayerSpec conv1d(int out_ch, int kernel, int stride) {
    return {LayerKind::Conv1D, out_ch, kernel, stride, 1};
  }
  static LayerSpec conv2d(int out_ch, int kernel, int stride) {
    return {LayerKind::Conv2D, out_ch, kernel, stride, 1};
  }
  static LayerSpec maxpool1d(int size) { return {LayerKind::MaxPool1D, 0, 1, 1, size}; }
  static LayerSpec maxpool2d(int size) { return {LayerKind::MaxPool2D, 0, 1, 1, size}; }
  static LayerSpec relu() { return {LayerKind::ReLU, 0, 1, 1, 1}; }
  static LayerSpec flatten() { return {LayerKind::Flatten, 0, 1, 1, 1}; }
  static LayerSpec dense(int out_dim) { return {LayerKind::Dense, out_dim, 1, 1, 1}; }
  static LayerSpec softmax() { return {LayerKind::Softmax, 0, 1, 1, 1}; }

  void validate() const;
  bool operator==(const LayerSpec&) const = default;
};

std::string to_string(const LayerSpec& spec);

// A layer is immutable during forward/backward; parameter storage is owned
// here and mutated only by the optimizer.
class Layer {
 public:
  Layer(LayerSpec spec, Shape in_shape) : spec_(spec), in_shape_(std::move(in_shape)) {}
  virtual ~Layer() = default;

  const LayerSpec& spec() const { return spec_; }
  const Shape& input_shape() const { return in_shape_; }
  const Shape& output_shape() const { return out_shape_; }

  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }
  bool has_params() const { return !params_.empty(); }

  virtual void initialize(std::mt19937_64& rng);
  virtual Tensor forward(const Tensor& x) const = 0;
  // Accumulates parameter gradients into param_grad (sized like params) and
  // returns dL/dx when want_input_grad is set.
  virtual Tensor backward(const Tensor& x, const Tensor& y, const Tensor& grad_y,
                          std::span<double> param_grad, bool want_input_grad) const = 0;
  virtual std::unique_ptr<Layer> clone() const = 0;

 protected:
  std::size_t fan_in() const;

  LayerSpec spec_;
  Shape in_shape_;
  Shape out_shape_;
  std::vector<double> params_;
};

// Builds a layer for the given input shape. Throws ShapeMismatch when the
// spec cannot consume that shape.
std::unique_ptr<Layer> make_layer(const LayerSpec& spec, const Shape& in_shape);

}  // namespace cwl::nn
