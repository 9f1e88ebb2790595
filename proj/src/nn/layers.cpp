#include "cwl/nn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cwl/error.hpp"

namespace cwl::nn {

Tensor::Tensor(Shape s, std::vector<double> values) : shape(std::move(s)), data(std::move(values)) {
  if (shape_size(shape) != data.size()) {
    throw Error("ShapeMismatch", "tensor data does not match shape " + shape_string(shape));
  }
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ')';
  return os.str();
}

void LayerSpec::validate() const {
  if (kernel < 1 || stride < 1 || size < 1) {
    throw Error("InvalidLayer", "kernel, stride and size must be >= 1");
  }
  if ((kind == LayerKind::Conv1D || kind == LayerKind::Conv2D || kind == LayerKind::Dense) &&
      out < 1) {
    throw Error("InvalidLayer", "output width must be >= 1");
  }
}

std::string to_string(const LayerSpec& s) {
  switch (s.kind) {
    case LayerKind::Conv1D:
      return "Conv1D(" + std::to_string(s.out) + ", k=" + std::to_string(s.kernel) +
             ", s=" + std::to_string(s.stride) + ")";
    case LayerKind::Conv2D:
      return "Conv2D(" + std::to_string(s.out) + ", k=" + std::to_string(s.kernel) +
             ", s=" + std::to_string(s.stride) + ")";
    case LayerKind::MaxPool1D: return "MaxPool1D(" + std::to_string(s.size) + ")";
    case LayerKind::MaxPool2D: return "MaxPool2D(" + std::to_string(s.size) + ")";
    case LayerKind::ReLU: return "ReLU";
    case LayerKind::Flatten: return "Flatten";
    case LayerKind::Dense: return "Dense(" + std::to_string(s.out) + ")";
    case LayerKind::Softmax: return "Softmax";
  }
  return "?";
}

std::size_t Layer::fan_in() const {
  switch (spec_.kind) {
    case LayerKind::Conv1D: return in_shape_[0] * spec_.kernel;
    case LayerKind::Conv2D: return in_shape_[0] * spec_.kernel * spec_.kernel;
    case LayerKind::Dense: return in_shape_[0];
    default: return 0;
  }
}

// He-uniform weights, zero biases. Draws are rounded to float so that the
// initial model is exactly representable in a checkpoint.
void Layer::initialize(std::mt19937_64& rng) {
  if (params_.empty()) return;
  const std::size_t n_bias = static_cast<std::size_t>(spec_.out);
  const std::size_t n_weight = params_.size() - n_bias;
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in()));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (std::size_t i = 0; i < n_weight; ++i) {
    params_[i] = static_cast<double>(static_cast<float>(dist(rng)));
  }
  std::fill(params_.begin() + static_cast<std::ptrdiff_t>(n_weight), params_.end(), 0.0);
}

namespace {

[[noreturn]] void bad_input(const LayerSpec& spec, const Shape& in, const char* need) {
  throw Error("ShapeMismatch", to_string(spec) + " expects " + need + ", got " + shape_string(in));
}

// Parameter layout: weights [out][in_ch][k] then bias [out].
class Conv1D final : public Layer {
 public:
  Conv1D(const LayerSpec& spec, const Shape& in) : Layer(spec, in) {
    if (in.size() != 2) bad_input(spec, in, "(channels, length)");
    if (in[1] < static_cast<std::size_t>(spec.kernel)) bad_input(spec, in, "length >= kernel");
    out_len_ = (in[1] - spec.kernel) / spec.stride + 1;
    out_shape_ = {static_cast<std::size_t>(spec.out), out_len_};
    params_.assign(spec.out * in[0] * spec.kernel + spec.out, 0.0);
  }

  Tensor forward(const Tensor& x) const override {
    const std::size_t c_in = in_shape_[0], len = in_shape_[1];
    const std::size_t k = spec_.kernel, s = spec_.stride, n_out = spec_.out;
    Tensor y(out_shape_);
    const double* w = params_.data();
    const double* bias = w + n_out * c_in * k;
    for (std::size_t o = 0; o < n_out; ++o) {
      double* yo = y.data.data() + o * out_len_;
      std::fill(yo, yo + out_len_, bias[o]);
      for (std::size_t c = 0; c < c_in; ++c) {
        const double* xc = x.data.data() + c * len;
        const double* woc = w + (o * c_in + c) * k;
        for (std::size_t t = 0; t < out_len_; ++t) {
          const double* xt = xc + t * s;
          double acc = 0.0;
          for (std::size_t j = 0; j < k; ++j) acc += woc[j] * xt[j];
          yo[t] += acc;
        }
      }
    }
    return y;
  }

  Tensor backward(const Tensor& x, const Tensor&, const Tensor& g, std::span<double> pg,
                  bool want_input_grad) const override {
    const std::size_t c_in = in_shape_[0], len = in_shape_[1];
    const std::size_t k = spec_.kernel, s = spec_.stride, n_out = spec_.out;
    const double* w = params_.data();
    double* dw = pg.data();
    double* db = dw + n_out * c_in * k;
    Tensor dx;
    if (want_input_grad) dx = Tensor(in_shape_);
    for (std::size_t o = 0; o < n_out; ++o) {
      const double* go = g.data.data() + o * out_len_;
      double gsum = 0.0;
      for (std::size_t t = 0; t < out_len_; ++t) gsum += go[t];
      db[o] += gsum;
      for (std::size_t c = 0; c < c_in; ++c) {
        const double* xc = x.data.data() + c * len;
        double* dwoc = dw + (o * c_in + c) * k;
        const double* woc = w + (o * c_in + c) * k;
        for (std::size_t t = 0; t < out_len_; ++t) {
          const double gt = go[t];
          const double* xt = xc + t * s;
          for (std::size_t j = 0; j < k; ++j) dwoc[j] += gt * xt[j];
        }
        if (want_input_grad) {
          double* dxc = dx.data.data() + c * len;
          for (std::size_t t = 0; t < out_len_; ++t) {
            const double gt = go[t];
            double* dxt = dxc + t * s;
            for (std::size_t j = 0; j < k; ++j) dxt[j] += gt * woc[j];
          }
        }
      }
    }
    return dx;
  }

  std::unique_ptr<Layer> clone() const override { return std::make_unique<Conv1D>(*this); }

 private:
  std::size_t out_len_ = 0;
};

// Parameter layout: weights [out][in_ch][kh][kw] then bias [out].
class Conv2D final : public Layer {
 public:
  Conv2D(const LayerSpec& spec, const Shape& in) : Layer(spec, in) {
    if (in.size() != 3) bad_input(spec, in, "(channels, height, width)");
    const auto k = static_cast<std::size_t>(spec.kernel);
    if (in[1] < k || in[2] < k) bad_input(spec, in, "spatial size >= kernel");
    oh_ = (in[1] - k) / spec.stride + 1;
    ow_ = (in[2] - k) / spec.stride + 1;
    out_shape_ = {static_cast<std::size_t>(spec.out), oh_, ow_};
    params_.assign(spec.out * in[0] * k * k + spec.out, 0.0);
  }

  Tensor forward(const Tensor& x) const override {
    const std::size_t c_in = in_shape_[0], h = in_shape_[1], wd = in_shape_[2];
    const std::size_t k = spec_.kernel, s = spec_.stride, n_out = spec_.out;
    (void)h;
    Tensor y(out_shape_);
    const double* w = params_.data();
    const double* bias = w + n_out * c_in * k * k;
    for (std::size_t o = 0; o < n_out; ++o) {
      double* yo = y.data.data() + o * oh_ * ow_;
      std::fill(yo, yo + oh_ * ow_, bias[o]);
      for (std::size_t c = 0; c < c_in; ++c) {
        const double* xc = x.data.data() + c * in_shape_[1] * wd;
        const double* woc = w + (o * c_in + c) * k * k;
        for (std::size_t i = 0; i < oh_; ++i) {
          for (std::size_t j = 0; j < ow_; ++j) {
            double acc = 0.0;
            for (std::size_t a = 0; a < k; ++a) {
              const double* xr = xc + (i * s + a) * wd + j * s;
              const double* wr = woc + a * k;
              for (std::size_t b = 0; b < k; ++b) acc += wr[b] * xr[b];
            }
            yo[i * ow_ + j] += acc;
          }
        }
      }
    }
    return y;
  }

  Tensor backward(const Tensor& x, const Tensor&, const Tensor& g, std::span<double> pg,
                  bool want_input_grad) const override {
    const std::size_t c_in = in_shape_[0], wd = in_shape_[2];
    const std::size_t k = spec_.kernel, s = spec_.stride, n_out = spec_.out;
    const double* w = params_.data();
    double* dw = pg.data();
    double* db = dw + n_out * c_in * k * k;
    Tensor dx;
    if (want_input_grad) dx = Tensor(in_shape_);
    for (std::size_t o = 0; o < n_out; ++o) {
      const double* go = g.data.data() + o * oh_ * ow_;
      double gsum = 0.0;
      for (std::size_t p = 0; p < oh_ * ow_; ++p) gsum += go[p];
      db[o] += gsum;
      for (std::size_t c = 0; c < c_in; ++c) {
        const double* xc = x.data.data() + c * in_shape_[1] * wd;
        double* dwoc = dw + (o * c_in + c) * k * k;
        const double* woc = w + (o * c_in + c) * k * k;
        double* dxc = want_input_grad ? dx.data.data() + c * in_shape_[1] * wd : nullptr;
        for (std::size_t i = 0; i < oh_; ++i) {
          for (std::size_t j = 0; j < ow_; ++j) {
            const double gij = go[i * ow_ + j];
            if (gij == 0.0) continue;
            for (std::size_t a = 0; a < k; ++a) {
              const double* xr = xc + (i * s + a) * wd + j * s;
              double* dwr = dwoc + a * k;
              for (std::size_t b = 0; b < k; ++b) dwr[b] += gij * xr[b];
              if (dxc) {
                double* dxr = dxc + (i * s + a) * wd + j * s;
                const double* wr = woc + a * k;
                for (std::size_t b = 0; b < k; ++b) dxr[b] += gij * wr[b];
              }
            }
          }
        }
      }
    }
    return dx;
  }

  std::unique_ptr<Layer> clone() const override { return std::make_unique<Conv2D>(*this); }

 private:
  std::size_t oh_ = 0;
  std::size_t ow_ = 0;
};

// Non-overlapping max pooling; ties route the gradient to the first maximum.
class MaxPool1D final : public Layer {
 public:
  MaxPool1D(const LayerSpec& spec, const Shape& in) : Layer(spec, in) {
    if (in.size() != 2) bad_input(spec, in, "(channels, length)");
    if (in[1] < static_cast<std::size_t>(spec.size)) bad_input(spec, in, "length >= pool size");
    out_shape_ = {in[0], in[1] / spec.size};
  }

  Tensor forward(const Tensor& x) const override {
    Tensor y(out_shape_);
    const std::size_t len = in_shape_[1], n = out_shape_[1], p = spec_.size;
    for (std::size_t c = 0; c < in_shape_[0]; ++c) {
      for (std::size_t t = 0; t < n; ++t) {
        const double* xt = x.data.data() + c * len + t * p;
        y.data[c * n + t] = *std::max_element(xt, xt + p);
      }
    }
    return y;
  }

  Tensor backward(const Tensor& x, const Tensor&, const Tensor& g, std::span<double>,
                  bool want_input_grad) const override {
    if (!want_input_grad) return {};
    Tensor dx(in_shape_);
    const std::size_t len = in_shape_[1], n = out_shape_[1], p = spec_.size;
    for (std::size_t c = 0; c < in_shape_[0]; ++c) {
      for (std::size_t t = 0; t < n; ++t) {
        const double* xt = x.data.data() + c * len + t * p;
        const std::size_t arg = static_cast<std::size_t>(std::max_element(xt, xt + p) - xt);
        dx.data[c * len + t * p + arg] += g.data[c * n + t];
      }
    }
    return dx;
  }

  std::unique_ptr<Layer> clone() const override { return std::make_unique<MaxPool1D>(*this); }
};

class MaxPool2D final : public Layer {
 public:
  MaxPool2D(const LayerSpec& spec, const Shape& in) : Layer(spec, in) {
    if (in.size() != 3) bad_input(spec, in, "(channels, height, width)");
    const auto p = static_cast<std::size_t>(spec.size);
    if (in[1] < p || in[2] < p) bad_input(spec, in, "spatial size >= pool size");
    out_shape_ = {in[0], in[1] / p, in[2] / p};
  }

  Tensor forward(const Tensor& x) const override {
    Tensor y(out_shape_);
    for_each_window(x, [&](std::size_t out_idx, std::size_t in_idx) { y.data[out_idx] = x.data[in_idx]; });
    return y;
  }

  Tensor backward(const Tensor& x, const Tensor&, const Tensor& g, std::span<double>,
                  bool want_input_grad) const override {
    if (!want_input_grad) return {};
    Tensor dx(in_shape_);
    for_each_window(x, [&](std::size_t out_idx, std::size_t in_idx) { dx.data[in_idx] += g.data[out_idx]; });
    return dx;
  }

  std::unique_ptr<Layer> clone() const override { return std::make_unique<MaxPool2D>(*this); }

 private:
  // Calls fn(output index, index of the window's first maximum).
  template <typename Fn>
  void for_each_window(const Tensor& x, Fn&& fn) const {
    const std::size_t h = in_shape_[1], w = in_shape_[2];
    const std::size_t oh = out_shape_[1], ow = out_shape_[2], p = spec_.size;
    for (std::size_t c = 0; c < in_shape_[0]; ++c) {
      for (std::size_t i = 0; i < oh; ++i) {
        for (std::size_t j = 0; j < ow; ++j) {
          std::size_t best = c * h * w + (i * p) * w + j * p;
          for (std::size_t a = 0; a < p; ++a) {
            for (std::size_t b = 0; b < p; ++b) {
              const std::size_t idx = c * h * w + (i * p + a) * w + j * p + b;
              if (x.data[idx] > x.data[best]) best = idx;
            }
          }
          fn(c * oh * ow + i * ow + j, best);
        }
      }
    }
  }
};

class ReLU final : public Layer {
 public:
  ReLU(const LayerSpec& spec, const Shape& in) : Layer(spec, in) { out_shape_ = in; }

  Tensor forward(const Tensor& x) const override {
    Tensor y = x;
    for (double& v : y.data) v = v > 0.0 ? v : 0.0;
    return y;
  }

  Tensor backward(const Tensor& x, const Tensor&, const Tensor& g, std::span<double>,
                  bool want_input_grad) const override {
    if (!want_input_grad) return {};
    Tensor dx(in_shape_);
    for (std::size_t i = 0; i < x.size(); ++i) dx.data[i] = x.data[i] > 0.0 ? g.data[i] : 0.0;
    return dx;
  }

  std::unique_ptr<Layer> clone() const override { return std::make_unique<ReLU>(*this); }
};

class Flatten final : public Layer {
 public:
  Flatten(const LayerSpec& spec, const Shape& in) : Layer(spec, in) {
    out_shape_ = {shape_size(in)};
  }

  Tensor forward(const Tensor& x) const override { return Tensor(out_shape_, x.data); }

  Tensor backward(const Tensor&, const Tensor&, const Tensor& g, std::span<double>,
                  bool want_input_grad) const override {
    if (!want_input_grad) return {};
    return Tensor(in_shape_, g.data);
  }

  std::unique_ptr<Layer> clone() const override { return std::make_unique<Flatten>(*this); }
};

// Parameter layout: weights [out][in] then bias [out].
class Dense final : public Layer {
 public:
  Dense(const LayerSpec& spec, const Shape& in) : Layer(spec, in) {
    if (in.size() != 1) bad_input(spec, in, "a flat vector");
    out_shape_ = {static_cast<std::size_t>(spec.out)};
    params_.assign(spec.out * in[0] + spec.out, 0.0);
  }

  Tensor forward(const Tensor& x) const override {
    const std::size_t n_in = in_shape_[0], n_out = spec_.out;
    Tensor y(out_shape_);
    const double* w = params_.data();
    const double* bias = w + n_out * n_in;
    for (std::size_t o = 0; o < n_out; ++o) {
      const double* wo = w + o * n_in;
      double acc = 0.0;
      for (std::size_t i = 0; i < n_in; ++i) acc += wo[i] * x.data[i];
      y.data[o] = acc + bias[o];
    }
    return y;
  }

  Tensor backward(const Tensor& x, const Tensor&, const Tensor& g, std::span<double> pg,
                  bool want_input_grad) const override {
    const std::size_t n_in = in_shape_[0], n_out = spec_.out;
    const double* w = params_.data();
    double* dw = pg.data();
    double* db = dw + n_out * n_in;
    Tensor dx;
    if (want_input_grad) dx = Tensor(in_shape_);
    for (std::size_t o = 0; o < n_out; ++o) {
      const double go = g.data[o];
      db[o] += go;
      if (go == 0.0) continue;
      double* dwo = dw + o * n_in;
      for (std::size_t i = 0; i < n_in; ++i) dwo[i] += go * x.data[i];
      if (want_input_grad) {
        const double* wo = w + o * n_in;
        for (std::size_t i = 0; i < n_in; ++i) dx.data[i] += go * wo[i];
      }
    }
    return dx;
  }

  std::unique_ptr<Layer> clone() const override { return std::make_unique<Dense>(*this); }
};

class Softmax final : public Layer {
 public:
  Softmax(const LayerSpec& spec, const Shape& in) : Layer(spec, in) {
    if (in.size() != 1) bad_input(spec, in, "a flat vector");
    out_shape_ = in;
  }

  Tensor forward(const Tensor& x) const override {
    Tensor y = x;
    const double mx = *std::max_element(y.data.begin(), y.data.end());
    double sum = 0.0;
    for (double& v : y.data) {
      v = std::exp(v - mx);
      sum += v;
    }
    for (double& v : y.data) v /= sum;
    return y;
  }

  Tensor backward(const Tensor&, const Tensor& y, const Tensor& g, std::span<double>,
                  bool want_input_grad) const override {
    if (!want_input_grad) return {};
    double dot = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) dot += g.data[i] * y.data[i];
    Tensor dx(in_shape_);
    for (std::size_t i = 0; i < y.size(); ++i) dx.data[i] = y.data[i] * (g.data[i] - dot);
    return dx;
  }

  std::unique_ptr<Layer> clone() const override { return std::make_unique<Softmax>(*this); }
};

}  // namespace

std::unique_ptr<Layer> make_layer(const LayerSpec& spec, const Shape& in_shape) {
  spec.validate();
  switch (spec.kind) {
    case LayerKind::Conv1D: return std::make_unique<Conv1D>(spec, in_shape);
    case LayerKind::Conv2D: return std::make_unique<Conv2D>(spec, in_shape);
    case LayerKind::MaxPool1D: return std::make_unique<MaxPool1D>(spec, in_shape);
    case LayerKind::MaxPool2D: return std::make_unique<MaxPool2D>(spec, in_shape);
    case LayerKind::ReLU: return std::make_unique<ReLU>(spec, in_shape);
    case LayerKind::Flatten: return std::make_unique<Flatten>(spec, in_shape);
    case LayerKind::Dense: return std::make_unique<Dense>(spec, in_shape);
    case LayerKind::Softmax: return std::make_unique<Softmax>(spec, in_shape);
  }
  throw Error("InvalidLayer", "unknown layer kind");
}

}  // namespace cwl::nn
