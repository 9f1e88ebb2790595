#include "cwl/nn/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "cwl/error.hpp"

namespace cwl::nn {

Model::Model(Shape input_shape, const std::vector<LayerSpec>& specs, std::uint64_t seed)
    : input_shape_(std::move(input_shape)) {
  std::mt19937_64 rng(seed);
  Shape shape = input_shape_;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    try {
      layers_.push_back(make_layer(specs[i], shape));
    } catch (const Error& e) {
      throw Error(e.code(), "layer " + std::to_string(i) + ": " + e.what());
    }
    layers_.back()->initialize(rng);
    shape = layers_.back()->output_shape();
  }
}

Model::Model(const Model& other)
    : input_shape_(other.input_shape_), frozen_prefix_(other.frozen_prefix_) {
  layers_.reserve(other.layers_.size());
  for (const auto& l : other.layers_) layers_.push_back(l->clone());
}

Model& Model::operator=(const Model& other) {
  if (this != &other) {
    Model copy(other);
    *this = std::move(copy);
  }
  return *this;
}

const Shape& Model::output_shape() const {
  return layers_.empty() ? input_shape_ : layers_.back()->output_shape();
}

std::vector<LayerSpec> Model::specs() const {
  std::vector<LayerSpec> out;
  for (const auto& l : layers_) out.push_back(l->spec());
  return out;
}

void Model::set_frozen_prefix(std::size_t n) {
  if (n > layers_.size()) throw Error("KTooLarge", "frozen prefix exceeds layer count");
  frozen_prefix_ = n;
}

Tensor Model::forward(const Tensor& x) const {
  if (x.shape != input_shape_) {
    throw Error("ShapeMismatch", "layer 0: input shape " + shape_string(x.shape) +
                                     " does not match model input " + shape_string(input_shape_));
  }
  Tensor cur = x;
  for (const auto& l : layers_) cur = l->forward(cur);
  return cur;
}

std::vector<Tensor> Model::forward_trace(const Tensor& x, std::size_t first) const {
  const Shape& expected = first == 0 ? input_shape_ : layers_[first]->input_shape();
  if (x.shape != expected) {
    throw Error("ShapeMismatch", "layer " + std::to_string(first) + ": input shape " +
                                     shape_string(x.shape) + " does not match " +
                                     shape_string(expected));
  }
  std::vector<Tensor> acts;
  acts.reserve(layers_.size() - first + 1);
  acts.push_back(x);
  for (std::size_t i = first; i < layers_.size(); ++i) {
    acts.push_back(layers_[i]->forward(acts.back()));
  }
  return acts;
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l->params().size();
  return n;
}

std::uint64_t Model::checksum(std::size_t begin, std::size_t end) const {
  std::uint64_t h = 1469598103934665603ULL;
  for (std::size_t i = begin; i < end && i < layers_.size(); ++i) {
    for (double p : layers_[i]->params()) {
      const auto bits = std::bit_cast<std::uint64_t>(p);
      for (int b = 0; b < 8; ++b) {
        h ^= (bits >> (8 * b)) & 0xFFU;
        h *= 1099511628211ULL;
      }
    }
  }
  return h;
}

void Model::round_to_storage_precision() {
  for (auto& l : layers_) {
    for (double& p : l->params()) p = static_cast<double>(static_cast<float>(p));
  }
}

// ---------------------------------------------------------------------------

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

std::vector<double> one_hot(int label, std::size_t classes) {
  if (label < 0 || static_cast<std::size_t>(label) >= classes) {
    throw Error("InvalidLabel", "label " + std::to_string(label) + " outside [0, " +
                                    std::to_string(classes) + ")");
  }
  std::vector<double> y(classes, 0.0);
  y[static_cast<std::size_t>(label)] = 1.0;
  return y;
}

double cross_entropy(const Tensor& probs, std::span<const double> y_onehot) {
  if (probs.size() != y_onehot.size()) {
    throw Error("ShapeMismatch", "prediction and target differ in length");
  }
  double loss = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (y_onehot[i] != 0.0) loss -= y_onehot[i] * std::log(std::max(probs[i], 1e-300));
  }
  return loss;
}

Gradients zero_gradients(const Model& model) {
  Gradients g(model.layer_count());
  for (std::size_t i = model.frozen_prefix(); i < model.layer_count(); ++i) {
    g[i].assign(model.layer(i).params().size(), 0.0);
  }
  return g;
}

namespace {

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.begin(), logits.end());
  const double mx = *std::max_element(p.begin(), p.end());
  double sum = 0.0;
  for (double& v : p) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : p) v /= sum;
  return p;
}

bool ends_with_softmax(const Model& m) {
  return m.layer_count() > 0 && m.layer(m.layer_count() - 1).spec().kind == LayerKind::Softmax;
}

// Propagates `grad` (gradient w.r.t. the output of layer top-1) down to
// layer `stop`, accumulating into grads. acts[i - first] is the input of layer i.
void backprop(const Model& m, const std::vector<Tensor>& acts, std::size_t first,
              std::size_t top, Tensor grad, std::size_t stop, Gradients& grads) {
  for (std::size_t i = top; i-- > stop;) {
    const Layer& layer = m.layer(i);
    const bool want_input = i > stop;
    std::span<double> pg;
    if (layer.has_params()) pg = grads[i];
    Tensor next = layer.backward(acts[i - first], acts[i - first + 1], grad, pg, want_input);
    if (!want_input) break;
    grad = std::move(next);
  }
}

// Loss gradient at the logits for one sample; returns the per-sample loss.
double logits_gradient(const Model& m, const std::vector<Tensor>& acts,
                       std::span<const double> y, double scale, Tensor& grad, std::size_t& top) {
  const std::size_t n = m.layer_count();
  Tensor probs;
  if (ends_with_softmax(m)) {
    probs = acts.back();
    top = n - 1;
    grad = Tensor(acts[acts.size() - 2].shape);
  } else {
    probs = Tensor(acts.back().shape, softmax(acts.back().data));
    top = n;
    grad = Tensor(acts.back().shape);
  }
  if (probs.size() != y.size()) {
    throw Error("ShapeMismatch", "target has " + std::to_string(y.size()) +
                                     " classes, model outputs " + std::to_string(probs.size()));
  }
  for (std::size_t k = 0; k < probs.size(); ++k) grad[k] = (probs[k] - y[k]) * scale;
  return cross_entropy(probs, y);
}

void accumulate_sample(const Model& m, const std::vector<Tensor>& acts, std::size_t first,
                       std::span<const double> y, double scale, std::size_t stop,
                       Gradients& grads, double& loss_sum) {
  Tensor grad;
  std::size_t top = 0;
  loss_sum += logits_gradient(m, acts, y, scale, grad, top);
  if (top > stop) backprop(m, acts, first, top, std::move(grad), stop, grads);
}

}  // namespace

Gradients backward_batch(const Model& model, std::span<const Tensor> xs,
                         std::span<const std::vector<double>> ys, double* mean_loss) {
  if (xs.size() != ys.size() || xs.empty()) {
    throw Error("ShapeMismatch", "batch inputs and targets must be non-empty and paired");
  }
  Gradients grads = zero_gradients(model);
  const double scale = 1.0 / static_cast<double>(xs.size());
  double loss_sum = 0.0;
  for (std::size_t s = 0; s < xs.size(); ++s) {
    const auto acts = model.forward_trace(xs[s]);
    accumulate_sample(model, acts, 0, ys[s], scale, model.frozen_prefix(), grads, loss_sum);
  }
  if (mean_loss) *mean_loss = loss_sum * scale;
  return grads;
}

Gradients backward(const Model& model, const Tensor& x, std::span<const double> y_onehot,
                   double* loss) {
  std::vector<double> y(y_onehot.begin(), y_onehot.end());
  return backward_batch(model, std::span<const Tensor>(&x, 1),
                        std::span<const std::vector<double>>(&y, 1), loss);
}

Gradients backward_from_output(const Model& model, const Tensor& x, const Tensor& grad_output) {
  const auto acts = model.forward_trace(x);
  if (grad_output.shape != acts.back().shape) {
    throw Error("ShapeMismatch", "output gradient shape does not match model output");
  }
  Gradients grads = zero_gradients(model);
  if (model.layer_count() > model.frozen_prefix()) {
    backprop(model, acts, 0, model.layer_count(), grad_output, model.frozen_prefix(), grads);
  }
  return grads;
}

// ---------------------------------------------------------------------------

void TrainConfig::validate() const {
  if (!(lr >= 0.0)) throw Error("InvalidConfig", "learning rate must be >= 0");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
    throw Error("InvalidConfig", "Adam betas must lie in (0, 1)");
  }
  if (!(eps > 0.0)) throw Error("InvalidConfig", "Adam epsilon must be > 0");
  if (batch_size < 1 || epochs < 0) throw Error("InvalidConfig", "batch size >= 1, epochs >= 0");
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamMoments& state,
               const TrainConfig& cfg, long t) {
  if (params.size() != grads.size()) {
    throw Error("ShapeMismatch", "parameter and gradient blocks differ in size");
  }
  if (t < 1) throw Error("InvalidConfig", "Adam step index starts at 1");
  if (state.m.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  if (state.m.size() != params.size()) throw Error("ShapeMismatch", "Adam state size mismatch");
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grads[i];
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grads[i] * grads[i];
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    params[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
  }
}

Tensor Model::forward_range(const Tensor& x, std::size_t begin, std::size_t end) const {
  if (begin > end || end > layers_.size()) throw Error("ShapeMismatch", "invalid layer range");
  const Shape& expected = begin == 0 ? input_shape_ : layers_[begin]->input_shape();
  if (x.shape != expected) {
    throw Error("ShapeMismatch", "layer " + std::to_string(begin) + ": input shape " +
                                     shape_string(x.shape) + " does not match " +
                                     shape_string(expected));
  }
  Tensor cur = x;
  for (std::size_t i = begin; i < end; ++i) cur = layers_[i]->forward(cur);
  return cur;
}

namespace {

std::size_t effective_prefix(const Model& model, const TrainConfig& cfg) {
  return std::min(std::max(model.frozen_prefix(), cfg.frozen_prefix), model.layer_count());
}

void check_labels(const Model& model, std::size_t n_inputs, const std::vector<int>& labels,
                  std::size_t declared_classes) {
  if (n_inputs == 0) throw Error("EmptyDataset", "training set is empty");
  if (labels.size() != n_inputs) throw Error("ShapeMismatch", "inputs and labels differ in count");
  const std::size_t classes = shape_size(model.output_shape());
  if (declared_classes != 0 && declared_classes != classes) {
    throw Error("ShapeMismatch", "dataset has " + std::to_string(declared_classes) +
                                     " classes, model outputs " + std::to_string(classes));
  }
  for (int label : labels) {
    if (label < 0 || static_cast<std::size_t>(label) >= classes) {
      throw Error("ShapeMismatch", "label " + std::to_string(label) + " outside model outputs");
    }
  }
}

// Inputs are activations entering layer fp.
TrainHistory train_tail(Model& model, const std::vector<Tensor>& inputs,
                        const std::vector<int>& labels, std::size_t fp, const TrainConfig& cfg) {
  const std::size_t classes = shape_size(model.output_shape());
  std::vector<std::vector<double>> targets;
  targets.reserve(labels.size());
  for (int label : labels) targets.push_back(one_hot(label, classes));

  const std::size_t saved_prefix = model.frozen_prefix();
  model.set_frozen_prefix(fp);

  std::vector<AdamMoments> moments(model.layer_count());
  std::vector<std::size_t> order(inputs.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(cfg.seed);
  const auto batch = static_cast<std::size_t>(cfg.batch_size);
  long step = 0;
  TrainHistory history;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t b0 = 0; b0 < order.size(); b0 += batch) {
      const std::size_t b1 = std::min(order.size(), b0 + batch);
      const double scale = 1.0 / static_cast<double>(b1 - b0);
      Gradients grads = zero_gradients(model);
      double batch_loss = 0.0;
      for (std::size_t s = b0; s < b1; ++s) {
        const std::size_t idx = order[s];
        const auto acts = model.forward_trace(inputs[idx], fp);
        if (argmax(acts.back().data) == static_cast<std::size_t>(labels[idx])) ++correct;
        accumulate_sample(model, acts, fp, targets[idx], scale, fp, grads, batch_loss);
      }
      loss_sum += batch_loss;
      ++step;
      for (std::size_t i = fp; i < model.layer_count(); ++i) {
        Layer& layer = model.layer(i);
        if (!layer.has_params()) continue;
        adam_step(layer.params(), grads[i], moments[i], cfg, step);
      }
    }
    history.loss.push_back(loss_sum / static_cast<double>(inputs.size()));
    history.accuracy.push_back(static_cast<double>(correct) / static_cast<double>(inputs.size()));
  }

  for (std::size_t i = fp; i < model.layer_count(); ++i) {
    for (double& p : model.layer(i).params()) p = static_cast<double>(static_cast<float>(p));
  }
  model.set_frozen_prefix(saved_prefix);
  return history;
}

}  // namespace

TrainHistory train(Model& model, const Dataset& data, const TrainConfig& cfg) {
  cfg.validate();
  check_labels(model, data.size(), data.labels, data.classes);
  const std::size_t fp = effective_prefix(model, cfg);
  if (fp == 0) {
    for (const Tensor& x : data.inputs) {
      if (x.shape != model.input_shape()) {
        throw Error("ShapeMismatch", "layer 0: input shape " + shape_string(x.shape) +
                                         " does not match " + shape_string(model.input_shape()));
      }
    }
    return train_tail(model, data.inputs, data.labels, 0, cfg);
  }
  // Frozen layers are deterministic functions of the input: evaluate once.
  std::vector<Tensor> base;
  base.reserve(data.size());
  for (const Tensor& x : data.inputs) base.push_back(model.forward_range(x, 0, fp));
  return train_tail(model, base, data.labels, fp, cfg);
}

TrainHistory train_from_prefix(Model& model, const std::vector<Tensor>& prefix_outputs,
                               const std::vector<int>& labels, const TrainConfig& cfg) {
  cfg.validate();
  check_labels(model, prefix_outputs.size(), labels, 0);
  const std::size_t fp = effective_prefix(model, cfg);
  const Shape& expected = fp == 0 ? model.input_shape() : model.layer(fp).input_shape();
  for (const Tensor& x : prefix_outputs) {
    if (fp < model.layer_count() && x.shape != expected) {
      throw Error("ShapeMismatch", "layer " + std::to_string(fp) + ": input shape " +
                                       shape_string(x.shape) + " does not match " +
                                       shape_string(expected));
    }
  }
  return train_tail(model, prefix_outputs, labels, fp, cfg);
}

int predict_class(const Model& model, const Tensor& x) {
  return static_cast<int>(argmax(model.forward(x).data));
}

double accuracy(const Model& model, const Dataset& data) {
  if (data.size() == 0) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (predict_class(model, data.inputs[i]) == data.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

std::size_t freeze_boundary(const Model& model, int k_trainable_tail) {
  if (k_trainable_tail < 0) throw Error("KTooLarge", "trainable tail must be >= 0");
  std::vector<std::size_t> parametric;
  for (std::size_t i = 0; i < model.layer_count(); ++i) {
    if (model.layer(i).has_params()) parametric.push_back(i);
  }
  const auto k = static_cast<std::size_t>(k_trainable_tail);
  if (k > parametric.size()) {
    throw Error("KTooLarge", "model has only " + std::to_string(parametric.size()) +
                                 " parametric layers, asked to train " + std::to_string(k));
  }
  if (k == 0) return model.layer_count();
  return parametric[parametric.size() - k];
}

Model pretrain_and_freeze(Model model, const Dataset& surrogate, const TrainConfig& cfg,
                          int k_trainable_tail, TrainHistory* history) {
  const std::size_t boundary = freeze_boundary(model, k_trainable_tail);
  TrainHistory h = train(model, surrogate, cfg);
  if (history) *history = std::move(h);
  model.set_frozen_prefix(boundary);
  return model;
}

// ---------------------------------------------------------------------------
// Checkpoint byte layout (all integers little-endian):
//   char[6]  "CWLNN1"
//   u32      input rank, then rank x u32 dims
//   u32      frozen prefix
//   u32      layer count
//   per layer: u8 kind, i32 out, i32 kernel, i32 stride, i32 size,
//              u64 parameter count, then that many f32 values

namespace {

constexpr char kMagic[6] = {'C', 'W', 'L', 'N', 'N', '1'};

template <typename T>
void put(std::ofstream& out, T value) {
  using U = std::make_unsigned_t<T>;
  auto bits = static_cast<U>(value);
  unsigned char bytes[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get(std::ifstream& in, const std::filesystem::path& path) {
  using U = std::make_unsigned_t<T>;
  unsigned char bytes[sizeof(T)];
  in.read(reinterpret_cast<char*>(bytes), sizeof(T));
  if (!in) throw Error("MalformedCheckpoint", path.string() + ": truncated");
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<U>(bytes[i]) << (8 * i);
  return static_cast<T>(bits);
}

}  // namespace

void save_checkpoint(const Model& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("IoError", "cannot write " + path.string());
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(model.input_shape().size()));
  for (std::size_t d : model.input_shape()) put<std::uint32_t>(out, static_cast<std::uint32_t>(d));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(model.frozen_prefix()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(model.layer_count()));
  for (std::size_t i = 0; i < model.layer_count(); ++i) {
    const Layer& l = model.layer(i);
    const LayerSpec& s = l.spec();
    put<std::uint8_t>(out, static_cast<std::uint8_t>(s.kind));
    put<std::int32_t>(out, s.out);
    put<std::int32_t>(out, s.kernel);
    put<std::int32_t>(out, s.stride);
    put<std::int32_t>(out, s.size);
    put<std::uint64_t>(out, l.params().size());
    for (double p : l.params()) put<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(p)));
  }
  if (!out) throw Error("IoError", "failed writing " + path.string());
}

Model load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("MissingFile", "cannot open " + path.string());
  char magic[6] = {};
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw Error("MalformedCheckpoint", path.string() + ": bad magic header");
  }
  Shape input(get<std::uint32_t>(in, path));
  for (auto& d : input) d = get<std::uint32_t>(in, path);
  const std::size_t frozen = get<std::uint32_t>(in, path);
  const std::size_t n_layers = get<std::uint32_t>(in, path);
  std::vector<LayerSpec> specs(n_layers);
  std::vector<std::vector<double>> params(n_layers);
  for (std::size_t i = 0; i < n_layers; ++i) {
    const auto kind = get<std::uint8_t>(in, path);
    if (kind < 1 || kind > 8) throw Error("MalformedCheckpoint", path.string() + ": bad layer kind");
    specs[i].kind = static_cast<LayerKind>(kind);
    specs[i].out = get<std::int32_t>(in, path);
    specs[i].kernel = get<std::int32_t>(in, path);
    specs[i].stride = get<std::int32_t>(in, path);
    specs[i].size = get<std::int32_t>(in, path);
    const auto count = get<std::uint64_t>(in, path);
    params[i].resize(count);
    for (auto& p : params[i]) {
      p = static_cast<double>(std::bit_cast<float>(get<std::uint32_t>(in, path)));
    }
  }
  Model model(input, specs, 0);
  for (std::size_t i = 0; i < n_layers; ++i) {
    if (model.layer(i).params().size() != params[i].size()) {
      throw Error("MalformedCheckpoint", path.string() + ": layer " + std::to_string(i) +
                                             " parameter count does not match its spec");
    }
    model.layer(i).params() = std::move(params[i]);
  }
  model.set_frozen_prefix(frozen);
  return model;
}

}  // namespace cwl::nn
