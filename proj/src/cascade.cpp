#include "cwl/cascade.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <numeric>
#include <sstream>

#include "cwl/baselines.hpp"
#include "cwl/csv.hpp"
#include "cwl/error.hpp"
#include "cwl/seed.hpp"

namespace cwl {

using nn::LayerSpec;
using nn::Tensor;

std::vector<LayerSpec> default_stage1_arch() {
  return {LayerSpec::conv2d(8, 5, 2), LayerSpec::relu(),      LayerSpec::maxpool2d(2),
          LayerSpec::conv2d(16, 3, 2), LayerSpec::relu(),     LayerSpec::flatten(),
          LayerSpec::dense(32),        LayerSpec::relu(),     LayerSpec::dense(2),
          LayerSpec::softmax()};
}

std::vector<LayerSpec> default_stage2_arch() {
  return {LayerSpec::conv1d(16, 7, 2), LayerSpec::relu(),    LayerSpec::maxpool1d(2),
          LayerSpec::conv1d(32, 5, 2), LayerSpec::relu(),    LayerSpec::maxpool1d(2),
          LayerSpec::flatten(),        LayerSpec::dense(64), LayerSpec::relu(),
          LayerSpec::dense(5),         LayerSpec::softmax()};
}

void CascadeModel::validate() const {
  if (!trained()) throw Error("ModelNotTrained", "cascade stages are not trained");
  if (nn::shape_size(stage1.output_shape()) != kNumBinaryLabels) {
    throw Error("ShapeMismatch", "stage 1 must output 2 classes");
  }
  if (nn::shape_size(stage2.output_shape()) != kNumTaskLabels) {
    throw Error("ShapeMismatch", "stage 2 must output 5 classes");
  }
}

Tensor image_tensor(const GrayImage& image) {
  Tensor t({1, static_cast<std::size_t>(image.height), static_cast<std::size_t>(image.width)});
  for (std::size_t i = 0; i < image.pixels.size(); ++i) t[i] = image.pixels[i] / 255.0;
  return t;
}

Tensor signal_tensor(const FeatureWindow& w) { return Tensor({1, w.vector.size()}, w.vector); }

CascadePrediction gate(const std::array<double, 2>& stage1_probs, const nn::Model& stage2,
                       const Tensor& signal, GateCounter* counter) {
  CascadePrediction p;
  p.stage1_probs = stage1_probs;
  if (counter) ++counter->stage1_calls;
  if (nn::argmax(stage1_probs) == index_of(BinaryLabel::NoTask)) {
    p.label = TaskLabel::NoTask;
    return p;
  }
  if (counter) {
    ++counter->stage1_positive;
    ++counter->stage2_calls;
  }
  const Tensor out = stage2.forward(signal);
  if (out.size() != kNumTaskLabels) throw Error("ShapeMismatch", "stage 2 must output 5 classes");
  std::copy(out.data.begin(), out.data.end(), p.stage2_probs.begin());
  p.stage2_invoked = true;
  // NoTask is the last index and is excluded here.
  p.label = static_cast<TaskLabel>(nn::argmax(std::span<const double>(out.data.data(), 4)));
  return p;
}

CascadePrediction predict(const CascadeModel& model, const FeatureWindow& w, GateCounter* counter) {
  model.validate();
  if (w.vector.size() != nn::shape_size(model.stage2.input_shape())) {
    throw Error("ShapeMismatch", "window length " + std::to_string(w.vector.size()) +
                                     " does not match the stage-2 input");
  }
  const Tensor s1 = model.stage1.forward(image_tensor(scalogram_image(*model.bank, w.vector)));
  return gate({s1[0], s1[1]}, model.stage2, signal_tensor(w), counter);
}

// ---------------------------------------------------------------------------

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> names)
    : class_names(std::move(names)),
      counts(class_names.size(), std::vector<double>(class_names.size(), 0.0)) {}

void ConfusionMatrix::add(std::size_t truth, std::size_t predicted, double weight) {
  if (truth >= size() || predicted >= size()) throw Error("ShapeMismatch", "class index out of range");
  counts[truth][predicted] += weight;
}

double ConfusionMatrix::total() const {
  double t = 0.0;
  for (const auto& row : counts) t += std::accumulate(row.begin(), row.end(), 0.0);
  return t;
}

double ConfusionMatrix::row_sum(std::size_t k) const {
  return std::accumulate(counts[k].begin(), counts[k].end(), 0.0);
}

double ConfusionMatrix::col_sum(std::size_t k) const {
  double s = 0.0;
  for (const auto& row : counts) s += row[k];
  return s;
}

double ConfusionMatrix::accuracy() const {
  const double t = total();
  if (t == 0.0) return 0.0;
  double diag = 0.0;
  for (std::size_t k = 0; k < size(); ++k) diag += counts[k][k];
  return diag / t;
}

double ConfusionMatrix::precision(std::size_t k) const {
  const double c = col_sum(k);
  return c == 0.0 ? 0.0 : counts[k][k] / c;
}

double ConfusionMatrix::recall(std::size_t k) const {
  const double r = row_sum(k);
  return r == 0.0 ? 0.0 : counts[k][k] / r;
}

Metrics metrics_of(const ConfusionMatrix& cm) {
  Metrics m;
  m.accuracy = cm.accuracy();
  for (std::size_t k = 0; k < cm.size(); ++k) {
    m.precision.push_back(cm.precision(k));
    m.recall.push_back(cm.recall(k));
  }
  return m;
}

ConfusionMatrix confusion_from(const std::vector<int>& truth, const std::vector<int>& predicted,
                               std::vector<std::string> names) {
  if (truth.empty()) throw Error("EmptyInput", "nothing to evaluate");
  if (truth.size() != predicted.size()) throw Error("ShapeMismatch", "label counts differ");
  ConfusionMatrix cm(std::move(names));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    cm.add(static_cast<std::size_t>(truth[i]), static_cast<std::size_t>(predicted[i]));
  }
  return cm;
}

std::vector<std::string> task_class_names() {
  std::vector<std::string> names;
  for (TaskLabel l : kAllTaskLabels) names.emplace_back(to_string(l));
  return names;
}

std::vector<std::string> binary_class_names() {
  return {std::string(to_string(BinaryLabel::NoTask)), std::string(to_string(BinaryLabel::CWL))};
}

CascadeEvaluation evaluate(const CascadeModel& model, const std::vector<FeatureWindow>& windows) {
  if (windows.empty()) throw Error("EmptyInput", "no windows to evaluate");
  model.validate();
  CascadeEvaluation ev{ConfusionMatrix(task_class_names()), ConfusionMatrix(binary_class_names()), {}};
  for (const auto& w : windows) {
    const CascadePrediction p = predict(model, w, &ev.counter);
    ev.multiclass.add(index_of(w.task_label), index_of(p.label));
    ev.binary.add(index_of(w.binary_label), nn::argmax(p.stage1_probs));
  }
  return ev;
}

ModelSelection parse_model_selection(std::string_view list) {
  ModelSelection m{false, false, false, false};
  for (const std::string& name : csv::split(list, ',')) {
    if (name == "tl") m.tl = true;
    else if (name == "cnn1d") m.cnn1d = true;
    else if (name == "elm") m.elm = true;
    else if (name == "melm") m.melm = true;
    else if (name == "cascade") m.tl = m.cnn1d = true;
    else throw Error("InvalidConfig", "unknown model '" + name + "' (tl, cnn1d, cascade, elm, melm)");
  }
  if (!m.tl && !m.cnn1d && !m.elm && !m.melm) throw Error("InvalidConfig", "no models selected");
  return m;
}

CascadeConfig::CascadeConfig() {
  pretrain_train.epochs = 10;
  stage1.epochs = 50;
  stage2.epochs = 80;
}

const ResultRow* ExperimentReport::find_mean(std::string_view model, std::string_view task,
                                             std::string_view split) const {
  for (const auto& r : mean) {
    if (r.model == model && r.task == task && r.split == split) return &r;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

ResultRow make_row(std::string model, std::string task, std::string split, ConfusionMatrix cm) {
  ResultRow r{std::move(model), std::move(task), std::move(split), metrics_of(cm), std::move(cm)};
  return r;
}

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& x, const std::vector<std::size_t>& idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), x.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(idx[i]));
  return out;
}

std::vector<ResultRow> average_rows(const std::vector<RepeatReport>& repeats) {
  std::vector<ResultRow> mean;
  if (repeats.empty()) return mean;
  const double scale = 1.0 / static_cast<double>(repeats.size());
  for (std::size_t j = 0; j < repeats.front().rows.size(); ++j) {
    const ResultRow& first = repeats.front().rows[j];
    ResultRow acc{first.model, first.task, first.split, Metrics{}, ConfusionMatrix(first.confusion.class_names)};
    acc.metrics.precision.assign(first.metrics.precision.size(), 0.0);
    acc.metrics.recall.assign(first.metrics.recall.size(), 0.0);
    for (const auto& rep : repeats) {
      const ResultRow& r = rep.rows[j];
      acc.metrics.accuracy += scale * r.metrics.accuracy;
      for (std::size_t k = 0; k < r.metrics.precision.size(); ++k) {
        acc.metrics.precision[k] += scale * r.metrics.precision[k];
        acc.metrics.recall[k] += scale * r.metrics.recall[k];
      }
      for (std::size_t a = 0; a < r.confusion.size(); ++a) {
        for (std::size_t b = 0; b < r.confusion.size(); ++b) {
          acc.confusion.counts[a][b] += scale * r.confusion.counts[a][b];
        }
      }
    }
    mean.push_back(std::move(acc));
  }
  return mean;
}

}  // namespace

ExperimentReport run_experiment(const std::vector<FeatureWindow>& dataset,
                                const CascadeConfig& cfg, int n_repeats,
                                const ModelSelection& models, const ProgressLog& log) {
  if (n_repeats < 1) throw Error("InvalidConfig", "repeats must be >= 1");
  if (dataset.empty()) throw Error("EmptyDataset", "no windows");
  auto say = [&](const std::string& msg) {
    if (log) log(msg);
  };
  const std::size_t n = dataset.size();
  const std::size_t len = dataset.front().vector.size();
  for (const auto& w : dataset) {
    if (w.vector.size() != len) throw Error("ShapeMismatch", "feature vectors differ in length");
  }
  std::vector<int> task_y(n), bin_y(n);
  for (std::size_t i = 0; i < n; ++i) {
    task_y[i] = static_cast<int>(index_of(dataset[i].task_label));
    bin_y[i] = static_cast<int>(index_of(dataset[i].binary_label));
  }

  ExperimentReport report;

  // Stage-1 feature extractor: pretrain on the surrogate texture task once,
  // then cache the frozen-prefix activations of every window.
  auto bank = std::make_shared<const MorletBank>(cfg.cwt, cfg.signal_fs_hz);
  nn::Model pretrained;
  std::vector<Tensor> stage1_features;
  std::size_t fp = 0;
  if (models.tl) {
    const auto t0 = Clock::now();
    PretrainConfig pc = cfg.pretrain;
    pc.signal_length = len;
    pc.seed = derive_seed(cfg.seed, "pretrain-data");
    nn::Dataset surrogate;
    surrogate.classes = 2;
    for (const auto& s : generate_pretraining_set(pc, *bank)) {
      surrogate.inputs.push_back(image_tensor(s.image));
      surrogate.labels.push_back(s.label);
    }
    nn::Model init({1, static_cast<std::size_t>(cfg.cwt.image_h), static_cast<std::size_t>(cfg.cwt.image_w)},
                   cfg.stage1_arch, derive_seed(cfg.seed, "stage1-init"));
    nn::TrainConfig tc = cfg.pretrain_train;
    tc.seed = derive_seed(cfg.seed, "pretrain");
    pretrained = nn::pretrain_and_freeze(std::move(init), surrogate, tc, cfg.trainable_tail,
                                         &report.pretrain_history);
    fp = pretrained.frozen_prefix();
    report.pretrain_frozen_checksum = pretrained.checksum(0, fp);
    say("stage1 pretrained: surrogate accuracy " +
        csv::format_sig(report.pretrain_history.accuracy.empty() ? 0.0 : report.pretrain_history.accuracy.back(), 4));
    stage1_features.reserve(n);
    for (const auto& w : dataset) {
      stage1_features.push_back(pretrained.forward_range(image_tensor(scalogram_image(*bank, w.vector)), 0, fp));
    }
    report.pretrain_seconds = seconds_since(t0);
    say("stage1 features cached for " + std::to_string(n) + " windows");
  }

  std::vector<Tensor> signals;
  if (models.cnn1d) {
    signals.reserve(n);
    for (const auto& w : dataset) signals.push_back(signal_tensor(w));
  }
  Eigen::MatrixXd x_all;
  if (models.elm || models.melm) {
    x_all.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(len));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < len; ++j) x_all(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = dataset[i].vector[j];
    }
  }

  for (int r = 0; r < n_repeats; ++r) {
    RepeatReport rep;
    rep.repeat = r;
    rep.seed = cfg.seed + static_cast<std::uint64_t>(r);
    const auto [train_idx, test_idx] = split_indices(dataset, cfg.train_fraction, rep.seed);
    const std::array<std::pair<const char*, const std::vector<std::size_t>*>, 2> splits = {
        {{"train", &train_idx}, {"test", &test_idx}}};

    nn::Model stage1;
    if (models.tl) {
      stage1 = pretrained;
      nn::TrainConfig tc = cfg.stage1;
      tc.seed = derive_seed(rep.seed, "stage1");
      std::vector<Tensor> in;
      std::vector<int> labels;
      for (std::size_t i : train_idx) {
        in.push_back(stage1_features[i]);
        labels.push_back(bin_y[i]);
      }
      const auto t0 = Clock::now();
      rep.stage1_history = nn::train_from_prefix(stage1, in, labels, tc);
      rep.fit_seconds["tl"] = seconds_since(t0);
      rep.stage1_frozen_checksum = stage1.checksum(0, fp);
      for (const auto& [split, idx] : splits) {
        ConfusionMatrix cm(binary_class_names());
        for (std::size_t i : *idx) {
          const Tensor p = stage1.forward_range(stage1_features[i], fp, stage1.layer_count());
          cm.add(static_cast<std::size_t>(bin_y[i]), nn::argmax(p.data));
        }
        rep.rows.push_back(make_row("tl", "binary", split, std::move(cm)));
      }
    }

    nn::Model stage2;
    if (models.cnn1d) {
      stage2 = nn::Model({1, len}, cfg.stage2_arch, derive_seed(rep.seed, "stage2-init"));
      nn::TrainConfig tc = cfg.stage2;
      tc.seed = derive_seed(rep.seed, "stage2");
      nn::Dataset ds;
      ds.classes = kNumTaskLabels;
      for (std::size_t i : train_idx) {
        ds.inputs.push_back(signals[i]);
        ds.labels.push_back(task_y[i]);
      }
      const auto t0 = Clock::now();
      rep.stage2_history = nn::train(stage2, ds, tc);
      rep.fit_seconds["cnn1d"] = seconds_since(t0);
      for (const auto& [split, idx] : splits) {
        ConfusionMatrix multi(task_class_names());
        ConfusionMatrix bin(binary_class_names());
        for (std::size_t i : *idx) {
          const auto k = nn::argmax(stage2.forward(signals[i]).data);
          multi.add(static_cast<std::size_t>(task_y[i]), k);
          bin.add(static_cast<std::size_t>(bin_y[i]), index_of(binary_of(static_cast<TaskLabel>(k))));
        }
        rep.rows.push_back(make_row("cnn1d", "binary", split, std::move(bin)));
        rep.rows.push_back(make_row("cnn1d", "multiclass", split, std::move(multi)));
      }
    }

    if (models.cascade()) {
      for (const auto& [split, idx] : splits) {
        ConfusionMatrix cm(task_class_names());
        GateCounter counter;
        for (std::size_t i : *idx) {
          const Tensor p1 = stage1.forward_range(stage1_features[i], fp, stage1.layer_count());
          const CascadePrediction p = gate({p1[0], p1[1]}, stage2, signals[i], &counter);
          cm.add(static_cast<std::size_t>(task_y[i]), index_of(p.label));
        }
        if (std::string_view(split) == "test") rep.test_gating = counter;
        rep.rows.push_back(make_row("cascade", "multiclass", split, std::move(cm)));
      }
    }

    if (models.elm || models.melm) {
      const Eigen::MatrixXd x_tr = rows_of(x_all, train_idx);
      std::vector<int> ytr_task, ytr_bin;
      for (std::size_t i : train_idx) {
        ytr_task.push_back(task_y[i]);
        ytr_bin.push_back(bin_y[i]);
      }
      const BaselineConfig& bc = cfg.baselines;
      std::vector<Eigen::Index> dims(bc.melm_layers.begin(), bc.melm_layers.end());
      for (const char* task : {"binary", "multiclass"}) {
        const bool binary = std::string_view(task) == "binary";
        const auto& y_tr = binary ? ytr_bin : ytr_task;
        const auto& y_all = binary ? bin_y : task_y;
        const Eigen::Index classes = binary ? 2 : 5;
        const Eigen::MatrixXd y1 = one_hot_matrix(y_tr, classes);
        auto record = [&](const std::string& name, const auto& model) {
          for (const auto& [split, idx] : splits) {
            const auto pred = model.predict(rows_of(x_all, *idx));
            std::vector<int> truth;
            for (std::size_t i : *idx) truth.push_back(y_all[i]);
            rep.rows.push_back(make_row(name, task, split,
                                        confusion_from(truth, pred, binary ? binary_class_names() : task_class_names())));
          }
        };
        if (models.elm) {
          const auto t0 = Clock::now();
          const ElmModel m = elm_fit(x_tr, y1, bc.elm_hidden, bc.ridge, derive_seed(rep.seed, "elm"));
          rep.fit_seconds[std::string("elm/") + task] = seconds_since(t0);
          record("elm", m);
        }
        if (models.melm) {
          const auto t0 = Clock::now();
          const MelmModel m = melm_fit(x_tr, y1, dims, bc.melm_hidden, bc.ridge, derive_seed(rep.seed, "melm"));
          rep.fit_seconds[std::string("melm/") + task] = seconds_since(t0);
          record("melm", m);
        }
      }
    }

    std::ostringstream msg;
    msg << "repeat " << r << " (seed " << rep.seed << ")";
    for (const auto& row : rep.rows) {
      if (row.split == "test") msg << ' ' << row.model << '/' << row.task << '=' << csv::format_sig(row.metrics.accuracy, 4);
    }
    say(msg.str());
    report.repeats.push_back(std::move(rep));
    if (r == n_repeats - 1 && models.cascade()) {
      report.last_model = CascadeModel{std::move(stage1), std::move(stage2), bank};
    }
  }
  report.mean = average_rows(report.repeats);
  return report;
}

// ---------------------------------------------------------------------------

namespace {

const std::vector<std::string>& report_classes() {
  static const std::vector<std::string> names = {"Task1", "Task2", "Task3", "Task4", "NoTask", "CWL"};
  return names;
}

void write_row(std::ostream& out, const ResultRow& row, const std::string& repeat) {
  out << row.model << ',' << row.task << ',' << repeat << ',' << row.split << ','
      << csv::format(row.metrics.accuracy);
  for (const char* kind : {"precision", "recall"}) {
    const auto& values = std::string_view(kind) == "precision" ? row.metrics.precision : row.metrics.recall;
    for (const auto& cls : report_classes()) {
      out << ',';
      const auto& names = row.confusion.class_names;
      const auto it = std::find(names.begin(), names.end(), cls);
      if (it != names.end()) out << csv::format(values[static_cast<std::size_t>(it - names.begin())]);
    }
  }
  out << '\n';
}

void write_confusion(const ConfusionMatrix& cm, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("IoError", "cannot write " + path.string());
  out << "true\\pred";
  for (const auto& c : cm.class_names) out << ',' << c;
  out << '\n';
  for (std::size_t a = 0; a < cm.size(); ++a) {
    out << cm.class_names[a];
    for (std::size_t b = 0; b < cm.size(); ++b) out << ',' << csv::format(cm.counts[a][b]);
    out << '\n';
  }
}

std::string percent(double v) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(2);
  s << 100.0 * v;
  return s.str();
}

}  // namespace

void write_experiment(const ExperimentReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "report.csv", std::ios::binary);
    if (!out) throw Error("IoError", "cannot write report.csv");
    out << "model,task,repeat,split,accuracy";
    for (const char* kind : {"precision", "recall"}) {
      for (const auto& c : report_classes()) out << ',' << kind << '_' << c;
    }
    out << '\n';
    for (const auto& rep : report.repeats) {
      for (const auto& row : rep.rows) write_row(out, row, std::to_string(rep.repeat));
    }
    for (const auto& row : report.mean) write_row(out, row, "mean");
  }
  for (const auto& row : report.mean) {
    if (row.model == "cascade") write_confusion(row.confusion, dir / ("confusion_" + row.split + ".csv"));
    if (row.model == "tl") write_confusion(row.confusion, dir / ("confusion_binary_" + row.split + ".csv"));
  }
  {
    std::ofstream out(dir / "loss_history.csv", std::ios::binary);
    out << "stage,repeat,epoch,loss,accuracy\n";
    auto dump = [&](const char* stage, const std::string& repeat, const nn::TrainHistory& h) {
      for (std::size_t e = 0; e < h.loss.size(); ++e) {
        out << stage << ',' << repeat << ',' << e + 1 << ',' << csv::format(h.loss[e]) << ','
            << csv::format(h.accuracy[e]) << '\n';
      }
    };
    dump("pretrain", "-", report.pretrain_history);
    for (const auto& rep : report.repeats) {
      dump("stage1", std::to_string(rep.repeat), rep.stage1_history);
      dump("stage2", std::to_string(rep.repeat), rep.stage2_history);
    }
  }
  {
    std::ofstream out(dir / "summary.txt", std::ios::binary);
    out << "repeats: " << report.repeats.size() << "\n\n";
    out << "model    task        train_acc  test_acc\n";
    for (const auto& row : report.mean) {
      if (row.split != "train") continue;
      const ResultRow* test = report.find_mean(row.model, row.task, "test");
      char line[96];
      std::snprintf(line, sizeof line, "%-8s %-11s %8s%%  %7s%%\n", row.model.c_str(), row.task.c_str(),
                    percent(row.metrics.accuracy).c_str(),
                    test ? percent(test->metrics.accuracy).c_str() : "-");
      out << line;
    }
    if (const ResultRow* c = report.find_mean("cascade", "multiclass", "test")) {
      out << "\ncascade test precision/recall per class:\n";
      for (std::size_t k = 0; k < c->confusion.size(); ++k) {
        out << "  " << c->confusion.class_names[k] << ": precision " << percent(c->metrics.precision[k])
            << "%, recall " << percent(c->metrics.recall[k]) << "%\n";
      }
      out << "\nstage-2 calls / stage-1 positives on test, per repeat:";
      for (const auto& rep : report.repeats) {
        out << ' ' << rep.test_gating.stage2_calls << '/' << rep.test_gating.stage1_positive;
      }
      out << '\n';
    }
  }
  {
    // Wall-clock fit times make this file differ between runs.
    std::ofstream out(dir / "table.csv", std::ios::binary);
    out << "model,task,train_acc,fit_time_s,test_acc,sensors\n";
    for (const auto& row : report.mean) {
      if (row.split != "train") continue;
      const ResultRow* test = report.find_mean(row.model, row.task, "test");
      double seconds = 0.0;
      for (const auto& rep : report.repeats) {
        const auto fit = [&](const std::string& key) {
          const auto it = rep.fit_seconds.find(key);
          return it == rep.fit_seconds.end() ? 0.0 : it->second;
        };
        if (row.model == "elm" || row.model == "melm") seconds += fit(row.model + "/" + row.task);
        else if (row.model == "cascade") seconds += fit("tl") + fit("cnn1d");
        else seconds += fit(row.model);
      }
      seconds /= static_cast<double>(report.repeats.size());
      out << row.model << ',' << row.task << ',' << csv::format(row.metrics.accuracy) << ','
          << csv::format_sig(seconds, 4) << ',' << (test ? csv::format(test->metrics.accuracy) : "")
          << ",EEG+fNIRS+PE\n";
    }
    if (!report.pretrain_history.loss.empty()) {
      out << "pretrain,surrogate,,";
      out << csv::format_sig(report.pretrain_seconds, 4) << ",,\n";
    }
  }
}

}  // namespace cwl
