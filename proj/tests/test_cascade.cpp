#include <doctest.h>

#include <cmath>
#include <fstream>
#include <string>

#include "cwl/cascade.hpp"
#include "cwl/pipeline.hpp"
#include "cwl/synth.hpp"
#include "helpers.hpp"

using namespace cwl;
using nn::LayerSpec;
using nn::Tensor;
using testing::error_code_of;

namespace {

// Flatten -> Dense(k) with zero weights -> Softmax: output is softmax(bias).
nn::Model constant_model(nn::Shape in, const std::vector<double>& logits) {
  nn::Model m(std::move(in), {LayerSpec::flatten(), LayerSpec::dense(static_cast<int>(logits.size())),
                              LayerSpec::softmax()},
              1);
  auto& p = m.layer(1).params();
  std::fill(p.begin(), p.end(), 0.0);
  std::copy(logits.begin(), logits.end(), p.end() - static_cast<std::ptrdiff_t>(logits.size()));
  return m;
}

CwtConfig tiny_cwt() {
  CwtConfig c;
  c.n_scales = 16;
  c.image_h = 16;
  c.image_w = 16;
  return c;
}

std::vector<FeatureWindow> short_dataset(std::uint64_t seed) {
  SynthConfig sc;
  sc.seed = seed;
  sc.lead_rest_s = 4;
  sc.task_block_s = 6;
  sc.rest_s = 4;
  sc.eeg_channels = 2;
  sc.fnirs_channels = 2;
  return preprocess(generate_session(sc).recording, PreprocessConfig{});
}

CascadeConfig tiny_config() {
  CascadeConfig c;
  c.cwt.n_scales = 16;
  c.cwt.image_h = 32;
  c.cwt.image_w = 32;
  c.pretrain.n_samples = 40;
  c.pretrain_train.epochs = 2;
  c.stage1.epochs = 3;
  c.stage2.epochs = 2;
  c.baselines.elm_hidden = 32;
  c.baselines.melm_layers = {32};
  c.baselines.melm_hidden = 32;
  c.baselines.ridge = 1e-3;
  return c;
}

const ExperimentReport& shared_report() {
  static const ExperimentReport r = run_experiment(short_dataset(5), tiny_config(), 3);
  return r;
}

std::string first_line(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

}  // namespace

TEST_SUITE("cascade") {

TEST_CASE("stage-1 NoTask stops the cascade before stage 2") {
  const nn::Model s2 = constant_model({1, 10}, {0, 0, 3, 0, 9});
  GateCounter counter;
  const Tensor x({1, 10});
  const auto p = gate({0.9, 0.1}, s2, x, &counter);
  CHECK(p.label == TaskLabel::NoTask);
  CHECK_FALSE(p.stage2_invoked);
  CHECK(counter.stage1_calls == 1);
  CHECK(counter.stage1_positive == 0);
  CHECK(counter.stage2_calls == 0);
  for (double v : p.stage2_probs) CHECK(v == 0.0);
}

TEST_CASE("a positive gate returns the stage-2 argmax over the task classes only") {
  // NoTask holds the largest stage-2 logit and must be ignored.
  const nn::Model s2 = constant_model({1, 10}, {0, 1, 3, 2, 9});
  GateCounter counter;
  const Tensor x({1, 10});
  const auto p = gate({0.2, 0.8}, s2, x, &counter);
  CHECK(p.label == TaskLabel::Task3);
  CHECK(p.stage2_invoked);
  CHECK(counter.stage1_positive == 1);
  CHECK(counter.stage2_calls == 1);
  CHECK(nn::argmax(p.stage2_probs) == 4);
}

TEST_CASE("predict wires the scalogram into stage 1") {
  const auto bank = std::make_shared<const MorletBank>(tiny_cwt(), 500.0);
  FeatureWindow w;
  w.vector.assign(64, 0.0);
  for (std::size_t i = 0; i < w.vector.size(); ++i) w.vector[i] = std::sin(0.3 * static_cast<double>(i));

  CascadeModel m{constant_model({1, 16, 16}, {0.0, std::log(4.0)}), constant_model({1, 64}, {0, 0, 0, 5, 1}),
                 bank};
  GateCounter counter;
  const auto p = predict(m, w, &counter);
  CHECK(p.stage1_probs[1] == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(p.label == TaskLabel::Task4);

  m.stage1 = constant_model({1, 16, 16}, {std::log(4.0), 0.0});
  CHECK(predict(m, w).label == TaskLabel::NoTask);

  w.vector.resize(50);
  CHECK(error_code_of([&] { predict(m, w); }) == "ShapeMismatch");
}

TEST_CASE("untrained or mis-shaped cascades are rejected") {
  CascadeModel empty;
  FeatureWindow w;
  w.vector.assign(64, 0.0);
  CHECK(error_code_of([&] { predict(empty, w); }) == "ModelNotTrained");
  CHECK(error_code_of([&] { evaluate(empty, {w}); }) == "ModelNotTrained");
  CHECK(error_code_of([&] { evaluate(empty, {}); }) == "EmptyInput");

  const auto bank = std::make_shared<const MorletBank>(tiny_cwt(), 500.0);
  CascadeModel three{constant_model({1, 16, 16}, {0, 0, 0}), constant_model({1, 64}, {0, 0, 0, 0, 0}), bank};
  CHECK(error_code_of([&] { three.validate(); }) == "ShapeMismatch");
  CascadeModel four{constant_model({1, 16, 16}, {0, 0}), constant_model({1, 64}, {0, 0, 0, 0}), bank};
  CHECK(error_code_of([&] { four.validate(); }) == "ShapeMismatch");
}

TEST_CASE("evaluate tallies the gate over windows") {
  const auto bank = std::make_shared<const MorletBank>(tiny_cwt(), 500.0);
  const CascadeModel m{constant_model({1, 16, 16}, {0.0, 1.0}), constant_model({1, 64}, {0, 2, 0, 0, 0}), bank};
  std::vector<FeatureWindow> ws(4);
  for (auto& w : ws) w.vector.assign(64, 0.1);
  ws[0].task_label = TaskLabel::Task2;
  ws[0].binary_label = BinaryLabel::CWL;
  ws[1].task_label = TaskLabel::Task1;
  ws[1].binary_label = BinaryLabel::CWL;
  const auto ev = evaluate(m, ws);
  CHECK(ev.counter.stage1_calls == 4);
  CHECK(ev.counter.stage2_calls == 4);
  CHECK(ev.multiclass.total() == 4.0);
  CHECK(ev.multiclass.accuracy() == doctest::Approx(0.25));
  CHECK(ev.binary.accuracy() == doctest::Approx(0.5));
}

TEST_CASE("metrics of a hand-built confusion matrix") {
  ConfusionMatrix cm({"a", "b", "c"});
  const double c[3][3] = {{5, 1, 0}, {0, 4, 2}, {1, 0, 7}};
  for (std::size_t t = 0; t < 3; ++t)
    for (std::size_t p = 0; p < 3; ++p) cm.add(t, p, c[t][p]);
  CHECK(cm.total() == 20.0);
  CHECK(cm.accuracy() == doctest::Approx(0.8));
  CHECK(cm.precision(0) == doctest::Approx(5.0 / 6.0));
  CHECK(cm.precision(1) == doctest::Approx(0.8));
  CHECK(cm.precision(2) == doctest::Approx(7.0 / 9.0));
  CHECK(cm.recall(0) == doctest::Approx(5.0 / 6.0));
  CHECK(cm.recall(1) == doctest::Approx(4.0 / 6.0));
  CHECK(cm.recall(2) == doctest::Approx(7.0 / 8.0));
  const Metrics m = metrics_of(cm);
  CHECK(m.accuracy == cm.accuracy());
  CHECK(m.precision.size() == 3);
  CHECK(m.recall[2] == cm.recall(2));

  ConfusionMatrix sparse({"a", "b"});
  sparse.add(0, 0);
  CHECK(sparse.precision(1) == 0.0);
  CHECK(sparse.recall(1) == 0.0);
  CHECK(error_code_of([&] { sparse.add(2, 0); }) == "ShapeMismatch");
}

TEST_CASE("constant and perfect predictors") {
  std::vector<int> truth;
  for (int k = 0; k < 4; ++k)
    for (int i = 0; i < 25; ++i) truth.push_back(k);
  const std::vector<std::string> names = {"w", "x", "y", "z"};
  const auto constant = confusion_from(truth, std::vector<int>(truth.size(), 2), names);
  CHECK(constant.accuracy() == doctest::Approx(0.25));
  CHECK(constant.recall(2) == 1.0);
  CHECK(constant.precision(2) == doctest::Approx(0.25));

  const auto perfect = confusion_from(truth, truth, names);
  CHECK(perfect.accuracy() == 1.0);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) CHECK(perfect.counts[i][j] == (i == j ? 25.0 : 0.0));

  CHECK(error_code_of([&] { confusion_from({}, {}, names); }) == "EmptyInput");
  CHECK(error_code_of([&] { confusion_from({0, 1}, {0}, names); }) == "ShapeMismatch");
}

TEST_CASE("model selection lists") {
  const auto all = parse_model_selection("tl,cnn1d,elm,melm");
  CHECK((all.tl && all.cnn1d && all.elm && all.melm && all.cascade()));
  const auto cas = parse_model_selection("cascade");
  CHECK((cas.tl && cas.cnn1d && !cas.elm && !cas.melm));
  const auto base = parse_model_selection("elm,melm,cnn1d");
  CHECK_FALSE(base.cascade());
  CHECK(base.cnn1d);
  CHECK(error_code_of([] { parse_model_selection("svm"); }) == "InvalidConfig");
  CHECK(error_code_of([] { parse_model_selection(""); }) == "InvalidConfig");
}

TEST_CASE("experiment means are the average of the repeats") {
  const auto& r = shared_report();
  REQUIRE(r.repeats.size() == 3);
  for (const auto& mean : r.mean) {
    double acc = 0.0;
    std::size_t found = 0;
    for (const auto& rep : r.repeats) {
      for (const auto& row : rep.rows) {
        if (row.model == mean.model && row.task == mean.task && row.split == mean.split) {
          acc += row.metrics.accuracy;
          ++found;
        }
      }
    }
    REQUIRE(found == 3);
    CHECK(std::abs(mean.metrics.accuracy - acc / 3.0) < 1e-12);
  }
  for (const char* model : {"tl", "cnn1d", "cascade", "elm", "melm"}) {
    CHECK(r.find_mean(model, std::string_view(model) == "tl" ? "binary" : "multiclass", "test") != nullptr);
  }
  CHECK(r.find_mean("elm", "binary", "test") != nullptr);
  CHECK(r.find_mean("svm", "binary", "test") == nullptr);
}

TEST_CASE("a single repeat is its own mean") {
  CascadeConfig c = tiny_config();
  const auto r = run_experiment(short_dataset(6), c, 1, parse_model_selection("elm,melm"));
  REQUIRE(r.repeats.size() == 1);
  REQUIRE(r.mean.size() == r.repeats[0].rows.size());
  for (std::size_t i = 0; i < r.mean.size(); ++i) {
    CHECK(r.mean[i].metrics.accuracy == r.repeats[0].rows[i].metrics.accuracy);
    CHECK(r.mean[i].confusion.counts == r.repeats[0].rows[i].confusion.counts);
  }
  CHECK_FALSE(r.last_model.trained());
}

TEST_CASE("gating bookkeeping and the cascade accuracy decomposition") {
  const auto& r = shared_report();
  const auto data = short_dataset(5);
  const CascadeConfig c = tiny_config();
  for (const auto& rep : r.repeats) {
    const auto test_n = static_cast<double>(split_indices(data, c.train_fraction, rep.seed).second.size());
    CHECK(rep.test_gating.stage1_calls == static_cast<std::size_t>(test_n));
    CHECK(rep.test_gating.stage2_calls == rep.test_gating.stage1_positive);
    const ResultRow* cas = nullptr;
    const ResultRow* tl = nullptr;
    for (const auto& row : rep.rows) {
      if (row.split != "test") continue;
      if (row.model == "cascade") cas = &row;
      if (row.model == "tl") tl = &row;
    }
    REQUIRE(cas);
    REQUIRE(tl);
    CHECK(cas->confusion.total() == test_n);
    CHECK(tl->confusion.total() == test_n);
    // Predicted CWL count equals the gate's positive count.
    CHECK(tl->confusion.col_sum(1) == static_cast<double>(rep.test_gating.stage1_positive));
    CHECK(cas->metrics.accuracy <= tl->metrics.accuracy + 1e-12);
  }

  // Recompute the last repeat window by window from the two stages.
  const auto& m = r.last_model;
  REQUIRE(m.trained());
  const auto test = split_indices(data, c.train_fraction, r.repeats.back().seed).second;
  double s1_correct = 0.0, both_correct = 0.0;
  ConfusionMatrix rebuilt(task_class_names());
  for (std::size_t i : test) {
    const auto& w = data[i];
    const Tensor p1 = m.stage1.forward(image_tensor(scalogram_image(*m.bank, w.vector)));
    const std::size_t b = nn::argmax(p1.data);
    const Tensor p2 = m.stage2.forward(signal_tensor(w));
    const std::size_t k = nn::argmax(std::span<const double>(p2.data.data(), 4));
    const std::size_t label = b == index_of(BinaryLabel::NoTask) ? index_of(TaskLabel::NoTask) : k;
    rebuilt.add(index_of(w.task_label), label);
    if (b == index_of(w.binary_label)) {
      s1_correct += 1.0;
      if (label == index_of(w.task_label)) both_correct += 1.0;
    }
  }
  const ResultRow* cas = nullptr;
  for (const auto& row : r.repeats.back().rows)
    if (row.model == "cascade" && row.split == "test") cas = &row;
  REQUIRE(cas);
  CHECK(rebuilt.counts == cas->confusion.counts);
  const double n = static_cast<double>(test.size());
  const double conditional = s1_correct > 0 ? both_correct / s1_correct : 0.0;
  CHECK(std::abs(cas->metrics.accuracy - (s1_correct / n) * conditional) < 1e-12);
}

TEST_CASE("invalid experiment inputs") {
  CHECK(error_code_of([] { run_experiment({}, tiny_config(), 1); }) == "EmptyDataset");
  std::vector<FeatureWindow> one(1);
  one[0].vector.assign(848, 0.0);
  CHECK(error_code_of([&] { run_experiment(one, tiny_config(), 0); }) == "InvalidConfig");
}

TEST_CASE("experiment reports on disk") {
  const auto dir = testing::scratch_dir("cascade_report");
  write_experiment(shared_report(), dir);
  for (const char* f : {"report.csv", "confusion_train.csv", "confusion_test.csv", "confusion_binary_train.csv",
                        "confusion_binary_test.csv", "loss_history.csv", "summary.txt", "table.csv"}) {
    CHECK_MESSAGE(std::filesystem::exists(dir / f), f);
  }
  CHECK(first_line(dir / "report.csv").rfind("model,task,repeat,split,accuracy", 0) == 0);
  CHECK(first_line(dir / "table.csv") == "model,task,train_acc,fit_time_s,test_acc,sensors");
}

}  // TEST_SUITE
