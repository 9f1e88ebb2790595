#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "cwl/features.hpp"
#include "cwl/pipeline.hpp"
#include "cwl/synth.hpp"
#include "helpers.hpp"

using namespace cwl;
using testing::error_code_of;

namespace {

// EEG and fNIRS at 500 Hz, pupil at 120 Hz, one schedule.
MultimodalRecording recording(double seconds, std::vector<EventInterval> events) {
  MultimodalRecording rec;
  rec.subject_id = "T07";
  const auto n = static_cast<std::size_t>(seconds * 500.0);
  for (int c = 0; c < 2; ++c) {
    std::vector<double> e(n), f(n);
    for (std::size_t i = 0; i < n; ++i) {
      e[i] = static_cast<double>(i) + c;  // channel mean = i + 0.5
      f[i] = -static_cast<double>(i) * (c + 1);  // channel mean = -1.5 i
    }
    rec.eeg.push_back(ChannelStream::complete("E" + std::to_string(c), 500.0, e));
    rec.fnirs_hbo2.push_back(ChannelStream::complete("O" + std::to_string(c), 500.0, f));
    rec.fnirs_hbr.push_back(ChannelStream::complete("R" + std::to_string(c), 500.0, std::vector<double>(n, 0.0)));
  }
  const auto np = static_cast<std::size_t>(seconds * 120.0);
  rec.pupil.push_back(ChannelStream::complete("left", 120.0, std::vector<double>(np, 3.0)));
  rec.pupil.push_back(ChannelStream::complete("right", 120.0, std::vector<double>(np, 4.0)));
  rec.events.intervals = std::move(events);
  return rec;
}

std::vector<FeatureWindow> labeled_windows(const std::vector<int>& per_class) {
  std::vector<FeatureWindow> w;
  for (std::size_t l = 0; l < per_class.size(); ++l) {
    for (int k = 0; k < per_class[l]; ++k) {
      FeatureWindow f;
      f.task_label = static_cast<TaskLabel>(l);
      f.binary_label = binary_of(f.task_label);
      f.t_start_s = static_cast<double>(w.size());  // identity
      f.vector = {static_cast<double>(w.size())};
      w.push_back(f);
    }
  }
  // Interleave classes so input order is not grouped.
  std::mt19937_64 rng(1);
  std::shuffle(w.begin(), w.end(), rng);
  return w;
}

}  // namespace

TEST_SUITE("features") {

TEST_CASE("z-score of a hand-computable channel") {
  MultimodalRecording rec = recording(1.0, {{TaskLabel::NoTask, 0, 1}});
  rec.eeg[0] = ChannelStream::complete("x", 500.0, {1.0, 2.0, 3.0});
  rec.eeg[1] = ChannelStream::complete("y", 500.0, {0.1, 0.1, 0.1});
  const auto z = zscore_per_channel(rec);
  CHECK(z.eeg[0].samples[0] == doctest::Approx(-1.2247449).epsilon(1e-6));
  CHECK(z.eeg[0].samples[1] == doctest::Approx(0.0));
  CHECK(z.eeg[0].samples[2] == doctest::Approx(1.2247449).epsilon(1e-6));
  CHECK(z.eeg[1].samples == std::vector<double>{0.0, 0.0, 0.0});
}

TEST_CASE("z-scored channels have zero mean and unit deviation") {
  const SynthConfig sc = [] {
    SynthConfig c;
    c.lead_rest_s = 2;
    c.task_block_s = 2;
    c.rest_s = 2;
    c.eeg_channels = 3;
    c.fnirs_channels = 2;
    return c;
  }();
  const auto s = generate_session(sc);
  MultimodalRecording rec = s.recording;
  for (auto& p : rec.pupil) p = ChannelStream::complete(p.name, p.fs_hz, p.samples);
  const auto z = zscore_per_channel(rec);
  for (const auto* group : {&z.eeg, &z.fnirs_hbo2, &z.fnirs_hbr, &z.pupil}) {
    for (const auto& ch : *group) {
      const double n = static_cast<double>(ch.size());
      const double mean = std::accumulate(ch.samples.begin(), ch.samples.end(), 0.0) / n;
      double var = 0.0;
      for (double v : ch.samples) var += (v - mean) * (v - mean);
      const double sd = std::sqrt(var / n);
      CHECK(std::abs(mean) < 1e-9);
      CHECK((std::abs(sd - 1.0) <= 1e-9 || sd == 0.0));
    }
  }
}

TEST_CASE("window count formula") {
  CHECK(window_count(2000, 400, 200) == 9);
  CHECK(window_count(399, 400, 200) == 0);
  CHECK(window_count(400, 400, 200) == 1);
  for (std::size_t n = 400; n < 1500; n += 37)
    for (std::size_t s : {1, 50, 200, 400}) CHECK(window_count(n, 400, s) == (n - 400) / s + 1);
}

TEST_CASE("a 2000-sample region yields nine 848-long windows with the documented blocks") {
  const auto rec = recording(4.0, {{TaskLabel::Task2, 0.0, 4.0}});
  const auto w = segment(rec, WindowSpec{});
  REQUIRE(w.size() == 9);
  for (std::size_t k = 0; k < w.size(); ++k) {
    const auto& v = w[k].vector;
    REQUIRE(v.size() == kDefaultFeatureLength);
    CHECK(w[k].task_label == TaskLabel::Task2);
    CHECK(w[k].binary_label == BinaryLabel::CWL);
    CHECK(w[k].subject_id == "T07");
    CHECK(w[k].t_start_s == doctest::Approx(0.4 * k));
    const double i0 = 200.0 * k;
    CHECK(v[0] == doctest::Approx(i0 + 0.5));
    CHECK(v[399] == doctest::Approx(i0 + 399.5));
    CHECK(v[400] == doctest::Approx(-1.5 * i0));
    CHECK(v[799] == doctest::Approx(-1.5 * (i0 + 399)));
    for (std::size_t j = 800; j < 848; ++j) CHECK(v[j] == doctest::Approx(3.5).epsilon(1e-6));
  }
}

TEST_CASE("an all-rest session labels every window NoTask") {
  const auto rec = recording(10.0, {{TaskLabel::NoTask, 0.0, 10.0}});
  const auto w = segment(rec, WindowSpec{});
  CHECK(w.size() == window_count(5000, 400, 200));
  for (const auto& f : w) {
    CHECK(f.task_label == TaskLabel::NoTask);
    CHECK(f.binary_label == BinaryLabel::NoTask);
  }
}

TEST_CASE("windows stay inside their interval and shift with it") {
  const auto a = segment(recording(10.0, {{TaskLabel::NoTask, 0.0, 1.0}, {TaskLabel::Task1, 1.0, 5.0}}), WindowSpec{});
  const auto b = segment(recording(10.0, {{TaskLabel::NoTask, 0.0, 1.4}, {TaskLabel::Task1, 1.4, 5.4}}), WindowSpec{});
  std::vector<double> ta, tb;
  for (const auto& f : a)
    if (f.task_label == TaskLabel::Task1) ta.push_back(f.t_start_s);
  for (const auto& f : b)
    if (f.task_label == TaskLabel::Task1) tb.push_back(f.t_start_s);
  REQUIRE(ta.size() == tb.size());
  REQUIRE(ta.size() == 9);
  for (std::size_t k = 0; k < ta.size(); ++k) {
    CHECK(tb[k] - ta[k] == doctest::Approx(0.4));
    CHECK(ta[k] >= 1.0);
    CHECK(ta[k] + 0.8 <= 5.0 + 1e-9);
  }
  // The 1 s rest region holds one window; the 1.4 s region holds two.
  CHECK(a.size() == 10);
  CHECK(b.size() == 11);
}

TEST_CASE("regions shorter than a window are rejected") {
  const auto rec = recording(4.0, {{TaskLabel::NoTask, 0.0, 0.5}, {TaskLabel::Task1, 0.5, 4.0}});
  CHECK(error_code_of([&] { segment(rec, WindowSpec{}); }) == "RegionTooShort");
  WindowSpec bad;
  bad.stride_samples = 500;
  CHECK(error_code_of([&] { segment(recording(4.0, {{TaskLabel::Task1, 0, 4}}), bad); }) == "InvalidConfig");
}

TEST_CASE("labels of preprocessed synthetic windows match the generator schedule") {
  SynthConfig sc;
  sc.lead_rest_s = 10;
  sc.task_block_s = 20;
  sc.rest_s = 10;
  sc.eeg_channels = 4;
  sc.fnirs_channels = 4;
  sc.seed = 3;
  const auto s = generate_session(sc);
  const auto w = preprocess(s.recording, PreprocessConfig{});
  CHECK(w.size() > 200);
  std::size_t agree = 0;
  std::set<TaskLabel> seen;
  for (const auto& f : w) {
    const auto at_start = s.truth.schedule.label_at(f.t_start_s);
    const auto at_end = s.truth.schedule.label_at(f.t_start_s + 0.8 - 1e-6);
    if (at_start == f.task_label && at_end == f.task_label) ++agree;
    CHECK(f.vector.size() == kDefaultFeatureLength);
    seen.insert(f.task_label);
  }
  CHECK(agree == w.size());
  CHECK(seen.size() == kNumTaskLabels);
}

TEST_CASE("stratified split: 70/30, deterministic, disjoint, complete") {
  const auto w = labeled_windows({20, 20, 20, 20, 20});
  const auto [train, test] = split_train_test(w, 0.7, 42);
  CHECK(train.size() == 70);
  CHECK(test.size() == 30);
  const auto [train2, test2] = split_train_test(w, 0.7, 42);
  CHECK(train.size() == train2.size());
  for (std::size_t i = 0; i < train.size(); ++i) CHECK(train[i].t_start_s == train2[i].t_start_s);
  const auto [ia, ib] = split_indices(w, 0.7, 42);
  std::vector<std::size_t> all = ia;
  all.insert(all.end(), ib.begin(), ib.end());
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> expect(w.size());
  std::iota(expect.begin(), expect.end(), 0);
  CHECK(all == expect);
  const auto [oa, ob] = split_indices(w, 0.7, 43);
  CHECK(oa != ia);
}

TEST_CASE("per-class train proportions follow the global ones") {
  const std::vector<int> counts = {137, 91, 64, 203, 410};
  const auto w = labeled_windows(counts);
  const auto [train, test] = split_train_test(w, 0.7, 5);
  std::map<TaskLabel, int> in_train;
  for (const auto& f : train) ++in_train[f.task_label];
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  for (std::size_t l = 0; l < counts.size(); ++l) {
    const double global = counts[l] / total;
    const double local = in_train[static_cast<TaskLabel>(l)] / static_cast<double>(train.size());
    CHECK(std::abs(local - global) < 0.02);
    CHECK(std::abs(in_train[static_cast<TaskLabel>(l)] - 0.7 * counts[l]) <= 1.0);
  }
}

TEST_CASE("split errors") {
  CHECK(error_code_of([] { split_train_test(labeled_windows({5, 5, 0, 5, 5}), 0.7, 1); }) == "ClassEmpty");
  CHECK(error_code_of([] { split_train_test(labeled_windows({5, 5, 5, 5, 5}), 1.0, 1); }) == "InvalidConfig");
}

TEST_CASE("feature CSV round trip is exact") {
  auto w = segment(recording(4.0, {{TaskLabel::Task4, 0.0, 4.0}}), WindowSpec{});
  w[3].vector[17] = 0.1 + 0.2;
  w[5].vector[800] = -1.0 / 3.0;
  const auto path = testing::scratch_dir("features") / "f.csv";
  write_features_csv(w, path);
  const auto back = read_features_csv(path);
  REQUIRE(back.size() == w.size());
  for (std::size_t k = 0; k < w.size(); ++k) {
    CHECK(back[k].vector == w[k].vector);
    CHECK(back[k].t_start_s == w[k].t_start_s);
    CHECK(back[k].task_label == TaskLabel::Task4);
    CHECK(back[k].binary_label == BinaryLabel::CWL);
    CHECK(back[k].subject_id == "T07");
  }
}

}  // TEST_SUITE
