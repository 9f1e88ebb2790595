#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "cwl/synth.hpp"
#include "helpers.hpp"

using namespace cwl;
using testing::error_code_of;

namespace {

SynthConfig light(std::uint64_t seed) {
  SynthConfig c;
  c.seed = seed;
  c.eeg_fs_hz = 200.0;
  c.fnirs_fs_hz = 20.0;
  c.eeg_channels = 2;
  c.fnirs_channels = 2;
  return c;
}

bool same_streams(const std::vector<ChannelStream>& a, const std::vector<ChannelStream>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].samples != b[i].samples || a[i].missing_mask != b[i].missing_mask || a[i].name != b[i].name) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("synth") {

TEST_CASE("sessions are bit-identical under one seed and differ across seeds") {
  const SynthSession a = generate_session(light(3));
  const SynthSession b = generate_session(light(3));
  CHECK(same_streams(a.recording.eeg, b.recording.eeg));
  CHECK(same_streams(a.recording.fnirs_hbo2, b.recording.fnirs_hbo2));
  CHECK(same_streams(a.recording.fnirs_hbr, b.recording.fnirs_hbr));
  CHECK(same_streams(a.recording.pupil, b.recording.pupil));
  const SynthSession c = generate_session(light(4));
  CHECK_FALSE(same_streams(a.recording.eeg, c.recording.eeg));
}

TEST_CASE("a null configuration produces flat signals") {
  SynthConfig c = light(1);
  c.eeg_noise_uv = 0.0;
  for (auto& row : c.eeg_gain_uv) row.fill(0.0);
  c.hbo2_amplitude.fill(0.0);
  c.fnirs_noise = 0.0;
  c.fnirs_drift = 0.0;
  c.mayer_amplitude = 0.0;
  c.pupil_dilation_mm.fill(0.0);
  c.pupil_noise_mm = 0.0;
  c.pupil_drift_mm = 0.0;
  c.blink_rate_per_min = 0.0;
  const SynthSession s = generate_session(c);
  for (const auto* group : {&s.recording.eeg, &s.recording.fnirs_hbo2, &s.recording.fnirs_hbr}) {
    for (const auto& ch : *group)
      for (double v : ch.samples) CHECK(v == 0.0);
  }
  // Each eye is constant; the right eye may sit at a small fixed offset.
  for (const auto& ch : s.recording.pupil) {
    CHECK_FALSE(ch.has_missing());
    for (double v : ch.samples) CHECK(v == ch.samples.front());
  }
  CHECK(s.recording.pupil[0].samples.front() == c.pupil_baseline_mm);
  CHECK(std::abs(s.recording.pupil[1].samples.front() - c.pupil_baseline_mm) <= 0.025);
}

TEST_CASE("the schedule follows the configured timeline") {
  const SynthConfig c = light(5);
  const SynthSession s = generate_session(c);
  const auto& iv = s.recording.events.intervals;
  REQUIRE(iv.size() == 9);
  CHECK(iv.front().label == TaskLabel::NoTask);
  CHECK(iv.front().start_s == 0.0);
  CHECK(iv.front().end_s == c.lead_rest_s);
  std::set<TaskLabel> tasks;
  for (std::size_t k = 1; k < iv.size(); k += 2) {
    CHECK(iv[k].label != TaskLabel::NoTask);
    CHECK(iv[k].end_s - iv[k].start_s == doctest::Approx(c.task_block_s));
    CHECK(iv[k + 1].label == TaskLabel::NoTask);
    CHECK(iv[k + 1].end_s - iv[k + 1].start_s == doctest::Approx(c.rest_s));
    CHECK(iv[k].start_s == iv[k - 1].end_s);
    tasks.insert(iv[k].label);
  }
  CHECK(tasks.size() == 4);
  CHECK(iv.back().end_s == doctest::Approx(c.session_s()));
  CHECK(s.recording.eeg[0].size() == static_cast<std::size_t>(std::llround(c.session_s() * c.eeg_fs_hz)));
  // Ground truth mirrors the recording.
  REQUIRE(s.truth.schedule.intervals.size() == iv.size());
  for (std::size_t k = 0; k < iv.size(); ++k) {
    CHECK(s.truth.schedule.intervals[k].label == iv[k].label);
    CHECK(s.truth.schedule.intervals[k].start_s == iv[k].start_s);
    CHECK(s.truth.schedule.intervals[k].end_s == iv[k].end_s);
  }
  // Task order is shuffled per seed.
  std::set<std::vector<TaskLabel>> orders;
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    std::vector<TaskLabel> order;
    for (const auto& e : generate_session(light(seed)).truth.schedule.intervals)
      if (e.label != TaskLabel::NoTask) order.push_back(e.label);
    orders.insert(order);
  }
  CHECK(orders.size() > 1);
}

TEST_CASE("blink gaps cover the expected share of pupil samples") {
  const SynthConfig c = light(0);
  const double expected = c.blink_rate_per_min / 60.0 * 0.5 * (c.blink_min_s + c.blink_max_s);
  CHECK(c.session_s() >= 600.0);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const SynthSession s = generate_session(light(seed));
    const auto& left = s.recording.pupil[0];
    const double frac = static_cast<double>(left.missing_count()) / static_cast<double>(left.size());
    INFO("seed " << seed << ": missing fraction " << frac << ", expected " << expected);
    CHECK(std::abs(frac - expected) <= 0.2 * expected);
    CHECK(left.missing_mask == s.recording.pupil[1].missing_mask);
    // Masked samples still have clean values in the ground truth.
    for (std::size_t i = 0; i < left.size(); ++i) {
      if (!left.missing_mask[i]) CHECK(left.samples[i] == s.truth.pupil_clean[0][i]);
    }
  }
}

TEST_CASE("session directories load back and carry ground truth") {
  const SynthSession s = generate_session(light(2));
  const auto dir = testing::scratch_dir("synth_session");
  write_session(s, dir);
  const MultimodalRecording back = load_recording(dir);
  CHECK(back.subject_id == s.recording.subject_id);
  CHECK(back.pupil[0].missing_mask == s.recording.pupil[0].missing_mask);
  CHECK(back.events.intervals.size() == s.recording.events.intervals.size());
  std::ifstream in(dir / "ground_truth.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "label,start_s,end_s,hbo2_amplitude,pupil_dilation_mm,hrf_peak_s,fnirs_design");
}

TEST_CASE("configuration errors") {
  SynthConfig c = light(1);
  c.blink_max_s = 1.2;
  CHECK(error_code_of([&] { generate_session(c); }) == "InvalidConfig");
  c = light(1);
  c.hbo2_amplitude[2] = std::nan("");
  CHECK(error_code_of([&] { generate_session(c); }) == "InvalidConfig");
}

TEST_CASE("pretraining images are balanced and separable by a pixel-mean threshold") {
  const MorletBank bank(CwtConfig{}, 500.0);
  PretrainConfig pc;
  pc.n_samples = 100;
  pc.seed = 4;
  const auto set = generate_pretraining_set(pc, bank);
  REQUIRE(set.size() == 100);
  int ones = 0;
  for (const auto& s : set) ones += s.label;
  CHECK(ones == 50);
  // Mean brightness of the upper (high-frequency) half of the image.
  std::vector<std::pair<double, int>> score;
  for (const auto& s : set) {
    CHECK(s.image.height == 128);
    double top = 0.0;
    for (int r = 0; r < s.image.height / 2; ++r)
      for (int c = 0; c < s.image.width; ++c) top += s.image.at(r, c);
    score.emplace_back(top, s.label);
  }
  std::sort(score.begin(), score.end());
  // Threshold sweep over "above threshold means class 1".
  double best = 0.0;
  for (std::size_t cut = 0; cut <= score.size(); ++cut) {
    int right = 0;
    for (std::size_t i = 0; i < score.size(); ++i) right += (i >= cut) == (score[i].second == 1);
    best = std::max(best, right / static_cast<double>(score.size()));
  }
  MESSAGE("threshold accuracy " << best);
  CHECK(best > 0.8);
  const auto again = generate_pretraining_set(pc, bank);
  CHECK(again[17].image.pixels == set[17].image.pixels);
}

}  // TEST_SUITE
