#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cwl/labels.hpp"

namespace cwl {

// One sampled channel. Units follow the modality: uV for EEG, umol/L for
// HbO2/HbR, mm for pupil diameter.
struct ChannelStream {
  std::string name;
  double fs_hz = 0.0;
  std::vector<double> samples;
  std::vector<std::uint8_t> missing_mask;  // 1 = missing

  static ChannelStream complete(std::string name, double fs_hz, std::vector<double> samples);

  std::size_t size() const { return samples.size(); }
  bool has_missing() const;
  std::size_t missing_count() const;
  void validate() const;
};

struct EventInterval {
  TaskLabel label = TaskLabel::NoTask;
  double start_s = 0.0;
  double end_s = 0.0;
};

// Boxcar timeline of labeled, sorted, non-overlapping intervals.
struct EventSchedule {
  std::vector<EventInterval> intervals;

  void validate() const;
  // Label of the interval containing t (start inclusive, end exclusive).
  std::optional<TaskLabel> label_at(double t_s) const;
};

struct MultimodalRecording {
  std::string subject_id;
  std::vector<ChannelStream> eeg;
  std::vector<ChannelStream> fnirs_hbo2;
  std::vector<ChannelStream> fnirs_hbr;
  std::vector<ChannelStream> pupil;  // exactly two: left, right
  EventSchedule events;

  void validate() const;
};

// Second-order section: b0 + b1 z^-1 + b2 z^-2 over 1 + a1 z^-1 + a2 z^-2.
// First-order sections leave b2 = a2 = 0.
struct BiquadSection {
  long double b0 = 1.0L, b1 = 0.0L, b2 = 0.0L;
  long double a1 = 0.0L, a2 = 0.0L;
};

// Digital IIR filter. The expanded transfer function (b, a with a[0] == 1)
// is kept for inspection; filtering and frequency evaluation go through the
// cascaded sections, since at the 0.5 Hz / 500 Hz design point the poles sit
// within 1e-2 of z = 1 and the expanded polynomial loses most of its
// precision near DC.
struct FilterCoefficients {
  std::vector<long double> b;
  std::vector<long double> a;
  std::vector<BiquadSection> sections;
  int order = 0;
};

// Analog Butterworth prototype, frequency-prewarped bilinear transform.
FilterCoefficients design_butterworth_highpass(int order, double cutoff_hz, double fs_hz);
FilterCoefficients design_butterworth_lowpass(int order, double cutoff_hz, double fs_hz);

// H(e^{j 2 pi f / fs}): product over sections, or the polynomial ratio when
// no sections are present.
std::complex<long double> frequency_response(const FilterCoefficients& coeffs, double f_hz,
                                             double fs_hz);

// Causal application, direct-form II transposed per section (or on b, a when
// no sections are present). Requires no missing samples.
ChannelStream filter_forward(const FilterCoefficients& coeffs, const ChannelStream& x);
// steady_start primes the state as if x[0] had been applied forever (needs
// sections); the default starts from rest.
std::vector<double> filter_samples(const FilterCoefficients& coeffs,
                                   const std::vector<double>& x, bool steady_start = false);

// Integer-factor decimation uses a 6th-order Butterworth anti-alias low-pass
// at 0.45 * target_fs before keeping every k-th sample; other ratios use
// linear interpolation (on the anti-aliased signal when downsampling).
ChannelStream resample(const ChannelStream& x, double target_fs);

// Session directory I/O (manifest.txt, eeg.csv, fnirs_hbo2.csv,
// fnirs_hbr.csv, pupil.csv, events.csv).
MultimodalRecording load_recording(const std::filesystem::path& session_dir);
void save_recording(const MultimodalRecording& rec, const std::filesystem::path& session_dir);

EventSchedule load_events(const std::filesystem::path& events_csv);
void save_events(const EventSchedule& events, const std::filesystem::path& events_csv);

}  // namespace cwl
