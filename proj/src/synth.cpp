#include "cwl/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "cwl/csv.hpp"
#include "cwl/error.hpp"
#include "cwl/seed.hpp"

namespace cwl {

namespace {

double gamma_pdf(double t, double shape, double scale) {
  if (t <= 0.0) return 0.0;
  return std::exp((shape - 1.0) * std::log(t) - t / scale - std::lgamma(shape) -
                  shape * std::log(scale));
}

// 1/f shaping filter for white noise (valid over the whole normalized band).
std::vector<double> pink_noise(std::size_t n, double rms, std::mt19937_64& rng) {
  static constexpr double b[4] = {0.049922035, -0.095993537, 0.050612699, -0.004408786};
  static constexpr double a[4] = {1.0, -2.494956002, 2.017265875, -0.522189400};
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> y(n);
  double x1 = 0, x2 = 0, x3 = 0, y1 = 0, y2 = 0, y3 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x0 = g(rng);
    const double y0 = b[0] * x0 + b[1] * x1 + b[2] * x2 + b[3] * x3 - a[1] * y1 - a[2] * y2 -
                      a[3] * y3;
    x3 = x2, x2 = x1, x1 = x0;
    y3 = y2, y2 = y1, y1 = y0;
    y[i] = y0;
  }
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double& v : y) {
    v -= mean;
    ss += v * v;
  }
  const double scale = ss > 0.0 ? rms / std::sqrt(ss / static_cast<double>(n)) : 0.0;
  for (double& v : y) v *= scale;
  return y;
}

EventSchedule make_schedule(const SynthConfig& cfg, std::mt19937_64& rng) {
  std::array<TaskLabel, 4> order = {TaskLabel::Task1, TaskLabel::Task2, TaskLabel::Task3,
                                    TaskLabel::Task4};
  if (cfg.shuffle_task_order) std::shuffle(order.begin(), order.end(), rng);
  EventSchedule s;
  double t = 0.0;
  if (cfg.lead_rest_s > 0.0) {
    s.intervals.push_back({TaskLabel::NoTask, 0.0, cfg.lead_rest_s});
    t = cfg.lead_rest_s;
  }
  for (TaskLabel task : order) {
    s.intervals.push_back({task, t, t + cfg.task_block_s});
    t += cfg.task_block_s;
    if (cfg.rest_s > 0.0) {
      s.intervals.push_back({TaskLabel::NoTask, t, t + cfg.rest_s});
      t += cfg.rest_s;
    }
  }
  return s;
}

// Per-sample label index (NoTask outside every interval).
std::vector<std::uint8_t> label_track(const EventSchedule& s, double fs, std::size_t n) {
  std::vector<std::uint8_t> out(n, static_cast<std::uint8_t>(TaskLabel::NoTask));
  for (const auto& iv : s.intervals) {
    const auto a = static_cast<std::size_t>(std::clamp(std::ceil(iv.start_s * fs), 0.0, double(n)));
    const auto b = static_cast<std::size_t>(std::clamp(std::ceil(iv.end_s * fs), 0.0, double(n)));
    std::fill(out.begin() + a, out.begin() + b, static_cast<std::uint8_t>(iv.label));
  }
  return out;
}

std::string channel_name(const char* prefix, int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%s%02d", prefix, i + 1);
  return buf;
}

}  // namespace

double hrf_raw(double t_s, const HrfParams& p) {
  return gamma_pdf(t_s, p.peak_shape, p.scale_s) -
         p.undershoot_ratio * gamma_pdf(t_s, p.undershoot_shape, p.scale_s);
}

double hrf_peak_time(const HrfParams& p) {
  double best_t = 0.0;
  double best = -1.0;
  for (int i = 0; i <= static_cast<int>(p.duration_s * 1000.0); ++i) {
    const double t = i * 1e-3;
    const double v = hrf_raw(t, p);
    if (v > best) {
      best = v;
      best_t = t;
    }
  }
  return best_t;
}

double hrf_unit(double t_s, const HrfParams& p) {
  return hrf_raw(t_s, p) / hrf_raw(hrf_peak_time(p), p);
}

void SynthConfig::validate() const {
  if (!(eeg_fs_hz > 0) || !(fnirs_fs_hz > 0) || !(pupil_fs_hz > 0)) {
    throw Error("InvalidConfig", "sampling rates must be > 0");
  }
  if (eeg_channels < 1 || fnirs_channels < 1) throw Error("InvalidConfig", "need >= 1 channel");
  if (!(task_block_s > 0) || !(lead_rest_s >= 0) || !(rest_s >= 0)) {
    throw Error("InvalidConfig", "block durations must be positive");
  }
  if (!(blink_min_s > 0) || !(blink_max_s >= blink_min_s) || !(blink_max_s < 1.0) ||
      !(blink_rate_per_min >= 0)) {
    throw Error("InvalidConfig", "blink gaps need 0 < min <= max < 1 s and a rate >= 0");
  }
  auto finite = [](const auto& values) {
    return std::all_of(std::begin(values), std::end(values), [](double v) { return std::isfinite(v); });
  };
  bool ok = finite(hbo2_amplitude) && finite(pupil_dilation_mm) && finite(eeg_band_hz) &&
            std::isfinite(eeg_noise_uv) && std::isfinite(fnirs_noise) && std::isfinite(fnirs_drift) &&
            std::isfinite(mayer_amplitude) && std::isfinite(pupil_noise_mm) &&
            std::isfinite(pupil_drift_mm) && std::isfinite(hbr_ratio);
  for (const auto& row : eeg_gain_uv) ok = ok && finite(row);
  if (!ok) throw Error("InvalidConfig", "effect sizes and noise levels must be finite");
}

SynthSession generate_session(const SynthConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(derive_seed(cfg.seed, "synth/" + cfg.subject_id));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  SynthSession out;
  MultimodalRecording& rec = out.recording;
  GroundTruth& truth = out.truth;
  rec.subject_id = cfg.subject_id;
  rec.events = make_schedule(cfg, rng);
  truth.schedule = rec.events;
  truth.hbo2_amplitude = cfg.hbo2_amplitude;
  truth.pupil_dilation_mm = cfg.pupil_dilation_mm;
  truth.fnirs_design = cfg.fnirs_design;
  truth.hrf_peak_s = hrf_peak_time(cfg.hrf);
  const double duration = cfg.session_s();

  // EEG
  {
    const double fs = cfg.eeg_fs_hz;
    const auto n = static_cast<std::size_t>(std::llround(duration * fs));
    const auto labels = label_track(rec.events, fs, n);
    const std::size_t n_bands = cfg.eeg_band_hz.size();
    std::vector<std::vector<double>> sources(n_bands, std::vector<double>(n));
    const double step = cfg.eeg_phase_diffusion * std::sqrt(1.0 / fs);
    for (std::size_t b = 0; b < n_bands; ++b) {
      double phase = 2.0 * std::numbers::pi * unif(rng);
      const double dphi = 2.0 * std::numbers::pi * cfg.eeg_band_hz[b] / fs;
      for (std::size_t i = 0; i < n; ++i) {
        sources[b][i] = std::sin(phase) * cfg.eeg_gain_uv[labels[i]][b];
        phase += dphi + step * gauss(rng);
      }
    }
    for (int c = 0; c < cfg.eeg_channels; ++c) {
      std::vector<double> x = pink_noise(n, cfg.eeg_noise_uv, rng);
      const double gain = 0.7 + 0.6 * unif(rng);
      for (std::size_t b = 0; b < n_bands; ++b) {
        for (std::size_t i = 0; i < n; ++i) x[i] += gain * sources[b][i];
      }
      rec.eeg.push_back(ChannelStream::complete(channel_name("EEG", c), fs, std::move(x)));
    }
  }

  // fNIRS
  {
    const double fs = cfg.fnirs_fs_hz;
    const auto n = static_cast<std::size_t>(std::llround(duration * fs));
    std::vector<double> response(n, 0.0);
    const auto kernel_n = static_cast<std::size_t>(std::ceil(cfg.hrf.duration_s * fs)) + 1;
    if (cfg.fnirs_design == FnirsDesign::Block) {
      // Cumulative HRF integral; a boxcar [a, b) responds with H(t-a) - H(t-b).
      std::vector<double> cum(kernel_n + 1, 0.0);
      for (std::size_t k = 0; k < kernel_n; ++k) cum[k + 1] = cum[k] + hrf_raw(k / fs, cfg.hrf) / fs;
      const double total = cum.back();
      auto H = [&](long long k) {
        if (k < 0) return 0.0;
        return cum[std::min<std::size_t>(static_cast<std::size_t>(k), kernel_n)] / total;
      };
      for (const auto& iv : rec.events.intervals) {
        if (iv.label == TaskLabel::NoTask) continue;
        const double amp = cfg.hbo2_amplitude[index_of(iv.label)];
        const long long a = std::llround(iv.start_s * fs);
        const long long b = std::llround(iv.end_s * fs);
        for (std::size_t i = static_cast<std::size_t>(a); i < n; ++i) {
          const long long ii = static_cast<long long>(i);
          if (ii - b > static_cast<long long>(kernel_n)) break;
          response[i] += amp * (H(ii - a) - H(ii - b));
        }
      }
    } else {
      const double peak = hrf_raw(truth.hrf_peak_s, cfg.hrf);
      for (const auto& iv : rec.events.intervals) {
        if (iv.label == TaskLabel::NoTask) continue;
        const double amp = cfg.hbo2_amplitude[index_of(iv.label)];
        const long long a = std::llround(iv.start_s * fs);
        for (std::size_t k = 0; k < kernel_n && a + static_cast<long long>(k) < static_cast<long long>(n); ++k) {
          response[a + k] += amp * hrf_raw(k / fs, cfg.hrf) / peak;
        }
      }
    }
    for (int c = 0; c < cfg.fnirs_channels; ++c) {
      const double gain = 0.8 + 0.4 * unif(rng);
      const double f1 = 0.005 + 0.015 * unif(rng);
      const double p1 = 2.0 * std::numbers::pi * unif(rng);
      const double pm = 2.0 * std::numbers::pi * unif(rng);
      std::vector<double> o(n), r(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double t = i / fs;
        const double drift = cfg.fnirs_drift * std::sin(2.0 * std::numbers::pi * f1 * t + p1);
        const double mayer = cfg.mayer_amplitude * std::sin(2.0 * std::numbers::pi * 0.1 * t + pm);
        o[i] = gain * response[i] + drift + mayer + cfg.fnirs_noise * gauss(rng);
        r[i] = cfg.hbr_ratio * gain * response[i] - 0.3 * drift - 0.3 * mayer +
               cfg.fnirs_noise * gauss(rng);
      }
      rec.fnirs_hbo2.push_back(ChannelStream::complete(channel_name("HbO2_", c), fs, std::move(o)));
      rec.fnirs_hbr.push_back(ChannelStream::complete(channel_name("HbR_", c), fs, std::move(r)));
    }
  }

  // Pupil
  {
    const double fs = cfg.pupil_fs_hz;
    const auto n = static_cast<std::size_t>(std::llround(duration * fs));
    const auto labels = label_track(rec.events, fs, n);
    std::vector<double> dilation(n);
    const double alpha = 1.0 - std::exp(-1.0 / (cfg.pupil_response_tau_s * fs));
    double state = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double target =
          labels[i] == static_cast<std::uint8_t>(TaskLabel::NoTask) ? 0.0 : cfg.pupil_dilation_mm[labels[i]];
      state += alpha * (target - state);
      dilation[i] = state;
    }
    const double drift_f = 0.002 + 0.004 * unif(rng);
    const double drift_p = 2.0 * std::numbers::pi * unif(rng);
    for (int eye = 0; eye < 2; ++eye) {
      const double offset = eye == 0 ? 0.0 : 0.05 * (unif(rng) - 0.5);
      std::vector<double> x(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double t = i / fs;
        x[i] = cfg.pupil_baseline_mm + offset + dilation[i] +
               cfg.pupil_drift_mm * std::sin(2.0 * std::numbers::pi * drift_f * t + drift_p) +
               cfg.pupil_noise_mm * gauss(rng);
      }
      truth.pupil_clean[eye] = x;
      rec.pupil.push_back(ChannelStream::complete(eye == 0 ? "pupil_left" : "pupil_right", fs,
                                                  std::move(x)));
    }
    // Blinks close both eyes together.
    if (cfg.blink_rate_per_min > 0.0) {
      std::exponential_distribution<double> gap(cfg.blink_rate_per_min / 60.0);
      std::uniform_real_distribution<double> len(cfg.blink_min_s, cfg.blink_max_s);
      double t = gap(rng);
      while (t < duration) {
        const double d = len(rng);
        const auto a = static_cast<std::size_t>(std::ceil(t * fs));
        const auto b = std::min(n, static_cast<std::size_t>(std::ceil((t + d) * fs)));
        for (auto& ch : rec.pupil) {
          for (std::size_t i = a; i < b; ++i) {
            ch.samples[i] = 0.0;
            ch.missing_mask[i] = 1;
          }
        }
        t += d + gap(rng);
      }
    }
  }

  rec.validate();
  return out;
}

void write_ground_truth(const SynthSession& session, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("IoError", "cannot write " + path.string());
  const GroundTruth& g = session.truth;
  out << "label,start_s,end_s,hbo2_amplitude,pupil_dilation_mm,hrf_peak_s,fnirs_design\n";
  for (const auto& iv : g.schedule.intervals) {
    const bool task = iv.label != TaskLabel::NoTask;
    out << to_string(iv.label) << ',' << csv::format(iv.start_s) << ',' << csv::format(iv.end_s)
        << ',' << csv::format(task ? g.hbo2_amplitude[index_of(iv.label)] : 0.0) << ','
        << csv::format(task ? g.pupil_dilation_mm[index_of(iv.label)] : 0.0) << ','
        << csv::format(g.hrf_peak_s) << ','
        << (g.fnirs_design == FnirsDesign::Block ? "block" : "impulse") << '\n';
  }
}

void write_session(const SynthSession& session, const std::filesystem::path& dir) {
  save_recording(session.recording, dir);
  write_ground_truth(session, dir / "ground_truth.csv");
}

std::vector<SurgTlxRow> generate_surgtlx(int participants, std::uint64_t seed,
                                         const std::array<double, 4>& task_load) {
  if (participants < 1) throw Error("InvalidConfig", "need >= 1 participant");
  std::mt19937_64 rng(derive_seed(seed, "surgtlx"));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<SurgTlxRow> rows;
  for (int p = 0; p < participants; ++p) {
    char id[16];
    std::snprintf(id, sizeof id, "S%02d", p + 1);
    const double base = 4.0 + 4.0 * unif(rng);
    std::array<double, kTlxDimensions> priority{};
    for (double& v : priority) v = unif(rng);
    for (int t = 0; t < 4; ++t) {
      SurgTlxRow row;
      row.participant = id;
      row.task = std::string(to_string(static_cast<TaskLabel>(t)));
      for (int d = 0; d < kTlxDimensions; ++d) {
        const double v = base + 3.0 * task_load[t] + 1.5 * gauss(rng);
        row.response.ratings[d] = std::clamp(std::round(v), 0.0, 20.0);
      }
      for (int a = 0; a < kTlxDimensions; ++a) {
        for (int b = a + 1; b < kTlxDimensions; ++b) {
          const bool a_wins = priority[a] + 0.3 * gauss(rng) > priority[b] + 0.3 * gauss(rng);
          const auto da = static_cast<TlxDimension>(a);
          const auto db = static_cast<TlxDimension>(b);
          row.response.pairwise.push_back(a_wins ? PairChoice{da, db} : PairChoice{db, da});
        }
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<PretrainSample> generate_pretraining_set(const PretrainConfig& cfg,
                                                     const MorletBank& bank) {
  if (cfg.n_samples == 0 || cfg.signal_length < 8 || cfg.tones < 1) {
    throw Error("InvalidConfig", "pretraining set needs samples, length >= 8 and >= 1 tone");
  }
  std::mt19937_64 rng(derive_seed(cfg.seed, "pretrain"));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double fs = bank.fs_hz();
  std::vector<PretrainSample> out;
  out.reserve(cfg.n_samples);
  std::vector<double> x(cfg.signal_length);
  for (std::size_t s = 0; s < cfg.n_samples; ++s) {
    const int label = static_cast<int>(s % 2);
    const auto& band = label == 0 ? cfg.low_band_hz : cfg.high_band_hz;
    for (double& v : x) v = cfg.noise * gauss(rng);
    for (int k = 0; k < cfg.tones; ++k) {
      // log-uniform frequency inside the class band
      const double f = band[0] * std::pow(band[1] / band[0], unif(rng));
      const double amp = 0.5 + unif(rng);
      const double phase = 2.0 * std::numbers::pi * unif(rng);
      for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] += amp * std::sin(2.0 * std::numbers::pi * f * i / fs + phase);
      }
    }
    out.push_back({scalogram_image(bank, x), label});
  }
  return out;
}

}  // namespace cwl
