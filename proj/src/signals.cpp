#include "cwl/signals.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>

#include "cwl/csv.hpp"
#include "cwl/error.hpp"

namespace cwl {

namespace fs = std::filesystem;

ChannelStream ChannelStream::complete(std::string name, double fs_hz,
                                      std::vector<double> samples) {
  ChannelStream s;
  s.name = std::move(name);
  s.fs_hz = fs_hz;
  s.missing_mask.assign(samples.size(), 0);
  s.samples = std::move(samples);
  return s;
}

bool ChannelStream::has_missing() const {
  return std::any_of(missing_mask.begin(), missing_mask.end(), [](auto m) { return m != 0; });
}

std::size_t ChannelStream::missing_count() const {
  return static_cast<std::size_t>(std::count_if(missing_mask.begin(), missing_mask.end(),
                                                [](auto m) { return m != 0; }));
}

void ChannelStream::validate() const {
  if (!(fs_hz > 0.0)) throw Error("InvalidStream", name + ": sampling rate must be > 0");
  if (samples.size() != missing_mask.size()) {
    throw Error("InvalidStream", name + ": samples and missing_mask differ in length");
  }
}

void EventSchedule::validate() const {
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    const auto& iv = intervals[i];
    if (!(iv.start_s >= 0.0) || !(iv.start_s < iv.end_s)) {
      throw Error("InvalidSchedule", "interval " + std::to_string(i) + " has invalid bounds");
    }
    if (i > 0 && iv.start_s < intervals[i - 1].end_s) {
      throw Error("InvalidSchedule",
                  "interval " + std::to_string(i) + " overlaps or is out of order");
    }
  }
}

std::optional<TaskLabel> EventSchedule::label_at(double t_s) const {
  auto it = std::upper_bound(intervals.begin(), intervals.end(), t_s,
                             [](double t, const EventInterval& iv) { return t < iv.start_s; });
  if (it == intervals.begin()) return std::nullopt;
  --it;
  if (t_s < it->end_s) return it->label;
  return std::nullopt;
}

namespace {

void validate_group(const std::vector<ChannelStream>& group, const char* what) {
  for (const auto& ch : group) {
    ch.validate();
    if (ch.fs_hz != group.front().fs_hz) {
      throw Error("InconsistentRate", std::string(what) + " channels disagree on sampling rate");
    }
    if (ch.size() != group.front().size()) {
      throw Error("InvalidStream", std::string(what) + " channels differ in length");
    }
  }
}

}  // namespace

void MultimodalRecording::validate() const {
  validate_group(eeg, "EEG");
  std::vector<ChannelStream> fnirs = fnirs_hbo2;
  fnirs.insert(fnirs.end(), fnirs_hbr.begin(), fnirs_hbr.end());
  validate_group(fnirs, "fNIRS");
  validate_group(pupil, "pupil");
  if (pupil.size() != 2) throw Error("InvalidStream", "pupil must have exactly 2 channels");
  events.validate();
}

// ---------------------------------------------------------------------------
// Filter design

namespace {

using cld = std::complex<long double>;
constexpr long double kPi = std::numbers::pi_v<long double>;

std::vector<long double> real_poly(const std::vector<cld>& roots) {
  std::vector<cld> c{cld(1.0L)};
  for (const cld& r : roots) {
    c.push_back(cld(0.0L));
    for (std::size_t i = c.size() - 1; i > 0; --i) c[i] -= r * c[i - 1];
  }
  std::vector<long double> out(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) out[i] = c[i].real();
  return out;
}

FilterCoefficients design_butterworth(int order, double cutoff_hz, double fs_hz, bool highpass) {
  if (order < 1) throw Error("InvalidOrder", "filter order must be >= 1");
  if (!(fs_hz > 0.0)) throw Error("InvalidCutoff", "sampling rate must be > 0");
  if (!(cutoff_hz > 0.0) || !(cutoff_hz < fs_hz / 2.0)) {
    throw Error("InvalidCutoff", "cutoff " + csv::format(cutoff_hz) +
                                     " Hz must lie strictly between 0 and Nyquist (" +
                                     csv::format(fs_hz / 2.0) + " Hz)");
  }
  const long double fs2 = 2.0L * fs_hz;
  const long double warped = fs2 * std::tan(kPi * cutoff_hz / fs_hz);

  // Left-half-plane prototype poles on the unit circle.
  std::vector<cld> proto;
  for (int m = -order + 1; m < order; m += 2) {
    proto.push_back(-std::exp(cld(0.0L, kPi * m / (2.0L * order))));
  }

  std::vector<cld> zeros;
  std::vector<cld> poles;
  long double gain = 1.0L;
  if (highpass) {
    for (const cld& p : proto) poles.push_back(warped / p);
    zeros.assign(order, cld(0.0L));
    cld prod(1.0L);
    for (const cld& p : proto) prod *= -p;
    gain = (1.0L / prod).real();
  } else {
    for (const cld& p : proto) poles.push_back(warped * p);
    gain = std::pow(warped, static_cast<long double>(order));
  }

  std::vector<cld> zd;
  std::vector<cld> pd;
  cld num(1.0L);
  cld den(1.0L);
  for (const cld& z : zeros) {
    zd.push_back((fs2 + z) / (fs2 - z));
    num *= fs2 - z;
  }
  for (const cld& p : poles) {
    pd.push_back((fs2 + p) / (fs2 - p));
    den *= fs2 - p;
  }
  while (zd.size() < pd.size()) zd.push_back(cld(-1.0L));
  const long double gain_d = gain * (num / den).real();

  FilterCoefficients out;
  out.order = order;
  out.b = real_poly(zd);
  for (auto& v : out.b) v *= gain_d;
  out.a = real_poly(pd);

  // Conjugate pairs sit at mirrored indices; an odd order leaves the real
  // pole in the middle. The overall gain rides on the first section.
  const int n = order;
  for (int i = 0; i < n / 2; ++i) {
    const cld p = pd[i];
    const cld z1 = zd[i];
    const cld z2 = zd[n - 1 - i];
    BiquadSection s;
    s.b0 = 1.0L;
    s.b1 = -(z1 + z2).real();
    s.b2 = (z1 * z2).real();
    s.a1 = -2.0L * p.real();
    s.a2 = std::norm(p);
    out.sections.push_back(s);
  }
  if (n % 2 == 1) {
    BiquadSection s;
    s.b0 = 1.0L;
    s.b1 = -zd[n / 2].real();
    s.a1 = -pd[n / 2].real();
    out.sections.push_back(s);
  }
  BiquadSection& first = out.sections.front();
  first.b0 *= gain_d;
  first.b1 *= gain_d;
  first.b2 *= gain_d;
  return out;
}

}  // namespace

FilterCoefficients design_butterworth_highpass(int order, double cutoff_hz, double fs_hz) {
  return design_butterworth(order, cutoff_hz, fs_hz, true);
}

FilterCoefficients design_butterworth_lowpass(int order, double cutoff_hz, double fs_hz) {
  return design_butterworth(order, cutoff_hz, fs_hz, false);
}

std::complex<long double> frequency_response(const FilterCoefficients& coeffs, double f_hz,
                                             double fs_hz) {
  const cld zinv = std::exp(cld(0.0L, -2.0L * kPi * f_hz / fs_hz));
  if (!coeffs.sections.empty()) {
    cld h(1.0L);
    for (const auto& s : coeffs.sections) {
      h *= ((s.b2 * zinv + s.b1) * zinv + s.b0) / ((s.a2 * zinv + s.a1) * zinv + 1.0L);
    }
    return h;
  }
  auto horner = [&](const std::vector<long double>& c) {
    cld acc(0.0L);
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * zinv + *it;
    return acc;
  };
  return horner(coeffs.b) / horner(coeffs.a);
}

std::vector<double> filter_samples(const FilterCoefficients& coeffs,
                                   const std::vector<double>& x, bool steady_start) {
  if (steady_start && coeffs.sections.empty()) {
    throw Error("InvalidFilter", "steady start needs a sectioned filter");
  }
  if (!coeffs.sections.empty()) {
    std::vector<long double> y(x.begin(), x.end());
    for (const auto& s : coeffs.sections) {
      long double s1 = 0.0L;
      long double s2 = 0.0L;
      if (steady_start && !y.empty()) {
        const long double u = y.front();
        const long double out = u * (s.b0 + s.b1 + s.b2) / (1.0L + s.a1 + s.a2);
        s2 = s.b2 * u - s.a2 * out;
        s1 = s.b1 * u - s.a1 * out + s2;
      }
      for (auto& v : y) {
        const long double in = v;
        const long double out = s.b0 * in + s1;
        s1 = s.b1 * in - s.a1 * out + s2;
        s2 = s.b2 * in - s.a2 * out;
        v = out;
      }
    }
    return std::vector<double>(y.begin(), y.end());
  }
  const std::size_t n = coeffs.b.size();
  if (n == 0 || coeffs.a.size() != n) throw Error("InvalidFilter", "b and a must match in length");
  std::vector<long double> b = coeffs.b;
  std::vector<long double> a = coeffs.a;
  const long double a0 = a[0];
  for (auto& v : b) v /= a0;
  for (auto& v : a) v /= a0;

  std::vector<long double> state(n, 0.0L);
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const long double xi = x[i];
    const long double yi = b[0] * xi + state[0];
    for (std::size_t k = 1; k < n; ++k) {
      state[k - 1] = b[k] * xi - a[k] * yi + (k < n - 1 ? state[k] : 0.0L);
    }
    y[i] = static_cast<double>(yi);
  }
  return y;
}

ChannelStream filter_forward(const FilterCoefficients& coeffs, const ChannelStream& x) {
  if (x.has_missing()) {
    throw Error("UnimputedInput", x.name + ": impute missing samples before filtering");
  }
  return ChannelStream::complete(x.name, x.fs_hz, filter_samples(coeffs, x.samples));
}

ChannelStream resample(const ChannelStream& x, double target_fs) {
  if (x.samples.empty()) throw Error("EmptyInput", x.name + ": cannot resample an empty stream");
  if (!(target_fs > 0.0)) throw Error("InvalidRate", "target sampling rate must be > 0");
  if (x.has_missing()) {
    throw Error("UnimputedInput", x.name + ": impute missing samples before resampling");
  }
  if (target_fs == x.fs_hz) return x;

  const std::size_t out_len = static_cast<std::size_t>(
      std::llround(static_cast<double>(x.size()) * target_fs / x.fs_hz));
  const double ratio = x.fs_hz / target_fs;
  const bool downsampling = ratio > 1.0;

  std::vector<double> source = x.samples;
  if (downsampling) {
    source = filter_samples(design_butterworth_lowpass(6, 0.45 * target_fs, x.fs_hz), source, true);
  }

  std::vector<double> out(out_len);
  const double k_round = std::round(ratio);
  if (downsampling && std::abs(ratio - k_round) < 1e-9) {
    const auto k = static_cast<std::size_t>(k_round);
    for (std::size_t j = 0; j < out_len; ++j) {
      out[j] = source[std::min(j * k, source.size() - 1)];
    }
  } else {
    for (std::size_t j = 0; j < out_len; ++j) {
      const double pos = static_cast<double>(j) * ratio;
      const auto i0 = static_cast<std::size_t>(std::floor(pos));
      if (i0 + 1 >= source.size()) {
        out[j] = source.back();
        continue;
      }
      const double frac = pos - static_cast<double>(i0);
      out[j] = (1.0 - frac) * source[i0] + frac * source[i0 + 1];
    }
  }
  return ChannelStream::complete(x.name, target_fs, std::move(out));
}

// ---------------------------------------------------------------------------
// Session directory I/O

namespace {

constexpr int kSignalDigits = 9;

std::map<std::string, std::string> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("MissingFile", "cannot open " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error("MalformedCsv", path.string() + ": row " + std::to_string(row) +
                                      " is not key=value");
    }
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

const std::string& require_key(const std::map<std::string, std::string>& kv,
                               const std::string& key, const fs::path& path) {
  auto it = kv.find(key);
  if (it == kv.end()) throw Error("MalformedCsv", path.string() + ": missing key '" + key + "'");
  return it->second;
}

std::vector<ChannelStream> read_modality(const fs::path& path, double fs_hz,
                                         std::size_t expected_channels) {
  std::vector<ChannelStream> channels(expected_channels);
  bool header_seen = false;
  double t0 = 0.0;
  std::size_t data_rows = 0;
  csv::for_each_row(path, [&](std::size_t row, std::span<const std::string_view> cells) {
    if (!header_seen) {
      if (cells[0] != "t_s") {
        throw Error("MalformedCsv", path.string() + ": first column must be t_s");
      }
      if (cells.size() - 1 != expected_channels) {
        throw Error("MalformedCsv", path.string() + ": expected " +
                                        std::to_string(expected_channels) +
                                        " channels, found " + std::to_string(cells.size() - 1));
      }
      for (std::size_t c = 0; c < expected_channels; ++c) {
        channels[c].name = std::string(cells[c + 1]);
        channels[c].fs_hz = fs_hz;
      }
      header_seen = true;
      return;
    }
    auto t = csv::parse_cell(cells[0], path, row);
    if (!t) {
      throw Error("MalformedCsv", path.string() + ": row " + std::to_string(row) +
                                      " has an empty t_s");
    }
    if (data_rows == 0) t0 = *t;
    const double expected_t = t0 + static_cast<double>(data_rows) / fs_hz;
    if (std::abs(*t - expected_t) > 0.5 / fs_hz) {
      throw Error("InconsistentRate", path.string() + ": row " + std::to_string(row) +
                                          " timestamp disagrees with " + csv::format(fs_hz) +
                                          " Hz");
    }
    for (std::size_t c = 0; c < expected_channels; ++c) {
      auto v = csv::parse_cell(cells[c + 1], path, row);
      channels[c].samples.push_back(v.value_or(0.0));
      channels[c].missing_mask.push_back(v ? 0 : 1);
    }
    ++data_rows;
  });
  return channels;
}

void write_modality(const fs::path& path, const std::vector<ChannelStream>& channels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("IoError", "cannot write " + path.string());
  std::string line = "t_s";
  for (const auto& ch : channels) line += "," + ch.name;
  line += '\n';
  out << line;
  const std::size_t n = channels.empty() ? 0 : channels.front().size();
  const double fs_hz = channels.empty() ? 1.0 : channels.front().fs_hz;
  for (std::size_t i = 0; i < n; ++i) {
    line = csv::format_sig(static_cast<double>(i) / fs_hz, 12);
    for (const auto& ch : channels) {
      line += ',';
      if (!ch.missing_mask[i]) line += csv::format_sig(ch.samples[i], kSignalDigits);
    }
    line += '\n';
    out << line;
  }
}

double group_rate(const std::vector<ChannelStream>& g) {
  return g.empty() ? 0.0 : g.front().fs_hz;
}

}  // namespace

EventSchedule load_events(const fs::path& events_csv) {
  const csv::Table table = csv::read_table(events_csv);
  if (table.header != std::vector<std::string>{"label", "start_s", "end_s"}) {
    throw Error("MalformedCsv", events_csv.string() + ": header must be label,start_s,end_s");
  }
  EventSchedule schedule;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& cells = table.rows[r];
    EventInterval iv;
    iv.label = parse_task_label(cells[0]);
    auto start = csv::parse_cell(cells[1], events_csv, r + 2);
    auto end = csv::parse_cell(cells[2], events_csv, r + 2);
    if (!start || !end) {
      throw Error("MalformedCsv", events_csv.string() + ": row " + std::to_string(r + 2) +
                                      " has empty bounds");
    }
    iv.start_s = *start;
    iv.end_s = *end;
    schedule.intervals.push_back(iv);
  }
  schedule.validate();
  return schedule;
}

void save_events(const EventSchedule& events, const fs::path& events_csv) {
  std::ofstream out(events_csv, std::ios::binary);
  if (!out) throw Error("IoError", "cannot write " + events_csv.string());
  out << "label,start_s,end_s\n";
  for (const auto& iv : events.intervals) {
    out << to_string(iv.label) << ',' << csv::format(iv.start_s) << ','
        << csv::format(iv.end_s) << '\n';
  }
}

MultimodalRecording load_recording(const fs::path& session_dir) {
  const fs::path manifest_path = session_dir / "manifest.txt";
  const auto kv = read_manifest(manifest_path);
  auto num = [&](const std::string& key) {
    return csv::parse_number(require_key(kv, key, manifest_path), key);
  };
  auto count = [&](const std::string& key) {
    auto v = csv::parse_integer(require_key(kv, key, manifest_path), key);
    if (v < 0) throw Error("MalformedCsv", manifest_path.string() + ": negative " + key);
    return static_cast<std::size_t>(v);
  };

  MultimodalRecording rec;
  rec.subject_id = require_key(kv, "subject_id", manifest_path);
  const double eeg_fs = num("eeg_fs");
  const double fnirs_fs = num("fnirs_fs");
  const double pupil_fs = num("pupil_fs");
  rec.eeg = read_modality(session_dir / "eeg.csv", eeg_fs, count("eeg_channels"));
  rec.fnirs_hbo2 = read_modality(session_dir / "fnirs_hbo2.csv", fnirs_fs, count("fnirs_channels"));
  rec.fnirs_hbr = read_modality(session_dir / "fnirs_hbr.csv", fnirs_fs, count("fnirs_channels"));
  rec.pupil = read_modality(session_dir / "pupil.csv", pupil_fs, count("pupil_channels"));
  rec.events = load_events(session_dir / "events.csv");
  rec.validate();
  return rec;
}

void save_recording(const MultimodalRecording& rec, const fs::path& session_dir) {
  rec.validate();
  fs::create_directories(session_dir);
  {
    std::ofstream out(session_dir / "manifest.txt", std::ios::binary);
    if (!out) throw Error("IoError", "cannot write manifest in " + session_dir.string());
    out << "subject_id=" << rec.subject_id << '\n'
        << "eeg_fs=" << csv::format(group_rate(rec.eeg)) << '\n'
        << "fnirs_fs=" << csv::format(group_rate(rec.fnirs_hbo2)) << '\n'
        << "pupil_fs=" << csv::format(group_rate(rec.pupil)) << '\n'
        << "eeg_channels=" << rec.eeg.size() << '\n'
        << "fnirs_channels=" << rec.fnirs_hbo2.size() << '\n'
        << "pupil_channels=" << rec.pupil.size() << '\n';
  }
  write_modality(session_dir / "eeg.csv", rec.eeg);
  write_modality(session_dir / "fnirs_hbo2.csv", rec.fnirs_hbo2);
  write_modality(session_dir / "fnirs_hbr.csv", rec.fnirs_hbr);
  write_modality(session_dir / "pupil.csv", rec.pupil);
  save_events(rec.events, session_dir / "events.csv");
}

}  // namespace cwl
