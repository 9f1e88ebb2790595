#include "cwl/cwt.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "cwl/error.hpp"

namespace cwl {

void CwtConfig::validate(double fs_hz) const {
  if (n_scales < 2) throw Error("InvalidConfig", "CWT needs at least 2 scales");
  if (!(freq_min_hz > 0.0) || !(freq_min_hz < freq_max_hz) || freq_max_hz > fs_hz / 2.0) {
    throw Error("InvalidConfig", "CWT frequencies must satisfy 0 < min < max <= fs/2");
  }
  if (!(omega0 > 0.0)) throw Error("InvalidConfig", "Morlet centre frequency must be > 0");
  if (image_h < 1 || image_w < 1) throw Error("InvalidConfig", "image size must be positive");
}

MorletBank::MorletBank(const CwtConfig& cfg, double fs_hz) : cfg_(cfg), fs_(fs_hz) {
  cfg.validate(fs_hz);
  const double norm = std::pow(std::numbers::pi, -0.25);
  const int n = cfg.n_scales;
  const double log_max = std::log(cfg.freq_max_hz);
  const double log_min = std::log(cfg.freq_min_hz);
  for (int r = 0; r < n; ++r) {
    const double f = std::exp(log_max + (log_min - log_max) * r / (n - 1));
    const double scale_s = cfg.omega0 / (2.0 * std::numbers::pi * f);
    const double scale_samples = scale_s * fs_hz;
    const int hw = static_cast<int>(std::ceil(4.0 * scale_samples));
    const double gain = norm / std::sqrt(scale_samples);
    std::vector<double> re(2 * hw + 1);
    std::vector<double> im(2 * hw + 1);
    // Stored as the conjugate wavelet so W(t) = sum_k x[t + k] * kernel[k].
    for (int k = -hw; k <= hw; ++k) {
      const double u = k / scale_samples;
      const double env = gain * std::exp(-0.5 * u * u);
      re[k + hw] = env * std::cos(cfg.omega0 * u);
      im[k + hw] = -env * std::sin(cfg.omega0 * u);
    }
    freqs_.push_back(f);
    scales_.push_back(scale_s);
    half_width_.push_back(hw);
    re_.push_back(std::move(re));
    im_.push_back(std::move(im));
  }
}

double MorletBank::magnitude_at(std::span<const double> x, int row, int t) const {
  const int hw = half_width_[row];
  const int len = static_cast<int>(x.size());
  const int k_lo = std::max(-hw, -t);
  const int k_hi = std::min(hw, len - 1 - t);
  const double* re = re_[row].data() + hw;
  const double* im = im_[row].data() + hw;
  const double* xt = x.data() + t;
  if (k_hi < k_lo) return 0.0;
  const Eigen::Index n = k_hi - k_lo + 1;
  const Eigen::Map<const Eigen::VectorXd> xs(xt + k_lo, n);
  const double acc_re = xs.dot(Eigen::Map<const Eigen::VectorXd>(re + k_lo, n));
  const double acc_im = xs.dot(Eigen::Map<const Eigen::VectorXd>(im + k_lo, n));
  return std::hypot(acc_re, acc_im);
}

std::vector<double> MorletBank::magnitudes(std::span<const double> x) const {
  const int len = static_cast<int>(x.size());
  std::vector<double> out(static_cast<std::size_t>(n_scales()) * len);
  for (int r = 0; r < n_scales(); ++r) {
    for (int t = 0; t < len; ++t) out[static_cast<std::size_t>(r) * len + t] = magnitude_at(x, r, t);
  }
  return out;
}

namespace {

struct Tap {
  int lo;
  int hi;
  double frac;
};

// Corner-aligned sampling positions of a resize from n_in to n_out.
std::vector<Tap> resize_taps(int n_in, int n_out) {
  std::vector<Tap> taps(n_out);
  for (int j = 0; j < n_out; ++j) {
    const double pos = n_out == 1 ? 0.0 : static_cast<double>(j) * (n_in - 1) / (n_out - 1);
    int lo = std::min(static_cast<int>(std::floor(pos)), n_in - 1);
    int hi = std::min(lo + 1, n_in - 1);
    taps[j] = {lo, hi, pos - lo};
  }
  return taps;
}

// grid(row, col) is supplied by `value`; only columns named by col taps are read.
template <typename Lookup>
GrayImage resize_and_normalize(int n_rows, int n_cols, int out_h, int out_w, Lookup&& value) {
  const auto row_taps = resize_taps(n_rows, out_h);
  const auto col_taps = resize_taps(n_cols, out_w);
  std::vector<double> resized(static_cast<std::size_t>(out_h) * out_w);
  for (int i = 0; i < out_h; ++i) {
    const Tap& rt = row_taps[i];
    for (int j = 0; j < out_w; ++j) {
      const Tap& ct = col_taps[j];
      const double top = (1.0 - ct.frac) * value(rt.lo, ct.lo) + ct.frac * value(rt.lo, ct.hi);
      const double bottom = (1.0 - ct.frac) * value(rt.hi, ct.lo) + ct.frac * value(rt.hi, ct.hi);
      resized[static_cast<std::size_t>(i) * out_w + j] = (1.0 - rt.frac) * top + rt.frac * bottom;
    }
  }
  GrayImage img;
  img.height = out_h;
  img.width = out_w;
  img.pixels.assign(resized.size(), 0);
  const auto [mn, mx] = std::minmax_element(resized.begin(), resized.end());
  const double lo = *mn;
  const double range = *mx - lo;
  if (range > 0.0) {
    for (std::size_t p = 0; p < resized.size(); ++p) {
      const double scaled = std::round(255.0 * (resized[p] - lo) / range);
      img.pixels[p] = static_cast<std::uint8_t>(std::clamp(scaled, 0.0, 255.0));
    }
  }
  return img;
}

}  // namespace

Scalogram cwt_morlet(std::span<const double> x, double fs_hz, const CwtConfig& cfg) {
  if (x.size() < 8) throw Error("InputTooShort", "CWT input needs at least 8 samples");
  const MorletBank bank(cfg, fs_hz);
  Scalogram s;
  s.n_scales = bank.n_scales();
  s.n_time = static_cast<int>(x.size());
  s.magnitudes = bank.magnitudes(x);
  s.scale_freqs_hz = bank.scale_freqs_hz();
  s.scales_s = bank.scales_s();
  s.image = render_image(s, cfg.image_h, cfg.image_w);
  return s;
}

GrayImage render_image(const Scalogram& s, int out_h, int out_w) {
  if (s.magnitudes.empty() || s.n_scales < 1 || s.n_time < 1) {
    throw Error("EmptyInput", "cannot render an empty scalogram");
  }
  if (out_h < 1 || out_w < 1) throw Error("InvalidConfig", "image size must be positive");
  return resize_and_normalize(s.n_scales, s.n_time, out_h, out_w,
                              [&](int r, int c) { return s.magnitude(r, c); });
}

GrayImage scalogram_image(const MorletBank& bank, std::span<const double> x) {
  if (x.size() < 8) throw Error("InputTooShort", "CWT input needs at least 8 samples");
  const int n_time = static_cast<int>(x.size());
  const int n_rows = bank.n_scales();
  const int out_w = bank.config().image_w;
  // Compact grid over the needed columns only.
  std::vector<int> column_slot(n_time, -1);
  std::vector<int> columns;
  for (const Tap& t : resize_taps(n_time, out_w)) {
    for (int c : {t.lo, t.hi}) {
      if (column_slot[c] < 0) {
        column_slot[c] = static_cast<int>(columns.size());
        columns.push_back(c);
      }
    }
  }
  std::vector<double> grid(static_cast<std::size_t>(n_rows) * columns.size());
  for (int r = 0; r < n_rows; ++r) {
    for (std::size_t j = 0; j < columns.size(); ++j) {
      grid[r * columns.size() + j] = bank.magnitude_at(x, r, columns[j]);
    }
  }
  return resize_and_normalize(n_rows, n_time, bank.config().image_h, out_w, [&](int r, int c) {
    return grid[r * columns.size() + column_slot[c]];
  });
}

void write_pgm(const GrayImage& image, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("IoError", "cannot write " + path.string());
  out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
}

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("MissingFile", "cannot open " + path.string());
  std::string magic;
  int maxval = 0;
  GrayImage img;
  in >> magic >> img.width >> img.height >> maxval;
  if (magic != "P5" || maxval != 255 || img.width < 1 || img.height < 1) {
    throw Error("MalformedImage", path.string() + ": not an 8-bit binary PGM");
  }
  in.get();
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
  in.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  if (!in) throw Error("MalformedImage", path.string() + ": truncated pixel data");
  return img;
}

}  // namespace cwl
