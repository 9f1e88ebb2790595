#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace cwl {

struct CwtConfig {
  int n_scales = 64;
  double freq_min_hz = 0.5;
  double freq_max_hz = 60.0;
  double omega0 = 6.0;  // Morlet centre frequency (rad)
  int image_h = 128;
  int image_w = 128;

  void validate(double fs_hz) const;
};

struct GrayImage {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> pixels;  // row-major

  std::uint8_t at(int r, int c) const { return pixels[static_cast<std::size_t>(r) * width + c]; }
};

// Rows are ordered from freq_max (row 0) down to freq_min.
struct Scalogram {
  int n_scales = 0;
  int n_time = 0;
  std::vector<double> magnitudes;  // n_scales x n_time
  std::vector<double> scale_freqs_hz;
  std::vector<double> scales_s;
  GrayImage image;

  double magnitude(int row, int col) const {
    return magnitudes[static_cast<std::size_t>(row) * n_time + col];
  }
};

// Precomputed complex Morlet kernels psi(t) = pi^{-1/4} e^{j w0 t} e^{-t^2/2},
// one per scale, sampled at fs, L2-normalized by 1/sqrt(scale in samples)
// and truncated at |t| <= 4 scales.
class MorletBank {
 public:
  MorletBank(const CwtConfig& cfg, double fs_hz);

  const CwtConfig& config() const { return cfg_; }
  double fs_hz() const { return fs_; }
  int n_scales() const { return static_cast<int>(freqs_.size()); }
  const std::vector<double>& scale_freqs_hz() const { return freqs_; }
  const std::vector<double>& scales_s() const { return scales_; }
  // Half-width of row r's kernel in samples.
  int half_width(int row) const { return half_width_[row]; }

  // |W(row, t)| for one time index, zero-padded outside x.
  double magnitude_at(std::span<const double> x, int row, int t) const;
  // Full magnitude grid by direct convolution.
  std::vector<double> magnitudes(std::span<const double> x) const;

 private:
  CwtConfig cfg_;
  double fs_;
  std::vector<double> freqs_;
  std::vector<double> scales_;
  std::vector<int> half_width_;
  std::vector<std::vector<double>> re_;
  std::vector<std::vector<double>> im_;
};

Scalogram cwt_morlet(std::span<const double> x, double fs_hz, const CwtConfig& cfg);

// Bilinear (corner-aligned) resize of the magnitude grid to out_h x out_w,
// then min-max normalization to [0, 255]. Zero-range input renders all zeros.
GrayImage render_image(const Scalogram& s, int out_h, int out_w);

// render_image(cwt_morlet(x)) computed from only the time columns that the
// resize samples; bit-identical to the two-step path.
GrayImage scalogram_image(const MorletBank& bank, std::span<const double> x);

void write_pgm(const GrayImage& image, const std::filesystem::path& path);
GrayImage read_pgm(const std::filesystem::path& path);

}  // namespace cwl
