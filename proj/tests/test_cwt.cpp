#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "cwl/cwt.hpp"
#include "helpers.hpp"

using namespace cwl;
using testing::error_code_of;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> tone(double f, double fs, std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::sin(2 * kPi * f * i / fs);
  return x;
}

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> x(n);
  for (auto& v : x) v = g(rng);
  return x;
}

// Direct evaluation of |sum_n x[n] conj(psi((n - t) / s)) / sqrt(s)| from the
// wavelet definition, truncated at 4 scales like the bank.
double brute_magnitude(const std::vector<double>& x, double freq_hz, double fs, double omega0, int t) {
  const double s = omega0 / (2 * kPi * freq_hz) * fs;
  const int hw = static_cast<int>(std::ceil(4.0 * s));
  std::complex<double> acc = 0.0;
  for (int n = std::max(0, t - hw); n <= std::min<int>(static_cast<int>(x.size()) - 1, t + hw); ++n) {
    const double u = (n - t) / s;
    const std::complex<double> psi =
        std::pow(kPi, -0.25) * std::exp(std::complex<double>(0.0, omega0 * u)) * std::exp(-0.5 * u * u);
    acc += x[n] * std::conj(psi) / std::sqrt(s);
  }
  return std::abs(acc);
}

int argmax_row(const Scalogram& s) {
  int best = 0;
  double best_mean = -1.0;
  for (int r = 0; r < s.n_scales; ++r) {
    double sum = 0.0;
    for (int t = 0; t < s.n_time; ++t) sum += s.magnitude(r, t);
    if (sum > best_mean) {
      best_mean = sum;
      best = r;
    }
  }
  return best;
}

int nearest_row(const Scalogram& s, double f) {
  int best = 0;
  for (int r = 1; r < s.n_scales; ++r) {
    if (std::abs(std::log(s.scale_freqs_hz[r] / f)) < std::abs(std::log(s.scale_freqs_hz[best] / f))) best = r;
  }
  return best;
}

}  // namespace

TEST_SUITE("cwt") {

TEST_CASE("scales are log-spaced from the top frequency down") {
  const MorletBank bank(CwtConfig{}, 500.0);
  const auto& f = bank.scale_freqs_hz();
  REQUIRE(f.size() == 64);
  CHECK(f.front() == doctest::Approx(60.0));
  CHECK(f.back() == doctest::Approx(0.5));
  const double ratio = f[1] / f[0];
  for (std::size_t r = 1; r < f.size(); ++r) CHECK(f[r] / f[r - 1] == doctest::Approx(ratio));
  for (std::size_t r = 0; r < f.size(); ++r) {
    CHECK(bank.scales_s()[r] == doctest::Approx(6.0 / (2 * kPi * f[r])));
  }
}

TEST_CASE("magnitudes match a direct evaluation of the wavelet sum") {
  const auto x = noise(848, 3);
  const CwtConfig cfg;
  const Scalogram s = cwt_morlet(x, 500.0, cfg);
  for (int r : {0, 7, 20, 41, 63}) {
    for (int t : {0, 5, 200, 424, 700, 847}) {
      const double want = brute_magnitude(x, s.scale_freqs_hz[r], 500.0, 6.0, t);
      CHECK(s.magnitude(r, t) == doctest::Approx(want).epsilon(1e-9));
    }
  }
  for (double m : s.magnitudes) CHECK(m >= 0.0);
}

TEST_CASE("tones localize to the right scale row") {
  for (double f : {2.0, 8.0, 10.0, 32.0}) {
    const Scalogram s = cwt_morlet(tone(f, 500.0, 848), 500.0, CwtConfig{});
    const int got = argmax_row(s);
    const int want = nearest_row(s, f);
    INFO("tone " << f << " Hz: argmax row " << got << " (" << s.scale_freqs_hz[got] << " Hz)");
    CHECK(std::abs(got - want) <= 1);
  }
}

TEST_CASE("zero input and scaling") {
  const Scalogram z = cwt_morlet(std::vector<double>(848, 0.0), 500.0, CwtConfig{});
  for (double m : z.magnitudes) CHECK(m == 0.0);
  for (auto p : z.image.pixels) CHECK(p == 0);

  const auto x = noise(848, 9);
  std::vector<double> x2(x);
  for (auto& v : x2) v *= 2.0;
  const Scalogram a = cwt_morlet(x, 500.0, CwtConfig{});
  const Scalogram b = cwt_morlet(x2, 500.0, CwtConfig{});
  for (std::size_t i = 0; i < a.magnitudes.size(); ++i) CHECK(b.magnitudes[i] == 2.0 * a.magnitudes[i]);
  CHECK(a.image.pixels == b.image.pixels);
}

TEST_CASE("linearity in the coefficients") {
  const auto x = noise(848, 1);
  const MorletBank bank(CwtConfig{}, 500.0);
  // |W(a x)| = |a| |W(x)|; checked for a negative factor too.
  std::vector<double> neg(x);
  for (auto& v : neg) v *= -0.37;
  const auto mx = bank.magnitudes(x), mn = bank.magnitudes(neg);
  for (std::size_t i = 0; i < mx.size(); ++i) CHECK(std::abs(mn[i] - 0.37 * mx[i]) <= 1e-12 * (1 + mx[i]));
}

TEST_CASE("shifting the input shifts every row") {
  const auto x = noise(848, 4);
  const int k = 37;
  std::vector<double> shifted(x.size(), 0.0);
  for (std::size_t i = k; i < x.size(); ++i) shifted[i] = x[i - k];
  const MorletBank bank(CwtConfig{}, 500.0);
  const auto a = bank.magnitudes(x), b = bank.magnitudes(shifted);
  const int n = static_cast<int>(x.size());
  int compared = 0;
  for (int r = 0; r < bank.n_scales(); ++r) {
    const int margin = bank.half_width(r);
    for (int t = k; t + margin < n; ++t) {
      CHECK(std::abs(b[static_cast<std::size_t>(r) * n + t] - a[static_cast<std::size_t>(r) * n + t - k]) < 1e-6);
      ++compared;
    }
  }
  CHECK(compared > 10000);
}

TEST_CASE("2x2 grid renders with min-max corners") {
  Scalogram s;
  s.n_scales = 2;
  s.n_time = 2;
  s.magnitudes = {0.0, 1.0, 2.0, 3.0};
  const GrayImage img = render_image(s, 4, 4);
  CHECK(img.height == 4);
  CHECK(img.width == 4);
  CHECK(img.at(0, 0) == 0);
  CHECK(img.at(3, 3) == 255);
  CHECK(img.at(0, 3) == 85);
  CHECK(img.at(3, 0) == 170);
  s.magnitudes = {2.0, 2.0, 2.0, 2.0};
  for (auto p : render_image(s, 4, 4).pixels) CHECK(p == 0);
}

TEST_CASE("rendered images span the full byte range") {
  const MorletBank bank(CwtConfig{}, 500.0);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto x = noise(848, seed);
    const GrayImage img = scalogram_image(bank, x);
    CHECK(img.height == 128);
    CHECK(img.width == 128);
    CHECK(*std::min_element(img.pixels.begin(), img.pixels.end()) == 0);
    CHECK(*std::max_element(img.pixels.begin(), img.pixels.end()) == 255);
  }
}

TEST_CASE("fast image path equals the two-step path") {
  const MorletBank bank(CwtConfig{}, 500.0);
  for (std::uint64_t seed : {3u, 8u}) {
    auto x = noise(848, seed);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += std::sin(2 * kPi * 12.0 * i / 500.0);
    const Scalogram s = cwt_morlet(x, 500.0, CwtConfig{});
    CHECK(scalogram_image(bank, x).pixels == s.image.pixels);
  }
}

TEST_CASE("PGM round trip") {
  const Scalogram s = cwt_morlet(noise(200, 5), 500.0, CwtConfig{});
  const auto path = testing::scratch_dir("pgm") / "a.pgm";
  write_pgm(s.image, path);
  const GrayImage back = read_pgm(path);
  CHECK(back.height == s.image.height);
  CHECK(back.width == s.image.width);
  CHECK(back.pixels == s.image.pixels);
}

TEST_CASE("input and configuration errors") {
  CHECK(error_code_of([] { cwt_morlet(std::vector<double>(7, 1.0), 500.0, CwtConfig{}); }) == "InputTooShort");
  CwtConfig bad;
  bad.freq_max_hz = 300.0;
  CHECK(error_code_of([&] { MorletBank(bad, 500.0); }) == "InvalidConfig");
  bad = CwtConfig{};
  bad.n_scales = 1;
  CHECK(error_code_of([&] { MorletBank(bad, 500.0); }) == "InvalidConfig");
}

}  // TEST_SUITE
