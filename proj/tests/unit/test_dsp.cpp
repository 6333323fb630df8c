#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "test_util.hpp"
#include "vtd/dsp.hpp"

namespace vtd {
namespace {

using dsp::BandpassSpec;
using dsp::BiquadCascade;

constexpr double kPi = std::numbers::pi;

std::vector<double> sine(std::size_t n, double fs, double f, double amp = 1.0, double phase = 0.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = amp * std::sin(2.0 * kPi * f * static_cast<double>(i) / fs + phase);
  return x;
}

double rms(const std::vector<double>& x, std::size_t lo = 0, std::size_t hi = 0) {
  if (hi == 0) hi = x.size();
  double s = 0.0;
  for (std::size_t i = lo; i < hi; ++i) s += x[i] * x[i];
  return std::sqrt(s / static_cast<double>(hi - lo));
}

double max_abs(const std::vector<double>& x, std::size_t lo, std::size_t hi) {
  double m = 0.0;
  for (std::size_t i = lo; i < hi; ++i) m = std::max(m, std::abs(x[i]));
  return m;
}

TEST(BandpassSpec, Validation) {
  EXPECT_VTD_ERROR((BandpassSpec{40.0, 0.5, 2, 250.0}.validate()), ErrorCode::InvalidSpec);
  EXPECT_VTD_ERROR((BandpassSpec{0.0, 40.0, 2, 250.0}.validate()), ErrorCode::InvalidSpec);
  EXPECT_VTD_ERROR((BandpassSpec{0.5, 125.0, 2, 250.0}.validate()), ErrorCode::InvalidSpec);
  EXPECT_VTD_ERROR((BandpassSpec{0.5, 40.0, 3, 250.0}.validate()), ErrorCode::InvalidSpec);
  EXPECT_VTD_ERROR(dsp::design_butterworth_bandpass(BandpassSpec{0.5, 40.0, 6, 250.0}), ErrorCode::InvalidSpec);
  EXPECT_NO_THROW((BandpassSpec{0.05, 40.0, 8, 360.0}.validate()));
}

TEST(Butterworth, CenterAndCutoffGains) {
  const BandpassSpec spec{0.5, 40.0, 2, 250.0};
  const BiquadCascade c = dsp::design_butterworth_bandpass(spec);
  EXPECT_EQ(c.sections.size(), 2u);
  EXPECT_NEAR(dsp::magnitude_response(c, std::sqrt(0.5 * 40.0), 250.0), 1.0, 0.01);
  EXPECT_NEAR(dsp::magnitude_response(c, 0.5, 250.0), std::sqrt(0.5), 0.016);
  EXPECT_NEAR(dsp::magnitude_response(c, 40.0, 250.0), std::sqrt(0.5), 0.016);
  const double db_lo = 20.0 * std::log10(dsp::magnitude_response(c, 0.5, 250.0));
  const double db_hi = 20.0 * std::log10(dsp::magnitude_response(c, 40.0, 250.0));
  EXPECT_NEAR(db_lo, -3.0103, 0.2);
  EXPECT_NEAR(db_hi, -3.0103, 0.2);
  EXPECT_EQ(dsp::magnitude_response(c, 0.0, 250.0), 0.0);
}

TEST(Butterworth, MatchesAnalyticMagnitudeOnGrid) {
  for (int order : {2, 4, 8}) {
    for (double fs : {250.0, 360.0, 1000.0}) {
      const BandpassSpec spec{0.5, 40.0, order, fs};
      const BiquadCascade c = dsp::design_butterworth_bandpass(spec);
      for (int k = 1; k < 200; ++k) {
        const double f = 0.5 * fs * k / 200.0;
        const double got = dsp::magnitude_response(c, f, fs);
        const double want = dsp::analytic_bandpass_magnitude(spec, f);
        ASSERT_NEAR(got, want, 1e-9) << "order " << order << " fs " << fs << " f " << f;
      }
    }
  }
}

// The analytic oracle restated independently: Butterworth lowpass magnitude
// at the bandpass-mapped, prewarped frequency.
TEST(Butterworth, AnalyticMagnitudeFromFirstPrinciples) {
  const BandpassSpec spec{0.5, 40.0, 2, 250.0};
  const auto warp = [&](double f) { return 2.0 * spec.fs * std::tan(kPi * f / spec.fs); };
  const double w1 = warp(spec.low_cut_hz);
  const double w2 = warp(spec.high_cut_hz);
  for (double f : {0.1, 0.5, 1.0, 4.47, 10.0, 40.0, 60.0, 100.0}) {
    const double w = warp(f);
    const double omega = std::abs((w * w - w1 * w2) / (w * (w2 - w1)));
    const double want = 1.0 / std::sqrt(1.0 + std::pow(omega, 2 * spec.order));
    EXPECT_NEAR(dsp::analytic_bandpass_magnitude(spec, f), want, 1e-12) << f;
  }
}

TEST(Butterworth, StableAndMonotoneOutsidePassband) {
  for (int order : {2, 4, 8}) {
    for (auto [lo, hi, fs] : {std::tuple{0.5, 40.0, 250.0}, std::tuple{0.05, 40.0, 250.0},
                              std::tuple{1.0, 100.0, 360.0}, std::tuple{5.0, 15.0, 200.0}}) {
      const BandpassSpec spec{lo, hi, order, fs};
      const BiquadCascade c = dsp::design_butterworth_bandpass(spec);
      ASSERT_EQ(c.sections.size(), static_cast<std::size_t>(order));
      for (const auto& s : c.sections) {
        EXPECT_TRUE(s.stable());
        EXPECT_LT(std::abs(s.a2), 1.0);
        EXPECT_LT(std::abs(s.a1), 1.0 + s.a2);
      }
      double prev = dsp::magnitude_response(c, hi, fs);
      for (int k = 1; k <= 200; ++k) {
        const double f = hi + (0.5 * fs - hi) * k / 200.0;
        const double m = dsp::magnitude_response(c, f, fs);
        EXPECT_LE(m, prev + 1e-12) << "above band, f " << f;
        prev = m;
      }
      prev = dsp::magnitude_response(c, lo, fs);
      for (int k = 1; k < 200; ++k) {
        const double f = lo * (1.0 - k / 200.0);
        const double m = dsp::magnitude_response(c, f, fs);
        EXPECT_LE(m, prev + 1e-12) << "below band, f " << f;
        prev = m;
      }
    }
  }
}

TEST(MagnitudeResponse, IdentityCascade) {
  const auto id = BiquadCascade::identity();
  for (double f : {0.0, 1.0, 50.0, 125.0}) EXPECT_DOUBLE_EQ(dsp::magnitude_response(id, f, 250.0), 1.0);
}

TEST(FilterForward, IdentityPassesThrough) {
  const std::vector<double> x{1.0, -2.0, 3.5, 0.0};
  EXPECT_EQ(dsp::filter_forward(BiquadCascade::identity(), x), x);
}

TEST(FilterForward, HandRecurrenceOfOneSection) {
  BiquadCascade c;
  c.sections = {dsp::Biquad{0.5, 0.0, -0.5, -0.6, 0.2}};
  std::vector<double> impulse(5, 0.0);
  impulse[0] = 1.0;
  const auto y = dsp::filter_forward(c, impulse);
  const double want[] = {0.5, 0.3, -0.42, -0.312, -0.1032};
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(y[i], want[i], 1e-15) << i;
}

TEST(FilterForward, Linearity) {
  const auto c = dsp::design_butterworth_bandpass({0.5, 40.0, 4, 250.0});
  std::mt19937_64 gen(5);
  std::normal_distribution<double> nd;
  std::vector<double> x(1000), y(1000), mix(1000);
  const double a = 1.7, b = -0.4;
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = nd(gen);
    y[i] = nd(gen);
    mix[i] = a * x[i] + b * y[i];
  }
  const auto fx = dsp::filter_forward(c, x);
  const auto fy = dsp::filter_forward(c, y);
  const auto fm = dsp::filter_forward(c, mix);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double want = a * fx[i] + b * fy[i];
    EXPECT_NEAR(fm[i], want, 1e-9 * std::max(1.0, std::abs(want)));
  }
}

TEST(FilterForward, RejectsNonFinite) {
  const auto c = dsp::design_butterworth_bandpass({0.5, 40.0, 2, 250.0});
  const std::vector<double> x{0.0, std::nan(""), 1.0};
  EXPECT_VTD_ERROR(dsp::filter_forward(c, x), ErrorCode::NonFiniteInput);
}

TEST(Filtfilt, PadLengthAndMinimumLength) {
  const auto c = dsp::design_butterworth_bandpass({0.5, 40.0, 2, 250.0});
  EXPECT_EQ(dsp::filtfilt_pad_length(c), 15u);
  EXPECT_VTD_ERROR(dsp::filtfilt(c, std::vector<double>(18, 1.0)), ErrorCode::TooShort);
  EXPECT_EQ(dsp::filtfilt(c, std::vector<double>(19, 1.0)).size(), 19u);
}

// Reference outputs from an independent zero-phase SOS implementation with
// the same padding and steady-state initial conditions.
TEST(Filtfilt, MatchesReferenceImplementation) {
  for (auto [fs, order] : {std::pair{250, 2}, std::pair{360, 4}}) {
    const std::string stem = "filtfilt_fs" + std::to_string(fs) + "_o" + std::to_string(order);
    const auto x = test::read_numbers(test::data_dir() / (stem + "_in.txt"));
    const auto want = test::read_numbers(test::data_dir() / (stem + "_out.txt"));
    ASSERT_EQ(x.size(), want.size());
    const auto c = dsp::design_butterworth_bandpass({0.5, 40.0, order, static_cast<double>(fs)});
    const auto y = dsp::filtfilt(c, x);
    ASSERT_EQ(y.size(), x.size());
    for (std::size_t i = 0; i < y.size(); ++i) ASSERT_NEAR(y[i], want[i], 1e-9) << stem << " i " << i;
  }
}

TEST(Filtfilt, SymmetricPulseKeepsItsPeak) {
  const auto c = dsp::design_butterworth_bandpass({0.5, 40.0, 2, 250.0});
  for (std::size_t center : {300u, 517u, 1001u}) {
    std::vector<double> x(1500);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double t = (static_cast<double>(i) - static_cast<double>(center)) / 250.0;
      x[i] = std::exp(-t * t / (2.0 * 0.012 * 0.012));
    }
    const auto y = dsp::filtfilt(c, x);
    const auto peak = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
    EXPECT_LE(std::max(peak, center) - std::min(peak, center), 1u);
  }
}

TEST(Filtfilt, ConstantInputGivesZero) {
  for (int order : {2, 4, 8}) {
    const auto c = dsp::design_butterworth_bandpass({0.5, 40.0, order, 250.0});
    const auto y = dsp::filtfilt(c, std::vector<double>(2500, 3.7));
    EXPECT_LT(max_abs(y, 0, y.size()), 1e-6) << "order " << order;
  }
}

TEST(Filtfilt, InBandSinePreserved) {
  const auto c = dsp::design_butterworth_bandpass({0.5, 40.0, 2, 250.0});
  for (double f : {2.0, 5.0, 10.0}) {
    const auto x = sine(5000, 250.0, f, 1.0);
    const auto y = dsp::filtfilt(c, x);
    const double amp = max_abs(y, 1500, 3500);
    EXPECT_NEAR(amp, 1.0, 0.02) << f << " Hz";
  }
}

TEST(Filtfilt, EffectiveMagnitudeIsSquared) {
  const auto c = dsp::design_butterworth_bandpass({0.5, 40.0, 2, 250.0});
  for (double f : {0.3, 40.0, 55.0}) {
    const auto x = sine(20000, 250.0, f);
    const auto y = dsp::filtfilt(c, x);
    const double h = dsp::magnitude_response(c, f, 250.0);
    EXPECT_NEAR(rms(y, 5000, 15000) / rms(x, 5000, 15000), h * h, 0.01) << f << " Hz";
  }
}

TEST(Filtfilt, TimeReversalEquivariantInInterior) {
  const auto c = dsp::design_butterworth_bandpass({0.5, 40.0, 2, 250.0});
  std::mt19937_64 gen(9);
  std::normal_distribution<double> nd;
  std::vector<double> x(8000);
  for (double& v : x) v = nd(gen);
  auto rx = x;
  std::reverse(rx.begin(), rx.end());
  const auto y = dsp::filtfilt(c, x);
  auto ry = dsp::filtfilt(c, rx);
  std::reverse(ry.begin(), ry.end());
  // Edge transients decay with the slowest pole; compare well inside.
  const std::size_t guard = 3000;
  for (std::size_t i = guard; i + guard < x.size(); ++i) ASSERT_NEAR(y[i], ry[i], 1e-6) << i;
}

TEST(DetrendMedian, ConstantBecomesZero) {
  const auto y = dsp::detrend_median(std::vector<double>(1000, -2.5), 250.0, 0.2, 0.6);
  for (double v : y) EXPECT_EQ(v, 0.0);
}

TEST(DetrendMedian, RemovesSlowDrift) {
  const auto x = sine(5000, 250.0, 0.3, 1.0);
  const auto y = dsp::detrend_median(x, 250.0, 0.2, 0.6);
  EXPECT_LT(rms(y), 0.1);
}

TEST(DetrendMedian, KeepsZeroBaselineBursts) {
  const double fs = 250.0;
  std::vector<double> x(5000, 0.0);
  for (std::size_t start = 100; start + 25 < x.size(); start += 250) {
    for (std::size_t k = 0; k < 25; ++k) x[start + k] = std::sin(2.0 * kPi * 10.0 * static_cast<double>(k) / fs);
  }
  const auto y = dsp::detrend_median(x, fs, 0.2, 0.6);
  std::vector<double> diff(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) diff[i] = y[i] - x[i];
  EXPECT_LT(rms(diff), 0.05 * rms(x));
}

TEST(DetrendMedian, BadWindows) {
  const std::vector<double> x(1000, 0.0);
  EXPECT_VTD_ERROR(dsp::detrend_median(x, 250.0, 0.6, 0.2), ErrorCode::BadWindows);
  EXPECT_VTD_ERROR(dsp::detrend_median(x, 250.0, 0.0, 0.2), ErrorCode::BadWindows);
  EXPECT_VTD_ERROR(dsp::detrend_median(x, 250.0, 0.2, 5.0), ErrorCode::BadWindows);
}

}  // namespace
}  // namespace vtd
