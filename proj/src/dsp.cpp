#include "vtd/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "vtd/error.hpp"
#include "vtd/kernels.hpp"

namespace vtd::dsp {
namespace {

using cplx = std::complex<double>;

double prewarp(double f_hz, double fs) { return 2.0 * fs * std::tan(std::numbers::pi * f_hz / fs); }

cplx section_response(const Biquad& s, double w) {
  const cplx z1 = std::polar(1.0, -w);
  const cplx z2 = z1 * z1;
  return (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
}

void require_finite(std::span<const double> x) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) {
      throw Error(ErrorCode::NonFiniteInput, "sample " + std::to_string(i) + " is not finite");
    }
  }
}

// Runs the cascade in place. `init` scales the steady-state section states
// for a constant input of that value; pass 0 for a zero initial state.
void run_cascade(const BiquadCascade& c, std::vector<double>& x, double init) {
  double level = init;
  for (const Biquad& s : c.sections) {
    const double dc_den = 1.0 + s.a1 + s.a2;
    const double g = (s.b0 + s.b1 + s.b2) / dc_den;
    double z2 = (s.b2 - s.a2 * g) * level;
    double z1 = (s.b1 - s.a1 * g) * level + z2;
    for (double& v : x) {
      const double in = v;
      const double y = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * y + z2;
      z2 = s.b2 * in - s.a2 * y;
      v = y;
    }
    level *= g;
  }
  if (c.overall_gain != 1.0) {
    for (double& v : x) v *= c.overall_gain;
  }
}

}  // namespace

void BandpassSpec::validate() const {
  if (!(fs > 0.0) || !std::isfinite(fs)) throw Error(ErrorCode::InvalidSpec, "fs must be positive");
  if (!(low_cut_hz > 0.0) || !(low_cut_hz < high_cut_hz) || !(high_cut_hz < fs / 2.0)) {
    throw Error(ErrorCode::InvalidSpec, "cutoffs must satisfy 0 < low < high < fs/2");
  }
  if (order != 2 && order != 4 && order != 8) {
    throw Error(ErrorCode::InvalidSpec, "order must be 2, 4 or 8");
  }
}

bool Biquad::stable() const noexcept {
  return std::abs(a2) < 1.0 && std::abs(a1) < 1.0 + a2;
}

BiquadCascade design_butterworth_bandpass(const BandpassSpec& spec) {
  spec.validate();
  const int n = spec.order;
  const double fs = spec.fs;
  const double w_lo = prewarp(spec.low_cut_hz, fs);
  const double w_hi = prewarp(spec.high_cut_hz, fs);
  const double bw = w_hi - w_lo;
  const double w0 = std::sqrt(w_lo * w_hi);
  const double w_center = 2.0 * std::atan(w0 / (2.0 * fs));

  BiquadCascade out;
  out.sections.reserve(static_cast<std::size_t>(n));
  for (int k = 1; k <= n / 2; ++k) {
    const cplx p = std::polar(1.0, std::numbers::pi * (2.0 * k + n - 1) / (2.0 * n));
    const cplx pb = p * bw;
    const cplx disc = std::sqrt(pb * pb - 4.0 * w0 * w0);
    for (const cplx s : {(pb + disc) / 2.0, (pb - disc) / 2.0}) {
      const cplx zp = (2.0 * fs + s) / (2.0 * fs - s);
      Biquad q{1.0, 0.0, -1.0, -2.0 * zp.real(), std::norm(zp)};
      const double g = 1.0 / std::abs(section_response(q, w_center));
      q.b0 *= g;
      q.b2 *= g;
      if (!q.stable()) throw Error(ErrorCode::UnstableDesign, "section pole outside the unit circle");
      out.sections.push_back(q);
    }
  }
  cplx total = 1.0;
  for (const Biquad& q : out.sections) total *= section_response(q, w_center);
  out.overall_gain = 1.0 / std::abs(total);
  return out;
}

double magnitude_response(const BiquadCascade& cascade, double f_hz, double fs) {
  const double w = 2.0 * std::numbers::pi * f_hz / fs;
  double mag = std::abs(cascade.overall_gain);
  for (const Biquad& s : cascade.sections) mag *= std::abs(section_response(s, w));
  return mag;
}

double analytic_bandpass_magnitude(const BandpassSpec& spec, double f_hz) {
  spec.validate();
  const double w_lo = prewarp(spec.low_cut_hz, spec.fs);
  const double w_hi = prewarp(spec.high_cut_hz, spec.fs);
  const double bw = w_hi - w_lo;
  const double w0sq = w_lo * w_hi;
  if (f_hz <= 0.0 || f_hz >= spec.fs / 2.0) return 0.0;
  const double w = prewarp(f_hz, spec.fs);
  const double w_lp = std::abs((w * w - w0sq) / (w * bw));
  return 1.0 / std::sqrt(1.0 + std::pow(w_lp, 2.0 * spec.order));
}

std::vector<double> filter_forward(const BiquadCascade& cascade, std::span<const double> x) {
  require_finite(x);
  std::vector<double> y(x.begin(), x.end());
  run_cascade(cascade, y, 0.0);
  return y;
}

std::size_t filtfilt_pad_length(const BiquadCascade& cascade) noexcept {
  return 3 * (2 * cascade.sections.size() + 1);
}

std::vector<double> filtfilt(const BiquadCascade& cascade, std::span<const double> x) {
  const std::size_t n = x.size();
  const std::size_t min_len = 9 * cascade.sections.size();
  if (n <= min_len || n < 2) {
    throw Error(ErrorCode::TooShort, "filtfilt needs more than " + std::to_string(min_len) +
                                         " samples, got " + std::to_string(n));
  }
  require_finite(x);
  const std::size_t pad = std::min(filtfilt_pad_length(cascade), n - 1);

  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t j = 1; j <= pad; ++j) ext.push_back(2.0 * x[n - 1] - x[n - 1 - j]);

  run_cascade(cascade, ext, ext.front());
  std::reverse(ext.begin(), ext.end());
  run_cascade(cascade, ext, ext.front());
  std::reverse(ext.begin(), ext.end());
  return {ext.begin() + static_cast<std::ptrdiff_t>(pad),
          ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

std::vector<double> detrend_median(std::span<const double> x, double fs, double win1_s,
                                   double win2_s) {
  if (!(win1_s > 0.0) || !(win1_s < win2_s)) {
    throw Error(ErrorCode::BadWindows, "windows must satisfy 0 < win1 < win2");
  }
  if (!(fs > 0.0) || win2_s * fs >= static_cast<double>(x.size())) {
    throw Error(ErrorCode::BadWindows, "median windows must be shorter than the record");
  }
  require_finite(x);
  const auto half = [fs](double w) { return static_cast<std::size_t>(std::lround(w * fs / 2.0)); };
  const std::vector<double> first = kernels::parallel::sliding_median(x, half(win1_s));
  const std::vector<double> baseline = kernels::parallel::sliding_median(first, half(win2_s));
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - baseline[i];
  return out;
}

}  // namespace vtd::dsp
