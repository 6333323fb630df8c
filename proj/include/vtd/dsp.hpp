#pragma once

#include <span>
#include <vector>

namespace vtd::dsp {

struct BandpassSpec {
  double low_cut_hz = 0.5;
  double high_cut_hz = 40.0;
  int order = 2;  // analog prototype order; the bandpass has twice this
  double fs = 250.0;

  void validate() const;
};

// One second-order section, a0 normalized to 1.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;

  bool stable() const noexcept;
};

struct BiquadCascade {
  std::vector<Biquad> sections;
  double overall_gain = 1.0;

  static BiquadCascade identity() { return {{Biquad{}}, 1.0}; }
};

/// Butterworth bandpass from the analog prototype poles
/// exp(j*pi*(2k+n-1)/(2n)), a lowpass-to-bandpass substitution about the
/// prewarped edges and the bilinear transform. Produces `order` sections,
/// each carrying one zero at z=1 and one at z=-1. Gain is normalized to 1
/// at the digital image of the analog center frequency.
BiquadCascade design_butterworth_bandpass(const BandpassSpec& spec);

/// |H(e^{jw})| at w = 2*pi*f/fs.
double magnitude_response(const BiquadCascade& cascade, double f_hz, double fs);

/// Closed-form magnitude of the same design: the Butterworth lowpass
/// magnitude evaluated at the bandpass-mapped, prewarped frequency.
double analytic_bandpass_magnitude(const BandpassSpec& spec, double f_hz);

/// Direct form II transposed, zero initial state.
std::vector<double> filter_forward(const BiquadCascade& cascade, std::span<const double> x);

/// Odd-reflection padding length used by filtfilt: 3 * (2 * sections + 1).
std::size_t filtfilt_pad_length(const BiquadCascade& cascade) noexcept;

/// Zero-phase filtering: pad by odd reflection, filter forward, reverse,
/// filter again, reverse and strip the padding. Each pass starts from the
/// steady-state section states scaled by the first sample of its input,
/// so a constant input produces an all-zero bandpass output.
std::vector<double> filtfilt(const BiquadCascade& cascade, std::span<const double> x);

/// Baseline removal by two cascaded centered sliding medians (win1_s then
/// win2_s). Windows shrink at the edges.
std::vector<double> detrend_median(std::span<const double> x, double fs, double win1_s,
                                   double win2_s);

}  // namespace vtd::dsp
