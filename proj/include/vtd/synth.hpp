#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vtd/record.hpp"

namespace vtd::synth {

inline constexpr double kMinQrsWidth = 0.04;
inline constexpr double kMaxQrsWidth = 0.3;

struct GaussianBump {
  double center_s = 0.0;  // relative to the R peak
  double sigma_s = 0.0;
  double amplitude_mv = 0.0;
};

/// Sum-of-Gaussians beat: Q, R and S bumps scaled so the QRS group's
/// |value| >= 0.1 support equals the requested width, plus T and an
/// optional P bump placed within the RR interval.
struct BeatShape {
  std::vector<GaussianBump> bumps;  // Q, R, S, T[, P]
  double scale = 1.0;                // divides the bump sum; makes value(0) == 1

  double value(double t_s) const;
  double qrs_value(double t_s) const;  // Q, R and S only
};

BeatShape make_beat_shape(double qrs_width_s, double rr_s, bool with_p_wave);

struct BeatTemplate {
  std::vector<double> samples;
  std::size_t r_index = 0;
};

/// One beat at a nominal 75 bpm with a P wave, sampled over [-0.4, +0.55] s.
BeatTemplate synth_beat(double qrs_width_s, double fs);

struct Episode {
  double start_s = 0.0;
  double end_s = 0.0;
  double hr_bpm = 180.0;
  double qrs_width_s = 0.14;
};

struct NoiseSpec {
  double baseline_amp_mv = 0.0;
  double baseline_freq_hz = 0.25;
  double gaussian_sigma_mv = 0.0;
  double powerline_amp_mv = 0.0;
  double powerline_freq_hz = 50.0;
};

struct SynthSpec {
  double fs = 250.0;
  double duration_s = 10.0;
  double base_hr_bpm = 75.0;
  double qrs_width_s = 0.08;
  std::vector<Episode> episodes;
  NoiseSpec noise;
  std::uint64_t seed = 0;
  double sustained_s = 30.0;
  std::string record_id = "synth";

  void validate() const;
};

struct GroundTruth {
  std::vector<std::size_t> r_indices;
  std::vector<double> r_times_s;
  std::vector<double> beat_qrs_width_s;
  std::vector<bool> beat_in_episode;
  std::vector<ClassLabel> episode_labels;
  std::vector<Episode> episodes;
  ClassLabel record_label = ClassLabel::NonVT;
};

struct SynthResult {
  EcgRecord record;
  GroundTruth truth;
};

/// Beats follow the base rate; the beat that would overrun an episode start
/// is replaced by the first episode beat one episode interval later, and
/// the first beat leaving an episode comes one base interval after the last
/// episode beat. R peaks sit on the sample grid.
SynthResult synth_record(const SynthSpec& spec);

// Deterministic in (spec, seed): baseline and powerline sinusoids plus white noise.
void add_noise(std::vector<double>& samples, double fs, const NoiseSpec& noise,
               std::uint64_t seed);

struct CorpusOptions {
  double fs = 250.0;
  std::optional<double> snr_db;      // white noise scaled to this SNR
  double baseline_amp_mv = 0.0;      // optional wander on every record
  double baseline_freq_hz = 0.25;
  double powerline_amp_mv = 0.0;
  double sustained_s = 30.0;
  std::string id_prefix = "syn";
};

using ClassMix = std::array<double, 3>;  // NonVT, SustainedVT, NonSustainedVT

/// Per-record counts for a mix: floor of the exact share, remainders to the
/// largest fractional parts (class order breaks ties).
std::array<std::size_t, 3> class_counts(std::size_t n_records, const ClassMix& mix);

std::uint64_t record_seed(std::uint64_t corpus_seed, std::size_t index) noexcept;

SynthSpec corpus_record_spec(ClassLabel label, std::uint64_t seed, const CorpusOptions& opts,
                             std::size_t index);

std::vector<SynthResult> synth_corpus(std::size_t n_records, const ClassMix& mix,
                                      std::uint64_t seed, const CorpusOptions& opts = {});

/// Manifest, one line per record after a directive and a header:
///
///     # vtd-manifest v1
///     record_id,label,episodes
///     syn0001,SustainedVT,2.1:40.35
///
/// `episodes` is a ';'-separated list of start:end pairs in seconds.
std::string write_manifest(const std::vector<SynthResult>& corpus);

struct ManifestEntry {
  std::string record_id;
  ClassLabel label = ClassLabel::NonVT;
  std::vector<std::pair<double, double>> episodes;
};

std::vector<ManifestEntry> read_manifest(std::string_view text);

// r_time_s,qrs_width_s under a "# record=<id> fs=<hz>" directive.
std::string write_truth_csv(const SynthResult& result);

}  // namespace vtd::synth
