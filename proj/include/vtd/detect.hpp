#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vtd::detect {

struct DetectorConfig {
  double t_rr_assumed_s = 0.6;    // window length for the per-window maxima
  double threshold_coef = 0.75;   // Th_R = coef * mean(window maxima)
  double refractory_s = 0.2;
  double qs_search_s = 0.08;
  double onset_slope_frac = 0.2;
  double max_walk_s = 0.06;       // onset/offset walk limit from Q and S
  bool invert = false;            // negate before detection (negative-R leads)

  void validate() const;
  std::size_t window_samples(double fs) const;
};

struct BeatTable {
  double fs = 0.0;
  std::vector<std::size_t> r_indices;
  std::vector<double> r_times_s;
  std::vector<std::size_t> q_indices;
  std::vector<std::size_t> s_indices;
  std::vector<double> qrs_onset_s;
  std::vector<double> qrs_offset_s;
  std::vector<double> rr_s;         // r_times_s[i+1] - r_times_s[i]
  std::vector<double> qrs_width_s;

  std::size_t size() const noexcept { return r_times_s.size(); }
};

std::vector<double> window_maxima(std::span<const double> x, double fs, const DetectorConfig& cfg);

double compute_threshold(std::span<const double> maxima, const DetectorConfig& cfg);

/// Runs of samples strictly above Th_R collapse to their maximum (earliest
/// on ties); a peak closer than the refractory period to the previously
/// accepted one replaces it only when strictly taller.
std::vector<std::size_t> detect_r_peaks(std::span<const double> x, double fs,
                                        const DetectorConfig& cfg);

struct QsPair {
  std::size_t q = 0;
  std::size_t s = 0;
};

QsPair locate_qs(std::span<const double> x, double fs, std::size_t r_index,
                 const DetectorConfig& cfg);

struct QrsExtent {
  std::size_t onset = 0;
  std::size_t offset = 0;
  double width_s = 0.0;
};

/// Onset walks left from Q (offset right from S). The walk first leaves
/// the Q/S extremum while the slope is still growing, then continues while
/// |first difference| >= onset_slope_frac * max|first difference| on [q,s].
/// Each side stops after max_walk_s.
QrsExtent qrs_extent(std::span<const double> x, double fs, std::size_t q_index,
                     std::size_t s_index, const DetectorConfig& cfg);

inline double qrs_width(std::span<const double> x, double fs, std::size_t q_index,
                        std::size_t s_index, const DetectorConfig& cfg) {
  return qrs_extent(x, fs, q_index, s_index, cfg).width_s;
}

BeatTable build_beat_table(std::span<const double> x, double fs, const DetectorConfig& cfg);

// Beat table built from known R times and widths (no delineation).
BeatTable beat_table_from_times(std::span<const double> r_times_s,
                                std::span<const double> qrs_width_s, double fs);

/// CSV export:
///
///     # record=<id> fs=<hz>
///     r_time_s,rr_s,qrs_width_s
///
/// The last row leaves rr_s empty.
std::string write_beat_csv(const BeatTable& beats, std::string_view record_id);

struct BeatCsv {
  std::string record_id;
  BeatTable beats;  // r_times_s, rr_s, qrs_width_s and fs populated
};

BeatCsv read_beat_csv(std::string_view text);

}  // namespace vtd::detect
