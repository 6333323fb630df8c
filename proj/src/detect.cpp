#include "vtd/detect.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>

#include "vtd/error.hpp"
#include "vtd/kernels.hpp"
#include "vtd/text.hpp"

namespace vtd::detect {
namespace {

double polarity(const DetectorConfig& cfg) { return cfg.invert ? -1.0 : 1.0; }

std::vector<double> oriented(std::span<const double> x, const DetectorConfig& cfg) {
  std::vector<double> out(x.begin(), x.end());
  if (cfg.invert) {
    for (double& v : out) v = -v;
  }
  return out;
}

std::size_t samples_for(double seconds, double fs) {
  return static_cast<std::size_t>(std::lround(seconds * fs));
}

QsPair locate_qs_signed(std::span<const double> x, double fs, std::size_t r, double sign,
                        const DetectorConfig& cfg) {
  const std::size_t n = samples_for(cfg.qs_search_s, fs);
  const std::size_t lo = r >= n ? r - n : 0;
  const std::size_t hi = std::min(x.size() - 1, r + n);
  QsPair out{r, r};
  // Scan outward from R so ties resolve toward R.
  for (std::size_t i = r; i-- > lo;) {
    if (out.q == r || sign * x[i] < sign * x[out.q]) out.q = i;
  }
  for (std::size_t i = r + 1; i <= hi; ++i) {
    if (out.s == r || sign * x[i] < sign * x[out.s]) out.s = i;
  }
  return out;
}

// One side of the slope walk. `dir` is -1 for the onset, +1 for the offset.
std::size_t walk(std::span<const double> x, std::size_t start, int dir, std::size_t limit,
                 double thr) {
  const auto diff = [&](std::size_t k) {
    const std::ptrdiff_t j = static_cast<std::ptrdiff_t>(k) + dir;
    if (j < 0 || j >= static_cast<std::ptrdiff_t>(x.size())) return 0.0;
    return std::abs(x[k] - x[static_cast<std::size_t>(j)]);
  };
  const auto can_step = [&](std::size_t k) {
    return dir < 0 ? k > 0 : k + 1 < x.size();
  };
  std::size_t i = start;
  std::size_t steps = 0;
  while (steps < limit && can_step(i) && diff(i) < thr) {
    const std::size_t next = dir < 0 ? i - 1 : i + 1;
    if (!(diff(next) > diff(i))) break;
    i = next;
    ++steps;
  }
  while (steps < limit && can_step(i) && diff(i) >= thr) {
    i = dir < 0 ? i - 1 : i + 1;
    ++steps;
  }
  return i;
}

}  // namespace

void DetectorConfig::validate() const {
  if (!(t_rr_assumed_s >= 0.2 && t_rr_assumed_s <= 2.0)) {
    throw Error(ErrorCode::InvalidConfig, "t_rr must lie in [0.2, 2] s");
  }
  if (!(threshold_coef > 0.0 && threshold_coef <= 1.5)) {
    throw Error(ErrorCode::InvalidConfig, "threshold coefficient must lie in (0, 1.5]");
  }
  if (!(refractory_s >= 0.0 && refractory_s < t_rr_assumed_s)) {
    throw Error(ErrorCode::InvalidConfig, "refractory period must be non-negative and shorter than t_rr");
  }
  if (!(qs_search_s > 0.0 && qs_search_s <= 0.2)) {
    throw Error(ErrorCode::InvalidConfig, "Q/S search must lie in (0, 0.2] s");
  }
  if (!(onset_slope_frac > 0.0 && onset_slope_frac < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "onset slope fraction must lie in (0, 1)");
  }
  if (!(max_walk_s >= 0.0 && max_walk_s <= 0.1)) {
    throw Error(ErrorCode::InvalidConfig, "onset walk limit must lie in [0, 0.1] s");
  }
}

std::size_t DetectorConfig::window_samples(double fs) const {
  return std::max<std::size_t>(1, samples_for(t_rr_assumed_s, fs));
}

std::vector<double> window_maxima(std::span<const double> x, double fs, const DetectorConfig& cfg) {
  cfg.validate();
  const std::size_t window = cfg.window_samples(fs);
  if (x.size() < window) {
    throw Error(ErrorCode::SignalTooShort, "signal has " + std::to_string(x.size()) +
                                               " samples, one window needs " + std::to_string(window));
  }
  if (cfg.invert) return kernels::parallel::window_maxima(oriented(x, cfg), window);
  return kernels::parallel::window_maxima(x, window);
}

double compute_threshold(std::span<const double> maxima, const DetectorConfig& cfg) {
  if (maxima.empty()) throw Error(ErrorCode::EmptyInput, "no window maxima");
  const double mean = std::accumulate(maxima.begin(), maxima.end(), 0.0) / static_cast<double>(maxima.size());
  return cfg.threshold_coef * mean;
}

std::vector<std::size_t> detect_r_peaks(std::span<const double> x_in, double fs,
                                        const DetectorConfig& cfg) {
  const std::vector<double> x = oriented(x_in, cfg);
  DetectorConfig upright = cfg;
  upright.invert = false;
  const double th = compute_threshold(window_maxima(x, fs, upright), upright);

  std::vector<std::size_t> accepted;
  const std::size_t refractory = samples_for(cfg.refractory_s, fs);
  std::size_t i = 0;
  while (i < x.size()) {
    if (!(x[i] > th)) {
      ++i;
      continue;
    }
    std::size_t peak = i;
    std::size_t j = i;
    for (; j < x.size() && x[j] > th; ++j) {
      if (x[j] > x[peak]) peak = j;
    }
    if (!accepted.empty() && peak - accepted.back() < refractory) {
      if (x[peak] > x[accepted.back()]) accepted.back() = peak;
    } else {
      accepted.push_back(peak);
    }
    i = j;
  }
  return accepted;
}

QsPair locate_qs(std::span<const double> x, double fs, std::size_t r_index,
                 const DetectorConfig& cfg) {
  if (r_index >= x.size()) throw Error(ErrorCode::InvalidConfig, "R index outside the signal");
  return locate_qs_signed(x, fs, r_index, polarity(cfg), cfg);
}

QrsExtent qrs_extent(std::span<const double> x, double fs, std::size_t q_index,
                     std::size_t s_index, const DetectorConfig& cfg) {
  if (!(q_index < s_index) || s_index >= x.size()) {
    throw Error(ErrorCode::InvalidConfig, "Q must precede S inside the signal");
  }
  double max_diff = 0.0;
  for (std::size_t i = q_index; i < s_index; ++i) {
    max_diff = std::max(max_diff, std::abs(x[i + 1] - x[i]));
  }
  QrsExtent out{q_index, s_index, 0.0};
  if (max_diff > 0.0) {
    const double thr = cfg.onset_slope_frac * max_diff;
    const std::size_t limit = samples_for(cfg.max_walk_s, fs);
    out.onset = walk(x, q_index, -1, limit, thr);
    out.offset = walk(x, s_index, +1, limit, thr);
  }
  out.width_s = static_cast<double>(out.offset - out.onset) / fs;
  return out;
}

BeatTable build_beat_table(std::span<const double> x, double fs, const DetectorConfig& cfg) {
  const std::vector<std::size_t> peaks = detect_r_peaks(x, fs, cfg);
  const double sign = polarity(cfg);
  BeatTable t;
  t.fs = fs;
  for (std::size_t r : peaks) {
    const QsPair qs = locate_qs_signed(x, fs, r, sign, cfg);
    // R on the first or last sample cannot be bracketed by Q and S.
    if (qs.q >= r || qs.s <= r) continue;
    const QrsExtent ext = qrs_extent(x, fs, qs.q, qs.s, cfg);
    t.r_indices.push_back(r);
    t.r_times_s.push_back(static_cast<double>(r) / fs);
    t.q_indices.push_back(qs.q);
    t.s_indices.push_back(qs.s);
    t.qrs_onset_s.push_back(static_cast<double>(ext.onset) / fs);
    t.qrs_offset_s.push_back(static_cast<double>(ext.offset) / fs);
    t.qrs_width_s.push_back(ext.width_s);
  }
  if (t.size() < 2) {
    throw Error(ErrorCode::TooFewBeats, "detected " + std::to_string(t.size()) + " beats, need at least 2");
  }
  for (std::size_t i = 0; i + 1 < t.size(); ++i) t.rr_s.push_back(t.r_times_s[i + 1] - t.r_times_s[i]);
  return t;
}

BeatTable beat_table_from_times(std::span<const double> r_times_s,
                                std::span<const double> qrs_width_s, double fs) {
  if (r_times_s.size() != qrs_width_s.size()) {
    throw Error(ErrorCode::MalformedTable, "R times and widths differ in length");
  }
  BeatTable t;
  t.fs = fs;
  for (std::size_t i = 0; i < r_times_s.size(); ++i) {
    const double r = r_times_s[i];
    const double w = qrs_width_s[i];
    if (!std::isfinite(r) || !(w > 0.0) || (i > 0 && !(r > r_times_s[i - 1]))) {
      throw Error(ErrorCode::MalformedTable, "beat " + std::to_string(i) +
                                                 ": times must increase and widths be positive");
    }
    const auto idx = static_cast<std::size_t>(std::max(0L, std::lround(r * fs)));
    t.r_indices.push_back(idx);
    t.r_times_s.push_back(r);
    t.q_indices.push_back(idx);
    t.s_indices.push_back(idx);
    t.qrs_onset_s.push_back(r - w / 2.0);
    t.qrs_offset_s.push_back(r + w / 2.0);
    t.qrs_width_s.push_back(w);
    if (i > 0) t.rr_s.push_back(r - r_times_s[i - 1]);
  }
  return t;
}

std::string write_beat_csv(const BeatTable& beats, std::string_view record_id) {
  std::string out = "# record=" + std::string(record_id) + " fs=" + text::format_double(beats.fs) + "\n";
  out += "r_time_s,rr_s,qrs_width_s\n";
  for (std::size_t i = 0; i < beats.size(); ++i) {
    out += text::format_double(beats.r_times_s[i]);
    out += ',';
    if (i < beats.rr_s.size()) out += text::format_double(beats.rr_s[i]);
    out += ',';
    out += text::format_double(beats.qrs_width_s[i]);
    out += '\n';
  }
  return out;
}

BeatCsv read_beat_csv(std::string_view text) {
  const auto lines = text::split_lines(text);
  const auto bad = [](std::size_t line, const std::string& what) {
    return Error(ErrorCode::MalformedTable, "beat table line " + std::to_string(line) + ": " + what);
  };
  if (lines.size() < 2) throw bad(1, "expected a directive and a column header");
  BeatCsv out;
  const std::string_view directive = text::trim(lines[0]);
  if (directive.empty() || directive.front() != '#') throw bad(1, "missing '# record=<id> fs=<hz>'");
  for (std::string_view tok : text::split_ws(directive.substr(1))) {
    if (tok.starts_with("record=")) {
      out.record_id = std::string(tok.substr(7));
    } else if (tok.starts_with("fs=")) {
      const auto fs = text::parse_double(tok.substr(3));
      if (!fs || !(*fs > 0.0)) throw bad(1, "fs is not a positive number");
      out.beats.fs = *fs;
    }
  }
  if (out.record_id.empty() || out.beats.fs == 0.0) throw bad(1, "directive needs record= and fs=");
  if (text::trim(lines[1]) != "r_time_s,rr_s,qrs_width_s") throw bad(2, "unexpected column header");

  std::vector<double> times;
  std::vector<double> widths;
  for (std::size_t i = 2; i < lines.size(); ++i) {
    const std::string_view line = text::trim(lines[i]);
    if (line.empty()) continue;
    const auto cells = text::split(line, ',');
    if (cells.size() != 3) throw bad(i + 1, "expected 3 columns");
    const auto t = text::parse_double(cells[0]);
    const auto w = text::parse_double(cells[2]);
    if (!t || !w) throw bad(i + 1, "non-numeric value");
    times.push_back(*t);
    widths.push_back(*w);
  }
  try {
    out.beats = beat_table_from_times(times, widths, out.beats.fs);
  } catch (const Error& e) {
    throw Error(ErrorCode::MalformedTable, e.what());
  }
  return out;
}

}  // namespace vtd::detect
