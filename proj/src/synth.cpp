#include "vtd/synth.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>

#include "vtd/error.hpp"
#include "vtd/rng.hpp"
#include "vtd/text.hpp"

namespace vtd::synth {
namespace {

// Q, R and S of the unit-width shape before scaling.
constexpr GaussianBump kUnitQ{-0.30, 0.12, -0.30};
constexpr GaussianBump kUnitR{0.0, 0.12, 1.0};
constexpr GaussianBump kUnitS{0.30, 0.12, -0.30};

double bump_value(const GaussianBump& b, double t) {
  const double z = (t - b.center_s) / b.sigma_s;
  return b.amplitude_mv * std::exp(-0.5 * z * z);
}

// Span of |v(t)/v(0)| >= 0.1 for the unit QRS group.
double unit_support() {
  static const double span = [] {
    const auto v = [](double t) {
      return (bump_value(kUnitQ, t) + bump_value(kUnitR, t) + bump_value(kUnitS, t)) /
             (bump_value(kUnitQ, 0.0) + 1.0 + bump_value(kUnitS, 0.0));
    };
    constexpr double step = 1e-5;
    constexpr double edge = 3.0;
    double lo = 0.0;
    for (double t = -edge; t < 0.0; t += step) {
      if (std::abs(v(t)) >= 0.1) {
        lo = t;
        break;
      }
    }
    double hi = 0.0;
    for (double t = edge; t > 0.0; t -= step) {
      if (std::abs(v(t)) >= 0.1) {
        hi = t;
        break;
      }
    }
    return hi - lo;
  }();
  return span;
}

void check_width(double w) {
  if (!(w >= kMinQrsWidth && w <= kMaxQrsWidth)) {
    throw Error(ErrorCode::InvalidWidth, "QRS width must lie in [0.04, 0.3] s, got " + text::format_double(w));
  }
}

void check_rate(double hr, const char* what) {
  if (!(hr > 20.0 && hr < 400.0)) {
    throw Error(ErrorCode::InvalidSynthSpec, std::string(what) + " must lie in (20, 400) bpm");
  }
}

struct PlannedBeat {
  double t = 0.0;
  double width = 0.0;
  double rr = 0.0;
  bool in_episode = false;
  std::size_t episode = 0;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::string corpus_id(const CorpusOptions& opts, std::size_t index) {
  std::string num = std::to_string(index + 1);
  if (num.size() < 4) num.insert(0, 4 - num.size(), '0');
  return opts.id_prefix + num;
}

}  // namespace

double BeatShape::value(double t_s) const {
  double v = 0.0;
  for (const GaussianBump& b : bumps) v += bump_value(b, t_s);
  return v / scale;
}

double BeatShape::qrs_value(double t_s) const {
  double v = 0.0;
  for (std::size_t i = 0; i < 3 && i < bumps.size(); ++i) v += bump_value(bumps[i], t_s);
  return v / scale;
}

BeatShape make_beat_shape(double qrs_width_s, double rr_s, bool with_p_wave) {
  check_width(qrs_width_s);
  const double gap = rr_s - qrs_width_s;
  if (!(gap > 0.0)) throw Error(ErrorCode::InvalidSynthSpec, "RR interval must exceed the QRS width");
  const double k = qrs_width_s / unit_support();
  BeatShape shape;
  for (const GaussianBump& u : {kUnitQ, kUnitR, kUnitS}) {
    shape.bumps.push_back({u.center_s * k, u.sigma_s * k, u.amplitude_mv});
  }
  const double t_amp = 0.3 * std::pow(std::min(1.0, gap / 0.5), 2);
  shape.bumps.push_back({std::min(qrs_width_s / 2.0 + 0.4 * gap, 0.3), std::min(0.05, 0.12 * gap), t_amp});
  if (with_p_wave) shape.bumps.push_back({-std::min(0.16, 0.35 * gap), 0.02, 0.12});
  double at_r = 0.0;
  for (const GaussianBump& b : shape.bumps) at_r += bump_value(b, 0.0);
  shape.scale = at_r;
  return shape;
}

BeatTemplate synth_beat(double qrs_width_s, double fs) {
  check_width(qrs_width_s);
  if (!(fs > 0.0)) throw Error(ErrorCode::InvalidSynthSpec, "fs must be positive");
  const BeatShape shape = make_beat_shape(qrs_width_s, 0.8, true);
  const auto pre = static_cast<std::size_t>(std::lround(0.4 * fs));
  const auto post = static_cast<std::size_t>(std::lround(0.55 * fs));
  BeatTemplate out;
  out.r_index = pre;
  out.samples.resize(pre + post + 1);
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    out.samples[i] = shape.value((static_cast<double>(i) - static_cast<double>(pre)) / fs);
  }
  return out;
}

void SynthSpec::validate() const {
  if (!(fs >= 100.0 && fs <= kMaxSamplingRateHz)) {
    throw Error(ErrorCode::InvalidSynthSpec, "fs must lie in [100, 10000] Hz");
  }
  if (!(duration_s > 0.0) || !std::isfinite(duration_s)) {
    throw Error(ErrorCode::InvalidSynthSpec, "duration must be positive");
  }
  check_rate(base_hr_bpm, "base rate");
  check_width(qrs_width_s);
  if (!(sustained_s > 0.0)) throw Error(ErrorCode::InvalidSynthSpec, "sustained threshold must be positive");
  if (noise.baseline_amp_mv < 0.0 || noise.gaussian_sigma_mv < 0.0 || noise.powerline_amp_mv < 0.0 ||
      !(noise.baseline_freq_hz > 0.0) || !(noise.powerline_freq_hz > 0.0)) {
    throw Error(ErrorCode::InvalidSynthSpec, "noise amplitudes must be non-negative and frequencies positive");
  }
  std::vector<Episode> sorted = episodes;
  for (const Episode& e : sorted) {
    if (!(e.start_s >= 0.0 && e.start_s < e.end_s && e.end_s <= duration_s)) {
      throw Error(ErrorCode::InvalidSynthSpec, "episodes must satisfy 0 <= start < end <= duration");
    }
    check_rate(e.hr_bpm, "episode rate");
    check_width(e.qrs_width_s);
  }
  std::sort(sorted.begin(), sorted.end(),
            [](const Episode& a, const Episode& b) { return a.start_s < b.start_s; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].start_s < sorted[i - 1].end_s) {
      throw Error(ErrorCode::OverlappingEpisodes, "episodes overlap");
    }
  }
}

SynthResult synth_record(const SynthSpec& spec) {
  spec.validate();
  std::vector<Episode> episodes = spec.episodes;
  std::sort(episodes.begin(), episodes.end(),
            [](const Episode& a, const Episode& b) { return a.start_s < b.start_s; });

  const double rr_base = 60.0 / spec.base_hr_bpm;
  std::vector<PlannedBeat> plan;
  double next = 0.5 * rr_base;
  for (std::size_t k = 0; k < episodes.size(); ++k) {
    const Episode& e = episodes[k];
    const double rr_v = 60.0 / e.hr_bpm;
    while (next <= e.start_s) {
      plan.push_back({next, spec.qrs_width_s, rr_base, false, 0});
      if (next + rr_base > e.start_s) break;
      next += rr_base;
    }
    double t = plan.empty() || plan.back().in_episode ? e.start_s + 0.5 * rr_v : plan.back().t + rr_v;
    while (t < e.end_s) {
      plan.push_back({t, e.qrs_width_s, rr_v, true, k});
      t += rr_v;
    }
    next = (plan.empty() ? e.end_s : plan.back().t) + rr_base;
  }
  while (next < spec.duration_s) {
    plan.push_back({next, spec.qrs_width_s, rr_base, false, 0});
    next += rr_base;
  }

  const auto n = static_cast<std::size_t>(std::lround(spec.duration_s * spec.fs));
  std::vector<double> x(n, 0.0);
  SynthResult out;
  GroundTruth& truth = out.truth;
  truth.episodes = episodes;
  std::vector<double> first_t(episodes.size(), -1.0);
  std::vector<double> last_t(episodes.size(), -1.0);
  std::vector<double> ep_rr(episodes.size(), 0.0);
  const auto reach = static_cast<std::ptrdiff_t>(std::lround(0.6 * spec.fs));

  for (const PlannedBeat& b : plan) {
    if (b.t < 0.2 || b.t + 0.2 > spec.duration_s) continue;
    const auto idx = static_cast<std::size_t>(std::lround(b.t * spec.fs));
    if (idx >= n) continue;
    const double tr = static_cast<double>(idx) / spec.fs;
    truth.r_indices.push_back(idx);
    truth.r_times_s.push_back(tr);
    truth.beat_qrs_width_s.push_back(b.width);
    truth.beat_in_episode.push_back(b.in_episode);
    if (b.in_episode) {
      if (first_t[b.episode] < 0.0) first_t[b.episode] = tr;
      last_t[b.episode] = tr;
      ep_rr[b.episode] = b.rr;
    }
    const BeatShape shape = make_beat_shape(b.width, b.rr, !b.in_episode);
    const std::ptrdiff_t c = static_cast<std::ptrdiff_t>(idx);
    const std::size_t lo = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, c - reach));
    const std::size_t hi = std::min(n, static_cast<std::size_t>(c + reach + 1));
    for (std::size_t i = lo; i < hi; ++i) x[i] += shape.value(static_cast<double>(i) / spec.fs - tr);
  }

  for (std::size_t k = 0; k < episodes.size(); ++k) {
    ClassLabel label = ClassLabel::NonSustainedVT;
    if (first_t[k] >= 0.0 && last_t[k] - first_t[k] + ep_rr[k] >= spec.sustained_s) {
      label = ClassLabel::SustainedVT;
    }
    truth.episode_labels.push_back(label);
    if (severity(label) > severity(truth.record_label)) truth.record_label = label;
  }

  add_noise(x, spec.fs, spec.noise, spec.seed);
  out.record = EcgRecord(std::move(x), spec.fs, spec.record_id);
  return out;
}

void add_noise(std::vector<double>& samples, double fs, const NoiseSpec& noise,
               std::uint64_t seed) {
  const double two_pi = 2.0 * std::numbers::pi;
  if (noise.baseline_amp_mv != 0.0 || noise.powerline_amp_mv != 0.0) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const double t = static_cast<double>(i) / fs;
      samples[i] += noise.baseline_amp_mv * std::sin(two_pi * noise.baseline_freq_hz * t) +
                    noise.powerline_amp_mv * std::sin(two_pi * noise.powerline_freq_hz * t);
    }
  }
  if (noise.gaussian_sigma_mv > 0.0) {
    Rng rng(seed);
    for (double& v : samples) v += noise.gaussian_sigma_mv * rng.normal();
  }
}

std::array<std::size_t, 3> class_counts(std::size_t n_records, const ClassMix& mix) {
  double sum = 0.0;
  for (double m : mix) {
    if (!(m >= 0.0) || !std::isfinite(m)) throw Error(ErrorCode::BadProportions, "proportions must be non-negative");
    sum += m;
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    throw Error(ErrorCode::BadProportions, "proportions must sum to 1, got " + text::format_double(sum));
  }
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> frac{};
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < 3; ++c) {
    const double exact = static_cast<double>(n_records) * mix[c] / sum;
    counts[c] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    frac[c] = exact - static_cast<double>(counts[c]);
    assigned += counts[c];
  }
  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (std::size_t i = 0; assigned < n_records; i = (i + 1) % 3, ++assigned) ++counts[order[i]];
  return counts;
}

std::uint64_t record_seed(std::uint64_t corpus_seed, std::size_t index) noexcept {
  return splitmix64(corpus_seed ^ splitmix64(static_cast<std::uint64_t>(index) + 1));
}

SynthSpec corpus_record_spec(ClassLabel label, std::uint64_t seed, const CorpusOptions& opts,
                             std::size_t index) {
  Rng rng(seed);
  SynthSpec spec;
  spec.fs = opts.fs;
  spec.seed = splitmix64(seed);
  spec.sustained_s = opts.sustained_s;
  spec.record_id = corpus_id(opts, index);
  spec.noise.baseline_amp_mv = opts.baseline_amp_mv;
  spec.noise.baseline_freq_hz = opts.baseline_freq_hz;
  spec.noise.powerline_amp_mv = opts.powerline_amp_mv;

  spec.base_hr_bpm = rng.uniform(60.0, 100.0);
  spec.qrs_width_s = rng.uniform(0.06, 0.10);
  const double rr_b = 60.0 / spec.base_hr_bpm;
  if (label == ClassLabel::NonVT) {
    spec.duration_s = 30.0;
    return spec;
  }

  Episode e;
  e.hr_bpm = rng.uniform(120.0, 240.0);
  e.qrs_width_s = rng.uniform(0.13, 0.18);
  const double rr_v = 60.0 / e.hr_bpm;
  std::size_t n_vt = 0;
  std::size_t lead = 0;
  std::size_t tail = 0;
  if (label == ClassLabel::SustainedVT) {
    const double span = rng.uniform(opts.sustained_s + 2.0, opts.sustained_s + 15.0);
    n_vt = static_cast<std::size_t>(std::ceil(span / rr_v));
    lead = 2 + rng.below(4);
    tail = 2 + rng.below(3);
  } else {
    const auto max_vt = static_cast<std::size_t>(std::floor((opts.sustained_s - 1.0) / rr_v));
    n_vt = 3 + rng.below(max_vt - 2);
    // Dilute the episode with normal beats so the record-mean QRS width
    // lands between the normal and the sustained ranges.
    const double target_qrs = rng.uniform(0.108, 0.116);
    const double vt_share = (target_qrs - spec.qrs_width_s) / (e.qrs_width_s - spec.qrs_width_s);
    const auto n_base = static_cast<std::size_t>(
        std::lround(static_cast<double>(n_vt) * (1.0 - vt_share) / vt_share));
    lead = std::max<std::size_t>(1, n_base / 2);
    tail = std::max<std::size_t>(1, n_base - lead);
  }
  const double first = 0.5 * rr_b;
  const double last_base = first + static_cast<double>(lead - 1) * rr_b;
  e.start_s = first + (static_cast<double>(lead) - 0.5) * rr_b;
  const double last_vt = last_base + static_cast<double>(n_vt) * rr_v;
  e.end_s = last_vt + 0.5 * rr_v;
  spec.duration_s = last_vt + (static_cast<double>(tail) + 0.5) * rr_b;
  spec.episodes.push_back(e);
  return spec;
}

std::vector<SynthResult> synth_corpus(std::size_t n_records, const ClassMix& mix,
                                      std::uint64_t seed, const CorpusOptions& opts) {
  const auto counts = class_counts(n_records, mix);
  std::vector<ClassLabel> labels;
  const ClassLabel order[3] = {ClassLabel::NonVT, ClassLabel::SustainedVT, ClassLabel::NonSustainedVT};
  for (std::size_t c = 0; c < 3; ++c) labels.insert(labels.end(), counts[c], order[c]);
  Rng rng(seed);
  shuffle(labels, rng);

  std::vector<SynthResult> out(n_records);
  std::vector<std::exception_ptr> errors(n_records);
  const auto n = static_cast<std::ptrdiff_t>(n_records);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    try {
      const std::uint64_t rs = record_seed(seed, idx);
      SynthSpec spec = corpus_record_spec(labels[idx], rs, opts, idx);
      const NoiseSpec noise = spec.noise;
      spec.noise = NoiseSpec{};
      SynthResult r = synth_record(spec);
      NoiseSpec applied = noise;
      if (opts.snr_db) {
        double power = 0.0;
        for (double v : r.record.samples()) power += v * v;
        power /= static_cast<double>(r.record.n_samples());
        applied.gaussian_sigma_mv = std::sqrt(power / std::pow(10.0, *opts.snr_db / 10.0));
      }
      std::vector<double> x = r.record.samples();
      add_noise(x, spec.fs, applied, spec.seed);
      r.record = r.record.with_samples(std::move(x));
      out[idx] = std::move(r);
    } catch (...) {
      errors[idx] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

std::string write_manifest(const std::vector<SynthResult>& corpus) {
  std::string out = "# vtd-manifest v1\nrecord_id,label,episodes\n";
  for (const SynthResult& r : corpus) {
    out += r.record.id() + ',' + std::string(to_string(r.truth.record_label)) + ',';
    for (std::size_t k = 0; k < r.truth.episodes.size(); ++k) {
      if (k > 0) out += ';';
      out += text::format_double(r.truth.episodes[k].start_s) + ':' +
             text::format_double(r.truth.episodes[k].end_s);
    }
    out += '\n';
  }
  return out;
}

std::vector<ManifestEntry> read_manifest(std::string_view text) {
  const auto lines = text::split_lines(text);
  if (lines.size() < 2 || text::trim(lines[0]) != "# vtd-manifest v1" ||
      text::trim(lines[1]) != "record_id,label,episodes") {
    throw Error(ErrorCode::MalformedTable, "manifest must start with '# vtd-manifest v1' and its header");
  }
  std::vector<ManifestEntry> out;
  for (std::size_t i = 2; i < lines.size(); ++i) {
    const std::string_view line = text::trim(lines[i]);
    if (line.empty()) continue;
    const auto where = "manifest line " + std::to_string(i + 1) + ": ";
    const auto cells = text::split(line, ',');
    if (cells.size() != 3) throw Error(ErrorCode::MalformedTable, where + "expected 3 columns");
    ManifestEntry e;
    e.record_id = std::string(text::trim(cells[0]));
    e.label = parse_class_label(text::trim(cells[1]));
    if (!text::trim(cells[2]).empty()) {
      for (std::string_view pair : text::split(cells[2], ';')) {
        const auto ends = text::split(pair, ':');
        const auto a = ends.size() == 2 ? text::parse_double(ends[0]) : std::nullopt;
        const auto b = ends.size() == 2 ? text::parse_double(ends[1]) : std::nullopt;
        if (!a || !b) throw Error(ErrorCode::MalformedTable, where + "episode must be start:end");
        e.episodes.emplace_back(*a, *b);
      }
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::string write_truth_csv(const SynthResult& result) {
  std::string out = "# record=" + result.record.id() + " fs=" + text::format_double(result.record.fs()) + "\n";
  out += "r_time_s,qrs_width_s\n";
  for (std::size_t i = 0; i < result.truth.r_times_s.size(); ++i) {
    out += text::format_double(result.truth.r_times_s[i]) + ',' +
           text::format_double(result.truth.beat_qrs_width_s[i]) + '\n';
  }
  return out;
}

}  // namespace vtd::synth
