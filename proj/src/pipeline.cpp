#include "vtd/pipeline.hpp"

#include <exception>
#include <functional>
#include <map>

#include "vtd/error.hpp"
#include "vtd/text.hpp"

namespace vtd::pipeline {
namespace {

using Setter = std::function<void(PipelineConfig&, std::string_view)>;

double to_double(std::string_view v) {
  const auto d = text::parse_double(v);
  if (!d) throw Error(ErrorCode::InvalidConfig, "'" + std::string(v) + "' is not a number");
  return *d;
}

std::size_t to_count(std::string_view v) {
  const auto n = text::parse_int(v);
  if (!n || *n < 0) throw Error(ErrorCode::InvalidConfig, "'" + std::string(v) + "' is not a non-negative integer");
  return static_cast<std::size_t>(*n);
}

bool to_bool(std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error(ErrorCode::InvalidConfig, "'" + std::string(v) + "' is not a boolean");
}

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"low_hz", [](PipelineConfig& c, std::string_view v) { c.low_hz = to_double(v); }},
      {"high_hz", [](PipelineConfig& c, std::string_view v) { c.high_hz = to_double(v); }},
      {"order", [](PipelineConfig& c, std::string_view v) { c.order = static_cast<int>(to_count(v)); }},
      {"detrend",
       [](PipelineConfig& c, std::string_view v) {
         if (v == "none") {
           c.detrend = DetrendMode::None;
         } else if (v == "median") {
           c.detrend = DetrendMode::Median;
         } else {
           throw Error(ErrorCode::InvalidConfig, "detrend must be none or median");
         }
       }},
      {"detrend_win1_s", [](PipelineConfig& c, std::string_view v) { c.detrend_win1_s = to_double(v); }},
      {"detrend_win2_s", [](PipelineConfig& c, std::string_view v) { c.detrend_win2_s = to_double(v); }},
      {"t_rr_s", [](PipelineConfig& c, std::string_view v) { c.detector.t_rr_assumed_s = to_double(v); }},
      {"threshold_coef", [](PipelineConfig& c, std::string_view v) { c.detector.threshold_coef = to_double(v); }},
      {"refractory_s", [](PipelineConfig& c, std::string_view v) { c.detector.refractory_s = to_double(v); }},
      {"qs_search_s", [](PipelineConfig& c, std::string_view v) { c.detector.qs_search_s = to_double(v); }},
      {"onset_slope_frac", [](PipelineConfig& c, std::string_view v) { c.detector.onset_slope_frac = to_double(v); }},
      {"max_walk_s", [](PipelineConfig& c, std::string_view v) { c.detector.max_walk_s = to_double(v); }},
      {"invert", [](PipelineConfig& c, std::string_view v) { c.detector.invert = to_bool(v); }},
      {"hbr_low_bpm", [](PipelineConfig& c, std::string_view v) { c.rule.hbr_low_bpm = to_double(v); }},
      {"hbr_high_bpm", [](PipelineConfig& c, std::string_view v) { c.rule.hbr_high_bpm = to_double(v); }},
      {"qrs_min_s", [](PipelineConfig& c, std::string_view v) { c.rule.qrs_min_s = to_double(v); }},
      {"min_run_beats", [](PipelineConfig& c, std::string_view v) { c.rule.min_run_beats = to_count(v); }},
      {"sustained_s", [](PipelineConfig& c, std::string_view v) { c.rule.sustained_s = to_double(v); }},
      {"seed", [](PipelineConfig& c, std::string_view v) { set_seed(c, to_count(v)); }},
      {"test_frac", [](PipelineConfig& c, std::string_view v) { c.test_frac = to_double(v); }},
      {"logreg_lr", [](PipelineConfig& c, std::string_view v) { c.learners.logreg.lr = to_double(v); }},
      {"logreg_epochs", [](PipelineConfig& c, std::string_view v) { c.learners.logreg.epochs = to_count(v); }},
      {"logreg_l2", [](PipelineConfig& c, std::string_view v) { c.learners.logreg.l2 = to_double(v); }},
      {"tree_max_depth", [](PipelineConfig& c, std::string_view v) { c.learners.tree.max_depth = to_count(v); }},
      {"tree_min_split", [](PipelineConfig& c, std::string_view v) { c.learners.tree.min_split = to_count(v); }},
      {"knn_k", [](PipelineConfig& c, std::string_view v) { c.learners.knn.k = to_count(v); }},
      {"svm_lr", [](PipelineConfig& c, std::string_view v) { c.learners.svm.lr = to_double(v); }},
      {"svm_epochs", [](PipelineConfig& c, std::string_view v) { c.learners.svm.epochs = to_count(v); }},
      {"svm_c", [](PipelineConfig& c, std::string_view v) { c.learners.svm.c = to_double(v); }},
      {"mlp_hidden", [](PipelineConfig& c, std::string_view v) { c.learners.mlp.hidden = to_count(v); }},
      {"mlp_lr", [](PipelineConfig& c, std::string_view v) { c.learners.mlp.lr = to_double(v); }},
      {"mlp_epochs", [](PipelineConfig& c, std::string_view v) { c.learners.mlp.epochs = to_count(v); }},
  };
  return table;
}

}  // namespace

void set_seed(PipelineConfig& cfg, std::uint64_t seed) {
  cfg.seed = seed;
  cfg.learners.logreg.seed = seed;
  cfg.learners.svm.seed = seed;
  cfg.learners.mlp.seed = seed;
}

void PipelineConfig::validate() const {
  if (!(low_hz > 0.0 && low_hz < high_hz)) throw Error(ErrorCode::InvalidSpec, "cutoffs must satisfy 0 < low < high");
  if (order != 2 && order != 4 && order != 8) throw Error(ErrorCode::InvalidSpec, "order must be 2, 4 or 8");
  if (!(detrend_win1_s > 0.0 && detrend_win1_s < detrend_win2_s)) {
    throw Error(ErrorCode::BadWindows, "detrend windows must satisfy 0 < win1 < win2");
  }
  if (!(test_frac > 0.0 && test_frac < 1.0)) throw Error(ErrorCode::InvalidConfig, "test_frac must lie in (0, 1)");
  detector.validate();
  rule.validate();
  learners.validate();
}

dsp::BandpassSpec PipelineConfig::bandpass_for(double fs) const {
  dsp::BandpassSpec spec{low_hz, high_hz, order, fs};
  spec.validate();
  return spec;
}

void apply_config_text(PipelineConfig& cfg, std::string_view text) {
  const auto lines = text::split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = text::trim(line);
    if (line.empty()) continue;
    const std::string where = "config line " + std::to_string(i + 1) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw Error(ErrorCode::InvalidConfig, where + "expected key = value");
    const std::string_view key = text::trim(line.substr(0, eq));
    const std::string_view value = text::trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw Error(ErrorCode::InvalidConfig, where + "unknown key '" + std::string(key) + "'");
    try {
      it->second(cfg, value);
    } catch (const Error& e) {
      throw Error(ErrorCode::InvalidConfig, where + e.what());
    }
  }
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, _] : setters()) keys.push_back(k);
  return keys;
}

EcgRecord preprocess(const EcgRecord& raw, const PipelineConfig& cfg) {
  std::vector<double> x = raw.samples();
  if (cfg.detrend == DetrendMode::Median) {
    x = dsp::detrend_median(x, raw.fs(), cfg.detrend_win1_s, cfg.detrend_win2_s);
  }
  const dsp::BiquadCascade bp = dsp::design_butterworth_bandpass(cfg.bandpass_for(raw.fs()));
  return raw.with_samples(dsp::filtfilt(bp, x));
}

RecordAnalysis analyze_filtered(const EcgRecord& filtered, const PipelineConfig& cfg) {
  RecordAnalysis a;
  a.record_id = filtered.id();
  a.beats = detect::build_beat_table(filtered.samples(), filtered.fs(), cfg.detector);
  a.fv = features::record_features(a.beats);
  a.segments = features::episode_segmentation(a.beats, cfg.rule);
  a.label = features::record_label(a.segments);
  return a;
}

std::vector<RecordAnalysis> analyze_records(const std::vector<EcgRecord>& raw, const PipelineConfig& cfg) {
  cfg.validate();
  std::vector<RecordAnalysis> out(raw.size());
  std::vector<std::exception_ptr> errors(raw.size());
  const auto n = static_cast<std::ptrdiff_t>(raw.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      out[k] = analyze_filtered(preprocess(raw[k], cfg), cfg);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

std::vector<RecordAnalysis> analyze_records_serial(const std::vector<EcgRecord>& raw, const PipelineConfig& cfg) {
  cfg.validate();
  std::vector<RecordAnalysis> out;
  out.reserve(raw.size());
  for (const EcgRecord& r : raw) out.push_back(analyze_filtered(preprocess(r, cfg), cfg));
  return out;
}

}  // namespace vtd::pipeline
