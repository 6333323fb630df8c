#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "vtd/classify.hpp"
#include "vtd/detect.hpp"
#include "vtd/dsp.hpp"
#include "vtd/features.hpp"
#include "vtd/record.hpp"

namespace vtd::pipeline {

enum class DetrendMode { None, Median };

struct PipelineConfig {
  double low_hz = 0.5;
  double high_hz = 40.0;
  int order = 2;
  DetrendMode detrend = DetrendMode::None;
  double detrend_win1_s = 0.2;
  double detrend_win2_s = 0.6;
  detect::DetectorConfig detector;
  features::RuleConfig rule;
  classify::LearnerConfig learners;
  std::uint64_t seed = 7;
  double test_frac = 0.2;

  // Checks every module's constraints; fs-dependent filter checks happen
  // per record in bandpass_for().
  void validate() const;
  dsp::BandpassSpec bandpass_for(double fs) const;
};

/// Applies `key = value` lines ('#' comments allowed). Unknown keys and
/// unparsable values throw InvalidConfig naming the line.
void apply_config_text(PipelineConfig& cfg, std::string_view text);

std::vector<std::string> config_keys();

// Sets the split seed and the seeds of every stochastic learner.
void set_seed(PipelineConfig& cfg, std::uint64_t seed);

// Optional median detrend followed by the zero-phase bandpass.
EcgRecord preprocess(const EcgRecord& raw, const PipelineConfig& cfg);

struct RecordAnalysis {
  std::string record_id;
  detect::BeatTable beats;
  features::FeatureVector fv;
  std::vector<features::Segment> segments;
  ClassLabel label = ClassLabel::NonVT;
};

// Detection, features and rule segmentation on an already filtered record.
RecordAnalysis analyze_filtered(const EcgRecord& filtered, const PipelineConfig& cfg);

/// Preprocess and analyze every record. The parallel version distributes
/// records over OpenMP threads and matches the serial one exactly; the
/// first failing record's error is rethrown.
std::vector<RecordAnalysis> analyze_records(const std::vector<EcgRecord>& raw,
                                            const PipelineConfig& cfg);
std::vector<RecordAnalysis> analyze_records_serial(const std::vector<EcgRecord>& raw,
                                                   const PipelineConfig& cfg);

}  // namespace vtd::pipeline
