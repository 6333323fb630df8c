#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "vtd/detect.hpp"
#include "vtd/record.hpp"

namespace vtd::features {

struct FeatureVector {
  double mean_rr_s = 0.0;
  double mean_qrs_s = 0.0;
  double hbr_bpm = 0.0;
};

// Rate band and width bound of the VT rule; the rate bounds are exclusive.
struct RuleConfig {
  double hbr_low_bpm = 110.0;
  double hbr_high_bpm = 250.0;
  double qrs_min_s = 0.12;
  std::size_t min_run_beats = 3;
  double sustained_s = 30.0;

  void validate() const;
};

enum class Rhythm { NonVT, VT };

std::string_view to_string(Rhythm rhythm) noexcept;

// Means over beats [first, last] inclusive: RR over the intervals between
// them, QRS width over the beats themselves.
FeatureVector segment_features(const detect::BeatTable& beats, std::size_t first,
                               std::size_t last);

FeatureVector record_features(const detect::BeatTable& beats);

Rhythm rule_label(const FeatureVector& fv, const RuleConfig& rule = {});

struct Segment {
  double start_s = 0.0;
  double end_s = 0.0;
  ClassLabel label = ClassLabel::NonVT;
};

/// Beat i is VT when its preceding interval (the following one for beat 0)
/// and its QRS width satisfy rule_label. Maximal VT runs of at least
/// min_run_beats become episodes spanning from the start of the first
/// beat's interval to the last beat; the gaps between them are NonVT.
std::vector<Segment> episode_segmentation(const detect::BeatTable& beats,
                                          const RuleConfig& rule = {});

// Most severe segment label; NonVT for an empty list.
ClassLabel record_label(const std::vector<Segment>& segments);

struct NoiseCheckResult {
  double hbr_before_bpm = 0.0;
  double hbr_after_bpm = 0.0;
  Rhythm label_before = Rhythm::NonVT;
  Rhythm label_after = Rhythm::NonVT;
  bool criticality_changed = false;
};

NoiseCheckResult noise_effect_check(const EcgRecord& raw, const EcgRecord& filtered,
                                    const detect::DetectorConfig& cfg,
                                    const RuleConfig& rule = {});

struct FeatureRow {
  std::string record_id;
  FeatureVector fv;
  ClassLabel label = ClassLabel::NonVT;
};

// record_id,mean_rr_s,mean_qrs_s,hbr_bpm,label
std::string write_feature_csv(const std::vector<FeatureRow>& rows);
std::vector<FeatureRow> read_feature_csv(std::string_view text);

}  // namespace vtd::features
