#include "vtd/features.hpp"

#include <algorithm>
#include <string>

#include "vtd/error.hpp"
#include "vtd/text.hpp"

namespace vtd::features {

void RuleConfig::validate() const {
  if (!(hbr_low_bpm > 0.0 && hbr_low_bpm < hbr_high_bpm)) {
    throw Error(ErrorCode::InvalidConfig, "rate band must satisfy 0 < low < high");
  }
  if (!(qrs_min_s > 0.0)) throw Error(ErrorCode::InvalidConfig, "QRS bound must be positive");
  if (min_run_beats < 1) throw Error(ErrorCode::InvalidConfig, "minimum run must be at least one beat");
  if (!(sustained_s > 0.0)) throw Error(ErrorCode::InvalidConfig, "sustained duration must be positive");
}

std::string_view to_string(Rhythm rhythm) noexcept {
  return rhythm == Rhythm::VT ? "VT" : "NonVT";
}

FeatureVector segment_features(const detect::BeatTable& beats, std::size_t first,
                               std::size_t last) {
  if (!(first < last) || last >= beats.size()) {
    throw Error(ErrorCode::TooFewBeats, "a feature window needs at least two beats");
  }
  double rr = 0.0;
  for (std::size_t i = first; i < last; ++i) rr += beats.rr_s[i];
  double qrs = 0.0;
  for (std::size_t i = first; i <= last; ++i) qrs += beats.qrs_width_s[i];
  FeatureVector fv;
  fv.mean_rr_s = rr / static_cast<double>(last - first);
  fv.hbr_bpm = 60.0 / fv.mean_rr_s;
  fv.mean_qrs_s = qrs / static_cast<double>(last - first + 1);
  return fv;
}

FeatureVector record_features(const detect::BeatTable& beats) {
  if (beats.size() < 2) throw Error(ErrorCode::TooFewBeats, "a record needs at least two beats");
  return segment_features(beats, 0, beats.size() - 1);
}

Rhythm rule_label(const FeatureVector& fv, const RuleConfig& rule) {
  const bool fast = fv.hbr_bpm > rule.hbr_low_bpm && fv.hbr_bpm < rule.hbr_high_bpm;
  return fast && fv.mean_qrs_s > rule.qrs_min_s ? Rhythm::VT : Rhythm::NonVT;
}

std::vector<Segment> episode_segmentation(const detect::BeatTable& beats, const RuleConfig& rule) {
  rule.validate();
  const std::size_t n = beats.size();
  std::vector<Segment> out;
  if (n < 2) return out;

  std::vector<bool> vt(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double rr = i > 0 ? beats.rr_s[i - 1] : beats.rr_s[0];
    FeatureVector fv{rr, beats.qrs_width_s[i], 60.0 / rr};
    vt[i] = rule_label(fv, rule) == Rhythm::VT;
  }

  double cursor = 0.0;
  auto push_gap = [&](double until) {
    if (until > cursor) out.push_back({cursor, until, ClassLabel::NonVT});
  };
  for (std::size_t i = 0; i < n;) {
    if (!vt[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && vt[j + 1]) ++j;
    if (j - i + 1 >= rule.min_run_beats) {
      const double start = i > 0 ? beats.r_times_s[i - 1] : std::max(0.0, beats.r_times_s[0] - beats.rr_s[0]);
      const double end = beats.r_times_s[j];
      push_gap(start);
      const ClassLabel label =
          end - start >= rule.sustained_s ? ClassLabel::SustainedVT : ClassLabel::NonSustainedVT;
      out.push_back({start, end, label});
      cursor = end;
    }
    i = j + 1;
  }
  push_gap(beats.r_times_s[n - 1]);
  return out;
}

ClassLabel record_label(const std::vector<Segment>& segments) {
  ClassLabel worst = ClassLabel::NonVT;
  for (const Segment& s : segments) {
    if (severity(s.label) > severity(worst)) worst = s.label;
  }
  return worst;
}

NoiseCheckResult noise_effect_check(const EcgRecord& raw, const EcgRecord& filtered,
                                    const detect::DetectorConfig& cfg, const RuleConfig& rule) {
  if (raw.fs() != filtered.fs() || raw.n_samples() != filtered.n_samples()) {
    throw Error(ErrorCode::InvalidRecord, "raw and filtered records differ in rate or length");
  }
  const FeatureVector before = record_features(detect::build_beat_table(raw.samples(), raw.fs(), cfg));
  const FeatureVector after =
      record_features(detect::build_beat_table(filtered.samples(), filtered.fs(), cfg));
  NoiseCheckResult r;
  r.hbr_before_bpm = before.hbr_bpm;
  r.hbr_after_bpm = after.hbr_bpm;
  r.label_before = rule_label(before, rule);
  r.label_after = rule_label(after, rule);
  r.criticality_changed = r.label_before != r.label_after;
  return r;
}

std::string write_feature_csv(const std::vector<FeatureRow>& rows) {
  std::string out = "record_id,mean_rr_s,mean_qrs_s,hbr_bpm,label\n";
  for (const FeatureRow& r : rows) {
    out += r.record_id + ',' + text::format_double(r.fv.mean_rr_s) + ',' +
           text::format_double(r.fv.mean_qrs_s) + ',' + text::format_double(r.fv.hbr_bpm) + ',' +
           std::string(to_string(r.label)) + '\n';
  }
  return out;
}

std::vector<FeatureRow> read_feature_csv(std::string_view text) {
  const auto lines = text::split_lines(text);
  if (lines.empty() || text::trim(lines[0]) != "record_id,mean_rr_s,mean_qrs_s,hbr_bpm,label") {
    throw Error(ErrorCode::MalformedTable,
                "feature table must start with 'record_id,mean_rr_s,mean_qrs_s,hbr_bpm,label'");
  }
  std::vector<FeatureRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::string_view line = text::trim(lines[i]);
    if (line.empty()) continue;
    const auto cells = text::split(line, ',');
    const auto where = "feature table line " + std::to_string(i + 1) + ": ";
    if (cells.size() != 5) throw Error(ErrorCode::MalformedTable, where + "expected 5 columns");
    const auto rr = text::parse_double(cells[1]);
    const auto qrs = text::parse_double(cells[2]);
    const auto hbr = text::parse_double(cells[3]);
    if (!rr || !qrs || !hbr) throw Error(ErrorCode::MalformedTable, where + "non-numeric feature");
    FeatureRow row;
    row.record_id = std::string(text::trim(cells[0]));
    row.fv = {*rr, *qrs, *hbr};
    row.label = parse_class_label(text::trim(cells[4]));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace vtd::features
