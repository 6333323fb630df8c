#include "vtd/record.hpp"

#include <cmath>
#include <string>

#include "vtd/error.hpp"

namespace vtd {

EcgRecord::EcgRecord(std::vector<double> samples_mv, double fs_hz, std::string record_id)
    : samples_(std::move(samples_mv)), fs_(fs_hz), id_(std::move(record_id)) {
  if (!(fs_ > 0.0) || fs_ > kMaxSamplingRateHz || !std::isfinite(fs_)) {
    throw Error(ErrorCode::InvalidRecord,
                "sampling rate must be in (0, 10000] Hz, got " + std::to_string(fs_));
  }
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!std::isfinite(samples_[i])) {
      throw Error(ErrorCode::InvalidRecord, "non-finite sample at index " + std::to_string(i));
    }
  }
}

EcgRecord EcgRecord::with_samples(std::vector<double> samples_mv) const {
  return EcgRecord(std::move(samples_mv), fs_, id_);
}

std::string_view to_string(ClassLabel label) noexcept {
  switch (label) {
    case ClassLabel::NonVT: return "NonVT";
    case ClassLabel::SustainedVT: return "SustainedVT";
    case ClassLabel::NonSustainedVT: return "NonSustainedVT";
  }
  return "NonVT";
}

ClassLabel parse_class_label(std::string_view text) {
  if (text == "NonVT") return ClassLabel::NonVT;
  if (text == "SustainedVT") return ClassLabel::SustainedVT;
  if (text == "NonSustainedVT") return ClassLabel::NonSustainedVT;
  throw Error(ErrorCode::MalformedTable, "unknown class label '" + std::string(text) + "'");
}

int severity(ClassLabel label) noexcept {
  switch (label) {
    case ClassLabel::NonVT: return 0;
    case ClassLabel::NonSustainedVT: return 1;
    case ClassLabel::SustainedVT: return 2;
  }
  return 0;
}

}  // namespace vtd
