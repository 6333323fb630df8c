#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace vtd {

inline constexpr double kMaxSamplingRateHz = 10000.0;

/// Single-lead ECG signal in millivolts.
///
/// The constructor validates the sampling rate and rejects non-finite
/// samples, so every live instance satisfies the record invariants.
class EcgRecord {
public:
  EcgRecord() = default;
  EcgRecord(std::vector<double> samples_mv, double fs_hz, std::string record_id);

  const std::vector<double>& samples() const noexcept { return samples_; }
  double fs() const noexcept { return fs_; }
  const std::string& id() const noexcept { return id_; }

  std::size_t n_samples() const noexcept { return samples_.size(); }
  double sample_period_s() const noexcept { return 1.0 / fs_; }
  double duration_s() const noexcept {
    return static_cast<double>(samples_.size()) / fs_;
  }

  // Same id and rate, new samples (validated again).
  EcgRecord with_samples(std::vector<double> samples_mv) const;

private:
  std::vector<double> samples_;
  double fs_ = 1.0;
  std::string id_;
};

enum class ClassLabel { NonVT, SustainedVT, NonSustainedVT };

std::string_view to_string(ClassLabel label) noexcept;
ClassLabel parse_class_label(std::string_view text);

// SustainedVT > NonSustainedVT > NonVT
int severity(ClassLabel label) noexcept;

}  // namespace vtd
