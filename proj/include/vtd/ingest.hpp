#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vtd/record.hpp"

namespace vtd::ingest {

inline constexpr double kDefaultGain = 200.0;

struct WfdbSignal {
  std::string file_name;
  int format_code = 0;   // 212 or 16
  double gain = kDefaultGain;  // adc units per mV
  int baseline = 0;      // adc units
  std::string description;
};

struct WfdbHeader {
  std::string record_name;
  std::size_t n_signals = 0;
  double fs = 0.0;
  std::size_t n_samples = 0;  // per signal; 0 when the header omits it
  std::vector<WfdbSignal> signals;
};

/// Parses the record line and the signal lines of a WFDB header.
///
/// Comment lines ('#') and blank lines are skipped. Optional fields take
/// the WFDB defaults: gain 200 adc/mV when missing or zero, baseline equal
/// to the ADC zero field when present and 0 otherwise. Only formats 212 and
/// 16 are accepted.
WfdbHeader parse_wfdb_header(std::string_view text);

/// Unpacks format 212: two 12-bit two's-complement samples per byte triple.
/// `n_samples` counts interleaved samples over all signals in the file.
std::vector<int> decode_format_212(std::span<const std::uint8_t> bytes, std::size_t n_samples);

/// Format 16: little-endian signed 16-bit samples.
std::vector<int> decode_format_16(std::span<const std::uint8_t> bytes, std::size_t n_samples);

std::vector<double> to_millivolts(std::span<const int> adc, double gain, int baseline);

/// Loads signal 0 of a WFDB record. The signal file is resolved relative to
/// the header's directory; signals sharing that file are de-interleaved and
/// all but the first are discarded.
EcgRecord read_wfdb_record(const std::filesystem::path& header_path);

/// Parses the CSV record format:
///
///     # fs=<float> id=<token>
///     <mV>
///     <mV>
///     ...
///
/// Blank lines are ignored; both "\n" and "\r\n" line endings are accepted.
EcgRecord read_csv_record(std::string_view text);

std::string write_csv_record(const EcgRecord& record);

}  // namespace vtd::ingest
