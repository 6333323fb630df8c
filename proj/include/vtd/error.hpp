#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vtd {

enum class ErrorCode {
  // ingest
  MalformedHeader,
  UnsupportedFormat,
  TruncatedData,
  MissingDirective,
  NonNumericSample,
  InvalidGain,
  InvalidRecord,
  // synth
  InvalidWidth,
  InvalidSynthSpec,
  OverlappingEpisodes,
  BadProportions,
  // dsp
  InvalidSpec,
  UnstableDesign,
  NonFiniteInput,
  TooShort,
  BadWindows,
  // detect / features
  InvalidConfig,
  SignalTooShort,
  EmptyInput,
  TooFewBeats,
  MalformedTable,
  // classify
  DegenerateFeature,
  InvalidDataset,
  Diverged,
  KTooLarge,
  UntrainedModel,
  Unsupported,
  BadVersion,
  MalformedModel,
  // eval
  LengthMismatch,
  EmptyMatrix,
  ClassTooSmall,
  // cli
  Usage,
  Io,
};

std::string_view code_name(ErrorCode code) noexcept;

// Failures the CLI reports with exit status 2 rather than 1.
bool is_io_error(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

}  // namespace vtd
