#include "vtd/error.hpp"

namespace vtd {

std::string_view code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::TruncatedData: return "TruncatedData";
    case ErrorCode::MissingDirective: return "MissingDirective";
    case ErrorCode::NonNumericSample: return "NonNumericSample";
    case ErrorCode::InvalidGain: return "InvalidGain";
    case ErrorCode::InvalidRecord: return "InvalidRecord";
    case ErrorCode::InvalidWidth: return "InvalidWidth";
    case ErrorCode::InvalidSynthSpec: return "InvalidSynthSpec";
    case ErrorCode::OverlappingEpisodes: return "OverlappingEpisodes";
    case ErrorCode::BadProportions: return "BadProportions";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::UnstableDesign: return "UnstableDesign";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::BadWindows: return "BadWindows";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::SignalTooShort: return "SignalTooShort";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::TooFewBeats: return "TooFewBeats";
    case ErrorCode::MalformedTable: return "MalformedTable";
    case ErrorCode::DegenerateFeature: return "DegenerateFeature";
    case ErrorCode::InvalidDataset: return "InvalidDataset";
    case ErrorCode::Diverged: return "Diverged";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::UntrainedModel: return "UntrainedModel";
    case ErrorCode::Unsupported: return "Unsupported";
    case ErrorCode::BadVersion: return "BadVersion";
    case ErrorCode::MalformedModel: return "MalformedModel";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyMatrix: return "EmptyMatrix";
    case ErrorCode::ClassTooSmall: return "ClassTooSmall";
    case ErrorCode::Usage: return "Usage";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

bool is_io_error(ErrorCode code) noexcept { return code == ErrorCode::Io; }

}  // namespace vtd
