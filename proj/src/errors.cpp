#include "ringcorr/errors.hpp"

namespace ringcorr {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::SingularFactor: return "SingularFactor";
    case ErrorCode::IllConditionedSimilarity: return "IllConditionedSimilarity";
    case ErrorCode::SingularRegularizedKernel: return "SingularRegularizedKernel";
    case ErrorCode::NotBracketed: return "NotBracketed";
    case ErrorCode::DivisionOutsideSupport: return "DivisionOutsideSupport";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::EmptyBulk: return "EmptyBulk";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::RejectionCapExceeded: return "RejectionCapExceeded";
  }
  return "Unknown";
}

}  // namespace ringcorr
