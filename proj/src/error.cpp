#include "gnb/error.hpp"

namespace gnb {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::SingularMetric: return "SingularMetric";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::AmbiguousClassification: return "AmbiguousClassification";
    case ErrorCode::UnknownPreset: return "UnknownPreset";
    case ErrorCode::DegenerateConstruction: return "DegenerateConstruction";
    case ErrorCode::RankDeficiency: return "RankDeficiency";
    case ErrorCode::NotConcircular: return "NotConcircular";
    case ErrorCode::NotRecurrent: return "NotRecurrent";
    case ErrorCode::NotConstantLength: return "NotConstantLength";
    case ErrorCode::Unsupported: return "Unsupported";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownCheck: return "UnknownCheck";
    case ErrorCode::DegenerateMetric: return "DegenerateMetric";
  }
  return "Unknown";
}

}  // namespace gnb
