#include "holmes/error.hpp"

namespace holmes {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidTopology: return "INVALID_TOPOLOGY";
    case ErrorCode::kInvalidCoordinate: return "INVALID_COORDINATE";
    case ErrorCode::kInvalidRank: return "INVALID_RANK";
    case ErrorCode::kInfeasibleConfig: return "INFEASIBLE_CONFIG";
    case ErrorCode::kInvalidPlan: return "INVALID_PLAN";
    case ErrorCode::kInconsistentPlan: return "INCONSISTENT_PLAN";
    case ErrorCode::kInfeasiblePartition: return "INFEASIBLE_PARTITION";
    case ErrorCode::kInfeasibleAlpha: return "INFEASIBLE_ALPHA";
    case ErrorCode::kMemoryExceeded: return "MEMORY_EXCEEDED";
    case ErrorCode::kInvalidModel: return "INVALID_MODEL";
    case ErrorCode::kInvalidDevice: return "INVALID_DEVICE";
    case ErrorCode::kNotApplicable: return "NOT_APPLICABLE";
  }
  return "UNKNOWN";
}

}  // namespace holmes
