#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace holmes {

enum class ErrorCode {
  kInvalidTopology,
  kInvalidCoordinate,
  kInvalidRank,
  kInfeasibleConfig,
  kInvalidPlan,
  kInconsistentPlan,
  kInfeasiblePartition,
  kInfeasibleAlpha,
  kMemoryExceeded,
  kInvalidModel,
  kInvalidDevice,
  kNotApplicable,
};

std::string_view to_string(ErrorCode code);

// All domain failures surface as holmes::Error; the code is machine-readable.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace holmes
