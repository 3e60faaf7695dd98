#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace aoi {

/// Failure categories raised by the solvers and the simulator.
enum class Errc {
  // model validation
  NonBinaryReset,
  NonPositiveRate,
  DanglingState,
  UnreachableState,
  // linear algebra
  NotErgodic,
  UnstableSystem,
  // parameters
  InvalidParams,
  OutOfDomain,
  Unstable,
  Overflow,
  NoConvergence,
  // simulation
  UnstableLoad,
  DegenerateConfig,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace aoi
