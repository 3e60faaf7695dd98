#include "aoi/error.hpp"

namespace aoi {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::NonBinaryReset: return "NonBinaryReset";
    case Errc::NonPositiveRate: return "NonPositiveRate";
    case Errc::DanglingState: return "DanglingState";
    case Errc::UnreachableState: return "UnreachableState";
    case Errc::NotErgodic: return "NotErgodic";
    case Errc::UnstableSystem: return "UnstableSystem";
    case Errc::InvalidParams: return "InvalidParams";
    case Errc::OutOfDomain: return "OutOfDomain";
    case Errc::Unstable: return "Unstable";
    case Errc::Overflow: return "Overflow";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::UnstableLoad: return "UnstableLoad";
    case Errc::DegenerateConfig: return "DegenerateConfig";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace aoi
