#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace latcoop {

enum class Errc {
  NotPositiveDefinite,
  DimensionMismatch,
  OutOfShapingRegion,
  ZeroChannel,
  CodebookTooLarge,
  NotPrime,
  InvalidArgument,
  NonConvergence,
  Config,
  Budget,
};

constexpr std::string_view errc_name(Errc e) {
  switch (e) {
    case Errc::NotPositiveDefinite: return "NotPositiveDefinite";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::OutOfShapingRegion: return "OutOfShapingRegion";
    case Errc::ZeroChannel: return "ZeroChannel";
    case Errc::CodebookTooLarge: return "CodebookTooLarge";
    case Errc::NotPrime: return "NotPrime";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::NonConvergence: return "NonConvergence";
    case Errc::Config: return "Config";
    case Errc::Budget: return "Budget";
  }
  return "Unknown";
}

/// Library exception; what() is "<ErrcName>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail)
      : std::runtime_error(std::string(errc_name(code)) + ": " + detail), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline void require(bool cond, Errc code, const std::string& detail) {
  if (!cond) throw Error(code, detail);
}

}  // namespace latcoop
