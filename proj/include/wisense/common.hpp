#pragma once

#include <stdexcept>
#include <string>

namespace wisense {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kSpeedOfLight = 299792458.0;  // m/s, exact by definition

// Single exception type for everything the library can reject: malformed
// files, contract violations, numerically undefined requests. Messages are
// meant to be shown to the user as-is.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

[[noreturn]] inline void fail(const std::string& msg) { throw Error(msg); }

}  // namespace wisense
