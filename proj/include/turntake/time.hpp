#pragma once

#include <cmath>
#include <string>

namespace turntake {

/// Time values are decimal seconds stored as doubles.
using Seconds = double;

/// Absolute epsilon for every time comparison in the library.
inline constexpr Seconds kTimeEpsilon = 1e-9;

inline bool time_equal(Seconds a, Seconds b, Seconds eps = kTimeEpsilon) {
    return std::fabs(a - b) <= eps;
}

/// Half-open stretch of time [start, end).
struct Span {
    Seconds start = 0.0;
    Seconds end = 0.0;

    Seconds duration() const { return end - start; }
    bool operator==(const Span&) const = default;
};

/// Formats a time with at most 16 significant digits, trailing zeros trimmed.
/// The result is stable: format_time(parse(format_time(x))) == format_time(x).
std::string format_time(Seconds t);

}  // namespace turntake
