#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "tloc/errors.hpp"

namespace tloc {

// Discretization of a video's [0, L] time axis into `steps` relative
// time tokens. Token t = 1 maps to 0 s and token t = steps maps to L s.
struct TimeGrid {
    int steps = 100;     // number of time tokens
    double length = 0.0; // video duration in seconds

    void validate() const {
        if (steps < 2) throw InvalidGrid("TimeGrid: steps must be >= 2, got " + std::to_string(steps));
        if (!(length > 0.0) || !std::isfinite(length))
            throw InvalidGrid("TimeGrid: length must be > 0, got " + std::to_string(length));
    }
};

// Halfway cases round away from zero (27.5 -> 28), never to even.
inline double round_half_away_from_zero(double x) {
    return std::round(x);
}

// Continuous timestamp -> token index in [1, steps]. Timestamps outside
// [0, length] are clamped, not rejected; annotations commonly overshoot
// the video duration by fractions of a second.
inline int encode_time(double tau, const TimeGrid& grid) {
    grid.validate();
    if (std::isnan(tau) || std::isinf(tau))
        throw NonFiniteTimestamp("encode_time: timestamp is not finite");
    tau = std::clamp(tau, 0.0, grid.length);
    int t = static_cast<int>(std::llround(tau * (grid.steps - 1) / grid.length)) + 1;
    return std::clamp(t, 1, grid.steps);
}

// Token index -> representative timestamp, the left edge scaled so that
// decode(1) = 0 and decode(steps) = length.
inline double decode_time(int t, const TimeGrid& grid) {
    grid.validate();
    if (t < 1 || t > grid.steps)
        throw IndexOutOfRange("decode_time: token index " + std::to_string(t) + " outside [1, " +
                              std::to_string(grid.steps) + "]");
    return grid.length * (t - 1) / (grid.steps - 1);
}

// Worst case |decode(encode(tau)) - tau| over tau in [0, length]:
// half the spacing between adjacent token timestamps.
inline double max_discretization_error(const TimeGrid& grid) {
    grid.validate();
    return grid.length / (2.0 * (grid.steps - 1));
}

} // namespace tloc
