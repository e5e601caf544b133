#pragma once

#include <algorithm>

namespace tloc {

// A (start, end) pair in seconds, start <= end.
struct Interval {
    double start = 0.0;
    double end = 0.0;

    double length() const { return end - start; }

    bool operator==(const Interval&) const = default;
};

// Clamp into [0, limit] and swap inverted endpoints.
inline Interval normalize_interval(Interval iv, double limit) {
    if (iv.start > iv.end) std::swap(iv.start, iv.end);
    iv.start = std::clamp(iv.start, 0.0, limit);
    iv.end = std::clamp(iv.end, 0.0, limit);
    return iv;
}

} // namespace tloc
