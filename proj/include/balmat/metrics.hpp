#pragma once

#include <cstdint>
#include <optional>

#include <json.hpp>

#include "balmat/process.hpp"

namespace balmat {

// Exact nonnegative fraction with a small denominator (the node count).
// Keeps threshold comparisons like "at most 16n" free of rounding.
struct Frac {
    __int128 num = 0;
    std::int64_t den = 1;

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }

    bool operator<=(std::int64_t bound) const {
        return num <= static_cast<__int128>(bound) * den;
    }
};

struct Metrics {
    std::int64_t max = 0;
    std::int64_t min = 0;
    std::int64_t disc = 0;
    Frac above_avg;                          // sum of load above the exact average
    std::optional<std::int64_t> y_at_level;  // sum of load above the given level

    nlohmann::json to_json() const {
        nlohmann::json j{{"max", max},
                         {"min", min},
                         {"disc", disc},
                         {"above_avg", above_avg.value()}};
        if (y_at_level) j["y_at_level"] = *y_at_level;
        return j;
    }
};

inline std::int64_t y_at_level(const LoadVector& load, std::int64_t level) {
    std::int64_t acc = 0;
    for (std::int64_t e : load.x)
        if (e > level) acc += e - level;
    return acc;
}

inline Frac above_average(const LoadVector& load) {
    const std::int64_t n = load.size();
    const std::int64_t total = load.total();
    __int128 num = 0;
    for (std::int64_t e : load.x) {
        __int128 d = static_cast<__int128>(e) * n - total;  // n * (e - avg)
        if (d > 0) num += d;
    }
    return Frac{num, n};
}

inline Metrics metrics(const LoadVector& load,
                       std::optional<std::int64_t> level = {}) {
    Metrics m;
    m.max = load.max();
    m.min = load.min();
    m.disc = m.max - m.min;
    m.above_avg = above_average(load);
    if (level) m.y_at_level = y_at_level(load, *level);
    return m;
}

// Exact ceiling of the average load.
inline std::int64_t ceil_average(const LoadVector& load) {
    std::int64_t n = load.size();
    std::int64_t total = load.total();
    return (total + n - 1) / n;
}

}  // namespace balmat
