#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace biomark {

// Malformed run configuration (bad roles, bad flags, unknown columns).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Data that violates an operation's preconditions (missing file, all-missing
// column, degenerate split).
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Missing cells are carried in-band as quiet NaN: distinguishable from every
// valid number and propagating through arithmetic.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) { return std::isnan(v); }

inline std::size_t count_missing(const std::vector<double>& col) {
    std::size_t n = 0;
    for (double v : col)
        if (is_missing(v)) ++n;
    return n;
}

inline double missing_fraction(const std::vector<double>& col) {
    return col.empty() ? 0.0 : double(count_missing(col)) / double(col.size());
}

inline int sign_of(double v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

}  // namespace biomark
