#pragma once

#include <cmath>
#include <vector>

namespace cfs::testing {

/// Least-squares log-log slope.
inline double slope(const std::vector<double>& h, const std::vector<double>& r) {
    const double n = h.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < h.size(); ++i) {
        const double a = std::log(h[i]), b = std::log(r[i]);
        sx += a;
        sy += b;
        sxx += a * a;
        sxy += a * b;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace cfs::testing
