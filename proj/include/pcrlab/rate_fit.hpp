#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace pcrlab {

// Power-law fit of a positive quantity against n on the log-log scale.
// ci_lo / ci_hi bracket the slope with a 90% bootstrap interval obtained by
// resampling replications within each ladder level.
struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::vector<std::pair<double, double>> points; // (log n, log level mean)
};

// n and eps pair up one entry per replication; entries sharing an n value
// form one ladder level.  Requires at least 4 distinct levels and strictly
// positive eps (invalid_input otherwise).  bootstrap = 0 degenerates the
// interval to the point estimate.
RateFit fit_rate(const std::vector<double>& n, const std::vector<double>& eps,
                 int bootstrap = 2000, std::uint64_t seed = 0);

} // namespace pcrlab
