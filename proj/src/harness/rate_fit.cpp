#include "pcrlab/rate_fit.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "pcrlab/errors.hpp"
#include "pcrlab/rng.hpp"

namespace pcrlab {

namespace {

struct OlsLine {
    double slope;
    double intercept;
    double r_squared;
};

OlsLine ols(const std::vector<std::pair<double, double>>& pts) {
    const double m = static_cast<double>(pts.size());
    double sx = 0.0, sy = 0.0;
    for (const auto& [x, y] : pts) {
        sx += x;
        sy += y;
    }
    const double mx = sx / m;
    const double my = sy / m;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& [x, y] : pts) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if (sxx == 0.0) throw invalid_input("ladder levels collapse to one n");
    OlsLine line;
    line.slope = sxy / sxx;
    line.intercept = my - line.slope * mx;
    double ss_res = 0.0;
    for (const auto& [x, y] : pts) {
        const double r = y - (line.intercept + line.slope * x);
        ss_res += r * r;
    }
    line.r_squared = syy > 0.0 ? std::max(0.0, 1.0 - ss_res / syy) : 1.0;
    return line;
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
    const double pos = q * (sorted.size() - 1);
    const std::size_t k = static_cast<std::size_t>(pos);
    if (k + 1 >= sorted.size()) return sorted.back();
    const double w = pos - static_cast<double>(k);
    return sorted[k] * (1.0 - w) + sorted[k + 1] * w;
}

} // namespace

RateFit fit_rate(const std::vector<double>& n, const std::vector<double>& eps,
                 int bootstrap, std::uint64_t seed) {
    if (n.size() != eps.size()) {
        throw invalid_input("n and eps must pair up one entry per replication");
    }
    if (bootstrap < 0) throw invalid_parameter("bootstrap count is negative");
    for (double e : eps) {
        if (!(e > 0.0) || !std::isfinite(e)) {
            throw invalid_input("rate fits need strictly positive values");
        }
    }
    for (double v : n) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw invalid_input("ladder values must be positive");
        }
    }

    // Group replications by exact n value, ascending.
    std::map<double, std::vector<double>> groups;
    for (std::size_t i = 0; i < n.size(); ++i) groups[n[i]].push_back(eps[i]);
    if (groups.size() < 4) {
        throw invalid_input("rate fits need at least 4 ladder levels, got " +
                            std::to_string(groups.size()));
    }

    RateFit fit;
    for (const auto& [nv, vals] : groups) {
        double mean = 0.0;
        for (double v : vals) mean += v;
        mean /= static_cast<double>(vals.size());
        fit.points.emplace_back(std::log(nv), std::log(mean));
    }
    const OlsLine line = ols(fit.points);
    fit.slope = line.slope;
    fit.intercept = line.intercept;
    fit.r_squared = line.r_squared;

    if (bootstrap == 0) {
        fit.ci_lo = fit.slope;
        fit.ci_hi = fit.slope;
        return fit;
    }

    std::vector<const std::vector<double>*> level_vals;
    std::vector<double> level_logn;
    for (const auto& [nv, vals] : groups) {
        level_vals.push_back(&vals);
        level_logn.push_back(std::log(nv));
    }

    RngStream rng{seed, 0x5b007u};
    std::vector<double> slopes;
    slopes.reserve(static_cast<std::size_t>(bootstrap));
    std::vector<std::pair<double, double>> pts(level_vals.size());
    for (int b = 0; b < bootstrap; ++b) {
        for (std::size_t j = 0; j < level_vals.size(); ++j) {
            const std::vector<double>& vals = *level_vals[j];
            double mean = 0.0;
            for (std::size_t i = 0; i < vals.size(); ++i) {
                const std::uint64_t pick = rng.bits() % vals.size();
                mean += vals[pick];
            }
            mean /= static_cast<double>(vals.size());
            pts[j] = {level_logn[j], std::log(mean)};
        }
        slopes.push_back(ols(pts).slope);
    }
    std::sort(slopes.begin(), slopes.end());
    fit.ci_lo = std::min(quantile_sorted(slopes, 0.05), fit.slope);
    fit.ci_hi = std::max(quantile_sorted(slopes, 0.95), fit.slope);
    return fit;
}

} // namespace pcrlab
