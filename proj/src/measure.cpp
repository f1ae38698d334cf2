#include "pcrlab/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pcrlab/errors.hpp"
#include "pcrlab/parallel.hpp"
#include "pcrlab/quadrature.hpp"

namespace pcrlab {

namespace {

constexpr double kWeightPrune = 1e-15;
constexpr double kWeightSumTol = 1e-12;

void check_finite(const std::vector<double>& xs) {
    for (double x : xs) {
        if (!std::isfinite(x)) {
            throw invalid_input("non-finite sample value");
        }
    }
}

} // namespace

EmpiricalMeasure::EmpiricalMeasure(std::vector<double> samples)
    : samples_(std::move(samples)) {
    if (samples_.empty()) throw invalid_input("empty sample set");
    check_finite(samples_);
    std::sort(samples_.begin(), samples_.end());
    uniform_ = true;
}

EmpiricalMeasure::EmpiricalMeasure(std::vector<double> samples,
                                   std::vector<double> weights)
    : samples_(std::move(samples)), weights_(std::move(weights)) {
    if (samples_.empty()) throw invalid_input("empty sample set");
    if (weights_.size() != samples_.size()) {
        throw invalid_input("weights/samples size mismatch");
    }
    check_finite(samples_);
    normalize();
}

void EmpiricalMeasure::normalize() {
    double total = 0.0;
    for (double w : weights_) {
        if (!(w > 0.0)) throw invalid_input("weights must be positive");
        total += w;
    }
    if (std::abs(total - 1.0) > kWeightSumTol) {
        throw invalid_input("weights must sum to 1 within 1e-12");
    }

    std::vector<std::size_t> order(samples_.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        return samples_[i] < samples_[j];
    });

    std::vector<double> xs;
    std::vector<double> ws;
    xs.reserve(samples_.size());
    ws.reserve(samples_.size());
    for (std::size_t idx : order) {
        if (weights_[idx] < kWeightPrune) continue;
        xs.push_back(samples_[idx]);
        ws.push_back(weights_[idx]);
    }
    if (xs.empty()) throw invalid_input("all weights pruned");

    const double kept = std::accumulate(ws.begin(), ws.end(), 0.0);
    for (double& w : ws) w /= kept;

    samples_ = std::move(xs);
    weights_ = std::move(ws);
    uniform_ = false;

    cumulative_.resize(weights_.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        acc += weights_[i];
        cumulative_[i] = acc;
    }
    cumulative_.back() = 1.0;
}

double EmpiricalMeasure::quantile(double u) const {
    if (!(u > 0.0 && u <= 1.0)) {
        throw invalid_parameter("quantile argument must lie in (0,1]");
    }
    if (uniform_) {
        const double n = static_cast<double>(samples_.size());
        auto idx = static_cast<std::size_t>(std::ceil(u * n)) - 1;
        if (idx >= samples_.size()) idx = samples_.size() - 1;
        return samples_[idx];
    }
    auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) return samples_.back();
    return samples_[static_cast<std::size_t>(it - cumulative_.begin())];
}

double EmpiricalMeasure::moment(double p) const {
    if (!(p > 0.0)) throw invalid_parameter("moment order must be positive");
    std::vector<double> terms(samples_.size());
    const double n = static_cast<double>(samples_.size());
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        const double w = uniform_ ? 1.0 / n : weights_[i];
        terms[i] = w * std::pow(std::abs(samples_[i]), p);
    }
    return pairwise_sum(terms);
}

QuantileMeasure::QuantileMeasure(std::function<double(double)> quantile)
    : quantile_(std::move(quantile)) {}

QuantileMeasure::QuantileMeasure(std::function<double(double)> quantile,
                                 std::function<double(double)> moment_p)
    : quantile_(std::move(quantile)), moment_(std::move(moment_p)) {}

QuantileMeasure QuantileMeasure::uniform(double a, double b) {
    if (!(b > a)) throw invalid_parameter("uniform needs b > a");
    auto q = [a, b](double u) { return a + (b - a) * u; };
    if (a == 0.0) {
        // integral_0^b x^p dx / b = b^p / (p+1)
        auto m = [b](double p) { return std::pow(b, p) / (p + 1.0); };
        return QuantileMeasure(q, m);
    }
    return QuantileMeasure(q);
}

QuantileMeasure QuantileMeasure::gaussian(double mean, double sd) {
    if (!(sd > 0.0)) throw invalid_parameter("gaussian needs sd > 0");
    auto q = [mean, sd](double u) { return mean + sd * gaussian_quantile(u); };
    return QuantileMeasure(q);
}

QuantileMeasure QuantileMeasure::dirac(double x) {
    auto q = [x](double) { return x; };
    auto m = [x](double p) { return std::pow(std::abs(x), p); };
    return QuantileMeasure(q, m);
}

void WeightedPointCloud::validate() const {
    if (points.empty()) throw invalid_input("empty point cloud");
    const Eigen::Index dim = points.front().size();
    for (const auto& pt : points) {
        if (pt.size() != dim) {
            throw invalid_input("point cloud dimension mismatch");
        }
    }
    if (!weights.empty()) {
        if (weights.size() != points.size()) {
            throw invalid_input("weights/points size mismatch");
        }
        double total = 0.0;
        for (double w : weights) {
            if (!(w > 0.0)) throw invalid_input("weights must be positive");
            total += w;
        }
        if (std::abs(total - 1.0) > kWeightSumTol) {
            throw invalid_input("weights must sum to 1 within 1e-12");
        }
    }
}

namespace {

void check_order(double p) {
    if (!(p >= 1.0)) {
        throw invalid_parameter("Wasserstein order must satisfy p >= 1");
    }
}

template <typename QuantA, typename QuantB>
double quantile_grid_distance(const QuantA& qa, const QuantB& qb, double p,
                              std::size_t grid) {
    if (grid < 2) throw invalid_parameter("quantile grid too small");
    std::vector<double> terms(grid);
    const double g = static_cast<double>(grid);
    for (std::size_t j = 0; j < grid; ++j) {
        const double u = (static_cast<double>(j) + 0.5) / g;
        terms[j] = std::pow(std::abs(qa(u) - qb(u)), p);
    }
    return std::pow(pairwise_sum(terms) / g, 1.0 / p);
}

} // namespace

double wasserstein_1d(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                      double p, std::size_t grid) {
    check_order(p);
    if (a.uniform_weights() && b.uniform_weights() && a.size() == b.size()) {
        // Exact optimal coupling for equal-weight atoms: pair order statistics.
        const std::size_t n = a.size();
        std::vector<double> terms(n);
        for (std::size_t i = 0; i < n; ++i) {
            terms[i] = std::pow(std::abs(a.samples()[i] - b.samples()[i]), p);
        }
        return std::pow(pairwise_sum(terms) / static_cast<double>(n), 1.0 / p);
    }
    return quantile_grid_distance([&](double u) { return a.quantile(u); },
                                  [&](double u) { return b.quantile(u); }, p,
                                  grid);
}

double wasserstein_1d(const EmpiricalMeasure& a, const QuantileMeasure& b,
                      double p, std::size_t grid) {
    check_order(p);
    return quantile_grid_distance([&](double u) { return a.quantile(u); },
                                  [&](double u) { return b.quantile(u); }, p,
                                  grid);
}

double wasserstein_1d(const QuantileMeasure& a, const QuantileMeasure& b,
                      double p, std::size_t grid) {
    check_order(p);
    return quantile_grid_distance([&](double u) { return a.quantile(u); },
                                  [&](double u) { return b.quantile(u); }, p,
                                  grid);
}

double wasserstein_to_dirac(const WeightedPointCloud& cloud,
                            const Eigen::VectorXd& theta0, double p) {
    check_order(p);
    cloud.validate();
    if (cloud.points.front().size() != theta0.size()) {
        throw invalid_input("theta0 dimension does not match point cloud");
    }
    const std::size_t n = cloud.points.size();
    const bool uniform = cloud.weights.empty();
    double kept = 0.0;
    std::vector<double> terms(n);
    for (std::size_t i = 0; i < n; ++i) {
        double w = uniform ? 1.0 / static_cast<double>(n) : cloud.weights[i];
        if (w < kWeightPrune) w = 0.0;
        kept += w;
        terms[i] = w * std::pow((cloud.points[i] - theta0).norm(), p);
    }
    if (kept <= 0.0) throw invalid_input("all weights pruned");
    return std::pow(pairwise_sum(terms) / kept, 1.0 / p);
}

double moment_p(const EmpiricalMeasure& m, double p) { return m.moment(p); }

double moment_p(const QuantileMeasure& m, double p, std::size_t grid) {
    if (!(p > 0.0)) throw invalid_parameter("moment order must be positive");
    if (m.has_closed_moment()) return m.closed_moment(p);
    std::vector<double> terms(grid);
    const double g = static_cast<double>(grid);
    for (std::size_t j = 0; j < grid; ++j) {
        const double u = (static_cast<double>(j) + 0.5) / g;
        terms[j] = std::pow(std::abs(m.quantile(u)), p);
    }
    return pairwise_sum(terms) / g;
}

} // namespace pcrlab
