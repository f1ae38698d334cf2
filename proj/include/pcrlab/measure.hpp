#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <vector>

namespace pcrlab {

// Finitely supported probability measure on the real line.  Samples are kept
// sorted; weights (uniform when absent) are pruned below 1e-15 and
// renormalized, and must sum to 1 within 1e-12 on input.
class EmpiricalMeasure {
public:
    explicit EmpiricalMeasure(std::vector<double> samples);
    EmpiricalMeasure(std::vector<double> samples, std::vector<double> weights);

    const std::vector<double>& samples() const { return samples_; }
    const std::vector<double>& weights() const { return weights_; }
    bool uniform_weights() const { return uniform_; }
    std::size_t size() const { return samples_.size(); }

    // Left-continuous generalized inverse of the CDF: inf{x : F(x) >= u}.
    double quantile(double u) const;

    double moment(double p) const;

private:
    void normalize();

    std::vector<double> samples_;
    std::vector<double> weights_;
    std::vector<double> cumulative_;
    bool uniform_ = true;
};

// Distribution given by its quantile function, optionally with closed-form
// absolute moments.
class QuantileMeasure {
public:
    explicit QuantileMeasure(std::function<double(double)> quantile);
    QuantileMeasure(std::function<double(double)> quantile,
                    std::function<double(double)> moment_p);

    static QuantileMeasure uniform(double a, double b);
    static QuantileMeasure gaussian(double mean, double sd);
    static QuantileMeasure dirac(double x);

    double quantile(double u) const { return quantile_(u); }
    bool has_closed_moment() const { return static_cast<bool>(moment_); }
    double closed_moment(double p) const { return moment_(p); }

private:
    std::function<double(double)> quantile_;
    std::function<double(double)> moment_;
};

// Discrete measure on coefficient vectors (posterior samples in a fixed
// orthonormal basis).  Weights are pruned below 1e-15 and renormalized.
struct WeightedPointCloud {
    std::vector<Eigen::VectorXd> points;
    std::vector<double> weights; // empty means uniform

    void validate() const;
};

inline constexpr std::size_t kDefaultQuantileGrid = 4096;

// 1D p-Wasserstein distance via the quantile coupling
// ( integral_0^1 |Fa^{-1}(u) - Fb^{-1}(u)|^p du )^{1/p}.
// Equal-weight empirical pairs of the same size use the exact sorted-pairing
// formula; every other case uses midpoint quadrature on `grid` interior points.
double wasserstein_1d(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                      double p, std::size_t grid = kDefaultQuantileGrid);
double wasserstein_1d(const EmpiricalMeasure& a, const QuantileMeasure& b,
                      double p, std::size_t grid = kDefaultQuantileGrid);
double wasserstein_1d(const QuantileMeasure& a, const QuantileMeasure& b,
                      double p, std::size_t grid = kDefaultQuantileGrid);

// W_p against a Dirac mass: ( sum_i w_i ||theta_i - theta0||^p )^{1/p} with
// the Euclidean norm of basis coefficients.
double wasserstein_to_dirac(const WeightedPointCloud& cloud,
                            const Eigen::VectorXd& theta0, double p);

// integral |x|^p dm.
double moment_p(const EmpiricalMeasure& m, double p);
double moment_p(const QuantileMeasure& m, double p,
                std::size_t grid = kDefaultQuantileGrid);

} // namespace pcrlab
