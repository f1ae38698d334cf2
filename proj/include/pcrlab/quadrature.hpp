#pragma once

#include <functional>
#include <vector>

namespace pcrlab {

// Fixed Gauss-Legendre rule on [a, b] (nodes/weights from GSL tables).
// Spectral accuracy for analytic integrands; the workhorse for log-partition
// and basis integrals on [0, 1].
class GaussLegendre {
public:
    GaussLegendre(std::size_t n, double a, double b);

    const std::vector<double>& nodes() const { return nodes_; }
    const std::vector<double>& weights() const { return weights_; }
    std::size_t size() const { return nodes_.size(); }

    double integrate(const std::function<double(double)>& f) const;

private:
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

// Adaptive quadrature (GSL QAG, 61-point Gauss-Kronrod) with an absolute
// tolerance.  Throws numeric_failure if the requested tolerance cannot be met.
double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, double abs_tol, double rel_tol = 1e-10);

// Inverse standard normal CDF (GSL).
double gaussian_quantile(double u);

// Prefix integrals of uniform-grid samples: out[i] ~ integral_{x_0}^{x_i} f,
// out[0] = 0, spacing dx.  Cubic (fourth-order) end-corrected rule, so
// cumulative errors stay O(dx^4); needs at least 4 nodes.
std::vector<double> cumulative_integral(const std::vector<double>& f, double dx);

// Composite Simpson on uniform-grid samples, closing an odd interval count
// with the 3/8 rule; needs at least 4 nodes.
double simpson_uniform(const std::vector<double>& f, double dx);

} // namespace pcrlab
