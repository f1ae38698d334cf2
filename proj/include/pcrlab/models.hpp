#pragma once

#include <Eigen/Core>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "pcrlab/expfam.hpp"
#include "pcrlab/measure.hpp"
#include "pcrlab/rng.hpp"
#include "pcrlab/spectral.hpp"

namespace pcrlab {

// Closed-form posterior in free parameter coordinates: either a Gaussian
// (mean, covariance) or a Dirichlet over categories reported through its
// first N-1 coordinates.  The second moment about a point is exact; sampling
// uses a precomputed symmetric square root, so a posterior object is
// immutable and safe to share across threads.
class ConjugatePosterior {
public:
    enum class Kind { Gaussian, Dirichlet };

    static ConjugatePosterior gaussian(Eigen::VectorXd mean, Eigen::MatrixXd cov);
    static ConjugatePosterior dirichlet(Eigen::VectorXd alpha);

    Kind kind() const { return kind_; }
    const Eigen::VectorXd& mean() const { return mean_; }
    const Eigen::MatrixXd& covariance() const { return cov_; }
    const Eigen::VectorXd& alpha() const { return alpha_; }
    int dim() const { return static_cast<int>(mean_.size()); }

    Eigen::VectorXd sample(RngStream& rng) const;

    // E || theta - point ||^2 = tr(cov) + || mean - point ||^2.
    double second_moment_about(const Eigen::VectorXd& point) const;

    // E || theta - point ||^4 for the Gaussian kind (exact); Dirichlet
    // callers estimate it from draws.
    double fourth_moment_about(const Eigen::VectorXd& point) const;

private:
    Eigen::VectorXd dirichlet_sampled_free(RngStream& rng) const;

    Kind kind_ = Kind::Gaussian;
    Eigen::VectorXd mean_;
    Eigen::MatrixXd cov_;
    Eigen::VectorXd alpha_;     // Dirichlet only
    Eigen::MatrixXd transform_; // Gaussian sampling square root
};

// A Bayesian sampling model tied to an exponential-family statistic.  The
// family fixes the posterior kernel; the model adds the true observation
// density, the data generator, the prior, and whatever closed forms exist.
class StatModel {
public:
    virtual ~StatModel() = default;

    virtual const std::string& name() const = 0;
    virtual const ExpFamilySpec& family() const = 0;
    virtual const Eigen::VectorXd& theta0() const = 0;
    int dim() const { return family().param_dim; }
    int obs_cols() const {
        return family().domain == SampleDomain::Pair2D ? 2 : 1;
    }

    // Log sampling density of one observation (normalized).
    virtual double log_density(const Eigen::VectorXd& x,
                               const Eigen::VectorXd& theta) const = 0;
    virtual Eigen::VectorXd sample_point(RngStream& rng,
                                         const Eigen::VectorXd& theta) const = 0;

    virtual double log_prior_density(const Eigen::VectorXd& theta) const = 0;
    virtual Eigen::VectorXd prior_mean() const = 0;
    virtual Eigen::MatrixXd prior_covariance() const = 0;
    virtual Eigen::VectorXd sample_prior(RngStream& rng) const = 0;

    virtual bool in_domain(const Eigen::VectorXd& theta) const {
        return family().is_admissible(theta);
    }

    // Axis-aligned search box containing essentially all posterior mass for
    // any statistic value; grid and proposal scaling start from it.
    virtual void param_box(Eigen::VectorXd& lo, Eigen::VectorXd& hi) const;

    virtual std::optional<double> analytic_kl(const Eigen::VectorXd&,
                                              const Eigen::VectorXd&) const {
        return std::nullopt;
    }

    // Closed-form posterior given the statistic mean (the kernel posterior
    // at b), when the prior is conjugate for the kernel.
    virtual std::optional<ConjugatePosterior>
    conjugate_posterior(const SuffStat&) const {
        return std::nullopt;
    }

    // Closed-form posterior given the raw data, for models whose likelihood
    // does not factor through the statistic alone (regression designs).
    virtual std::optional<ConjugatePosterior>
    posterior_from_data(const Eigen::MatrixXd& data) const;

    // Eigenvalue sequences feeding the rate predictions, when meaningful.
    virtual std::optional<SpectralDecay> spectral() const { return std::nullopt; }

    // E_prior || D g ||_F^2, the squared natural-coordinate sensitivity
    // entering the Lipschitz term; identity maps give 1.
    virtual double grad_g_moment() const { return 1.0; }

    // W_p distance between the empirical measure of the observations' first
    // coordinate and the corresponding marginal of the data distribution.
    virtual double gc_distance(const Eigen::MatrixXd& data, double p) const = 0;

    PosteriorKernelSpec kernel(double n, Eigen::VectorXd b) const;
    SuffStat suff_stat(const Eigen::MatrixXd& data) const;
    Eigen::VectorXd stat_mean_at(const Eigen::VectorXd& theta) const;
    Eigen::MatrixXd sample_data(RngStream& rng, int n,
                                const Eigen::VectorXd& theta) const;
};

// Categorical model on N cells with free parameter theta_1..theta_{N-1} in
// the open simplex, one-hot statistic, g = (log theta_1, ..., log theta_N),
// zero log partition and a symmetric Dirichlet prior.
std::unique_ptr<StatModel> make_multinomial(int categories,
                                            Eigen::VectorXd theta0_free,
                                            double prior_alpha);

// Density exp{ sum_k theta_k sin(k pi x) - M(theta) } on [0, 1] with an
// independent Gaussian prior on the coefficients.
std::unique_ptr<StatModel> make_finite_logistic(Eigen::VectorXd theta0,
                                                Eigen::VectorXd prior_mean,
                                                Eigen::VectorXd prior_var);

// Density exp{ theta(x) - M(theta) } on [0, 1] with theta expanded in the
// Neumann basis e_k(x) = sqrt(2)/(k pi) (1 - cos(k pi x)), truncated at K
// coefficients; prior theta_k ~ N(0, scale * k^{-(1+decay_a)}).
std::unique_ptr<StatModel> make_infinite_logistic(int truncation,
                                                  Eigen::VectorXd theta0,
                                                  double decay_a,
                                                  double prior_scale = 1.0);

// Regression pairs (u, v): u uniform on [lo, hi], v | u ~ N(theta(u), sigma^2)
// with theta expanded in the sine basis orthonormal for the u-marginal.
// The kernel posterior given the statistic mean is Gaussian; the realized
// posterior given the data is available through posterior_from_data.
std::unique_ptr<StatModel> make_linreg(int basis, double lo, double hi,
                                       double sigma, Eigen::VectorXd theta0,
                                       Eigen::VectorXd prior_mean,
                                       Eigen::VectorXd prior_var);

// Scalar observations N(theta, sigma^2) with a Gaussian prior on theta.
std::unique_ptr<StatModel> make_gaussian_location(double sigma, double theta0,
                                                  double prior_mean,
                                                  double prior_var);

// KL of categorical distributions given in free coordinates (the last cell
// is one minus the sum).
double multinomial_kl(const Eigen::VectorXd& a_free,
                      const Eigen::VectorXd& b_free);

// Symmetric Dirichlet(alpha) density at a free-coordinate point.
double multinomial_prior_density(const Eigen::VectorXd& theta_free,
                                 double alpha);

// log integral_0^1 exp(theta(y)) dy by adaptive quadrature.
double logistic_log_partition(const std::function<double(double)>& theta_fn);

// Neumann basis for the logistic models and its derivative.
double logistic_basis(int k, double x);
double logistic_basis_deriv(int k, double x);

// Inner product integral_0^1 u'(x) v'(x) dx.  The function form integrates
// the supplied derivatives with Gauss-Legendre; the grid form differentiates
// uniform-grid samples on [0, 1] with fourth-order stencils and applies
// Simpson weights.
double h1star_inner(const std::function<double(double)>& du,
                    const std::function<double(double)>& dv);
double h1star_inner(const Eigen::VectorXd& u, const Eigen::VectorXd& v);

// Self-adjointized information operator on uniform-grid samples over [0, 1]:
//   exp(-osc) * [ int_0^x y h(y) dy + x int_x^1 h(y) dy - (x - x^2/2) int_0^1 h ].
// Its eigenpairs are (e_k, exp(-osc) / (k pi)^2).
Eigen::VectorXd apply_istar(const Eigen::VectorXd& h, double osc = 0.0);

// Hessian of the logistic log partition at theta0, applied to h (both given
// on the uniform grid over [0, 1]):
//   2 int_0^y h (1 - F0) dz - <h, Phi0> Phi0(y),  Phi0(y) = int_0^y (1 - F0),
// with F0 the CDF of the density exp(theta0 - M).  The induced quadratic
// form <h, Hess h> equals the variance of h under that density.
Eigen::VectorXd hess_m(const Eigen::VectorXd& h,
                       const Eigen::VectorXd& theta0_vals);

// max - min of a sampled function.
double oscillation(const Eigen::VectorXd& vals);

} // namespace pcrlab
