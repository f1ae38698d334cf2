#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

namespace pcrlab {

class StatModel;

// Where one observation lives: a scalar in [support_lo, support_hi], a
// category index in {0, ..., categories-1}, or a regressor/response pair.
enum class SampleDomain { Continuous1D, Discrete, Pair2D };

// Exponential-family description in statistic coordinates.  The posterior
// kernel given n observations with statistic mean b is
//   exp{ n (<g(theta), b> - log_partition(theta)) } * prior(theta).
// g maps parameters (dimension param_dim) to natural coordinates (dimension
// stat_dim); beta maps one observation to its sufficient-statistic vector.
// kernel_only marks families where g and log_partition define that kernel but
// the sampling density of an observation is not exp{<g, beta> - M} itself
// (conditional models); normalization checks then go through the model
// density instead.
struct ExpFamilySpec {
    int param_dim = 1;
    int stat_dim = 1;
    SampleDomain domain = SampleDomain::Continuous1D;
    bool kernel_only = false;

    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> g;
    std::function<double(const Eigen::VectorXd&)> log_partition;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> beta;

    // Log density of the base measure on observations (0 when absent, i.e.
    // Lebesgue or counting base).  The observation density of a linear family
    // is exp{ log_base(x) + <g(theta), beta(x)> - M(theta) }.
    std::function<double(const Eigen::VectorXd&)> log_base;

    // Optional closed form of E_theta[beta]; s_zero integrates beta against
    // the family density when absent (linear families only).
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> mean_stat;

    // Open admissible parameter region; the default is the centered box of
    // half-width admissible_radius in every coordinate.
    std::function<bool(const Eigen::VectorXd&)> admissible;
    double admissible_radius = 50.0;

    // Observation support for quadrature and sums.
    double support_lo = 0.0;
    double support_hi = 1.0;
    int categories = 0;

    bool is_admissible(const Eigen::VectorXd& theta) const;
    void validate() const;
};

// Sufficient-statistic mean of a data set: value = (1/n) sum_i beta(x_i).
struct SuffStat {
    Eigen::VectorXd value;
    double n = 0.0;
};

// Everything needed to evaluate one unnormalized log posterior.
struct PosteriorKernelSpec {
    const ExpFamilySpec* family = nullptr;
    std::function<double(const Eigen::VectorXd&)> log_prior_density;
    double n = 0.0;
    Eigen::VectorXd b;

    void validate() const;
};

// Rows of `data` are observations (1 column for scalar/discrete domains,
// 2 for pairs).  The statistic vectors are combined with a recursive pairwise
// tree split at the midpoint, so concatenating two blocks of equal dyadic
// size reproduces the weighted average of their statistics bit for bit.
SuffStat suff_stat_mean(const ExpFamilySpec& family, const Eigen::MatrixXd& data);

// E_theta[beta]: the closed form when provided, otherwise adaptive quadrature
// (or the finite sum) of beta against exp{<g(theta), beta(x)> - M(theta)}.
Eigen::VectorXd s_zero(const ExpFamilySpec& family, const Eigen::VectorXd& theta);

// n (<g(theta), b> - M(theta)) + log prior(theta).  Returns -infinity outside
// the admissible region; throws numeric_failure if the family evaluates to a
// non-finite value inside it.  n = 0 reduces to the prior alone.
double log_posterior_unnorm(const PosteriorKernelSpec& kernel,
                            const Eigen::VectorXd& theta);

// KL(f_a || f_b) between sampling densities of one observation: the model's
// closed form when available, otherwise quadrature (or the finite sum) on the
// true densities.  Small negative quadrature results are clamped at zero;
// anything below -1e-9 is reported as a numeric failure.
double kl_divergence(const StatModel& model, const Eigen::VectorXd& theta_a,
                     const Eigen::VectorXd& theta_b);

// Consistency of the two posterior representations.  When b = E_{theta_b}[beta],
//   n (<g(theta), b> - M(theta))   and   -n KL(f_{theta_b} || f_theta)
// must agree up to a theta-independent constant.  Returns the spread
// (max - min) of their difference over the supplied parameter points.
double kl_representation_residual(const StatModel& model, double n,
                                  const Eigen::VectorXd& b,
                                  const Eigen::VectorXd& theta_b,
                                  const std::vector<Eigen::VectorXd>& thetas);

} // namespace pcrlab
