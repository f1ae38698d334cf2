#pragma once

#include <Eigen/Core>

#include <functional>
#include <limits>

#include "pcrlab/spectral.hpp"

namespace pcrlab {

inline constexpr int kMinDensityNodes = 128;
inline constexpr int kDefaultDensityNodes = 2048;

// Log-density sampled on a uniform grid over [lo, hi].
struct GridDensity1D {
    double lo = 0.0;
    double hi = 1.0;
    Eigen::VectorXd log_density;

    static GridDensity1D from_function(const std::function<double(double)>& log_density_fn,
                                       double lo, double hi,
                                       int n_nodes = kDefaultDensityNodes);

    int size() const { return static_cast<int>(log_density.size()); }
    double step() const { return (hi - lo) / (size() - 1); }
    double node(int i) const { return lo + step() * i; }
    void validate() const;
};

// Second-order discretization of the weighted Neumann problem -(rho u')' = mu rho u
// on the density grid. The stiffness matrix is symmetric tridiagonal and the lumped
// mass matrix is diagonal, so the generalized problem reduces to a symmetric
// tridiagonal one after a diagonal similarity transform.
struct NeumannSystem {
    Eigen::VectorXd stiff_diag;
    Eigen::VectorXd stiff_off;
    Eigen::VectorXd mass_diag;
};

NeumannSystem assemble_neumann_system(const GridDensity1D& density);

// Best constant of the order-2 weighted Poincare inequality for the grid density:
// 1/sqrt(mu_1) with mu_1 the smallest nonzero Neumann eigenvalue. The zero
// eigenvalue carried by constant functions is skipped.
double poincare_grid_1d(const GridDensity1D& density);

// Constants entering the finite-dimensional closed-form bound for Gibbs densities
// proportional to exp(-n G - U). alpha and h are curvature lower bounds of G and U
// on the ball of radius R, c and ell are radial-growth constants outside it, and
// the *_r fields are sup-norm constants on that ball. d_r stands for (d-1)/R but
// is supplied directly. Variant 2 replaces the radial-growth inputs by c1, c2,
// g_r_star, w_r and omega_r.
struct FrancesiParams {
    double alpha = 1.0;
    double h = 0.0;
    double c = 1.0;
    double ell = 0.0;
    double R = 1.0;
    int d = 1;
    double g_r = 0.0;
    double u_r = 0.0;
    double c_r = 1.0;
    double d_r = 0.0;
    double c1 = 1.0;
    double c2 = 1.0;
    double g_r_star = 0.0;
    double w_r = 0.0;
    double omega_r = 0.0;

    void validate() const;
};

// Smallest n for which the requested variant of the bound is valid.
double francesi_threshold(const FrancesiParams& params, int variant);

// Closed-form upper bound on the squared Poincare constant in finite dimension.
// Decays like 1/n. Throws below_threshold (carrying the threshold) when n is not
// past the variant's validity threshold.
double francesi_bound(double n, const FrancesiParams& params, int variant);

// Constants for the infinite-dimensional bound on the squared Poincare constant of
// a Gibbs perturbation exp(-n G) of a trace-class Gaussian measure. trace_q left
// as NaN is computed from the spectral decay. c_r defaults to 1; absolute values
// are then indicative while n-scaling is exact.
struct InfiniteBoundConsts {
    double c = 1.0;
    double R = 1.0;
    double trace_q = std::numeric_limits<double>::quiet_NaN();
    double c_r = 1.0;
    double g_r = 0.0;
    double c1 = 1.0;
    double c2 = 1.0;
    double g_r_star = 0.0;
    double omega_r = 0.0;

    void validate(int variant) const;
};

// Upper bound on the squared Poincare constant in infinite dimension. Scales like
// the largest ratio lambda_k / (n lambda_k eta_k + 1) over the modes.
double infinite_bound(double n, const SpectralDecay& spec, const InfiniteBoundConsts& consts,
                      int variant = 1);

// Lipschitz-constant estimate n * poincare_sq * sqrt(grad_g_moment) for the map
// from conditioning statistic to posterior. With an identity link the gradient
// moment is 1.
double l0n_estimate(double n, double poincare_sq, double grad_g_moment);

}  // namespace pcrlab
