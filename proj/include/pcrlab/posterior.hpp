#pragma once

#include <Eigen/Core>
#include <limits>
#include <string>

#include "pcrlab/models.hpp"
#include "pcrlab/rng.hpp"

namespace pcrlab {

enum class PosteriorMethod { Exact, Grid, Importance, Mcmc };

PosteriorMethod posterior_method_from_string(const std::string& name);
std::string to_string(PosteriorMethod method);

struct SamplerConfig {
    PosteriorMethod method = PosteriorMethod::Grid;

    // Grid: coarse scan of the whole parameter box locates the mode and its
    // curvature; the refined pass re-grids mode +- 10 posterior sd.
    int grid_nodes = 192;
    int coarse_nodes = 96;

    // Importance (prior proposal) and random-walk chains.
    int draws = 20000;
    int chains = 4;
    double burn_fraction = 0.5;
    double target_accept = 0.234;

    // Wasserstein order p and the extra moment exponent a (moments of order
    // a*p about the origin feed the heavy-tail term).
    double p = 2.0;
    double moment_a = 2.0;

    void validate() const;
};

struct PosteriorEstimate {
    PosteriorMethod method = PosteriorMethod::Grid;
    double moment_p = 0.0;  // integral || theta - theta0 ||^p
    double eps = 0.0;       // moment_p^(1/p)
    double moment_ap = 0.0; // integral || theta ||^(a p)
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    // ess carries the effective sample size for the sampling methods and the
    // node count for the grid.
    double ess = std::numeric_limits<double>::quiet_NaN();
    double rhat = std::numeric_limits<double>::quiet_NaN();
    double accept_rate = std::numeric_limits<double>::quiet_NaN();
    bool flagged = false;
    std::string flag_reason;
};

// Posterior of the model given statistic mean b from n observations,
// summarized about model.theta0().  Exact uses the conjugate closed form
// (moments without sampling error where available), Grid a two-pass adaptive
// product grid (dimension <= 2), Importance self-normalized weights on prior
// draws, Mcmc adaptive random-walk chains with split-chain diagnostics.
// Deterministic given the stream; no parallelism inside.
PosteriorEstimate estimate_posterior(const StatModel& model, double n,
                                     const Eigen::VectorXd& b,
                                     const SamplerConfig& config,
                                     RngStream rng);

// Summary of an already-computed closed-form posterior (shared by Exact and
// the realized-design path of regression models).
PosteriorEstimate summarize_conjugate(const ConjugatePosterior& post,
                                      const Eigen::VectorXd& theta0,
                                      const SamplerConfig& config,
                                      RngStream rng);

} // namespace pcrlab
