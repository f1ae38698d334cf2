#pragma once

#include <Eigen/Core>

#include "pcrlab/rng.hpp"

namespace pcrlab {

// Independent Gaussian coordinates: theta_k ~ N(mean_k, var_k).
struct GaussianSequencePrior {
    Eigen::VectorXd mean;
    Eigen::VectorXd var;

    void validate() const;
    int dim() const { return static_cast<int>(mean.size()); }
    double log_density(const Eigen::VectorXd& theta) const;
    Eigen::VectorXd sample(RngStream& rng) const;
    Eigen::MatrixXd covariance() const;
};

// Symmetric Dirichlet(alpha, ..., alpha) over `categories` cells, expressed
// in the free coordinates theta_1..theta_{N-1} (theta_N = 1 - sum).
struct DirichletShapePrior {
    int categories = 2;
    double alpha = 1.0;

    void validate() const;
    int dim() const { return categories - 1; }
    // Density with respect to Lebesgue measure on the open free simplex;
    // -infinity outside it.
    double log_density_free(const Eigen::VectorXd& theta_free) const;
    Eigen::VectorXd sample_free(RngStream& rng) const;
    Eigen::VectorXd mean_free() const;
    Eigen::MatrixXd covariance_free() const;
};

// One draw from Dirichlet(alpha) via normalized Gamma variates (full vector).
Eigen::VectorXd dirichlet_draw(RngStream& rng, const Eigen::VectorXd& alpha);

} // namespace pcrlab
