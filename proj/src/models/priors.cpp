#include "pcrlab/priors.hpp"

#include <cmath>
#include <limits>

#include "pcrlab/errors.hpp"

namespace pcrlab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093454836;
} // namespace

void GaussianSequencePrior::validate() const {
    if (mean.size() == 0 || mean.size() != var.size()) {
        throw invalid_spec("prior mean and variance sizes must match");
    }
    if (!(var.array() > 0.0).all() || !var.allFinite() || !mean.allFinite()) {
        throw invalid_spec("prior variances must be positive and finite");
    }
}

double GaussianSequencePrior::log_density(const Eigen::VectorXd& theta) const {
    if (theta.size() != mean.size()) {
        throw invalid_input("parameter dimension mismatch");
    }
    double s = 0.0;
    for (Eigen::Index k = 0; k < mean.size(); ++k) {
        const double d = theta[k] - mean[k];
        s += -0.5 * d * d / var[k] - 0.5 * (kLog2Pi + std::log(var[k]));
    }
    return s;
}

Eigen::VectorXd GaussianSequencePrior::sample(RngStream& rng) const {
    Eigen::VectorXd out(mean.size());
    for (Eigen::Index k = 0; k < mean.size(); ++k) {
        out[k] = mean[k] + std::sqrt(var[k]) * rng.normal();
    }
    return out;
}

Eigen::MatrixXd GaussianSequencePrior::covariance() const {
    return var.asDiagonal();
}

void DirichletShapePrior::validate() const {
    if (categories < 2) throw invalid_spec("needs at least 2 categories");
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
        throw invalid_spec("Dirichlet shape must be positive");
    }
}

double DirichletShapePrior::log_density_free(
    const Eigen::VectorXd& theta_free) const {
    if (theta_free.size() != categories - 1) {
        throw invalid_input("parameter dimension mismatch");
    }
    const double last = 1.0 - theta_free.sum();
    if (!(theta_free.array() > 0.0).all() || !(last > 0.0)) return -kInf;

    const double n = static_cast<double>(categories);
    double s = std::lgamma(n * alpha) - n * std::lgamma(alpha);
    s += (alpha - 1.0) *
         (theta_free.array().log().sum() + std::log(last));
    return s;
}

Eigen::VectorXd DirichletShapePrior::sample_free(RngStream& rng) const {
    const Eigen::VectorXd full =
        dirichlet_draw(rng, Eigen::VectorXd::Constant(categories, alpha));
    return full.head(categories - 1);
}

Eigen::VectorXd DirichletShapePrior::mean_free() const {
    return Eigen::VectorXd::Constant(categories - 1,
                                     1.0 / static_cast<double>(categories));
}

Eigen::MatrixXd DirichletShapePrior::covariance_free() const {
    const double n = static_cast<double>(categories);
    const double a0 = n * alpha;
    const double mi = 1.0 / n;
    Eigen::MatrixXd cov(categories - 1, categories - 1);
    for (int i = 0; i < categories - 1; ++i) {
        for (int j = 0; j < categories - 1; ++j) {
            cov(i, j) = (i == j ? mi * (1.0 - mi) : -mi * mi) / (a0 + 1.0);
        }
    }
    return cov;
}

Eigen::VectorXd dirichlet_draw(RngStream& rng, const Eigen::VectorXd& alpha) {
    if (alpha.size() < 2 || !(alpha.array() > 0.0).all()) {
        throw invalid_parameter("Dirichlet needs >= 2 positive shapes");
    }
    Eigen::VectorXd g(alpha.size());
    for (Eigen::Index i = 0; i < alpha.size(); ++i) g[i] = rng.gamma(alpha[i]);
    const double total = g.sum();
    if (!(total > 0.0)) throw numeric_failure("degenerate Dirichlet draw");
    return g / total;
}

} // namespace pcrlab
