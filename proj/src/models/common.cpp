#include <Eigen/Eigenvalues>
#include <cmath>

#include "pcrlab/errors.hpp"
#include "pcrlab/models.hpp"

namespace pcrlab {

ConjugatePosterior ConjugatePosterior::gaussian(Eigen::VectorXd mean,
                                                Eigen::MatrixXd cov) {
    if (mean.size() == 0 || cov.rows() != mean.size() ||
        cov.cols() != mean.size()) {
        throw invalid_input("posterior mean/covariance sizes must match");
    }
    if (!mean.allFinite() || !cov.allFinite()) {
        throw numeric_failure("posterior moments are not finite");
    }

    ConjugatePosterior p;
    p.kind_ = Kind::Gaussian;
    p.mean_ = std::move(mean);
    p.cov_ = 0.5 * (cov + cov.transpose());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p.cov_);
    if (es.info() != Eigen::Success) {
        throw numeric_failure("posterior covariance eigendecomposition failed");
    }
    const double scale = es.eigenvalues().cwiseAbs().maxCoeff();
    if (es.eigenvalues().minCoeff() < -1e-10 * std::max(scale, 1.0)) {
        throw numeric_failure("posterior covariance is not positive semidefinite");
    }
    p.transform_ = es.eigenvectors() *
                   es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    return p;
}

ConjugatePosterior ConjugatePosterior::dirichlet(Eigen::VectorXd alpha) {
    if (alpha.size() < 2 || !(alpha.array() > 0.0).all()) {
        throw invalid_input("Dirichlet posterior needs >= 2 positive shapes");
    }

    ConjugatePosterior p;
    p.kind_ = Kind::Dirichlet;
    p.alpha_ = std::move(alpha);

    const int nfree = static_cast<int>(p.alpha_.size()) - 1;
    const double a0 = p.alpha_.sum();
    p.mean_ = p.alpha_.head(nfree) / a0;
    p.cov_.resize(nfree, nfree);
    for (int i = 0; i < nfree; ++i) {
        for (int j = 0; j < nfree; ++j) {
            const double mi = p.alpha_[i] / a0;
            const double mj = p.alpha_[j] / a0;
            p.cov_(i, j) = (i == j ? mi * (1.0 - mi) : -mi * mj) / (a0 + 1.0);
        }
    }
    return p;
}

Eigen::VectorXd ConjugatePosterior::sample(RngStream& rng) const {
    if (kind_ == Kind::Dirichlet) {
        return dirichlet_sampled_free(rng);
    }
    Eigen::VectorXd z(mean_.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
    return mean_ + transform_ * z;
}

Eigen::VectorXd ConjugatePosterior::dirichlet_sampled_free(RngStream& rng) const {
    Eigen::VectorXd g(alpha_.size());
    for (Eigen::Index i = 0; i < alpha_.size(); ++i) g[i] = rng.gamma(alpha_[i]);
    const double total = g.sum();
    if (!(total > 0.0)) throw numeric_failure("degenerate Dirichlet draw");
    return g.head(alpha_.size() - 1) / total;
}

double ConjugatePosterior::second_moment_about(const Eigen::VectorXd& point) const {
    if (point.size() != mean_.size()) {
        throw invalid_input("point dimension mismatch");
    }
    return cov_.trace() + (mean_ - point).squaredNorm();
}

double ConjugatePosterior::fourth_moment_about(const Eigen::VectorXd& point) const {
    if (kind_ != Kind::Gaussian) {
        throw unsupported_spec(
            "exact fourth moment is available for Gaussian posteriors only");
    }
    if (point.size() != mean_.size()) {
        throw invalid_input("point dimension mismatch");
    }
    // || theta - point ||^2 is a quadratic form in a Gaussian vector:
    // E X^2 = (E X)^2 + Var X with
    //   E X = tr(cov) + || d ||^2,   Var X = 2 tr(cov^2) + 4 d' cov d.
    const Eigen::VectorXd d = mean_ - point;
    const double ex = cov_.trace() + d.squaredNorm();
    const double vx =
        2.0 * (cov_ * cov_).trace() + 4.0 * d.dot(cov_ * d);
    return ex * ex + vx;
}

void StatModel::param_box(Eigen::VectorXd& lo, Eigen::VectorXd& hi) const {
    const Eigen::VectorXd m = prior_mean();
    const Eigen::VectorXd sd = prior_covariance().diagonal().cwiseSqrt();
    lo = m - 10.0 * sd;
    hi = m + 10.0 * sd;
}

std::optional<ConjugatePosterior>
StatModel::posterior_from_data(const Eigen::MatrixXd&) const {
    return std::nullopt;
}

PosteriorKernelSpec StatModel::kernel(double n, Eigen::VectorXd b) const {
    PosteriorKernelSpec spec;
    spec.family = &family();
    spec.log_prior_density = [this](const Eigen::VectorXd& theta) {
        return log_prior_density(theta);
    };
    spec.n = n;
    spec.b = std::move(b);
    spec.validate();
    return spec;
}

SuffStat StatModel::suff_stat(const Eigen::MatrixXd& data) const {
    return suff_stat_mean(family(), data);
}

Eigen::VectorXd StatModel::stat_mean_at(const Eigen::VectorXd& theta) const {
    return s_zero(family(), theta);
}

Eigen::MatrixXd StatModel::sample_data(RngStream& rng, int n,
                                       const Eigen::VectorXd& theta) const {
    if (n <= 0) throw invalid_parameter("sample size must be positive");
    Eigen::MatrixXd data(n, obs_cols());
    for (int i = 0; i < n; ++i) {
        data.row(i) = sample_point(rng, theta).transpose();
    }
    return data;
}

} // namespace pcrlab
