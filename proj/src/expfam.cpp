#include "pcrlab/expfam.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "pcrlab/errors.hpp"
#include "pcrlab/models.hpp"
#include "pcrlab/quadrature.hpp"

namespace pcrlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int expected_obs_cols(const ExpFamilySpec& family) {
    return family.domain == SampleDomain::Pair2D ? 2 : 1;
}

// Recursive midpoint-split pairwise sum of beta rows.  Splitting all the way
// to single rows makes the reduction tree for a concatenation of two
// equal-size dyadic blocks coincide with the trees of the blocks themselves.
Eigen::VectorXd pairwise_row_sum(const Eigen::MatrixXd& rows, Eigen::Index lo,
                                 Eigen::Index hi) {
    if (hi - lo == 1) return rows.row(lo).transpose();
    const Eigen::Index mid = lo + (hi - lo) / 2;
    return pairwise_row_sum(rows, lo, mid) + pairwise_row_sum(rows, mid, hi);
}

double family_log_density(const ExpFamilySpec& family,
                          const Eigen::VectorXd& natural, double log_part,
                          const Eigen::VectorXd& x) {
    double base = 0.0;
    if (family.log_base) base = family.log_base(x);
    return base + natural.dot(family.beta(x)) - log_part;
}

} // namespace

bool ExpFamilySpec::is_admissible(const Eigen::VectorXd& theta) const {
    if (theta.size() != param_dim) return false;
    if (admissible) return admissible(theta);
    return theta.lpNorm<Eigen::Infinity>() < admissible_radius;
}

void ExpFamilySpec::validate() const {
    if (param_dim < 1 || stat_dim < 1) {
        throw invalid_spec("family dimensions must be positive");
    }
    if (!g || !log_partition || !beta) {
        throw invalid_spec("family needs g, log_partition and beta");
    }
    if (!(admissible_radius > 0.0)) {
        throw invalid_spec("admissible radius must be positive");
    }
    switch (domain) {
    case SampleDomain::Continuous1D:
        if (!(support_lo < support_hi) || !std::isfinite(support_lo) ||
            !std::isfinite(support_hi)) {
            throw invalid_spec("continuous support must be a finite interval");
        }
        break;
    case SampleDomain::Discrete:
        if (categories < 2) {
            throw invalid_spec("discrete support needs at least 2 categories");
        }
        break;
    case SampleDomain::Pair2D:
        break;
    }
}

void PosteriorKernelSpec::validate() const {
    if (family == nullptr) throw invalid_spec("kernel needs a family");
    family->validate();
    if (!log_prior_density) throw invalid_spec("kernel needs a prior density");
    if (!(n >= 0.0) || !std::isfinite(n)) {
        throw invalid_parameter("kernel sample size must be finite and >= 0");
    }
    if (b.size() != family->stat_dim) {
        throw invalid_input("statistic dimension mismatch in kernel");
    }
}

SuffStat suff_stat_mean(const ExpFamilySpec& family, const Eigen::MatrixXd& data) {
    family.validate();
    if (data.rows() == 0) throw invalid_input("empty data set");
    if (data.cols() != expected_obs_cols(family)) {
        throw invalid_input("observation width does not match the sample domain");
    }

    Eigen::MatrixXd stats(data.rows(), family.stat_dim);
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        const Eigen::VectorXd b = family.beta(data.row(i).transpose());
        if (b.size() != family.stat_dim) {
            throw invalid_input("beta returned the wrong dimension");
        }
        stats.row(i) = b.transpose();
    }

    SuffStat s;
    s.n = static_cast<double>(data.rows());
    s.value = pairwise_row_sum(stats, 0, stats.rows()) / s.n;
    return s;
}

Eigen::VectorXd s_zero(const ExpFamilySpec& family, const Eigen::VectorXd& theta) {
    family.validate();
    if (theta.size() != family.param_dim) {
        throw invalid_input("parameter dimension mismatch");
    }
    if (family.mean_stat) {
        Eigen::VectorXd m = family.mean_stat(theta);
        if (m.size() != family.stat_dim) {
            throw invalid_input("mean_stat returned the wrong dimension");
        }
        return m;
    }
    if (family.kernel_only) {
        throw unsupported_spec(
            "statistic mean of a kernel-only family needs a closed form");
    }

    const Eigen::VectorXd natural = family.g(theta);
    const double log_part = family.log_partition(theta);
    if (!natural.allFinite() || !std::isfinite(log_part)) {
        throw numeric_failure("family evaluation is not finite at this theta");
    }

    Eigen::VectorXd out(family.stat_dim);
    if (family.domain == SampleDomain::Discrete) {
        out.setZero();
        Eigen::VectorXd x(1);
        for (int c = 0; c < family.categories; ++c) {
            x[0] = static_cast<double>(c);
            const double w =
                std::exp(family_log_density(family, natural, log_part, x));
            out += w * family.beta(x);
        }
        return out;
    }
    if (family.domain == SampleDomain::Pair2D) {
        throw unsupported_spec(
            "statistic mean over pair observations needs a closed form");
    }

    for (int j = 0; j < family.stat_dim; ++j) {
        auto integrand = [&](double t) {
            Eigen::VectorXd xt(1);
            xt[0] = t;
            const double w =
                std::exp(family_log_density(family, natural, log_part, xt));
            return w * family.beta(xt)[j];
        };
        out[j] = integrate_adaptive(integrand, family.support_lo,
                                    family.support_hi, 1e-8);
    }
    return out;
}

double log_posterior_unnorm(const PosteriorKernelSpec& kernel,
                            const Eigen::VectorXd& theta) {
    kernel.validate();
    if (theta.size() != kernel.family->param_dim) {
        throw invalid_input("parameter dimension mismatch");
    }
    if (!kernel.family->is_admissible(theta)) return -kInf;

    const double prior = kernel.log_prior_density(theta);
    if (std::isnan(prior)) {
        throw numeric_failure("prior density evaluated to NaN");
    }
    if (kernel.n == 0.0) return prior;

    const Eigen::VectorXd natural = kernel.family->g(theta);
    const double log_part = kernel.family->log_partition(theta);
    if (!natural.allFinite() || !std::isfinite(log_part)) {
        throw numeric_failure(
            "family evaluation is not finite inside the admissible region");
    }
    return kernel.n * (natural.dot(kernel.b) - log_part) + prior;
}

double kl_divergence(const StatModel& model, const Eigen::VectorXd& theta_a,
                     const Eigen::VectorXd& theta_b) {
    const ExpFamilySpec& family = model.family();
    if (theta_a.size() != family.param_dim || theta_b.size() != family.param_dim) {
        throw invalid_input("parameter dimension mismatch");
    }

    double kl;
    if (auto closed = model.analytic_kl(theta_a, theta_b)) {
        kl = *closed;
    } else if (family.domain == SampleDomain::Discrete) {
        kl = 0.0;
        Eigen::VectorXd x(1);
        for (int c = 0; c < family.categories; ++c) {
            x[0] = static_cast<double>(c);
            const double la = model.log_density(x, theta_a);
            const double lb = model.log_density(x, theta_b);
            const double pa = std::exp(la);
            if (pa > 0.0) kl += pa * (la - lb);
        }
    } else if (family.domain == SampleDomain::Continuous1D) {
        auto integrand = [&](double t) {
            Eigen::VectorXd x(1);
            x[0] = t;
            const double la = model.log_density(x, theta_a);
            const double lb = model.log_density(x, theta_b);
            const double pa = std::exp(la);
            return pa > 0.0 ? pa * (la - lb) : 0.0;
        };
        kl = integrate_adaptive(integrand, family.support_lo, family.support_hi,
                                1e-9);
    } else {
        throw unsupported_spec(
            "KL over pair observations needs a model closed form");
    }

    if (std::isnan(kl)) throw numeric_failure("KL evaluated to NaN");
    if (kl < -1e-9) {
        throw numeric_failure("KL evaluated to " + std::to_string(kl) +
                              ", well below zero");
    }
    return kl < 0.0 ? 0.0 : kl;
}

double kl_representation_residual(const StatModel& model, double n,
                                  const Eigen::VectorXd& b,
                                  const Eigen::VectorXd& theta_b,
                                  const std::vector<Eigen::VectorXd>& thetas) {
    if (thetas.empty()) throw invalid_input("no evaluation points");
    const ExpFamilySpec& family = model.family();
    if (b.size() != family.stat_dim) {
        throw invalid_input("statistic dimension mismatch");
    }
    if (!(n > 0.0)) throw invalid_parameter("needs n > 0");

    double lo = kInf;
    double hi = -kInf;
    for (const Eigen::VectorXd& theta : thetas) {
        const double kernel_form =
            n * (family.g(theta).dot(b) - family.log_partition(theta));
        const double kl_form = -n * kl_divergence(model, theta_b, theta);
        const double diff = kernel_form - kl_form;
        if (!std::isfinite(diff)) {
            throw numeric_failure("representation difference is not finite");
        }
        lo = std::min(lo, diff);
        hi = std::max(hi, diff);
    }
    return hi - lo;
}

} // namespace pcrlab
