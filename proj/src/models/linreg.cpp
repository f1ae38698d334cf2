#include <Eigen/Cholesky>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "pcrlab/errors.hpp"
#include "pcrlab/models.hpp"
#include "pcrlab/priors.hpp"

namespace pcrlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = 3.14159265358979323846;
constexpr double kLog2Pi = 1.8378770664093454836;

class LinRegModel final : public StatModel {
public:
    LinRegModel(int basis, double lo, double hi, double sigma,
                Eigen::VectorXd theta0, GaussianSequencePrior prior)
        : name_("linreg"), lo_(lo), hi_(hi), sigma_(sigma),
          theta0_(std::move(theta0)), prior_(std::move(prior)) {
        if (basis < 1) throw invalid_parameter("needs at least one basis term");
        if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
            throw invalid_parameter("regressor interval must be finite");
        }
        if (!(sigma > 0.0)) throw invalid_parameter("noise scale must be positive");
        prior_.validate();
        if (theta0_.size() != basis || prior_.dim() != basis) {
            throw invalid_parameter("theta0 and prior sizes must match the basis");
        }

        const double s2 = sigma_ * sigma_;
        family_.param_dim = basis;
        family_.stat_dim = basis;
        family_.domain = SampleDomain::Pair2D;
        family_.kernel_only = true;
        family_.g = [s2](const Eigen::VectorXd& theta) {
            return (theta / s2).eval();
        };
        family_.log_partition = [s2](const Eigen::VectorXd& theta) {
            return 0.5 * theta.squaredNorm() / s2;
        };
        family_.beta = [this](const Eigen::VectorXd& x) {
            return (x[1] * basis_at(x[0])).eval();
        };
        family_.mean_stat = [](const Eigen::VectorXd& theta) { return theta; };
        family_.validate();
    }

    const std::string& name() const override { return name_; }
    const ExpFamilySpec& family() const override { return family_; }
    const Eigen::VectorXd& theta0() const override { return theta0_; }

    double log_density(const Eigen::VectorXd& x,
                       const Eigen::VectorXd& theta) const override {
        if (x[0] < lo_ || x[0] > hi_) return -kInf;
        const double resid = x[1] - theta.dot(basis_at(x[0]));
        return -0.5 * resid * resid / (sigma_ * sigma_) -
               0.5 * kLog2Pi - std::log(sigma_) - std::log(hi_ - lo_);
    }

    Eigen::VectorXd sample_point(RngStream& rng,
                                 const Eigen::VectorXd& theta) const override {
        Eigen::VectorXd x(2);
        x[0] = rng.uniform(lo_, hi_);
        x[1] = theta.dot(basis_at(x[0])) + sigma_ * rng.normal();
        return x;
    }

    double log_prior_density(const Eigen::VectorXd& theta) const override {
        return prior_.log_density(theta);
    }
    Eigen::VectorXd prior_mean() const override { return prior_.mean; }
    Eigen::MatrixXd prior_covariance() const override {
        return prior_.covariance();
    }
    Eigen::VectorXd sample_prior(RngStream& rng) const override {
        return prior_.sample(rng);
    }

    std::optional<double> analytic_kl(const Eigen::VectorXd& a,
                                      const Eigen::VectorXd& b) const override {
        // E_u (theta_a(u) - theta_b(u))^2 / (2 sigma^2) with an orthonormal
        // basis for the regressor marginal.
        return 0.5 * (a - b).squaredNorm() / (sigma_ * sigma_);
    }

    std::optional<ConjugatePosterior>
    conjugate_posterior(const SuffStat& stat) const override {
        if (stat.value.size() != family_.stat_dim) {
            throw invalid_input("statistic dimension mismatch");
        }
        const double s2 = sigma_ * sigma_;
        Eigen::VectorXd prec =
            prior_.var.cwiseInverse().array() + stat.n / s2;
        Eigen::VectorXd cov_diag = prec.cwiseInverse();
        Eigen::VectorXd mean =
            cov_diag.cwiseProduct(prior_.mean.cwiseQuotient(prior_.var) +
                                  (stat.n / s2) * stat.value);
        return ConjugatePosterior::gaussian(mean,
                                            cov_diag.asDiagonal().toDenseMatrix());
    }

    std::optional<ConjugatePosterior>
    posterior_from_data(const Eigen::MatrixXd& data) const override {
        if (data.cols() != 2 || data.rows() == 0) {
            throw invalid_input("regression data must be (u, v) rows");
        }
        const double s2 = sigma_ * sigma_;
        const int k = family_.param_dim;
        Eigen::MatrixXd prec =
            prior_.var.cwiseInverse().asDiagonal().toDenseMatrix();
        Eigen::VectorXd rhs = prior_.mean.cwiseQuotient(prior_.var);
        for (Eigen::Index i = 0; i < data.rows(); ++i) {
            const Eigen::VectorXd psi = basis_at(data(i, 0));
            prec.noalias() += psi * psi.transpose() / s2;
            rhs.noalias() += data(i, 1) * psi / s2;
        }
        const Eigen::LLT<Eigen::MatrixXd> llt(prec);
        if (llt.info() != Eigen::Success) {
            throw numeric_failure("posterior precision is not positive definite");
        }
        const Eigen::VectorXd mean = llt.solve(rhs);
        const Eigen::MatrixXd cov =
            llt.solve(Eigen::MatrixXd::Identity(k, k));
        return ConjugatePosterior::gaussian(mean, cov);
    }

    std::optional<SpectralDecay> spectral() const override {
        SpectralDecay spec;
        spec.lambda = Sequence::array(
            std::vector<double>(prior_.var.data(),
                                prior_.var.data() + prior_.var.size()));
        spec.gamma = Sequence::array(std::vector<double>(
            static_cast<std::size_t>(family_.param_dim),
            1.0 / (sigma_ * sigma_)));
        const Eigen::VectorXd d = theta0_ - prior_.mean;
        if (d.squaredNorm() > 0.0) {
            std::vector<double> omega(d.size());
            for (Eigen::Index i = 0; i < d.size(); ++i) {
                omega[static_cast<std::size_t>(i)] = d[i] * d[i];
            }
            spec.omega_sq = Sequence::array(std::move(omega));
        }
        spec.validate();
        return spec;
    }

    double grad_g_moment() const override {
        const double s2 = sigma_ * sigma_;
        return static_cast<double>(family_.param_dim) / (s2 * s2);
    }

    double gc_distance(const Eigen::MatrixXd& data, double p) const override {
        std::vector<double> us(data.rows());
        for (Eigen::Index i = 0; i < data.rows(); ++i) us[i] = data(i, 0);
        return wasserstein_1d(EmpiricalMeasure(std::move(us)),
                              QuantileMeasure::uniform(lo_, hi_), p);
    }

private:
    Eigen::VectorXd basis_at(double u) const {
        Eigen::VectorXd psi(family_.param_dim);
        const double t = (u - lo_) / (hi_ - lo_);
        for (int k = 1; k <= family_.param_dim; ++k) {
            psi[k - 1] = std::sqrt(2.0) * std::sin(k * kPi * t);
        }
        return psi;
    }

    std::string name_;
    double lo_;
    double hi_;
    double sigma_;
    Eigen::VectorXd theta0_;
    GaussianSequencePrior prior_;
    ExpFamilySpec family_;
};

} // namespace

std::unique_ptr<StatModel> make_linreg(int basis, double lo, double hi,
                                       double sigma, Eigen::VectorXd theta0,
                                       Eigen::VectorXd prior_mean,
                                       Eigen::VectorXd prior_var) {
    GaussianSequencePrior prior;
    prior.mean = std::move(prior_mean);
    prior.var = std::move(prior_var);
    return std::make_unique<LinRegModel>(basis, lo, hi, sigma, std::move(theta0),
                                         std::move(prior));
}

} // namespace pcrlab
