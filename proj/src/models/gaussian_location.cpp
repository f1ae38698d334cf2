#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "pcrlab/errors.hpp"
#include "pcrlab/models.hpp"
#include "pcrlab/priors.hpp"

namespace pcrlab {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

class GaussianLocationModel final : public StatModel {
public:
    GaussianLocationModel(double sigma, double theta0, double prior_mean,
                          double prior_var)
        : name_("gaussian_location"), sigma_(sigma) {
        if (!(sigma > 0.0)) throw invalid_parameter("noise scale must be positive");
        theta0_.resize(1);
        theta0_[0] = theta0;
        prior_.mean = Eigen::VectorXd::Constant(1, prior_mean);
        prior_.var = Eigen::VectorXd::Constant(1, prior_var);
        prior_.validate();

        const double s2 = sigma_ * sigma_;
        const double reach =
            std::abs(prior_mean) + 10.0 * std::sqrt(prior_var) +
            std::abs(theta0) + 12.0 * sigma_;
        family_.param_dim = 1;
        family_.stat_dim = 1;
        family_.domain = SampleDomain::Continuous1D;
        family_.support_lo = -reach;
        family_.support_hi = reach;
        family_.g = [s2](const Eigen::VectorXd& theta) {
            return (theta / s2).eval();
        };
        family_.log_partition = [s2](const Eigen::VectorXd& theta) {
            return 0.5 * theta[0] * theta[0] / s2;
        };
        family_.beta = [](const Eigen::VectorXd& x) { return x; };
        family_.log_base = [this, s2](const Eigen::VectorXd& x) {
            return -0.5 * x[0] * x[0] / s2 - 0.5 * kLog2Pi - std::log(sigma_);
        };
        family_.mean_stat = [](const Eigen::VectorXd& theta) { return theta; };
        family_.validate();
    }

    const std::string& name() const override { return name_; }
    const ExpFamilySpec& family() const override { return family_; }
    const Eigen::VectorXd& theta0() const override { return theta0_; }

    double log_density(const Eigen::VectorXd& x,
                       const Eigen::VectorXd& theta) const override {
        const double d = x[0] - theta[0];
        return -0.5 * d * d / (sigma_ * sigma_) - 0.5 * kLog2Pi -
               std::log(sigma_);
    }

    Eigen::VectorXd sample_point(RngStream& rng,
                                 const Eigen::VectorXd& theta) const override {
        Eigen::VectorXd x(1);
        x[0] = theta[0] + sigma_ * rng.normal();
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
        const double d = a[0] - b[0];
        return 0.5 * d * d / (sigma_ * sigma_);
    }

    std::optional<ConjugatePosterior>
    conjugate_posterior(const SuffStat& stat) const override {
        if (stat.value.size() != 1) {
            throw invalid_input("statistic dimension mismatch");
        }
        const double s2 = sigma_ * sigma_;
        const double prec = 1.0 / prior_.var[0] + stat.n / s2;
        const double var = 1.0 / prec;
        const double mean =
            var * (prior_.mean[0] / prior_.var[0] + stat.n * stat.value[0] / s2);
        return ConjugatePosterior::gaussian(
            Eigen::VectorXd::Constant(1, mean),
            Eigen::MatrixXd::Constant(1, 1, var));
    }

    std::optional<SpectralDecay> spectral() const override {
        SpectralDecay spec;
        spec.lambda = Sequence::array({prior_.var[0]});
        spec.gamma = Sequence::array({1.0 / (sigma_ * sigma_)});
        const double d = theta0_[0] - prior_.mean[0];
        if (d != 0.0) spec.omega_sq = Sequence::array({d * d});
        spec.validate();
        return spec;
    }

    double grad_g_moment() const override {
        const double s2 = sigma_ * sigma_;
        return 1.0 / (s2 * s2);
    }

    double gc_distance(const Eigen::MatrixXd& data, double p) const override {
        std::vector<double> xs(data.rows());
        for (Eigen::Index i = 0; i < data.rows(); ++i) xs[i] = data(i, 0);
        return wasserstein_1d(EmpiricalMeasure(std::move(xs)),
                              QuantileMeasure::gaussian(theta0_[0], sigma_), p);
    }

private:
    std::string name_;
    double sigma_;
    Eigen::VectorXd theta0_;
    GaussianSequencePrior prior_;
    ExpFamilySpec family_;
};

} // namespace

std::unique_ptr<StatModel> make_gaussian_location(double sigma, double theta0,
                                                  double prior_mean,
                                                  double prior_var) {
    return std::make_unique<GaussianLocationModel>(sigma, theta0, prior_mean,
                                                   prior_var);
}

} // namespace pcrlab
