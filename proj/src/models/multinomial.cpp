#include <cmath>
#include <limits>
#include <string>

#include "pcrlab/errors.hpp"
#include "pcrlab/models.hpp"
#include "pcrlab/priors.hpp"

namespace pcrlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd complete_simplex(const Eigen::VectorXd& theta_free) {
    Eigen::VectorXd full(theta_free.size() + 1);
    full.head(theta_free.size()) = theta_free;
    full[theta_free.size()] = 1.0 - theta_free.sum();
    return full;
}

bool in_open_simplex(const Eigen::VectorXd& theta_free) {
    return (theta_free.array() > 0.0).all() && theta_free.sum() < 1.0;
}

class MultinomialModel final : public StatModel {
public:
    MultinomialModel(int categories, Eigen::VectorXd theta0_free, double alpha)
        : name_("multinomial"), theta0_(std::move(theta0_free)) {
        prior_.categories = categories;
        prior_.alpha = alpha;
        prior_.validate();
        if (theta0_.size() != categories - 1 || !in_open_simplex(theta0_)) {
            throw invalid_parameter(
                "theta0 must lie in the open simplex with one free "
                "coordinate per non-terminal category");
        }
        theta0_full_ = complete_simplex(theta0_);

        family_.param_dim = categories - 1;
        family_.stat_dim = categories;
        family_.domain = SampleDomain::Discrete;
        family_.categories = categories;
        family_.g = [](const Eigen::VectorXd& theta) {
            return complete_simplex(theta).array().log().matrix().eval();
        };
        family_.log_partition = [](const Eigen::VectorXd&) { return 0.0; };
        family_.beta = [categories](const Eigen::VectorXd& x) {
            const long long c = std::llround(x[0]);
            if (c < 0 || c >= categories) {
                throw invalid_input("category index out of range");
            }
            Eigen::VectorXd onehot = Eigen::VectorXd::Zero(categories);
            onehot[static_cast<Eigen::Index>(c)] = 1.0;
            return onehot;
        };
        family_.mean_stat = [](const Eigen::VectorXd& theta) {
            return complete_simplex(theta);
        };
        family_.admissible = [](const Eigen::VectorXd& theta) {
            return in_open_simplex(theta);
        };
        family_.validate();

        // || D g (theta0) ||_F^2: g_i = log theta_i depends on the free
        // coordinates directly, the terminal cell through 1 - sum.
        const int nfree = categories - 1;
        grad_sq_ = static_cast<double>(nfree) /
                   (theta0_full_[nfree] * theta0_full_[nfree]);
        for (int i = 0; i < nfree; ++i) {
            grad_sq_ += 1.0 / (theta0_[i] * theta0_[i]);
        }
    }

    const std::string& name() const override { return name_; }
    const ExpFamilySpec& family() const override { return family_; }
    const Eigen::VectorXd& theta0() const override { return theta0_; }

    double log_density(const Eigen::VectorXd& x,
                       const Eigen::VectorXd& theta) const override {
        if (!in_open_simplex(theta)) return -kInf;
        const long long c = std::llround(x[0]);
        if (c < 0 || c >= prior_.categories) return -kInf;
        const Eigen::VectorXd full = complete_simplex(theta);
        return std::log(full[static_cast<Eigen::Index>(c)]);
    }

    Eigen::VectorXd sample_point(RngStream& rng,
                                 const Eigen::VectorXd& theta) const override {
        const Eigen::VectorXd full = complete_simplex(theta);
        const double u = rng.uniform01();
        double acc = 0.0;
        Eigen::VectorXd x(1);
        for (int c = 0; c < prior_.categories; ++c) {
            acc += full[c];
            if (u < acc || c == prior_.categories - 1) {
                x[0] = static_cast<double>(c);
                return x;
            }
        }
        x[0] = static_cast<double>(prior_.categories - 1);
        return x;
    }

    double log_prior_density(const Eigen::VectorXd& theta) const override {
        return prior_.log_density_free(theta);
    }
    Eigen::VectorXd prior_mean() const override { return prior_.mean_free(); }
    Eigen::MatrixXd prior_covariance() const override {
        return prior_.covariance_free();
    }
    Eigen::VectorXd sample_prior(RngStream& rng) const override {
        return prior_.sample_free(rng);
    }

    void param_box(Eigen::VectorXd& lo, Eigen::VectorXd& hi) const override {
        lo = Eigen::VectorXd::Constant(family_.param_dim, 1e-9);
        hi = Eigen::VectorXd::Constant(family_.param_dim, 1.0 - 1e-9);
    }

    std::optional<double> analytic_kl(const Eigen::VectorXd& a,
                                      const Eigen::VectorXd& b) const override {
        return multinomial_kl(a, b);
    }

    std::optional<ConjugatePosterior>
    conjugate_posterior(const SuffStat& stat) const override {
        if (stat.value.size() != prior_.categories) {
            throw invalid_input("statistic dimension mismatch");
        }
        if (stat.n < 0.0 || (stat.value.array() < -1e-12).any() ||
            std::abs(stat.value.sum() - 1.0) > 1e-9) {
            throw invalid_input("categorical statistic must be a frequency vector");
        }
        const Eigen::VectorXd alpha =
            (stat.n * stat.value).array() + prior_.alpha;
        return ConjugatePosterior::dirichlet(alpha);
    }

    double grad_g_moment() const override { return grad_sq_; }

    double gc_distance(const Eigen::MatrixXd& data, double p) const override {
        std::vector<double> xs(data.rows());
        for (Eigen::Index i = 0; i < data.rows(); ++i) xs[i] = data(i, 0);
        std::vector<double> points(prior_.categories);
        std::vector<double> weights(prior_.categories);
        for (int c = 0; c < prior_.categories; ++c) {
            points[c] = static_cast<double>(c);
            weights[c] = theta0_full_[c];
        }
        return wasserstein_1d(EmpiricalMeasure(std::move(xs)),
                              EmpiricalMeasure(std::move(points), std::move(weights)),
                              p);
    }

private:
    std::string name_;
    ExpFamilySpec family_;
    DirichletShapePrior prior_;
    Eigen::VectorXd theta0_;
    Eigen::VectorXd theta0_full_;
    double grad_sq_ = 1.0;
};

} // namespace

std::unique_ptr<StatModel> make_multinomial(int categories,
                                            Eigen::VectorXd theta0_free,
                                            double prior_alpha) {
    return std::make_unique<MultinomialModel>(categories, std::move(theta0_free),
                                              prior_alpha);
}

double multinomial_kl(const Eigen::VectorXd& a_free,
                      const Eigen::VectorXd& b_free) {
    if (a_free.size() != b_free.size() || a_free.size() == 0) {
        throw invalid_input("free coordinate sizes must match");
    }
    if (!in_open_simplex(a_free) || !in_open_simplex(b_free)) {
        throw invalid_parameter("points must lie in the open simplex");
    }
    const Eigen::VectorXd a = complete_simplex(a_free);
    const Eigen::VectorXd b = complete_simplex(b_free);
    double kl = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        kl += a[i] * (std::log(a[i]) - std::log(b[i]));
    }
    return kl < 0.0 ? 0.0 : kl;
}

double multinomial_prior_density(const Eigen::VectorXd& theta_free,
                                 double alpha) {
    DirichletShapePrior prior;
    prior.categories = static_cast<int>(theta_free.size()) + 1;
    prior.alpha = alpha;
    prior.validate();
    return std::exp(prior.log_density_free(theta_free));
}

} // namespace pcrlab
