#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "pcrlab/errors.hpp"
#include "pcrlab/models.hpp"
#include "pcrlab/priors.hpp"
#include "pcrlab/quadrature.hpp"

namespace pcrlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = 3.14159265358979323846;
constexpr std::size_t kQuadNodes = 2048;
constexpr int kCdfNodes = 8193;

// Density exp{theta(x) - M(theta)} on [0, 1], theta expanded in a fixed basis.
// Shared by the finite (sine) and truncated-sequence (Neumann) variants: the
// basis values are cached on a Gauss-Legendre rule for the log partition and
// the statistic mean, and on a uniform grid for inverse-CDF sampling.
class LogisticDensityModel : public StatModel {
public:
    LogisticDensityModel(std::string name, Eigen::VectorXd theta0,
                         GaussianSequencePrior prior,
                         std::function<double(int, double)> basis)
        : name_(std::move(name)), theta0_(std::move(theta0)),
          prior_(std::move(prior)), basis_(std::move(basis)),
          quad_(kQuadNodes, 0.0, 1.0) {
        prior_.validate();
        const int k = static_cast<int>(theta0_.size());
        if (k < 1 || prior_.dim() != k) {
            throw invalid_parameter("theta0 and prior sizes must match");
        }

        basis_at_quad_.resize(static_cast<Eigen::Index>(quad_.size()), k);
        quad_w_.resize(static_cast<Eigen::Index>(quad_.size()));
        for (std::size_t q = 0; q < quad_.size(); ++q) {
            quad_w_[static_cast<Eigen::Index>(q)] = quad_.weights()[q];
            for (int j = 0; j < k; ++j) {
                basis_at_quad_(static_cast<Eigen::Index>(q), j) =
                    basis_(j + 1, quad_.nodes()[q]);
            }
        }

        family_.param_dim = k;
        family_.stat_dim = k;
        family_.domain = SampleDomain::Continuous1D;
        family_.support_lo = 0.0;
        family_.support_hi = 1.0;
        family_.g = [](const Eigen::VectorXd& theta) { return theta; };
        family_.log_partition = [this](const Eigen::VectorXd& theta) {
            return log_partition(theta);
        };
        family_.beta = [this, k](const Eigen::VectorXd& x) {
            Eigen::VectorXd out(k);
            for (int j = 0; j < k; ++j) out[j] = basis_(j + 1, x[0]);
            return out;
        };
        family_.mean_stat = [this](const Eigen::VectorXd& theta) {
            return stat_mean(theta);
        };
        family_.validate();

        cdf0_ = build_cdf_table(theta0_);
    }

    const std::string& name() const override { return name_; }
    const ExpFamilySpec& family() const override { return family_; }
    const Eigen::VectorXd& theta0() const override { return theta0_; }

    double log_density(const Eigen::VectorXd& x,
                       const Eigen::VectorXd& theta) const override {
        if (x[0] < 0.0 || x[0] > 1.0) return -kInf;
        return theta_at(theta, x[0]) - log_partition(theta);
    }

    Eigen::VectorXd sample_point(RngStream& rng,
                                 const Eigen::VectorXd& theta) const override {
        Eigen::VectorXd x(1);
        if (theta.size() == theta0_.size() && theta == theta0_) {
            x[0] = quantile_from_table(cdf0_, rng.uniform01());
        } else {
            x[0] = quantile_from_table(build_cdf_table(theta), rng.uniform01());
        }
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
        // Dual form of the KL between members of a linear family:
        // (a - b) . E_a[beta] - M(a) + M(b).
        const double kl =
            (a - b).dot(stat_mean(a)) - log_partition(a) + log_partition(b);
        return kl < 0.0 ? 0.0 : kl;
    }

    double gc_distance(const Eigen::MatrixXd& data, double p) const override {
        std::vector<double> xs(data.rows());
        for (Eigen::Index i = 0; i < data.rows(); ++i) xs[i] = data(i, 0);
        QuantileMeasure q([this](double u) {
            return quantile_from_table(cdf0_, u);
        });
        return wasserstein_1d(EmpiricalMeasure(std::move(xs)), q, p);
    }

protected:
    double theta_at(const Eigen::VectorXd& theta, double x) const {
        double s = 0.0;
        for (Eigen::Index j = 0; j < theta.size(); ++j) {
            s += theta[j] * basis_(static_cast<int>(j) + 1, x);
        }
        return s;
    }

    double log_partition(const Eigen::VectorXd& theta) const {
        if (theta.size() != theta0_.size()) {
            throw invalid_input("parameter dimension mismatch");
        }
        const Eigen::VectorXd v = basis_at_quad_ * theta;
        const double vmax = v.maxCoeff();
        const double total =
            quad_w_.dot((v.array() - vmax).exp().matrix());
        return vmax + std::log(total);
    }

    Eigen::VectorXd stat_mean(const Eigen::VectorXd& theta) const {
        const Eigen::VectorXd v = basis_at_quad_ * theta;
        const double vmax = v.maxCoeff();
        Eigen::VectorXd w =
            quad_w_.array() * (v.array() - vmax).exp();
        w /= w.sum();
        return basis_at_quad_.transpose() * w;
    }

    std::vector<double> build_cdf_table(const Eigen::VectorXd& theta) const {
        const double dx = 1.0 / static_cast<double>(kCdfNodes - 1);
        std::vector<double> density(kCdfNodes);
        for (int i = 0; i < kCdfNodes; ++i) {
            density[i] = std::exp(theta_at(theta, i * dx));
        }
        std::vector<double> cdf = cumulative_integral(density, dx);
        const double total = cdf.back();
        if (!(total > 0.0) || !std::isfinite(total)) {
            throw numeric_failure("degenerate density table");
        }
        double running = 0.0;
        for (double& c : cdf) {
            running = std::max(running, c / total);
            c = std::min(running, 1.0);
        }
        cdf.back() = 1.0;
        return cdf;
    }

    static double quantile_from_table(const std::vector<double>& cdf, double u) {
        u = std::clamp(u, 0.0, 1.0);
        const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
        if (it == cdf.begin()) return 0.0;
        const std::size_t j = static_cast<std::size_t>(it - cdf.begin());
        if (j >= cdf.size()) return 1.0;
        const double dx = 1.0 / static_cast<double>(cdf.size() - 1);
        const double gap = cdf[j] - cdf[j - 1];
        const double frac = gap > 0.0 ? (u - cdf[j - 1]) / gap : 0.0;
        return (static_cast<double>(j - 1) + frac) * dx;
    }

    std::string name_;
    Eigen::VectorXd theta0_;
    GaussianSequencePrior prior_;
    std::function<double(int, double)> basis_;
    GaussLegendre quad_;
    Eigen::MatrixXd basis_at_quad_;
    Eigen::VectorXd quad_w_;
    ExpFamilySpec family_;
    std::vector<double> cdf0_;
};

class InfiniteLogisticModel final : public LogisticDensityModel {
public:
    InfiniteLogisticModel(int truncation, Eigen::VectorXd theta0, double decay_a,
                          double prior_scale)
        : LogisticDensityModel(
              "infinite_logistic", std::move(theta0),
              sequence_prior(truncation, decay_a, prior_scale),
              [](int k, double x) { return logistic_basis(k, x); }),
          decay_a_(decay_a), prior_scale_(prior_scale) {
        // Oscillation of theta0 fixes the curvature lower bound's scale.
        const int m = 4096;
        Eigen::VectorXd vals(m + 1);
        for (int i = 0; i <= m; ++i) {
            vals[i] = theta_at(theta0_, static_cast<double>(i) / m);
        }
        osc0_ = oscillation(vals);
    }

    std::optional<SpectralDecay> spectral() const override {
        SpectralDecay spec;
        spec.lambda = Sequence::power_law(1.0 + decay_a_, prior_scale_);
        spec.gamma = Sequence::power_law(2.0, std::exp(-osc0_) / (kPi * kPi));
        if (theta0_.squaredNorm() > 0.0) {
            std::vector<double> omega(theta0_.size());
            for (Eigen::Index k = 0; k < theta0_.size(); ++k) {
                omega[static_cast<std::size_t>(k)] = theta0_[k] * theta0_[k];
            }
            spec.omega_sq = Sequence::array(std::move(omega));
        }
        spec.validate();
        return spec;
    }

private:
    static GaussianSequencePrior sequence_prior(int truncation, double decay_a,
                                                double scale) {
        if (truncation < 1) throw invalid_parameter("truncation must be >= 1");
        if (!(decay_a > 0.0) || !(scale > 0.0)) {
            throw invalid_parameter("prior decay and scale must be positive");
        }
        GaussianSequencePrior prior;
        prior.mean = Eigen::VectorXd::Zero(truncation);
        prior.var.resize(truncation);
        for (int k = 1; k <= truncation; ++k) {
            prior.var[k - 1] = scale * std::pow(k, -(1.0 + decay_a));
        }
        return prior;
    }

    double decay_a_;
    double prior_scale_;
    double osc0_ = 0.0;
};

} // namespace

std::unique_ptr<StatModel> make_finite_logistic(Eigen::VectorXd theta0,
                                                Eigen::VectorXd prior_mean,
                                                Eigen::VectorXd prior_var) {
    GaussianSequencePrior prior;
    prior.mean = std::move(prior_mean);
    prior.var = std::move(prior_var);
    return std::make_unique<LogisticDensityModel>(
        "finite_logistic", std::move(theta0), std::move(prior),
        [](int k, double x) {
            if (k < 1) throw invalid_parameter("basis index starts at 1");
            return std::sin(k * kPi * x);
        });
}

std::unique_ptr<StatModel> make_infinite_logistic(int truncation,
                                                  Eigen::VectorXd theta0,
                                                  double decay_a,
                                                  double prior_scale) {
    return std::make_unique<InfiniteLogisticModel>(truncation, std::move(theta0),
                                                   decay_a, prior_scale);
}

double logistic_log_partition(const std::function<double(double)>& theta_fn) {
    const double total = integrate_adaptive(
        [&](double y) { return std::exp(theta_fn(y)); }, 0.0, 1.0, 1e-12);
    if (!(total > 0.0) || !std::isfinite(total)) {
        throw numeric_failure("log partition integrand is degenerate");
    }
    return std::log(total);
}

double logistic_basis(int k, double x) {
    if (k < 1) throw invalid_parameter("basis index starts at 1");
    const double kp = k * kPi;
    return std::sqrt(2.0) / kp * (1.0 - std::cos(kp * x));
}

double logistic_basis_deriv(int k, double x) {
    if (k < 1) throw invalid_parameter("basis index starts at 1");
    return std::sqrt(2.0) * std::sin(k * kPi * x);
}

double h1star_inner(const std::function<double(double)>& du,
                    const std::function<double(double)>& dv) {
    static const GaussLegendre quad(kQuadNodes, 0.0, 1.0);
    return quad.integrate([&](double x) { return du(x) * dv(x); });
}

namespace {

// Fourth-order first derivative of uniform-grid samples.
Eigen::VectorXd grid_derivative(const Eigen::VectorXd& f, double dx) {
    const Eigen::Index m = f.size();
    if (m < 5) throw invalid_input("derivative stencil needs at least 5 nodes");
    Eigen::VectorXd d(m);
    d[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] -
            3.0 * f[4]) /
           (12.0 * dx);
    d[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) /
           (12.0 * dx);
    for (Eigen::Index i = 2; i + 2 < m; ++i) {
        d[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) /
               (12.0 * dx);
    }
    d[m - 2] = (3.0 * f[m - 1] + 10.0 * f[m - 2] - 18.0 * f[m - 3] +
                6.0 * f[m - 4] - f[m - 5]) /
               (12.0 * dx);
    d[m - 1] = (25.0 * f[m - 1] - 48.0 * f[m - 2] + 36.0 * f[m - 3] -
                16.0 * f[m - 4] + 3.0 * f[m - 5]) /
               (12.0 * dx);
    return d;
}

std::vector<double> to_std(const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

} // namespace

double h1star_inner(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
    if (u.size() != v.size()) throw invalid_input("grid sizes must match");
    if (u.size() < 5) throw invalid_input("needs at least 5 grid nodes");
    const double dx = 1.0 / static_cast<double>(u.size() - 1);
    const Eigen::VectorXd du = grid_derivative(u, dx);
    const Eigen::VectorXd dv = grid_derivative(v, dx);
    return simpson_uniform(to_std(du.cwiseProduct(dv)), dx);
}

Eigen::VectorXd apply_istar(const Eigen::VectorXd& h, double osc) {
    const Eigen::Index m = h.size();
    if (m < 5) throw invalid_input("needs at least 5 grid nodes");
    if (!(osc >= 0.0)) throw invalid_parameter("oscillation must be >= 0");
    const double dx = 1.0 / static_cast<double>(m - 1);

    std::vector<double> yh(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) {
        yh[static_cast<std::size_t>(i)] = (i * dx) * h[i];
    }
    const std::vector<double> cum_yh = cumulative_integral(yh, dx);
    const std::vector<double> cum_h = cumulative_integral(to_std(h), dx);
    const double total_h = cum_h.back();

    const double scale = std::exp(-osc);
    Eigen::VectorXd out(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double x = i * dx;
        const std::size_t s = static_cast<std::size_t>(i);
        out[i] = scale * (cum_yh[s] + x * (total_h - cum_h[s]) -
                          (x - 0.5 * x * x) * total_h);
    }
    return out;
}

Eigen::VectorXd hess_m(const Eigen::VectorXd& h,
                       const Eigen::VectorXd& theta0_vals) {
    const Eigen::Index m = h.size();
    if (theta0_vals.size() != m) throw invalid_input("grid sizes must match");
    if (m < 5) throw invalid_input("needs at least 5 grid nodes");
    const double dx = 1.0 / static_cast<double>(m - 1);

    // Normalized density of the reference parameter on the grid.
    const double vmax = theta0_vals.maxCoeff();
    std::vector<double> rho(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) {
        rho[static_cast<std::size_t>(i)] = std::exp(theta0_vals[i] - vmax);
    }
    const double mass = simpson_uniform(rho, dx);
    if (!(mass > 0.0)) throw numeric_failure("degenerate reference density");
    for (double& r : rho) r /= mass;

    const std::vector<double> cdf = cumulative_integral(rho, dx);
    std::vector<double> one_minus_f(static_cast<std::size_t>(m));
    std::vector<double> h_tail(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) {
        const std::size_t s = static_cast<std::size_t>(i);
        one_minus_f[s] = 1.0 - std::clamp(cdf[s], 0.0, 1.0);
        h_tail[s] = h[i] * one_minus_f[s];
    }

    const std::vector<double> lead = cumulative_integral(h_tail, dx);
    const std::vector<double> phi_vec = cumulative_integral(one_minus_f, dx);

    Eigen::VectorXd phi(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        phi[i] = phi_vec[static_cast<std::size_t>(i)];
    }
    const double h_dot_phi = h1star_inner(h, phi);

    Eigen::VectorXd out(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        out[i] = 2.0 * lead[static_cast<std::size_t>(i)] - h_dot_phi * phi[i];
    }
    return out;
}

double oscillation(const Eigen::VectorXd& vals) {
    if (vals.size() == 0) throw invalid_input("empty sample");
    return vals.maxCoeff() - vals.minCoeff();
}

} // namespace pcrlab
