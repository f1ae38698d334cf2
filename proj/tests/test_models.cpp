#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Cholesky>
#include <cmath>
#include <vector>

#include "pcrlab/errors.hpp"
#include "pcrlab/laplace.hpp"
#include "pcrlab/models.hpp"
#include "pcrlab/quadrature.hpp"
#include "pcrlab/rng.hpp"

using namespace pcrlab;

namespace {

constexpr double kPi = 3.14159265358979323846;

double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Eigen::VectorXd grid_fn(int m, const std::function<double(double)>& f) {
    Eigen::VectorXd out(m);
    for (int i = 0; i < m; ++i) {
        out[i] = f(static_cast<double>(i) / (m - 1));
    }
    return out;
}

} // namespace

TEST_CASE("sampling densities integrate to one") {
    RngStream rng{33, 1};

    SUBCASE("logistic density") {
        auto model = make_finite_logistic(Eigen::Vector2d(1.0, -0.5),
                                          Eigen::Vector2d(0.0, 0.0),
                                          Eigen::Vector2d(1.0, 1.0));
        for (int trial = 0; trial < 20; ++trial) {
            const Eigen::Vector2d theta(rng.uniform(-2.0, 2.0),
                                        rng.uniform(-2.0, 2.0));
            const double mass = integrate_adaptive(
                [&](double x) {
                    Eigen::VectorXd xv(1);
                    xv << x;
                    return std::exp(model->log_density(xv, theta));
                },
                0.0, 1.0, 1e-10);
            CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
        }
    }

    SUBCASE("location density") {
        auto model = make_gaussian_location(0.7, 0.3, 0.0, 1.0);
        for (int trial = 0; trial < 5; ++trial) {
            const Eigen::VectorXd theta =
                Eigen::VectorXd::Constant(1, rng.uniform(-3.0, 3.0));
            const double mass = integrate_adaptive(
                [&](double x) {
                    Eigen::VectorXd xv(1);
                    xv << x;
                    return std::exp(model->log_density(xv, theta));
                },
                theta[0] - 12.0, theta[0] + 12.0, 1e-10);
            CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
        }
    }

    SUBCASE("categorical masses") {
        auto model = make_multinomial(3, Eigen::Vector2d(0.5, 0.3), 2.0);
        for (int trial = 0; trial < 20; ++trial) {
            const double x = rng.uniform(0.05, 0.6);
            const double y = rng.uniform(0.05, 0.35);
            const Eigen::Vector2d theta(x, y);
            double mass = 0.0;
            for (int c = 0; c < 3; ++c) {
                Eigen::VectorXd xv(1);
                xv << static_cast<double>(c);
                mass += std::exp(model->log_density(xv, theta));
            }
            CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
        }
    }

    SUBCASE("regression conditional density") {
        auto model = make_linreg(4, 0.0, 1.0, 0.5,
                                 Eigen::Vector4d(0.8, -0.3, 0.2, 0.1),
                                 Eigen::VectorXd::Zero(4),
                                 Eigen::VectorXd::Ones(4));
        // Joint density of (u, v): integrating over v at fixed u must give
        // the regressor marginal 1/(hi - lo) = 1.
        for (int trial = 0; trial < 5; ++trial) {
            const double u = rng.uniform01();
            const Eigen::VectorXd theta = model->sample_prior(rng);
            const double mass = integrate_adaptive(
                [&](double v) {
                    Eigen::VectorXd xv(2);
                    xv << u, v;
                    return std::exp(model->log_density(xv, theta));
                },
                -30.0, 30.0, 1e-10);
            CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
        }
    }
}

TEST_CASE("binary counts update the shape prior to the expected posterior") {
    auto model = make_multinomial(2, Eigen::VectorXd::Constant(1, 0.5), 2.0);
    SuffStat stat;
    stat.n = 10.0;
    stat.value = Eigen::Vector2d(0.7, 0.3);
    const auto post = model->conjugate_posterior(stat);
    REQUIRE(post.has_value());
    REQUIRE(post->kind() == ConjugatePosterior::Kind::Dirichlet);
    CHECK(post->alpha()(0) == doctest::Approx(9.0).epsilon(1e-14));
    CHECK(post->alpha()(1) == doctest::Approx(5.0).epsilon(1e-14));

    // First-coordinate moments of the induced Beta(9, 5).
    const double mean = 9.0 / 14.0;
    const double var = 9.0 * 5.0 / (14.0 * 14.0 * 15.0);
    CHECK(post->mean()(0) == doctest::Approx(mean).epsilon(1e-14));
    CHECK(post->covariance()(0, 0) == doctest::Approx(var).epsilon(1e-14));
    const Eigen::VectorXd half = Eigen::VectorXd::Constant(1, 0.5);
    CHECK(post->second_moment_about(half) ==
          doctest::Approx(var + (mean - 0.5) * (mean - 0.5)).epsilon(1e-14));

    // Sampled mean agrees with the closed form within 4 standard errors.
    RngStream rng{7, 7};
    const int draws = 20000;
    double acc = 0.0, acc2 = 0.0;
    for (int i = 0; i < draws; ++i) {
        const double t = post->sample(rng)(0);
        acc += t;
        acc2 += t * t;
    }
    const double mc_mean = acc / draws;
    const double mc_se =
        std::sqrt((acc2 / draws - mc_mean * mc_mean) / draws);
    CHECK(std::abs(mc_mean - mean) < 4.0 * mc_se);
}

TEST_CASE("regression posteriors: kernel form and realized design") {
    const int k = 3;
    auto model = make_linreg(k, 0.0, 1.0, 0.5, Eigen::Vector3d(0.5, -0.2, 0.1),
                             Eigen::Vector3d(0.1, 0.0, -0.1),
                             Eigen::Vector3d(0.8, 0.6, 0.4));

    SUBCASE("statistic-kernel posterior matches the diagonal closed form") {
        SuffStat stat;
        stat.n = 25.0;
        stat.value = Eigen::Vector3d(0.4, -0.1, 0.05);
        const auto post = model->conjugate_posterior(stat);
        REQUIRE(post.has_value());
        const double s2 = 0.25;
        const Eigen::Vector3d prior_mean(0.1, 0.0, -0.1);
        const Eigen::Vector3d prior_var(0.8, 0.6, 0.4);
        for (int i = 0; i < k; ++i) {
            const double prec = 1.0 / prior_var[i] + stat.n / s2;
            const double mean =
                (prior_mean[i] / prior_var[i] + stat.n * stat.value[i] / s2) /
                prec;
            CHECK(post->mean()(i) == doctest::Approx(mean).epsilon(1e-12));
            CHECK(post->covariance()(i, i) ==
                  doctest::Approx(1.0 / prec).epsilon(1e-12));
        }
    }

    SUBCASE("realized-design posterior matches a direct computation") {
        RngStream rng{55, 3};
        const Eigen::MatrixXd data =
            model->sample_data(rng, 40, model->theta0());
        const auto post = model->posterior_from_data(data);
        REQUIRE(post.has_value());

        const double s2 = 0.25;
        Eigen::MatrixXd prec = Eigen::MatrixXd::Zero(k, k);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
        prec.diagonal() = Eigen::Vector3d(1.0 / 0.8, 1.0 / 0.6, 1.0 / 0.4);
        rhs = prec.diagonal().cwiseProduct(Eigen::Vector3d(0.1, 0.0, -0.1));
        for (int i = 0; i < data.rows(); ++i) {
            Eigen::VectorXd psi(k);
            for (int j = 1; j <= k; ++j) {
                psi[j - 1] = std::sqrt(2.0) * std::sin(j * kPi * data(i, 0));
            }
            prec += psi * psi.transpose() / s2;
            rhs += data(i, 1) * psi / s2;
        }
        const Eigen::VectorXd mean = prec.ldlt().solve(rhs);
        const Eigen::MatrixXd cov =
            prec.ldlt().solve(Eigen::MatrixXd::Identity(k, k));
        CHECK((post->mean() - mean).lpNorm<Eigen::Infinity>() < 1e-10);
        CHECK((post->covariance() - cov).lpNorm<Eigen::Infinity>() < 1e-10);
    }
}

TEST_CASE("data generators hit the statistic mean within Monte Carlo error") {
    struct Case {
        std::unique_ptr<StatModel> model;
        int draws;
    };
    std::vector<Case> cases;
    cases.push_back({make_finite_logistic(Eigen::Vector2d(1.0, -0.5),
                                          Eigen::Vector2d(0.0, 0.0),
                                          Eigen::Vector2d(1.0, 1.0)),
                     10000});
    cases.push_back({make_multinomial(3, Eigen::Vector2d(0.5, 0.3), 2.0),
                     10000});
    cases.push_back({make_linreg(3, 0.0, 1.0, 0.5,
                                 Eigen::Vector3d(0.5, -0.2, 0.1),
                                 Eigen::Vector3d::Zero(),
                                 Eigen::Vector3d::Ones()),
                     10000});
    cases.push_back({make_infinite_logistic(8, Eigen::VectorXd::Zero(8), 3.0),
                     10000});

    int id = 0;
    for (const auto& c : cases) {
        CAPTURE(c.model->name());
        RngStream rng{101, static_cast<std::uint64_t>(id++)};
        const Eigen::MatrixXd data =
            c.model->sample_data(rng, c.draws, c.model->theta0());
        const SuffStat s = c.model->suff_stat(data);
        const Eigen::VectorXd target = c.model->stat_mean_at(c.model->theta0());

        // Per-coordinate standard errors from the sample itself.
        Eigen::VectorXd sq_acc = Eigen::VectorXd::Zero(s.value.size());
        for (int i = 0; i < data.rows(); ++i) {
            const Eigen::VectorXd b =
                c.model->family().beta(data.row(i).transpose());
            sq_acc += (b - s.value).cwiseAbs2();
        }
        for (int j = 0; j < s.value.size(); ++j) {
            const double se = std::sqrt(sq_acc[j] / c.draws / c.draws);
            CHECK(std::abs(s.value[j] - target[j]) < 4.0 * se + 1e-6);
        }
    }
}

TEST_CASE("basis functions are orthonormal in the derivative inner product") {
    double worst = 0.0;
    for (int j = 1; j <= 32; ++j) {
        for (int k = j; k <= 32; ++k) {
            const double inner = h1star_inner(
                [j](double x) { return logistic_basis_deriv(j, x); },
                [k](double x) { return logistic_basis_deriv(k, x); });
            const double expected = (j == k) ? 1.0 : 0.0;
            worst = std::max(worst, std::abs(inner - expected));
        }
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("information operator has the Neumann basis as eigenfunctions") {
    const int m = 4096;
    for (int k : {1, 4, 9, 16}) {
        CAPTURE(k);
        const Eigen::VectorXd ek =
            grid_fn(m, [k](double x) { return logistic_basis(k, x); });
        const Eigen::VectorXd mapped = apply_istar(ek);
        const double gamma = 1.0 / (k * kPi * k * kPi);
        const double scale = gamma * ek.cwiseAbs().maxCoeff();
        const double err =
            (mapped - gamma * ek).cwiseAbs().maxCoeff() / scale;
        CHECK(err < 1e-3);
    }
}

TEST_CASE("information operator closed-form image of the identity function") {
    const int m = 4097;
    const Eigen::VectorXd h = grid_fn(m, [](double x) { return x; });
    const Eigen::VectorXd mapped = apply_istar(h);
    double worst = 0.0;
    for (int i = 0; i < m; ++i) {
        const double x = static_cast<double>(i) / (m - 1);
        worst = std::max(worst,
                         std::abs(mapped[i] - (x * x / 4.0 - x * x * x / 6.0)));
    }
    CHECK(worst < 1e-10);
    CHECK(mapped[m - 1] == doctest::Approx(1.0 / 12.0).epsilon(1e-10));
}

TEST_CASE("log-partition Hessian at the flat parameter: closed form and variance") {
    const int m = 4097;
    const Eigen::VectorXd h = grid_fn(m, [](double x) { return x; });
    const Eigen::VectorXd flat = Eigen::VectorXd::Zero(m);
    const Eigen::VectorXd hess = hess_m(h, flat);

    double worst = 0.0;
    for (int i = 0; i < m; ++i) {
        const double y = static_cast<double>(i) / (m - 1);
        const double expected = y * y - 2.0 / 3.0 * y * y * y -
                                0.5 * (y - 0.5 * y * y);
        worst = std::max(worst, std::abs(hess[i] - expected));
    }
    CHECK(worst < 1e-8);

    // Quadratic form equals the variance of h under the flat density (1/12),
    // and matches the self-adjointized operator's form exactly.
    const double qform = h1star_inner(h, hess);
    CHECK(qform == doctest::Approx(1.0 / 12.0).epsilon(1e-8));
    const double qform_istar = h1star_inner(h, apply_istar(h));
    CHECK(qform_istar == doctest::Approx(1.0 / 12.0).epsilon(1e-8));
}

TEST_CASE("curvature dominates the self-adjointized lower bound") {
    const int m = 2049;
    RngStream rng{404, 12};
    const Eigen::VectorXd theta0_vals =
        grid_fn(m, [](double x) { return 0.4 * std::sin(kPi * x) - 0.2 * x; });
    const double osc = oscillation(theta0_vals);

    for (int trial = 0; trial < 100; ++trial) {
        Eigen::VectorXd h = Eigen::VectorXd::Zero(m);
        for (int k = 1; k <= 8; ++k) {
            const double c = rng.normal() / k;
            for (int i = 0; i < m; ++i) {
                h[i] += c * logistic_basis(k, static_cast<double>(i) / (m - 1));
            }
        }
        const double curvature = h1star_inner(h, hess_m(h, theta0_vals));
        const double lower = h1star_inner(h, apply_istar(h, osc));
        CHECK(curvature >= lower * (1.0 - 1e-9) - 1e-12);
    }
}

TEST_CASE("sequence prior spectral data feeds the rate predictions") {
    auto model = make_infinite_logistic(16, Eigen::VectorXd::Zero(16), 15.0);
    const auto spec = model->spectral();
    REQUIRE(spec.has_value());
    CHECK(spec->lambda.at(2) == doctest::Approx(std::pow(2.0, -16.0)));
    CHECK(spec->gamma.at(1) == doctest::Approx(1.0 / (kPi * kPi)).epsilon(1e-14));
    CHECK(spec->omega_sq.is_zero());

    const PredictedExponents pred = predicted_exponents(*spec);
    CHECK(pred.fourth == -14.0 / 36.0);
    CHECK(pred.overall == -14.0 / 36.0);

    // A reference parameter with oscillation rescales the curvature floor.
    Eigen::VectorXd theta0 = Eigen::VectorXd::Zero(16);
    theta0[0] = 0.5;
    auto tilted = make_infinite_logistic(16, theta0, 15.0);
    const auto tilted_spec = tilted->spectral();
    REQUIRE(tilted_spec.has_value());
    CHECK(tilted_spec->gamma.at(1) < spec->gamma.at(1));
    CHECK(tilted_spec->omega_sq.at(1) == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("natural-coordinate sensitivity moments") {
    auto multi = make_multinomial(3, Eigen::Vector2d(0.5, 0.3), 2.0);
    const double expected =
        1.0 / 0.25 + 1.0 / 0.09 + 2.0 / (0.2 * 0.2);
    CHECK(multi->grad_g_moment() == doctest::Approx(expected).epsilon(1e-12));

    auto reg = make_linreg(8, 0.0, 1.0, 0.5, Eigen::VectorXd::Zero(8),
                           Eigen::VectorXd::Zero(8),
                           Eigen::VectorXd::Ones(8));
    CHECK(reg->grad_g_moment() == doctest::Approx(8.0 / 0.0625).epsilon(1e-12));

    auto logi = make_finite_logistic(Eigen::Vector2d(1.0, -0.5),
                                     Eigen::Vector2d(0.0, 0.0),
                                     Eigen::Vector2d(1.0, 1.0));
    CHECK(logi->grad_g_moment() == 1.0);
}

TEST_CASE("empirical-measure distance vanishes on exactly matching frequencies") {
    auto model = make_multinomial(3, Eigen::Vector2d(0.5, 0.25), 2.0);
    Eigen::MatrixXd data(4, 1);
    data << 0, 0, 1, 2;
    CHECK(model->gc_distance(data, 2.0) == doctest::Approx(0.0).epsilon(1e-12));

    Eigen::MatrixXd shifted(4, 1);
    shifted << 2, 2, 2, 2;
    CHECK(model->gc_distance(shifted, 2.0) > 0.5);
}

TEST_CASE("prior density closed forms") {
    // Two cells with shape 2: density 6 t (1 - t) on the free coordinate.
    Eigen::VectorXd t(1);
    t << 0.5;
    CHECK(multinomial_prior_density(t, 2.0) ==
          doctest::Approx(1.5).epsilon(1e-12));
    const double mass = integrate_adaptive(
        [](double x) {
            Eigen::VectorXd xv(1);
            xv << x;
            return multinomial_prior_density(xv, 2.0);
        },
        1e-12, 1.0 - 1e-12, 1e-10);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));

    CHECK(logistic_log_partition([](double y) { return y; }) ==
          doctest::Approx(std::log(std::exp(1.0) - 1.0)).epsilon(1e-12));
}

TEST_CASE("prior-averaged KL matches its closed form for the location family") {
    // KL(theta0 || theta) = (theta - theta0)^2 / (2 sigma^2), so the prior
    // average is (var + (mean - theta0)^2) / (2 sigma^2).
    auto model = make_gaussian_location(0.8, 0.3, 0.1, 0.9);
    RngStream rng{606, 1};
    const int draws = 4000;
    double acc = 0.0, acc2 = 0.0;
    for (int i = 0; i < draws; ++i) {
        const Eigen::VectorXd theta = model->sample_prior(rng);
        const double kl = kl_divergence(*model, model->theta0(), theta);
        acc += kl;
        acc2 += kl * kl;
    }
    const double mc = acc / draws;
    const double se = std::sqrt((acc2 / draws - mc * mc) / draws);
    const double expected = (0.9 + (0.1 - 0.3) * (0.1 - 0.3)) / (2.0 * 0.64);
    CHECK(std::abs(mc - expected) < 4.0 * se);
}

TEST_CASE("posterior spread shrinks at the parametric rate") {
    auto model = make_gaussian_location(1.0, 0.3, 0.0, 1.0);
    std::vector<double> ln, lm;
    for (double n : {100.0, 316.0, 1000.0, 3162.0, 10000.0}) {
        SuffStat stat;
        stat.n = n;
        stat.value = Eigen::VectorXd::Constant(1, 0.3);
        const auto post = model->conjugate_posterior(stat);
        REQUIRE(post.has_value());
        ln.push_back(std::log(n));
        lm.push_back(std::log(post->second_moment_about(model->theta0())));
    }
    CHECK(ols_slope(ln, lm) == doctest::Approx(-1.0).epsilon(0.05));
}

TEST_CASE("model constructors reject invalid parameters") {
    CHECK_THROWS_AS(make_multinomial(3, Eigen::Vector2d(0.7, 0.4), 2.0),
                    invalid_parameter);
    CHECK_THROWS_AS(make_multinomial(3, Eigen::Vector2d(-0.1, 0.4), 2.0),
                    invalid_parameter);
    CHECK_THROWS_AS(make_multinomial(3, Eigen::Vector2d(0.5, 0.3), 0.0),
                    invalid_spec);
    CHECK_THROWS_AS(make_linreg(3, 0.0, 1.0, -0.5, Eigen::Vector3d::Zero(),
                                Eigen::Vector3d::Zero(), Eigen::Vector3d::Ones()),
                    invalid_parameter);
    CHECK_THROWS_AS(make_linreg(3, 1.0, 0.0, 0.5, Eigen::Vector3d::Zero(),
                                Eigen::Vector3d::Zero(), Eigen::Vector3d::Ones()),
                    invalid_parameter);
    CHECK_THROWS_AS(
        make_infinite_logistic(0, Eigen::VectorXd::Zero(0), 15.0),
        invalid_parameter);
    CHECK_THROWS_AS(
        make_finite_logistic(Eigen::Vector2d(1.0, -0.5),
                             Eigen::Vector2d::Zero(),
                             Eigen::Vector2d(1.0, -1.0)),
        invalid_spec);
}

TEST_CASE("data generation is reproducible and streams are independent") {
    auto model = make_finite_logistic(Eigen::Vector2d(1.0, -0.5),
                                      Eigen::Vector2d(0.0, 0.0),
                                      Eigen::Vector2d(1.0, 1.0));
    RngStream a{42, 0};
    RngStream b{42, 0};
    RngStream c{42, 1};
    const Eigen::MatrixXd da = model->sample_data(a, 64, model->theta0());
    const Eigen::MatrixXd db = model->sample_data(b, 64, model->theta0());
    const Eigen::MatrixXd dc = model->sample_data(c, 64, model->theta0());
    CHECK(da == db);
    CHECK(da != dc);
}
