#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <vector>

#include "pcrlab/errors.hpp"
#include "pcrlab/expfam.hpp"
#include "pcrlab/models.hpp"
#include "pcrlab/quadrature.hpp"
#include "pcrlab/rng.hpp"

using namespace pcrlab;

namespace {

Eigen::MatrixXd uniform_rows(int n, RngStream& rng) {
    Eigen::MatrixXd data(n, 1);
    for (int i = 0; i < n; ++i) data(i, 0) = rng.uniform01();
    return data;
}

// Scalar family with statistic sin(pi x) on [0, 1] and no closed-form
// statistic mean, to exercise the quadrature path of s_zero.
ExpFamilySpec bare_sine_family() {
    ExpFamilySpec spec;
    spec.param_dim = 1;
    spec.stat_dim = 1;
    spec.domain = SampleDomain::Continuous1D;
    spec.support_lo = 0.0;
    spec.support_hi = 1.0;
    spec.g = [](const Eigen::VectorXd& theta) { return theta; };
    spec.beta = [](const Eigen::VectorXd& x) {
        Eigen::VectorXd b(1);
        b[0] = std::sin(3.14159265358979323846 * x[0]);
        return b;
    };
    spec.log_partition = [&](const Eigen::VectorXd& theta) {
        const double t = theta[0];
        return std::log(integrate_adaptive(
            [t](double x) {
                return std::exp(t * std::sin(3.14159265358979323846 * x));
            },
            0.0, 1.0, 1e-13));
    };
    return spec;
}

} // namespace

TEST_CASE("statistic mean is exactly linear on dyadic blocks") {
    auto model = make_finite_logistic(Eigen::Vector2d(1.0, -0.5),
                                      Eigen::Vector2d(0.0, 0.0),
                                      Eigen::Vector2d(1.0, 1.0));
    RngStream rng{17, 4};
    const Eigen::MatrixXd d1 = uniform_rows(4, rng);
    const Eigen::MatrixXd d2 = uniform_rows(4, rng);
    Eigen::MatrixXd joined(8, 1);
    joined << d1, d2;

    const SuffStat s1 = model->suff_stat(d1);
    const SuffStat s2 = model->suff_stat(d2);
    const SuffStat sj = model->suff_stat(joined);

    const Eigen::VectorXd combined =
        (s1.n * s1.value + s2.n * s2.value) / (s1.n + s2.n);
    CHECK(sj.value(0) == combined(0));
    CHECK(sj.value(1) == combined(1));
    CHECK(sj.n == 8.0);
}

TEST_CASE("statistic mean linearity for ragged blocks holds to roundoff") {
    auto model = make_finite_logistic(Eigen::Vector2d(1.0, -0.5),
                                      Eigen::Vector2d(0.0, 0.0),
                                      Eigen::Vector2d(1.0, 1.0));
    RngStream rng{17, 5};
    const Eigen::MatrixXd d1 = uniform_rows(3, rng);
    const Eigen::MatrixXd d2 = uniform_rows(5, rng);
    Eigen::MatrixXd joined(8, 1);
    joined << d1, d2;

    const SuffStat s1 = model->suff_stat(d1);
    const SuffStat s2 = model->suff_stat(d2);
    const SuffStat sj = model->suff_stat(joined);
    const Eigen::VectorXd combined =
        (s1.n * s1.value + s2.n * s2.value) / (s1.n + s2.n);
    CHECK((sj.value - combined).lpNorm<Eigen::Infinity>() < 1e-14);
}

TEST_CASE("categorical statistic mean reproduces frequencies exactly") {
    auto model = make_multinomial(3, Eigen::Vector2d(0.5, 0.3), 2.0);
    Eigen::MatrixXd data(8, 1);
    data << 0, 0, 0, 0, 1, 1, 2, 2;
    const SuffStat s = model->suff_stat(data);
    CHECK(s.value(0) == 0.5);
    CHECK(s.value(1) == 0.25);
    CHECK(s.value(2) == 0.25);
}

TEST_CASE("statistic mean rejects malformed data") {
    auto model = make_multinomial(3, Eigen::Vector2d(0.5, 0.3), 2.0);
    CHECK_THROWS_AS(model->suff_stat(Eigen::MatrixXd(0, 1)), invalid_input);
    CHECK_THROWS_AS(model->suff_stat(Eigen::MatrixXd::Zero(4, 2)),
                    invalid_input);
    Eigen::MatrixXd bad(1, 1);
    bad << 7;
    CHECK_THROWS_AS(model->suff_stat(bad), invalid_input);
}

TEST_CASE("statistic mean at the uniform parameter is 2/pi") {
    // Closed-form route (model with a statistic-mean override).
    auto model = make_finite_logistic(Eigen::VectorXd::Zero(1),
                                      Eigen::VectorXd::Zero(1),
                                      Eigen::VectorXd::Ones(1));
    const Eigen::VectorXd via_model =
        model->stat_mean_at(Eigen::VectorXd::Zero(1));
    CHECK(via_model(0) == doctest::Approx(2.0 / 3.14159265358979323846)
                              .epsilon(1e-10));

    // Quadrature route (no override present).
    const ExpFamilySpec bare = bare_sine_family();
    const Eigen::VectorXd via_quad = s_zero(bare, Eigen::VectorXd::Zero(1));
    CHECK(via_quad(0) == doctest::Approx(2.0 / 3.14159265358979323846)
                             .epsilon(1e-8));
}

TEST_CASE("statistic mean of a pair family needs a closed form") {
    auto model = make_linreg(2, 0.0, 1.0, 0.5, Eigen::Vector2d(0.4, -0.1),
                             Eigen::Vector2d(0.0, 0.0),
                             Eigen::Vector2d(1.0, 1.0));
    ExpFamilySpec stripped = model->family();
    stripped.mean_stat = nullptr;
    CHECK_THROWS_AS(s_zero(stripped, Eigen::Vector2d(0.4, -0.1)),
                    unsupported_spec);
}

TEST_CASE("log posterior reduces to the prior at n = 0") {
    auto model = make_gaussian_location(1.0, 0.3, 0.0, 1.0);
    const PosteriorKernelSpec kernel =
        model->kernel(0.0, Eigen::VectorXd::Zero(1));
    Eigen::VectorXd theta(1);
    theta << 0.7;
    CHECK(log_posterior_unnorm(kernel, theta) ==
          model->log_prior_density(theta));
}

TEST_CASE("log posterior is -infinity outside the admissible region") {
    auto model = make_multinomial(3, Eigen::Vector2d(0.5, 0.3), 2.0);
    Eigen::VectorXd b(3);
    b << 0.5, 0.25, 0.25;
    const PosteriorKernelSpec kernel = model->kernel(8.0, b);
    Eigen::VectorXd outside(2);
    outside << 0.8, 0.4;
    CHECK(log_posterior_unnorm(kernel, outside) ==
          -std::numeric_limits<double>::infinity());
    outside << -0.1, 0.4;
    CHECK(log_posterior_unnorm(kernel, outside) ==
          -std::numeric_limits<double>::infinity());
}

TEST_CASE("kernel spec validation rejects malformed inputs") {
    auto model = make_gaussian_location(1.0, 0.3, 0.0, 1.0);
    PosteriorKernelSpec kernel = model->kernel(4.0, Eigen::VectorXd::Zero(1));

    PosteriorKernelSpec no_family = kernel;
    no_family.family = nullptr;
    CHECK_THROWS_AS(no_family.validate(), invalid_spec);

    PosteriorKernelSpec bad_n = kernel;
    bad_n.n = -1.0;
    CHECK_THROWS_AS(bad_n.validate(), invalid_parameter);

    PosteriorKernelSpec bad_b = kernel;
    bad_b.b = Eigen::VectorXd::Zero(2);
    CHECK_THROWS_AS(bad_b.validate(), invalid_input);

    Eigen::VectorXd wrong_dim(2);
    wrong_dim << 0.1, 0.2;
    CHECK_THROWS_AS(log_posterior_unnorm(kernel, wrong_dim), invalid_input);
}

TEST_CASE("location-family kernel matches the conjugate posterior pointwise") {
    auto model = make_gaussian_location(1.0, 0.3, 0.0, 1.0);
    SuffStat stat;
    stat.n = 4.0;
    stat.value = Eigen::VectorXd::Constant(1, 0.5);
    const auto post = model->conjugate_posterior(stat);
    REQUIRE(post.has_value());
    CHECK(post->mean()(0) == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(post->covariance()(0, 0) == doctest::Approx(0.2).epsilon(1e-14));

    // Unnormalized kernel and exact posterior log density must differ by a
    // theta-independent constant.
    const PosteriorKernelSpec kernel = model->kernel(stat.n, stat.value);
    const double var = post->covariance()(0, 0);
    const double mean = post->mean()(0);
    RngStream rng{91, 2};
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int i = 0; i < 20; ++i) {
        Eigen::VectorXd theta(1);
        theta << rng.uniform(-3.0, 3.0);
        const double exact =
            -0.5 * (theta[0] - mean) * (theta[0] - mean) / var;
        const double diff = log_posterior_unnorm(kernel, theta) - exact;
        lo = std::min(lo, diff);
        hi = std::max(hi, diff);
    }
    CHECK(hi - lo < 1e-10);
}

TEST_CASE("categorical KL matches its closed form and is asymmetric") {
    Eigen::VectorXd a(1), b(1);
    a << 0.5;
    b << 0.25;
    const double forward = multinomial_kl(a, b);
    const double backward = multinomial_kl(b, a);
    CHECK(forward ==
          doctest::Approx(0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0))
              .epsilon(1e-12));
    CHECK(forward == doctest::Approx(0.143841).epsilon(1e-5));
    CHECK(backward == doctest::Approx(0.130812).epsilon(1e-5));
    CHECK(forward != backward);

    auto model = make_multinomial(2, a, 2.0);
    CHECK(kl_divergence(*model, a, b) == doctest::Approx(forward).epsilon(1e-12));
    CHECK(kl_divergence(*model, a, a) == 0.0);
}

TEST_CASE("logistic KL closed form agrees with direct quadrature") {
    auto model = make_finite_logistic(Eigen::Vector2d(1.0, -0.5),
                                      Eigen::Vector2d(0.0, 0.0),
                                      Eigen::Vector2d(1.0, 1.0));
    const Eigen::Vector2d ta(0.8, 0.2);
    const Eigen::Vector2d tb(-0.3, 0.6);
    const double closed = kl_divergence(*model, ta, tb);
    const double direct = integrate_adaptive(
        [&](double x) {
            Eigen::VectorXd xv(1);
            xv << x;
            const double la = model->log_density(xv, ta);
            const double lb = model->log_density(xv, tb);
            return std::exp(la) * (la - lb);
        },
        0.0, 1.0, 1e-12);
    CHECK(closed == doctest::Approx(direct).epsilon(1e-7));
    CHECK(closed > 0.0);
}

TEST_CASE("kernel and KL posterior representations agree up to a constant") {
    RngStream rng{2026, 8};

    SUBCASE("logistic density family") {
        auto model = make_finite_logistic(Eigen::Vector2d(1.0, -0.5),
                                          Eigen::Vector2d(0.0, 0.0),
                                          Eigen::Vector2d(1.0, 1.0));
        const Eigen::Vector2d theta_b(0.3, -0.2);
        const Eigen::VectorXd b = model->stat_mean_at(theta_b);
        std::vector<Eigen::VectorXd> thetas;
        for (int i = 0; i < 100; ++i) {
            thetas.push_back(Eigen::Vector2d(rng.uniform(-2.0, 2.0),
                                             rng.uniform(-2.0, 2.0)));
        }
        CHECK(kl_representation_residual(*model, 7.0, b, theta_b, thetas) <
              1e-9);
    }

    SUBCASE("categorical family") {
        auto model = make_multinomial(3, Eigen::Vector2d(0.5, 0.3), 2.0);
        const Eigen::Vector2d theta_b(0.4, 0.35);
        const Eigen::VectorXd b = model->stat_mean_at(theta_b);
        std::vector<Eigen::VectorXd> thetas;
        while (thetas.size() < 100) {
            const double x = rng.uniform01();
            const double y = rng.uniform01();
            if (x + y < 0.98 && x > 0.01 && y > 0.01) {
                thetas.push_back(Eigen::Vector2d(x, y));
            }
        }
        CHECK(kl_representation_residual(*model, 10.0, b, theta_b, thetas) <
              1e-9);
    }
}

TEST_CASE("family validation catches structural errors") {
    ExpFamilySpec spec = bare_sine_family();
    spec.support_hi = spec.support_lo;
    CHECK_THROWS_AS(spec.validate(), invalid_spec);

    ExpFamilySpec no_beta = bare_sine_family();
    no_beta.beta = nullptr;
    CHECK_THROWS_AS(no_beta.validate(), invalid_spec);

    ExpFamilySpec bad_radius = bare_sine_family();
    bad_radius.admissible_radius = 0.0;
    CHECK_THROWS_AS(bad_radius.validate(), invalid_spec);
}
