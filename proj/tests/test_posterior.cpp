#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Core>

#include "pcrlab/errors.hpp"
#include "pcrlab/models.hpp"
#include "pcrlab/posterior.hpp"
#include "pcrlab/rng.hpp"

using namespace pcrlab;

namespace {

Eigen::VectorXd vec1(double x) {
    Eigen::VectorXd v(1);
    v << x;
    return v;
}

Eigen::VectorXd vec2(double x, double y) {
    Eigen::VectorXd v(2);
    v << x, y;
    return v;
}

SamplerConfig config_for(PosteriorMethod method) {
    SamplerConfig cfg;
    cfg.method = method;
    return cfg;
}

} // namespace

TEST_CASE("method names round-trip and unknown names are rejected") {
    for (auto m : {PosteriorMethod::Exact, PosteriorMethod::Grid,
                   PosteriorMethod::Importance, PosteriorMethod::Mcmc}) {
        CHECK(posterior_method_from_string(to_string(m)) == m);
    }
    CHECK_THROWS_AS(posterior_method_from_string("quadrature"),
                    invalid_parameter);
}

TEST_CASE("sampler configuration rejects out-of-range values") {
    SamplerConfig cfg;
    CHECK_NOTHROW(cfg.validate());

    SamplerConfig bad = cfg;
    bad.grid_nodes = 64;
    CHECK_THROWS_AS(bad.validate(), invalid_parameter);
    bad = cfg;
    bad.coarse_nodes = 16;
    CHECK_THROWS_AS(bad.validate(), invalid_parameter);
    bad = cfg;
    bad.draws = 10;
    CHECK_THROWS_AS(bad.validate(), invalid_parameter);
    bad = cfg;
    bad.method = PosteriorMethod::Mcmc;
    bad.draws = 5000;
    CHECK_THROWS_AS(bad.validate(), invalid_parameter);
    bad = cfg;
    bad.chains = 1;
    CHECK_THROWS_AS(bad.validate(), invalid_parameter);
    bad = cfg;
    bad.burn_fraction = 1.0;
    CHECK_THROWS_AS(bad.validate(), invalid_parameter);
    bad = cfg;
    bad.target_accept = 0.0;
    CHECK_THROWS_AS(bad.validate(), invalid_parameter);
    bad = cfg;
    bad.p = 0.5;
    CHECK_THROWS_AS(bad.validate(), invalid_parameter);
    bad = cfg;
    bad.moment_a = 1.0;
    CHECK_THROWS_AS(bad.validate(), invalid_parameter);
}

TEST_CASE("exact summary matches the scalar gaussian update") {
    const double sigma = 1.5;
    const double theta0 = 0.3;
    const double pm = 0.5;
    const double pv = 2.0;
    const double n = 50.0;
    const double b = 0.42;

    auto model = make_gaussian_location(sigma, theta0, pm, pv);
    const auto est = estimate_posterior(*model, n, vec1(b),
                                        config_for(PosteriorMethod::Exact),
                                        RngStream{11});

    const double prec = 1.0 / pv + n / (sigma * sigma);
    const double vstar = 1.0 / prec;
    const double mstar = (pm / pv + n * b / (sigma * sigma)) / prec;

    CHECK(est.method == PosteriorMethod::Exact);
    CHECK(est.mean[0] == doctest::Approx(mstar).epsilon(1e-12));
    CHECK(est.cov(0, 0) == doctest::Approx(vstar).epsilon(1e-12));
    const double d = mstar - theta0;
    CHECK(est.moment_p == doctest::Approx(vstar + d * d).epsilon(1e-12));
    CHECK(est.eps == doctest::Approx(std::sqrt(vstar + d * d)).epsilon(1e-12));
    const double fourth =
        3.0 * vstar * vstar + 6.0 * vstar * mstar * mstar +
        mstar * mstar * mstar * mstar;
    CHECK(est.moment_ap == doctest::Approx(fourth).epsilon(1e-12));
    CHECK(!est.flagged);
}

TEST_CASE("exact summary on counts reproduces beta moments") {
    // Frequencies (0.7, 0.3) with n = 10 and a flat-2 Dirichlet prior give a
    // Beta(9, 5) marginal on the free coordinate.
    auto model = make_multinomial(2, vec1(0.6), 2.0);
    const auto est = estimate_posterior(*model, 10.0, vec2(0.7, 0.3),
                                        config_for(PosteriorMethod::Exact),
                                        RngStream{17});

    const double mean = 9.0 / 14.0;
    const double var = 45.0 / (14.0 * 14.0 * 15.0);
    const double d = mean - 0.6;
    CHECK(est.mean[0] == doctest::Approx(mean).epsilon(1e-12));
    CHECK(est.moment_p == doctest::Approx(var + d * d).epsilon(1e-12));

    // The fourth moment has no closed form in this branch and falls back to
    // posterior draws; E[theta^4] for Beta(9, 5) is the rising-factorial
    // ratio 11880 / 57120.
    const double oracle = 11880.0 / 57120.0;
    CHECK(est.moment_ap == doctest::Approx(oracle).epsilon(0.02));
}

TEST_CASE("grid summary reproduces the beta conjugate posterior") {
    auto model = make_multinomial(2, vec1(0.6), 2.0);
    const Eigen::VectorXd b = vec2(0.7, 0.3);
    const auto exact = estimate_posterior(
        *model, 10.0, b, config_for(PosteriorMethod::Exact), RngStream{1});
    const auto grid = estimate_posterior(
        *model, 10.0, b, config_for(PosteriorMethod::Grid), RngStream{1});

    CHECK(grid.method == PosteriorMethod::Grid);
    CHECK(!grid.flagged);
    CHECK(grid.mean[0] == doctest::Approx(exact.mean[0]).epsilon(1e-8));
    CHECK(grid.moment_p == doctest::Approx(exact.moment_p).epsilon(1e-7));
    CHECK(grid.eps == doctest::Approx(exact.eps).epsilon(1e-7));
    CHECK(grid.cov(0, 0) == doctest::Approx(exact.cov(0, 0)).epsilon(1e-6));
}

TEST_CASE("grid summary reproduces a two dimensional dirichlet posterior") {
    auto model = make_multinomial(3, vec2(0.5, 0.25), 2.0);
    Eigen::VectorXd b(3);
    b << 0.5, 0.25, 0.25;
    const auto exact = estimate_posterior(
        *model, 12.0, b, config_for(PosteriorMethod::Exact), RngStream{2});
    const auto grid = estimate_posterior(
        *model, 12.0, b, config_for(PosteriorMethod::Grid), RngStream{2});

    CHECK(!grid.flagged);
    for (int d = 0; d < 2; ++d) {
        CHECK(grid.mean[d] == doctest::Approx(exact.mean[d]).epsilon(1e-6));
    }
    CHECK(grid.moment_p == doctest::Approx(exact.moment_p).epsilon(1e-5));
    CHECK(grid.moment_ap == doctest::Approx(exact.moment_ap).epsilon(0.02));
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            CHECK(grid.cov(i, j) ==
                  doctest::Approx(exact.cov(i, j)).epsilon(1e-4));
        }
    }
}

TEST_CASE("grid summary is near machine accurate on a gaussian posterior") {
    auto model = make_gaussian_location(1.5, 0.3, 0.5, 2.0);
    const Eigen::VectorXd b = vec1(0.42);
    const auto exact = estimate_posterior(
        *model, 50.0, b, config_for(PosteriorMethod::Exact), RngStream{3});
    const auto grid = estimate_posterior(
        *model, 50.0, b, config_for(PosteriorMethod::Grid), RngStream{3});

    CHECK(!grid.flagged);
    CHECK(grid.mean[0] == doctest::Approx(exact.mean[0]).epsilon(1e-10));
    CHECK(grid.moment_p == doctest::Approx(exact.moment_p).epsilon(1e-10));
    CHECK(grid.moment_ap == doctest::Approx(exact.moment_ap).epsilon(1e-10));
}

TEST_CASE("grid summary is deterministic") {
    auto model = make_gaussian_location(1.5, 0.3, 0.5, 2.0);
    const Eigen::VectorXd b = vec1(0.42);
    const auto a = estimate_posterior(
        *model, 50.0, b, config_for(PosteriorMethod::Grid), RngStream{4});
    const auto c = estimate_posterior(
        *model, 50.0, b, config_for(PosteriorMethod::Grid), RngStream{99});
    CHECK(a.eps == c.eps);
    CHECK(a.moment_ap == c.moment_ap);
    CHECK(a.mean[0] == c.mean[0]);
}

TEST_CASE("grid summary at n zero returns prior moments") {
    const double pm = 0.5;
    const double pv = 2.0;
    const double theta0 = 0.3;
    auto model = make_gaussian_location(1.5, theta0, pm, pv);
    const auto est = estimate_posterior(*model, 0.0, vec1(0.0),
                                        config_for(PosteriorMethod::Grid),
                                        RngStream{5});
    const double d = pm - theta0;
    CHECK(est.mean[0] == doctest::Approx(pm).epsilon(1e-8));
    CHECK(est.moment_p == doctest::Approx(pv + d * d).epsilon(1e-8));
}

TEST_CASE("grid summary flags mass stuck on the search boundary") {
    auto model = make_gaussian_location(1.5, 0.3, 0.5, 2.0);
    const auto est = estimate_posterior(*model, 50.0, vec1(100.0),
                                        config_for(PosteriorMethod::Grid),
                                        RngStream{6});
    CHECK(est.flagged);
    CHECK(est.flag_reason.find("boundary") != std::string::npos);
}

TEST_CASE("exact summaries require a conjugate form") {
    auto model = make_finite_logistic(vec2(0.3, -0.2), vec2(0.0, 0.0),
                                      vec2(1.0, 1.0));
    CHECK_THROWS_AS(estimate_posterior(*model, 10.0, vec2(0.1, 0.1),
                                       config_for(PosteriorMethod::Exact),
                                       RngStream{7}),
                    unsupported_spec);
}

TEST_CASE("importance summary agrees with the exact posterior") {
    auto model = make_gaussian_location(1.5, 0.3, 0.5, 2.0);
    const Eigen::VectorXd b = vec1(0.42);
    const auto exact = estimate_posterior(
        *model, 50.0, b, config_for(PosteriorMethod::Exact), RngStream{8});

    SamplerConfig cfg = config_for(PosteriorMethod::Importance);
    cfg.draws = 8000;
    const auto imp = estimate_posterior(*model, 50.0, b, cfg, RngStream{8});

    CHECK(imp.ess > 200.0);
    CHECK(!imp.flagged);
    CHECK(imp.mean[0] == doctest::Approx(exact.mean[0]).epsilon(0.02));
    CHECK(imp.moment_p == doctest::Approx(exact.moment_p).epsilon(0.10));
    CHECK(imp.moment_ap == doctest::Approx(exact.moment_ap).epsilon(0.10));
}

TEST_CASE("importance effective size decays as the posterior concentrates") {
    auto model = make_gaussian_location(1.5, 0.3, 0.5, 2.0);
    SamplerConfig cfg = config_for(PosteriorMethod::Importance);
    cfg.draws = 2000;

    auto median_ess = [&](double n) {
        std::vector<double> ess;
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const auto est = estimate_posterior(*model, n, vec1(0.35), cfg,
                                                RngStream{90, seed});
            ess.push_back(est.ess);
        }
        std::nth_element(ess.begin(), ess.begin() + 10, ess.end());
        return ess[10];
    };

    CHECK(median_ess(10.0) > median_ess(1000.0));
}

TEST_CASE("importance summary flags a collapsed weight spectrum") {
    auto model = make_gaussian_location(1.5, 0.3, 0.5, 2.0);
    SamplerConfig cfg = config_for(PosteriorMethod::Importance);
    cfg.draws = 256;
    const auto est =
        estimate_posterior(*model, 5000.0, vec1(0.35), cfg, RngStream{10});
    CHECK(est.flagged);
    CHECK(est.ess < 50.0);
}

TEST_CASE("mcmc summary agrees with the exact posterior") {
    auto model = make_gaussian_location(1.5, 0.3, 0.5, 2.0);
    const Eigen::VectorXd b = vec1(0.42);
    const auto exact = estimate_posterior(
        *model, 50.0, b, config_for(PosteriorMethod::Exact), RngStream{12});

    SamplerConfig cfg = config_for(PosteriorMethod::Mcmc);
    const auto mc = estimate_posterior(*model, 50.0, b, cfg, RngStream{12});

    CHECK(mc.rhat < 1.05);
    CHECK(mc.ess > 100.0);
    CHECK(!mc.flagged);
    CHECK(mc.accept_rate > 0.1);
    CHECK(mc.accept_rate < 0.5);

    // Three standard errors, with the sampling variance of (theta - theta0)^2
    // taken from the exact posterior.
    const double v = exact.cov(0, 0);
    const double d = exact.mean[0] - 0.3;
    const double se =
        std::sqrt((2.0 * v * v + 4.0 * v * d * d) / mc.ess);
    CHECK(std::abs(mc.moment_p - exact.moment_p) < 3.0 * se);
    CHECK(mc.mean[0] == doctest::Approx(exact.mean[0]).epsilon(0.02));
    CHECK(mc.moment_ap == doctest::Approx(exact.moment_ap).epsilon(0.10));
}

TEST_CASE("mcmc summary is bit deterministic given the stream") {
    auto model = make_finite_logistic(vec2(0.3, -0.2), vec2(0.0, 0.0),
                                      vec2(1.0, 1.0));
    SamplerConfig cfg = config_for(PosteriorMethod::Mcmc);
    cfg.draws = 10000;
    const Eigen::VectorXd b = model->stat_mean_at(model->theta0());

    const auto a = estimate_posterior(*model, 30.0, b, cfg, RngStream{42, 7});
    const auto c = estimate_posterior(*model, 30.0, b, cfg, RngStream{42, 7});
    CHECK(a.eps == c.eps);
    CHECK(a.moment_ap == c.moment_ap);
    CHECK(a.mean[0] == c.mean[0]);
    CHECK(a.mean[1] == c.mean[1]);
    CHECK(a.rhat == c.rhat);
    CHECK(a.ess == c.ess);
}

TEST_CASE("mcmc and grid agree on a two dimensional density model") {
    auto model = make_finite_logistic(vec2(0.3, -0.2), vec2(0.0, 0.0),
                                      vec2(1.0, 1.0));
    const Eigen::VectorXd b = model->stat_mean_at(model->theta0());

    const auto grid = estimate_posterior(
        *model, 30.0, b, config_for(PosteriorMethod::Grid), RngStream{13});
    SamplerConfig cfg = config_for(PosteriorMethod::Mcmc);
    const auto mc = estimate_posterior(*model, 30.0, b, cfg, RngStream{13});

    CHECK(!grid.flagged);
    CHECK(mc.rhat < 1.05);
    CHECK(mc.moment_p == doctest::Approx(grid.moment_p).epsilon(0.15));
    CHECK(std::abs(mc.mean[0] - grid.mean[0]) < 0.05);
    CHECK(std::abs(mc.mean[1] - grid.mean[1]) < 0.05);
}

TEST_CASE("mcmc runs the truncated sequence model") {
    auto model =
        make_infinite_logistic(4, Eigen::VectorXd::Zero(4), 1.5, 1.0);
    const Eigen::VectorXd b = model->stat_mean_at(model->theta0());
    SamplerConfig cfg = config_for(PosteriorMethod::Mcmc);
    cfg.draws = 10000;
    const auto est = estimate_posterior(*model, 20.0, b, cfg, RngStream{14});
    CHECK(std::isfinite(est.eps));
    CHECK(est.eps > 0.0);
    CHECK(est.moment_ap > 0.0);
    CHECK(est.rhat < 1.25);
}

TEST_CASE("posterior spread shrinks along the observation ladder") {
    auto model = make_gaussian_location(1.5, 0.3, 0.5, 2.0);
    const Eigen::VectorXd b = vec1(0.3);
    double last = std::numeric_limits<double>::infinity();
    for (double n : {10.0, 100.0, 1000.0}) {
        const auto est = estimate_posterior(
            *model, n, b, config_for(PosteriorMethod::Grid), RngStream{15});
        CHECK(est.eps < last);
        last = est.eps;
    }
}

TEST_CASE("grid summaries stop at two dimensions") {
    Eigen::VectorXd theta0(3);
    theta0 << 0.3, 0.25, 0.25;
    auto model = make_multinomial(4, theta0, 2.0);
    Eigen::VectorXd b(4);
    b << 0.3, 0.25, 0.25, 0.2;
    CHECK_THROWS_AS(estimate_posterior(*model, 10.0, b,
                                       config_for(PosteriorMethod::Grid),
                                       RngStream{20}),
                    unsupported_spec);
}

TEST_CASE("grid second moment matches the beta formula about any center") {
    // Counts (7, 3) under the flat-2 prior give Beta(9, 5); its second moment
    // about t is var + (mean - t)^2.
    const double mean = 9.0 / 14.0;
    const double var = 45.0 / (14.0 * 14.0 * 15.0);
    for (double t : {0.2, 0.6, 0.9}) {
        auto model = make_multinomial(2, vec1(t), 2.0);
        const auto grid = estimate_posterior(*model, 10.0, vec2(0.7, 0.3),
                                             config_for(PosteriorMethod::Grid),
                                             RngStream{21});
        const double d = mean - t;
        CHECK(grid.moment_p == doctest::Approx(var + d * d).epsilon(1e-8));
    }
}

TEST_CASE("importance at n zero reduces to plain prior monte carlo") {
    auto model = make_gaussian_location(1.5, 0.3, 0.5, 2.0);
    SamplerConfig cfg = config_for(PosteriorMethod::Importance);
    cfg.draws = 1000;
    const auto est =
        estimate_posterior(*model, 0.0, vec1(0.0), cfg, RngStream{22});

    RngStream replay{22};
    double acc = 0.0;
    for (int i = 0; i < cfg.draws; ++i) {
        const Eigen::VectorXd theta = model->sample_prior(replay);
        acc += (theta[0] - 0.3) * (theta[0] - 0.3);
    }
    CHECK(est.ess == doctest::Approx(cfg.draws).epsilon(1e-12));
    CHECK(est.moment_p == doctest::Approx(acc / cfg.draws).epsilon(1e-13));
}

TEST_CASE("mcmc at n zero recovers the prior coefficient means") {
    auto model = make_finite_logistic(vec2(0.3, -0.2), vec2(0.4, -0.1),
                                      vec2(1.0, 1.0));
    SamplerConfig cfg = config_for(PosteriorMethod::Mcmc);
    const auto est =
        estimate_posterior(*model, 0.0, vec2(0.0, 0.0), cfg, RngStream{23});

    CHECK(est.rhat < 1.05);
    const double tol = 4.0 / std::sqrt(est.ess);
    CHECK(std::abs(est.mean[0] - 0.4) < tol);
    CHECK(std::abs(est.mean[1] + 0.1) < tol);
}

TEST_CASE("mcmc matches importance on the larger truncated model") {
    auto model =
        make_infinite_logistic(16, Eigen::VectorXd::Zero(16), 1.5, 1.0);
    const Eigen::VectorXd b = model->stat_mean_at(model->theta0());

    auto seed_stats = [&](PosteriorMethod method, int draws) {
        SamplerConfig cfg = config_for(method);
        cfg.draws = draws;
        std::vector<double> vals;
        for (std::uint64_t s = 0; s < 4; ++s) {
            vals.push_back(
                estimate_posterior(*model, 10.0, b, cfg, RngStream{24, s})
                    .moment_p);
        }
        double m = 0.0;
        for (double v : vals) m += v / vals.size();
        double sq = 0.0;
        for (double v : vals) sq += (v - m) * (v - m);
        const double se = std::sqrt(sq / (vals.size() - 1.0) / vals.size());
        return std::pair<double, double>{m, se};
    };

    const auto [m_mc, se_mc] = seed_stats(PosteriorMethod::Mcmc, 10000);
    const auto [m_imp, se_imp] = seed_stats(PosteriorMethod::Importance, 8000);
    const double tol = std::max(
        4.0 * std::sqrt(se_mc * se_mc + se_imp * se_imp), 0.02 * m_imp);
    CHECK(std::abs(m_mc - m_imp) < tol);
}

TEST_CASE("all methods agree on every family that fits a grid") {
    struct Case {
        std::unique_ptr<StatModel> model;
        double n;
        Eigen::VectorXd b;
    };
    std::vector<Case> cases;
    cases.push_back({make_gaussian_location(1.5, 0.3, 0.5, 2.0), 50.0,
                     vec1(0.42)});
    {
        Eigen::VectorXd b(3);
        b << 0.5, 0.25, 0.25;
        cases.push_back({make_multinomial(3, vec2(0.5, 0.25), 2.0), 12.0, b});
    }
    {
        auto m = make_finite_logistic(vec2(0.3, -0.2), vec2(0.0, 0.0),
                                      vec2(1.0, 1.0));
        Eigen::VectorXd b = m->stat_mean_at(m->theta0());
        cases.push_back({std::move(m), 30.0, b});
    }
    {
        auto m = make_linreg(2, 0.0, 1.0, 0.8, vec2(0.6, -0.3),
                             vec2(0.0, 0.0), vec2(1.0, 1.0));
        Eigen::VectorXd b = m->stat_mean_at(m->theta0());
        cases.push_back({std::move(m), 25.0, b});
    }
    {
        auto m = make_infinite_logistic(2, vec2(0.2, -0.1), 1.5, 1.0);
        Eigen::VectorXd b = m->stat_mean_at(m->theta0());
        cases.push_back({std::move(m), 20.0, b});
    }

    auto seed_stats = [](const StatModel& model, double n,
                         const Eigen::VectorXd& b, PosteriorMethod method,
                         int draws, std::uint64_t salt) {
        SamplerConfig cfg = config_for(method);
        cfg.draws = draws;
        std::vector<double> vals;
        for (std::uint64_t s = 0; s < 10; ++s) {
            vals.push_back(
                estimate_posterior(model, n, b, cfg, RngStream{salt, s})
                    .moment_p);
        }
        double m = 0.0;
        for (double v : vals) m += v / vals.size();
        double sq = 0.0;
        for (double v : vals) sq += (v - m) * (v - m);
        const double se = std::sqrt(sq / (vals.size() - 1.0) / vals.size());
        return std::pair<double, double>{m, se};
    };

    for (const auto& c : cases) {
        CAPTURE(c.model->name());
        const auto grid = estimate_posterior(
            *c.model, c.n, c.b, config_for(PosteriorMethod::Grid),
            RngStream{25});
        const auto [m_imp, se_imp] =
            seed_stats(*c.model, c.n, c.b, PosteriorMethod::Importance, 4000,
                       26);
        const auto [m_mc, se_mc] =
            seed_stats(*c.model, c.n, c.b, PosteriorMethod::Mcmc, 10000, 27);

        const double floor = 0.03 * grid.moment_p;
        CHECK(std::abs(m_imp - grid.moment_p) <
              std::max(4.0 * se_imp, floor));
        CHECK(std::abs(m_mc - grid.moment_p) < std::max(4.0 * se_mc, floor));
        CHECK(std::abs(m_mc - m_imp) <
              std::max(4.0 * std::sqrt(se_mc * se_mc + se_imp * se_imp),
                       floor));
    }
}

TEST_CASE("mcmc mean matches the exact regression posterior") {
    auto model = make_linreg(2, 0.0, 1.0, 0.8, vec2(0.6, -0.3),
                             vec2(0.0, 0.0), vec2(1.0, 1.0));
    const Eigen::VectorXd b = model->stat_mean_at(model->theta0());
    const auto exact = estimate_posterior(
        *model, 40.0, b, config_for(PosteriorMethod::Exact), RngStream{28});
    SamplerConfig cfg = config_for(PosteriorMethod::Mcmc);
    const auto mc = estimate_posterior(*model, 40.0, b, cfg, RngStream{28});

    CHECK(mc.rhat < 1.05);
    for (int d = 0; d < 2; ++d) {
        const double se = std::sqrt(exact.cov(d, d) / mc.ess);
        CHECK(std::abs(mc.mean[d] - exact.mean[d]) < 3.0 * se);
    }
}

TEST_CASE("median posterior spread is nonincreasing for every family") {
    struct Case {
        std::unique_ptr<StatModel> model;
        PosteriorMethod method;
        int draws;
    };
    std::vector<Case> cases;
    cases.push_back({make_gaussian_location(1.5, 0.3, 0.5, 2.0),
                     PosteriorMethod::Exact, 2000});
    cases.push_back({make_multinomial(3, vec2(0.5, 0.25), 2.0),
                     PosteriorMethod::Exact, 2000});
    cases.push_back({make_linreg(2, 0.0, 1.0, 0.8, vec2(0.6, -0.3),
                                 vec2(0.0, 0.0), vec2(1.0, 1.0)),
                     PosteriorMethod::Exact, 2000});
    cases.push_back({make_finite_logistic(vec1(0.4), vec1(0.0), vec1(1.0)),
                     PosteriorMethod::Grid, 2000});
    cases.push_back({make_infinite_logistic(2, vec2(0.2, -0.1), 1.5, 1.0),
                     PosteriorMethod::Importance, 2000});

    const std::vector<double> ladder = {10.0, 50.0, 250.0};
    for (const auto& c : cases) {
        CAPTURE(c.model->name());
        SamplerConfig cfg = config_for(c.method);
        cfg.draws = c.draws;

        std::vector<double> medians;
        for (std::size_t j = 0; j < ladder.size(); ++j) {
            std::vector<double> vals;
            for (std::uint64_t rep = 0; rep < 50; ++rep) {
                RngStream rng{31, j, rep};
                const auto data = c.model->sample_data(
                    rng, static_cast<int>(ladder[j]), c.model->theta0());
                const SuffStat stat = c.model->suff_stat(data);
                const auto est = estimate_posterior(
                    *c.model, stat.n, stat.value, cfg, RngStream{32, j, rep});
                vals.push_back(est.moment_p);
            }
            std::nth_element(vals.begin(), vals.begin() + 25, vals.end());
            medians.push_back(vals[25]);
        }

        int inversions = 0;
        for (std::size_t j = 1; j < medians.size(); ++j) {
            if (medians[j] > medians[j - 1]) ++inversions;
        }
        CHECK(inversions <= 1);
    }
}
