#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "pcrlab/errors.hpp"
#include "pcrlab/measure.hpp"
#include "pcrlab/rng.hpp"

using namespace pcrlab;

namespace {

std::vector<double> uniform_draws(std::size_t n, RngStream& rng) {
    std::vector<double> xs(n);
    for (auto& x : xs) x = rng.uniform01();
    return xs;
}

EmpiricalMeasure random_weighted_measure(std::size_t n, RngStream& rng) {
    std::vector<double> xs(n), ws(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = rng.normal();
        ws[i] = 0.1 + rng.uniform01();
        total += ws[i];
    }
    for (auto& w : ws) w /= total;
    return EmpiricalMeasure(xs, ws);
}

double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace

TEST_CASE("wasserstein_1d identity is zero") {
    EmpiricalMeasure a({0.3, 1.7, -2.0, 0.4});
    CHECK(wasserstein_1d(a, a, 2.0) == doctest::Approx(0.0));
    CHECK(wasserstein_1d(a, a, 1.0) == doctest::Approx(0.0));
}

TEST_CASE("wasserstein_1d dirac at 0.5 against uniform[0,1]") {
    EmpiricalMeasure a({0.5});
    auto b = QuantileMeasure::uniform(0.0, 1.0);
    const double w = wasserstein_1d(a, b, 2.0);
    CHECK(w == doctest::Approx(std::sqrt(1.0 / 12.0)).epsilon(1e-6));
}

TEST_CASE("wasserstein_1d parameter and input validation") {
    EmpiricalMeasure a({0.5});
    CHECK_THROWS_AS(wasserstein_1d(a, a, 0.5), invalid_parameter);
    CHECK_THROWS_AS(EmpiricalMeasure(std::vector<double>{}), invalid_input);
    CHECK_THROWS_AS(EmpiricalMeasure({1.0, std::nan("")}), invalid_input);
}

TEST_CASE("empirical uniform[0,1] converges at the n^{-1/2} rate") {
    const std::vector<std::size_t> ladder = {100, 1000, 10000, 100000};
    const int reps = 24;
    auto mu0 = QuantileMeasure::uniform(0.0, 1.0);
    std::vector<double> logn, logw;
    for (std::size_t li = 0; li < ladder.size(); ++li) {
        double acc = 0.0;
        for (int r = 0; r < reps; ++r) {
            RngStream rng{7u, static_cast<std::uint64_t>(li),
                          static_cast<std::uint64_t>(r)};
            EmpiricalMeasure emp(uniform_draws(ladder[li], rng));
            acc += wasserstein_1d(emp, mu0, 2.0);
        }
        logn.push_back(std::log(static_cast<double>(ladder[li])));
        logw.push_back(std::log(acc / reps));
    }
    const double slope = ols_slope(logn, logw);
    CHECK(slope == doctest::Approx(-0.5).epsilon(0.1)); // -0.5 +/- 0.05
    CHECK(std::abs(slope + 0.5) < 0.05);
}

TEST_CASE("wasserstein_to_dirac basics") {
    Eigen::VectorXd theta0(1);
    theta0 << 0.0;

    WeightedPointCloud identity;
    identity.points = {theta0};
    CHECK(wasserstein_to_dirac(identity, theta0, 2.0) == doctest::Approx(0.0));
    CHECK(wasserstein_to_dirac(identity, theta0, 3.5) == doctest::Approx(0.0));

    WeightedPointCloud two;
    Eigen::VectorXd p0(1), p2(1);
    p0 << 0.0;
    p2 << 2.0;
    two.points = {p0, p2};
    two.weights = {0.5, 0.5};
    CHECK(wasserstein_to_dirac(two, theta0, 2.0) ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("wasserstein_to_dirac dimension mismatch") {
    WeightedPointCloud cloud;
    Eigen::VectorXd p(2);
    p << 0.0, 1.0;
    cloud.points = {p};
    Eigen::VectorXd theta0(1);
    theta0 << 0.0;
    CHECK_THROWS_AS(wasserstein_to_dirac(cloud, theta0, 2.0), invalid_input);
}

TEST_CASE("wasserstein_to_dirac matches gaussian second moment") {
    const double s = 0.7;
    RngStream rng{11u};
    WeightedPointCloud cloud;
    cloud.points.reserve(100000);
    Eigen::VectorXd theta0(1);
    theta0 << 1.3;
    for (int i = 0; i < 100000; ++i) {
        Eigen::VectorXd pt(1);
        pt << theta0[0] + s * rng.normal();
        cloud.points.push_back(pt);
    }
    const double w = wasserstein_to_dirac(cloud, theta0, 2.0);
    CHECK(std::abs(w - s) / s < 0.01);
}

TEST_CASE("moment_p closed forms and quadrature") {
    EmpiricalMeasure dirac0({0.0});
    CHECK(moment_p(dirac0, 2.0) == doctest::Approx(0.0));

    auto u01 = QuantileMeasure::uniform(0.0, 1.0);
    CHECK(moment_p(u01, 2.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(moment_p(u01, 4.0) == doctest::Approx(1.0 / 5.0).epsilon(1e-12));

    // Force the quadrature path by hiding the closed form.
    QuantileMeasure u01_quad([](double u) { return u; });
    CHECK(moment_p(u01_quad, 2.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
    CHECK(moment_p(u01_quad, 4.0) == doctest::Approx(1.0 / 5.0).epsilon(1e-6));
}

TEST_CASE("triangle inequality on weighted triples") {
    RngStream rng{23u};
    for (int trial = 0; trial < 20; ++trial) {
        auto a = random_weighted_measure(40, rng);
        auto b = random_weighted_measure(25, rng);
        auto c = random_weighted_measure(33, rng);
        for (double p : {1.0, 2.0, 3.0}) {
            const double ac = wasserstein_1d(a, c, p);
            const double ab = wasserstein_1d(a, b, p);
            const double bc = wasserstein_1d(b, c, p);
            CHECK(ac <= ab + bc + 1e-9);
        }
    }
}

TEST_CASE("monotonicity in the order p") {
    RngStream rng{31u};
    for (int trial = 0; trial < 10; ++trial) {
        auto a = random_weighted_measure(30, rng);
        auto b = random_weighted_measure(47, rng);
        double prev = wasserstein_1d(a, b, 1.0);
        for (double p : {1.5, 2.0, 3.0, 4.0}) {
            const double cur = wasserstein_1d(a, b, p);
            CHECK(prev <= cur + 1e-12);
            prev = cur;
        }
    }
}

TEST_CASE("scale equivariance") {
    RngStream rng{37u};
    auto xs = uniform_draws(64, rng);
    auto ys = uniform_draws(64, rng);
    EmpiricalMeasure a(xs), b(ys);
    const double base = wasserstein_1d(a, b, 2.0);

    // Power-of-two scale: exact in floating point.
    std::vector<double> xs4(xs), ys4(ys);
    for (auto& x : xs4) x *= 4.0;
    for (auto& y : ys4) y *= 4.0;
    CHECK(wasserstein_1d(EmpiricalMeasure(xs4), EmpiricalMeasure(ys4), 2.0) ==
          doctest::Approx(4.0 * base).epsilon(1e-15));

    std::vector<double> xs3(xs), ys3(ys);
    for (auto& x : xs3) x *= 3.0;
    for (auto& y : ys3) y *= 3.0;
    CHECK(wasserstein_1d(EmpiricalMeasure(xs3), EmpiricalMeasure(ys3), 2.0) ==
          doctest::Approx(3.0 * base).epsilon(1e-12));

    // Dirac-distance scaling, including theta0.
    WeightedPointCloud cloud;
    for (int i = 0; i < 16; ++i) {
        Eigen::VectorXd pt(2);
        pt << rng.normal(), rng.normal();
        cloud.points.push_back(pt);
    }
    Eigen::VectorXd theta0(2);
    theta0 << 0.2, -0.4;
    const double d = wasserstein_to_dirac(cloud, theta0, 2.0);
    WeightedPointCloud scaled;
    for (const auto& pt : cloud.points) scaled.points.push_back(4.0 * pt);
    CHECK(wasserstein_to_dirac(scaled, 4.0 * theta0, 2.0) ==
          doctest::Approx(4.0 * d).epsilon(1e-15));
}

TEST_CASE("quantile grid agrees with sorted pairing for equal weights") {
    RngStream rng{41u};
    for (std::size_t m : {8u, 64u, 512u}) {
        auto xs = uniform_draws(m, rng);
        auto ys = uniform_draws(m, rng);
        EmpiricalMeasure a(xs), b(ys);
        const double exact = wasserstein_1d(a, b, 2.0);

        // Same atoms with explicit equal weights take the grid path.
        std::vector<double> w(m, 1.0 / static_cast<double>(m));
        EmpiricalMeasure aw(xs, w), bw(ys, w);
        const double grid = wasserstein_1d(aw, bw, 2.0);
        CHECK(grid == doctest::Approx(exact).epsilon(1e-6));
    }
}

TEST_CASE("weight hygiene: pruning and validation") {
    // Sub-1e-15 weights are pruned and the rest renormalized.
    std::vector<double> xs = {0.0, 1.0, 2.0};
    std::vector<double> ws = {0.5 - 5e-17, 0.5 - 5e-17, 1e-16};
    EmpiricalMeasure m(xs, ws);
    CHECK(m.size() == 2);
    CHECK(m.weights()[0] == doctest::Approx(0.5).epsilon(1e-12));

    CHECK_THROWS_AS(EmpiricalMeasure({0.0, 1.0}, {0.6, 0.6}), invalid_input);
    CHECK_THROWS_AS(EmpiricalMeasure({0.0, 1.0}, {-0.2, 1.2}), invalid_input);
}
