#include "pcrlab/laplace.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "pcrlab/errors.hpp"
#include "pcrlab/parallel.hpp"
#include "pcrlab/quadrature.hpp"

namespace pcrlab {

Sequence Sequence::zero() { return Sequence(); }

Sequence Sequence::array(std::vector<double> values) {
    Sequence s;
    s.kind_ = Kind::Array;
    s.values_ = std::move(values);
    return s;
}

Sequence Sequence::power_law(double exponent, double scale) {
    Sequence s;
    s.kind_ = Kind::PowerLaw;
    s.exponent_ = exponent;
    s.scale_ = scale;
    return s;
}

Sequence Sequence::exponential(double power, double scale) {
    Sequence s;
    s.kind_ = Kind::Exponential;
    s.stretch_power_ = power;
    s.scale_ = scale;
    return s;
}

double Sequence::at(std::size_t k) const {
    switch (kind_) {
        case Kind::Zero:
            return 0.0;
        case Kind::Array:
            return k <= values_.size() ? values_[k - 1] : 0.0;
        case Kind::PowerLaw:
            return scale_ * std::pow(static_cast<double>(k), -exponent_);
        case Kind::Exponential:
            return scale_ *
                   std::exp(-std::pow(static_cast<double>(k), stretch_power_));
    }
    return 0.0;
}

bool Sequence::summable() const {
    switch (kind_) {
        case Kind::Zero:
        case Kind::Array:
            return true;
        case Kind::PowerLaw:
            return exponent_ > 1.0;
        case Kind::Exponential:
            return stretch_power_ > 0.0;
    }
    return false;
}

bool Sequence::positive() const {
    switch (kind_) {
        case Kind::Zero:
            return false;
        case Kind::Array:
            return std::all_of(values_.begin(), values_.end(),
                               [](double v) { return v > 0.0; });
        case Kind::PowerLaw:
        case Kind::Exponential:
            return scale_ > 0.0;
    }
    return false;
}

void SpectralDecay::validate() const {
    if (!lambda.positive()) {
        throw invalid_spec("lambda_k must be strictly positive");
    }
    if (!lambda.summable()) {
        throw invalid_spec("lambda_k is not trace class (sum diverges)");
    }
    if (!gamma.positive()) {
        throw invalid_spec("gamma_k must be strictly positive");
    }
    if (!eta.is_zero() && !eta.positive()) {
        throw invalid_spec("eta_k must be strictly positive");
    }
    if (!omega_sq.is_zero()) {
        if (omega_sq.kind() == Sequence::Kind::Array) {
            for (double v : omega_sq.values()) {
                if (v < 0.0) throw invalid_spec("omega_k^2 must be nonnegative");
            }
        }
        if (!omega_sq.summable()) {
            throw invalid_spec("omega_k^2 must be summable");
        }
    }
}

SpectralDecay SpectralDecay::power_family(double a, double b) {
    SpectralDecay s;
    s.lambda = Sequence::power_law(1.0 + a);
    s.gamma = Sequence::power_law(b);
    return s;
}

SpectralDecay SpectralDecay::power_family(double a, double b, double c) {
    SpectralDecay s = power_family(a, b);
    s.omega_sq = Sequence::power_law(1.0 + c);
    return s;
}

namespace {

constexpr std::size_t kPowerHeadMin = std::size_t{1} << 21;
constexpr std::size_t kExponentialCap = 2'000'000;

// Euler-Maclaurin closure for sum_{k >= k0} f(k) with smooth, eventually
// power-decaying f:  integral_{k0}^inf f + f(k0)/2 - f'(k0)/12.  The integral
// uses the substitution x = k0 e^s, under which the integrand decays like
// exp(-decay_rate * s).
double power_tail(const std::function<double(double)>& f, double k0,
                  double decay_rate) {
    const double s_max = std::max(1.0, 50.0 / decay_rate);
    static const GaussLegendre gl(512, 0.0, 1.0); // reference rule on [0,1]
    double integral = 0.0;
    for (std::size_t i = 0; i < gl.size(); ++i) {
        const double s = gl.nodes()[i] * s_max;
        const double x = k0 * std::exp(s);
        integral += gl.weights()[i] * s_max * f(x) * x;
    }
    const double h = 1e-6 * k0;
    const double fprime = (f(k0 + h) - f(k0 - h)) / (2.0 * h);
    return integral + 0.5 * f(k0) - fprime / 12.0;
}

struct SeriesTermFns {
    std::function<double(double)> t1; // lambda/(n lambda gamma + 1)
    std::function<double(double)> t2; // omega^2/(n lambda gamma + 1)^2
};

} // namespace

RatioSeries gaussian_ratio_series(double n, const SpectralDecay& spec,
                                  int workers) {
    if (n < 0.0) throw invalid_parameter("n must be nonnegative");
    spec.validate();

    const Sequence& lam = spec.lambda;
    const Sequence& gam = spec.gamma;
    const Sequence& omg = spec.omega_sq;

    auto term1_at = [&](std::size_t k) {
        const double l = lam.at(k);
        return l / (n * l * gam.at(k) + 1.0);
    };
    auto term2_at = [&](std::size_t k) {
        const double d = n * lam.at(k) * gam.at(k) + 1.0;
        return omg.at(k) / (d * d);
    };

    // Any explicit array makes the series finite at that array's length.
    const bool finite =
        lam.kind() == Sequence::Kind::Array ||
        gam.kind() == Sequence::Kind::Array ||
        (!omg.is_zero() && omg.kind() == Sequence::Kind::Array);
    if (finite) {
        std::size_t len = std::numeric_limits<std::size_t>::max();
        if (lam.kind() == Sequence::Kind::Array)
            len = std::min(len, lam.array_length());
        if (gam.kind() == Sequence::Kind::Array)
            len = std::min(len, gam.array_length());
        if (!omg.is_zero() && omg.kind() == Sequence::Kind::Array)
            len = std::min(len, omg.array_length());
        RatioSeries out{};
        out.series1 = parallel_term_sum(
            len, [&](std::size_t i) { return term1_at(i + 1); }, workers);
        out.series2 =
            omg.is_zero()
                ? 0.0
                : parallel_term_sum(
                      len, [&](std::size_t i) { return term2_at(i + 1); },
                      workers);
        return out;
    }

    if (lam.kind() == Sequence::Kind::Exponential) {
        // Terms fall below any floating-point scale within a few thousand
        // indices for stretch powers >= ~0.4; cap defensively.
        RatioSeries out{};
        double s1 = 0.0, s2 = 0.0;
        for (std::size_t k = 1; k <= kExponentialCap; ++k) {
            const double t1 = term1_at(k);
            const double t2 = omg.is_zero() ? 0.0 : term2_at(k);
            s1 += t1;
            s2 += t2;
            if (k >= 8 && t1 < 1e-300 && t2 < 1e-300) {
                out.series1 = s1;
                out.series2 = s2;
                return out;
            }
        }
        throw numeric_failure(
            "exponential eigenvalue series did not reach the floor within cap");
    }

    // Power-family lambda and gamma: certified head + Euler-Maclaurin tail.
    const double a = lam.exponent() - 1.0;
    const double b = gam.exponent();
    if (b < 0.0) throw invalid_spec("gamma power-law exponent must be >= 0");
    const double slsg = lam.scale() * gam.scale();
    const double k_cross =
        std::pow(std::max(n, 1.0) * slsg, 1.0 / (1.0 + a + b));
    const std::size_t head = std::max(
        kPowerHeadMin,
        static_cast<std::size_t>(std::ceil(64.0 * std::max(k_cross, 1.0))));

    RatioSeries out{};
    out.series1 = parallel_term_sum(
        head, [&](std::size_t i) { return term1_at(i + 1); }, workers);

    auto f1 = [&](double x) {
        const double l = lam.scale() * std::pow(x, -(1.0 + a));
        const double g = gam.scale() * std::pow(x, -b);
        return l / (n * l * g + 1.0);
    };
    out.series1 += power_tail(f1, static_cast<double>(head) + 1.0, a);

    if (!omg.is_zero()) {
        out.series2 = parallel_term_sum(
            head, [&](std::size_t i) { return term2_at(i + 1); }, workers);
        if (omg.kind() == Sequence::Kind::PowerLaw) {
            const double c = omg.exponent() - 1.0;
            auto f2 = [&](double x) {
                const double l = lam.scale() * std::pow(x, -(1.0 + a));
                const double g = gam.scale() * std::pow(x, -b);
                const double w = omg.scale() * std::pow(x, -omg.exponent());
                const double d = n * l * g + 1.0;
                return w / (d * d);
            };
            out.series2 += power_tail(f2, static_cast<double>(head) + 1.0, c);
        } else if (omg.kind() == Sequence::Kind::Exponential) {
            // Exponentially small beyond the head; nothing to add at 1e-12.
        }
    }
    return out;
}

double maxterm_rate(double n, const SpectralDecay& spec) {
    if (n < 0.0) throw invalid_parameter("n must be nonnegative");
    spec.validate();
    const Sequence& lam = spec.lambda;
    const Sequence& eta = spec.eta_or_gamma();

    auto term = [&](std::size_t k) {
        const double l = lam.at(k);
        return l / (n * l * eta.at(k) + 1.0);
    };

    std::size_t len = std::numeric_limits<std::size_t>::max();
    if (lam.kind() == Sequence::Kind::Array) len = lam.array_length();
    if (eta.kind() == Sequence::Kind::Array)
        len = std::min(len, eta.array_length());
    if (len != std::numeric_limits<std::size_t>::max()) {
        double best = 0.0;
        for (std::size_t k = 1; k <= len; ++k) best = std::max(best, term(k));
        return best;
    }

    // Parametric families are unimodal in k: scan until 64 consecutive
    // decreases.
    double best = term(1);
    double prev = best;
    int decreasing = 0;
    for (std::size_t k = 2; decreasing < 64; ++k) {
        const double t = term(k);
        decreasing = t < prev ? decreasing + 1 : 0;
        best = std::max(best, t);
        prev = t;
        if (k > (std::size_t{1} << 40)) {
            throw numeric_failure("max-term scan failed to terminate");
        }
    }
    return best;
}

PredictedExponents predicted_exponents(const SpectralDecay& spec) {
    spec.validate();
    if (spec.lambda.kind() != Sequence::Kind::PowerLaw ||
        spec.gamma.kind() != Sequence::Kind::PowerLaw) {
        throw unsupported_spec(
            "asymptotic exponents are defined for power families only");
    }
    const double a = spec.lambda.exponent() - 1.0;
    const double b = spec.gamma.exponent();
    if (a <= 0.0) throw invalid_spec("power family needs a > 0");

    const double denom = 2.0 * (a + b + 1.0);
    PredictedExponents out{};
    if (spec.omega_sq.is_zero()) {
        out.first = -a / denom;
    } else if (spec.omega_sq.kind() == Sequence::Kind::PowerLaw) {
        const double c = spec.omega_sq.exponent() - 1.0;
        if (c <= 0.0) throw invalid_spec("omega power family needs c > 0");
        out.first = -std::min(a, c) / denom;
    } else {
        throw unsupported_spec(
            "asymptotic exponents need omega = 0 or a power family");
    }
    out.fourth = -(a + 1.0 - b) / denom;
    out.overall = std::max(out.first, out.fourth);
    return out;
}

double truncated_trace(double n, const Eigen::MatrixXd& Q,
                       const Eigen::MatrixXd& I) {
    if (n < 0.0) throw invalid_parameter("n must be nonnegative");
    if (Q.rows() != Q.cols() || I.rows() != I.cols() || Q.rows() != I.rows()) {
        throw invalid_input("Q and I must be square matrices of equal size");
    }
    if (Q.rows() > 512) throw invalid_input("matrix size exceeds 512");
    const double qscale = Q.cwiseAbs().maxCoeff();
    if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-8 * std::max(qscale, 1.0)) {
        throw invalid_input("Q must be symmetric");
    }
    const double iscale = I.cwiseAbs().maxCoeff();
    if ((I - I.transpose()).cwiseAbs().maxCoeff() > 1e-8 * std::max(iscale, 1.0)) {
        throw invalid_input("I must be symmetric");
    }

    Eigen::LLT<Eigen::MatrixXd> llt(Q);
    if (llt.info() != Eigen::Success) {
        throw invalid_input("Q must be symmetric positive definite");
    }
    const Eigen::MatrixXd eye =
        Eigen::MatrixXd::Identity(Q.rows(), Q.cols());
    Eigen::MatrixXd Qinv = llt.solve(eye);
    Qinv = 0.5 * (Qinv + Qinv.transpose()).eval();

    Eigen::MatrixXd A = n * I + Qinv;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
    if (ldlt.info() != Eigen::Success) {
        throw numeric_failure("failed to factor n*I + Q^{-1}");
    }
    return ldlt.solve(eye).trace();
}

double finite_laplace_prediction(double n, int d, double p) {
    if (!(n > 0.0)) throw invalid_parameter("n must be positive");
    if (d < 1) throw invalid_parameter("dimension must be >= 1");
    if (!(p > 0.0)) throw invalid_parameter("p must be positive");
    const double dd = static_cast<double>(d);
    return std::exp(0.5 * p * (std::log(2.0) - std::log(n)) +
                    std::lgamma(0.5 * (dd + p)) - std::lgamma(0.5 * dd));
}

PcrBoundTerms assemble_pcr_bound(const PcrBoundComponents& c) {
    if (!(c.a > 1.0)) throw invalid_parameter("moment exponent a must be > 1");
    if (!(c.p >= 1.0)) throw invalid_parameter("p must be >= 1");
    for (double v : {c.shrinkage, c.l0n, c.mean_stat_dev, c.tail_prob,
                     c.posterior_moment_ap, c.norm_theta0}) {
        if (v < 0.0 || !std::isfinite(v)) {
            throw invalid_parameter("bound components must be finite and >= 0");
        }
    }
    const double ap = c.a * c.p;
    PcrBoundTerms t{};
    t.term1_shrinkage = c.shrinkage;
    t.term2_tail_scaled = c.norm_theta0 * c.tail_prob;
    t.term3_posterior_tail = std::pow(c.posterior_moment_ap, 1.0 / ap) *
                             std::pow(c.tail_prob, 1.0 - 1.0 / ap);
    t.term4_lipschitz = c.l0n * c.mean_stat_dev;
    t.total = t.term1_shrinkage + t.term2_tail_scaled +
              t.term3_posterior_tail + t.term4_lipschitz;
    return t;
}

} // namespace pcrlab
