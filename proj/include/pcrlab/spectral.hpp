#pragma once

#include <cstddef>
#include <vector>

namespace pcrlab {

// Positive (or nonnegative) sequence indexed from k = 1: explicit array,
// power family scale * k^{-exponent}, or stretched-exponential family
// scale * exp(-k^power).
class Sequence {
public:
    enum class Kind { Zero, Array, PowerLaw, Exponential };

    static Sequence zero();
    static Sequence array(std::vector<double> values);
    static Sequence power_law(double exponent, double scale = 1.0);
    static Sequence exponential(double power = 1.0, double scale = 1.0);

    Kind kind() const { return kind_; }
    double at(std::size_t k) const; // k >= 1
    bool is_zero() const { return kind_ == Kind::Zero; }
    std::size_t array_length() const { return values_.size(); }
    const std::vector<double>& values() const { return values_; }
    double exponent() const { return exponent_; }
    double scale() const { return scale_; }
    double stretch_power() const { return stretch_power_; }

    // True when the series sum_k at(k) is finite: arrays always, power laws
    // iff exponent > 1, exponentials always (partial-sum test made analytic).
    bool summable() const;
    bool positive() const; // every term strictly positive

private:
    Kind kind_ = Kind::Zero;
    std::vector<double> values_;
    double exponent_ = 0.0;
    double scale_ = 1.0;
    double stretch_power_ = 1.0;
};

// Spectral data driving every rate formula: prior covariance eigenvalues
// lambda_k, Fisher-operator eigenvalues gamma_k, Hessian lower-bound
// eigenvalues eta_k (defaults to gamma), squared coefficients omega_k^2 of
// theta0 - m, and prior mean coefficients m_k.
struct SpectralDecay {
    Sequence lambda;
    Sequence gamma;
    Sequence eta = Sequence::zero();      // zero means "use gamma"
    Sequence omega_sq = Sequence::zero();
    Sequence mean = Sequence::zero();

    const Sequence& eta_or_gamma() const { return eta.is_zero() ? gamma : eta; }

    // Throws invalid_spec when lambda is not trace class, any required entry
    // is non-positive, or omega_sq is not summable.
    void validate() const;

    // Convenience constructor for the power-family triple
    // lambda_k = k^{-(1+a)}, gamma_k = k^{-b}, omega_k^2 = k^{-(1+c)}.
    static SpectralDecay power_family(double a, double b);
    static SpectralDecay power_family(double a, double b, double c);
};

} // namespace pcrlab
