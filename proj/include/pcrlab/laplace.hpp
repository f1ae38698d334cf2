#pragma once

#include <Eigen/Core>

#include "pcrlab/spectral.hpp"

namespace pcrlab {

struct RatioSeries {
    double series1; // sum_k lambda_k / (n lambda_k gamma_k + 1)
    double series2; // sum_k omega_k^2 / (n lambda_k gamma_k + 1)^2
};

// Exact Gaussian-ratio expansion of the posterior second moment about theta0
// at the nonrandom statistic.  Truncation is certified: power families sum a
// head of max(2^21, 32 * argmax) terms and close with an Euler-Maclaurin
// integral tail, so the result carries ~1e-12 relative truncation error.
RatioSeries gaussian_ratio_series(double n, const SpectralDecay& spec,
                                  int workers = 1);

// max_k lambda_k / (n lambda_k eta_k + 1).  Monotone families are scanned
// until the term decreases for 64 consecutive indices.
double maxterm_rate(double n, const SpectralDecay& spec);

struct PredictedExponents {
    double first;   // shrinkage-term exponent
    double fourth;  // Lipschitz-term exponent
    double overall; // slower (larger) of the applicable exponents
};

// Asymptotic exponents for power families:
//   first  = -min(a, c) / (2(a+b+1))   (-a/... when omega = 0)
//   fourth = -(a+1-b) / (2(a+b+1))
PredictedExponents predicted_exponents(const SpectralDecay& spec);

// Tr[(n I_N + Q_N^{-1})^{-1}] by symmetric solves; N <= 512.
double truncated_trace(double n, const Eigen::MatrixXd& Q,
                       const Eigen::MatrixXd& I);

// Finite-dimensional moment-ratio scale (2/n)^{p/2} Gamma((d+p)/2)/Gamma(d/2);
// used as a slope oracle (log-log slope -p/2).
double finite_laplace_prediction(double n, int d, double p);

struct PcrBoundComponents {
    double shrinkage = 0.0;           // term 1, computed by posterior moments
    double l0n = 0.0;                 // Lipschitz constant estimate
    double mean_stat_dev = 0.0;       // E || S_hat - S_0 ||
    double tail_prob = 0.0;           // P[ S_hat outside the delta_n ball ]
    double posterior_moment_ap = 0.0; // E integral ||theta||^{ap} posterior
    double a = 2.0;                   // moment exponent, a > 1
    double p = 2.0;                   // Wasserstein order
    double norm_theta0 = 0.0;
};

struct PcrBoundTerms {
    double term1_shrinkage = 0.0;
    double term2_tail_scaled = 0.0;
    double term3_posterior_tail = 0.0;
    double term4_lipschitz = 0.0;
    double total = 0.0;
};

// term1 = shrinkage
// term2 = norm_theta0 * tail_prob
// term3 = posterior_moment_ap^{1/(ap)} * tail_prob^{1 - 1/(ap)}
// term4 = l0n * mean_stat_dev
PcrBoundTerms assemble_pcr_bound(const PcrBoundComponents& c);

} // namespace pcrlab
