#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pcrlab/config.hpp"
#include "pcrlab/laplace.hpp"
#include "pcrlab/rate_fit.hpp"

namespace pcrlab {

// One replication of a ladder level.  eps is the posterior contraction
// estimate for that replication's data; term1..term4 decompose the matching
// upper bound (term4 is the only replication-dependent term, the others are
// shared across the level); bound_total applies the overall constant; jn
// indicates the conditioning statistic left its shrinking neighborhood; gc
// is the empirical-measure transport distance of the replication's sample.
struct RunRecord {
    double n = 0.0;
    int replication = 0;
    double eps = 0.0;
    double term1 = 0.0;
    double term2 = 0.0;
    double term3 = 0.0;
    double term4 = 0.0;
    double bound_total = 0.0;
    int jn = 0;
    double gc = 0.0;
    std::uint64_t seed = 0;
    bool flagged = false;
};

// Ladder-level aggregate.  jn_rate is the dedicated tail-probability
// estimate (at least 200 draws) rather than the replication average; terms
// assembles the level bound from the mean statistic deviation.
struct LevelSummary {
    double n = 0.0;
    double eps_mean = 0.0;
    double eps_se = 0.0;
    double jn_rate = 0.0;
    double gc_mean = 0.0;
    PcrBoundTerms terms;
    double delta_n = 0.0;
    int flagged_count = 0;
    int replications = 0;
};

struct PcrRunResult {
    std::vector<RunRecord> runs;
    std::vector<LevelSummary> levels;
    RateFit eps_fit;
    bool eps_fit_ok = false;
    RateFit bound_fit;
    bool bound_fit_ok = false;
    double delta_scale = 0.0;
    bool failed = false;
    std::string failure_reason;
};

// Full contraction-rate experiment: calibrate the neighborhood radius,
// replicate data draws and posterior summaries over the ladder, assemble the
// bound decomposition and fit log-log rates.  Replications run in parallel
// with per-replication streams, so results do not depend on the worker
// count.  A level with more than 20% flagged replications (or a flagged
// shared shrinkage estimate) marks the whole run failed; processing still
// completes and fits are attempted on whatever is positive.
PcrRunResult run_pcr_experiment(const PcrExperimentConfig& cfg);

// P[ || S_hat_n - S_0 || >= radius ] by Monte Carlo (draws from theta0).
double statistic_tail_probability(const StatModel& model, double n,
                                  double radius, int replications,
                                  std::uint64_t seed, int workers = 1);

// P[ W_p(empirical_n; true marginal) >= radius ] by Monte Carlo.
double measure_tail_probability(const StatModel& model, double n,
                                double radius, double p, int replications,
                                std::uint64_t seed, int workers = 1);

// Empirical-measure convergence: eps (and gc) hold W_p between n quantile
// draws and the sampled law; the bound columns stay zero.
struct GcRateResult {
    std::vector<RunRecord> runs;
    std::vector<LevelSummary> levels;
    RateFit fit;
    bool fit_ok = false;
};

GcRateResult run_gc_rate(const GcRateConfig& cfg);

// Spectral rate curves for one decay family.  The *_predicted fields carry
// the asymptotic log-log exponents of the raw quantities: series1 decays
// like n^{-a/(1+a+b)}, series2 like n^{-c/(1+a+b)} and the mode-wise
// maximum ratio like n^{-(1+a)/(1+a+b)}.
struct LaplaceFamilyRates {
    LaplaceFamily family;
    std::vector<double> n;
    std::vector<double> series1;
    std::vector<double> series2;
    std::vector<double> maxterm;
    RateFit series1_fit;
    RateFit maxterm_fit;
    RateFit series2_fit;
    bool fits_ok = false; // series1 and maxterm fits (needs >= 4 levels)
    bool series2_fit_ok = false;
    double series1_predicted = 0.0;
    double series2_predicted = 0.0;
    double maxterm_predicted = 0.0;
    PredictedExponents predicted;
};

struct LaplaceRatesResult {
    std::vector<LaplaceFamilyRates> families;
};

LaplaceRatesResult run_laplace_rates(const LaplaceRatesConfig& cfg);

// Closed-form bound decomposition along n for a spectral decay family.  The
// shrinkage term is the square root of the ratio series, the tail is the
// indicative sub-Gaussian envelope exp(-n^(1-2q)), the Lipschitz term pairs
// the mode-wise maximum ratio with a root-n statistic deviation.
struct PredictedRow {
    double n = 0.0;
    PcrBoundTerms terms;
    double series1 = 0.0;
    double series2 = 0.0;
    double maxterm = 0.0;
    double tail = 0.0;
    double l0n = 0.0;
    double mean_stat_dev = 0.0;
};

struct PredictedDecomposition {
    std::vector<PredictedRow> rows;
    RateFit bound_fit;
    bool bound_fit_ok = false;
    PredictedExponents exponents;
};

PredictedDecomposition predicted_decomposition(const DecomposeConfig& cfg);

// Grid Poincare constants for the configured densities; gibbs targets emit
// one row per n with the posterior-variance Gaussian on a +-8 sd window.
struct PoincareRow {
    std::string kind;
    double n = 0.0; // 0 for the n-independent targets
    double lambda = 0.0;
    double gamma = 0.0;
    double c2 = 0.0;
    double c2_sq = 0.0;
};

struct PoincareResult {
    std::vector<PoincareRow> rows;
    int nodes = 0;
};

PoincareResult run_poincare(const PoincareConfig& cfg);

// Information-operator eigenpair check on the uniform grid: residual of
// apply_istar against the closed-form eigenvalue for each basis index, plus
// the worst pairwise deviation of the derivative inner products from the
// identity.
struct EigencheckRow {
    int k = 0;
    double eigenvalue = 0.0;
    double predicted = 0.0;
    double sup_rel_err = 0.0;
};

struct EigencheckResult {
    std::vector<EigencheckRow> rows;
    double max_sup_rel_err = 0.0;
    double max_orthonormality_err = 0.0;
    int nodes = 0;
};

EigencheckResult run_eigencheck(const EigencheckConfig& cfg);

} // namespace pcrlab
