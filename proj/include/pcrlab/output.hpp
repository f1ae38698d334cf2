#pragma once

#include <string>
#include <vector>

#include "pcrlab/config.hpp"
#include "pcrlab/experiment.hpp"

namespace pcrlab {

// Fixed CSV contracts: every replication-style run (run-pcr, gc-rate and
// Monte Carlo decompose) writes runs.csv with the first header and a
// summary.csv with the second, the fitted slope repeated on each row.
inline constexpr const char* kRunsCsvHeader =
    "n,replication,eps,term1,term2,term3,term4,bound_total,jn,gc,seed";
inline constexpr const char* kSummaryCsvHeader =
    "n,eps_mean,eps_se,slope,ci_lo,ci_hi";

// Shortest-round-trip style numeric formatting (%.12g); NaN prints as "nan"
// so identical results always serialize to identical bytes.
std::string format_g12(double value);

std::string runs_csv(const std::vector<RunRecord>& runs);
std::string summary_csv(const std::vector<LevelSummary>& levels,
                        const RateFit& fit, bool fit_ok);

// Write the result files for one subcommand under cfg.common.out_dir in the
// configured format (csv or a single result.json).  Returns the paths
// written.  Directories are created as needed.
std::vector<std::string> write_pcr_outputs(const PcrRunResult& result,
                                           const PcrExperimentConfig& cfg);
std::vector<std::string> write_gc_outputs(const GcRateResult& result,
                                          const GcRateConfig& cfg);
std::vector<std::string> write_laplace_outputs(const LaplaceRatesResult& result,
                                               const LaplaceRatesConfig& cfg);
std::vector<std::string> write_decompose_mc_outputs(const PcrRunResult& result,
                                                    const DecomposeConfig& cfg);
std::vector<std::string>
write_predicted_outputs(const PredictedDecomposition& result,
                        const DecomposeConfig& cfg);
std::vector<std::string> write_poincare_outputs(const PoincareResult& result,
                                                const PoincareConfig& cfg);
std::vector<std::string>
write_eigencheck_outputs(const EigencheckResult& result,
                         const EigencheckConfig& cfg);

} // namespace pcrlab
