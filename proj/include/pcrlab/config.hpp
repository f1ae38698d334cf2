#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pcrlab/measure.hpp"
#include "pcrlab/models.hpp"
#include "pcrlab/posterior.hpp"
#include "pcrlab/spectral.hpp"

namespace pcrlab {

// Keys shared by every subcommand configuration, each overridable from the
// command line.
struct CommonOptions {
    std::uint64_t seed = 0;
    int workers = 0; // 0 picks the hardware thread count
    std::string out_dir = ".";
    std::string format = "csv"; // csv | json
};

enum class NeighborhoodPath { Statistic, Measure };

struct PcrExperimentConfig {
    std::unique_ptr<StatModel> model;
    std::string model_id;
    std::vector<double> n_ladder;
    int replications = 0;
    double p = 2.0;
    double moment_a = 2.0;
    double delta_q = 0.25;
    std::optional<double> delta_scale; // empty = calibrate at the smallest n
    SamplerConfig sampler;
    NeighborhoodPath path = NeighborhoodPath::Statistic;
    double neighborhood_k = 1.0;
    double neighborhood_a = 0.125;
    double c_r = 1.0;
    std::optional<double> grad_moment; // empty = ask the model
    std::string poincare_method = "posterior_cov"; // | maxterm | grid1d
    CommonOptions common;
    std::string echo; // normalized configuration for the JSON outputs
};

struct GcRateConfig {
    QuantileMeasure mu0 = QuantileMeasure::uniform(0.0, 1.0);
    std::string measure_id;
    std::vector<double> n_ladder;
    int replications = 200;
    double p = 2.0;
    CommonOptions common;
    std::string echo;
};

struct LaplaceFamily {
    double a = 0.0;
    double b = 0.0;
    std::optional<double> c;
};

struct LaplaceRatesConfig {
    std::vector<LaplaceFamily> families;
    std::vector<double> n_ladder;
    CommonOptions common;
    std::string echo;
};

struct DecomposeConfig {
    enum class Mode { MonteCarlo, Predicted };
    Mode mode = Mode::MonteCarlo;

    // Monte Carlo mode wraps a full experiment configuration.
    std::unique_ptr<PcrExperimentConfig> pcr;

    // Predicted mode assembles the bound from the spectral rate formulas.
    LaplaceFamily decay;
    std::vector<double> n_ladder;
    double p = 2.0;
    double moment_a = 2.0;
    double delta_q = 0.25;
    double c_r = 1.0;
    double grad_moment = 1.0;
    double stat_dev_scale = 1.0;
    double norm_theta0 = 0.0;

    CommonOptions common;
    std::string echo;
};

struct PoincareTarget {
    std::string kind; // uniform | gaussian | gibbs
    double lambda = 1.0;
    double gamma = 1.0;
    std::vector<double> n_values; // gibbs only
};

struct PoincareConfig {
    std::vector<PoincareTarget> targets;
    int nodes = 4097;
    CommonOptions common;
    std::string echo;
};

struct EigencheckConfig {
    int truncation = 16;
    int nodes = 4096;
    CommonOptions common;
    std::string echo;
};

// Parse a configuration file (or raw JSON text) for one subcommand.  Unknown
// keys anywhere in the document are invalid_spec errors; missing required
// keys and out-of-range values are invalid_spec / invalid_parameter errors.
PcrExperimentConfig parse_pcr_config_text(const std::string& text);
PcrExperimentConfig parse_pcr_config(const std::string& path);
GcRateConfig parse_gc_config_text(const std::string& text);
GcRateConfig parse_gc_config(const std::string& path);
LaplaceRatesConfig parse_laplace_config_text(const std::string& text);
LaplaceRatesConfig parse_laplace_config(const std::string& path);
DecomposeConfig parse_decompose_config_text(const std::string& text);
DecomposeConfig parse_decompose_config(const std::string& path);
PoincareConfig parse_poincare_config_text(const std::string& text);
PoincareConfig parse_poincare_config(const std::string& path);
EigencheckConfig parse_eigencheck_config_text(const std::string& text);
EigencheckConfig parse_eigencheck_config(const std::string& path);

// Command-line overrides applied after parsing.
struct CommonOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<std::string> out_dir;
    std::optional<std::string> format;
};
void apply_overrides(CommonOptions& common, const CommonOverrides& overrides);

// Spectral family for the rate formulas: lambda_k = k^{-(1+a)},
// gamma_k = k^{-b}, and when c is present omega_k^2 = k^{-c}.
SpectralDecay decay_from_family(const LaplaceFamily& family);

} // namespace pcrlab
