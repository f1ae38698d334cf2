#include <cstdio>
#include <exception>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "pcrlab/config.hpp"
#include "pcrlab/experiment.hpp"
#include "pcrlab/output.hpp"

namespace {

using namespace pcrlab;

void print_paths(const std::vector<std::string>& paths) {
    for (const std::string& path : paths) {
        std::printf("wrote %s\n", path.c_str());
    }
}

void print_fit(const char* label, const RateFit& fit, bool ok) {
    if (!ok) {
        std::printf("%s: not fitted (needs >= 4 positive ladder levels)\n",
                    label);
        return;
    }
    std::printf("%s: slope %.4f  [%.4f, %.4f]  r2 %.4f\n", label, fit.slope,
                fit.ci_lo, fit.ci_hi, fit.r_squared);
}

void print_levels(const std::vector<LevelSummary>& levels) {
    for (const LevelSummary& level : levels) {
        std::printf("n %-10.6g eps %.6g (se %.3g)  tail %.3g  flagged %d/%d\n",
                    level.n, level.eps_mean, level.eps_se, level.jn_rate,
                    level.flagged_count, level.replications);
    }
}

int run_pcr_command(const std::string& path, const CommonOverrides& over) {
    PcrExperimentConfig cfg = parse_pcr_config(path);
    apply_overrides(cfg.common, over);
    const PcrRunResult result = run_pcr_experiment(cfg);
    print_levels(result.levels);
    print_fit("eps rate", result.eps_fit, result.eps_fit_ok);
    print_fit("bound rate", result.bound_fit, result.bound_fit_ok);
    print_paths(write_pcr_outputs(result, cfg));
    if (result.failed) {
        std::fprintf(stderr, "run failed: %s\n", result.failure_reason.c_str());
        return 1;
    }
    return 0;
}

int gc_rate_command(const std::string& path, const CommonOverrides& over) {
    GcRateConfig cfg = parse_gc_config(path);
    apply_overrides(cfg.common, over);
    const GcRateResult result = run_gc_rate(cfg);
    print_levels(result.levels);
    print_fit("gc rate", result.fit, result.fit_ok);
    print_paths(write_gc_outputs(result, cfg));
    return 0;
}

int laplace_command(const std::string& path, const CommonOverrides& over) {
    LaplaceRatesConfig cfg = parse_laplace_config(path);
    apply_overrides(cfg.common, over);
    const LaplaceRatesResult result = run_laplace_rates(cfg);
    for (const LaplaceFamilyRates& fam : result.families) {
        std::printf("family a %.4g b %.4g", fam.family.a, fam.family.b);
        if (fam.family.c) std::printf(" c %.4g", *fam.family.c);
        std::printf("\n");
        if (fam.fits_ok) {
            std::printf("  series1 slope %.4f (predicted %.4f)\n",
                        fam.series1_fit.slope, fam.series1_predicted);
            std::printf("  maxterm slope %.4f (predicted %.4f)\n",
                        fam.maxterm_fit.slope, fam.maxterm_predicted);
        }
        if (fam.series2_fit_ok) {
            std::printf("  series2 slope %.4f (predicted %.4f)\n",
                        fam.series2_fit.slope, fam.series2_predicted);
        }
    }
    print_paths(write_laplace_outputs(result, cfg));
    return 0;
}

int decompose_command(const std::string& path, const CommonOverrides& over) {
    DecomposeConfig cfg = parse_decompose_config(path);
    apply_overrides(cfg.common, over);
    if (cfg.mode == DecomposeConfig::Mode::MonteCarlo) {
        apply_overrides(cfg.pcr->common, over);
        const PcrRunResult result = run_pcr_experiment(*cfg.pcr);
        print_levels(result.levels);
        print_fit("eps rate", result.eps_fit, result.eps_fit_ok);
        print_fit("bound rate", result.bound_fit, result.bound_fit_ok);
        print_paths(write_decompose_mc_outputs(result, cfg));
        if (result.failed) {
            std::fprintf(stderr, "run failed: %s\n",
                         result.failure_reason.c_str());
            return 1;
        }
        return 0;
    }
    const PredictedDecomposition result = predicted_decomposition(cfg);
    for (const PredictedRow& row : result.rows) {
        std::printf("n %-12.6g bound %.6g\n", row.n, cfg.c_r * row.terms.total);
    }
    print_fit("bound rate", result.bound_fit, result.bound_fit_ok);
    std::printf("predicted exponents: first %.6g fourth %.6g overall %.6g\n",
                result.exponents.first, result.exponents.fourth,
                result.exponents.overall);
    print_paths(write_predicted_outputs(result, cfg));
    return 0;
}

int poincare_command(const std::string& path, const CommonOverrides& over) {
    PoincareConfig cfg = parse_poincare_config(path);
    apply_overrides(cfg.common, over);
    const PoincareResult result = run_poincare(cfg);
    for (const PoincareRow& row : result.rows) {
        std::printf("%-10s n %-8.6g c2 %.8g c2_sq %.8g\n", row.kind.c_str(),
                    row.n, row.c2, row.c2_sq);
    }
    print_paths(write_poincare_outputs(result, cfg));
    return 0;
}

int eigencheck_command(const std::string& path, const CommonOverrides& over) {
    EigencheckConfig cfg = parse_eigencheck_config(path);
    apply_overrides(cfg.common, over);
    const EigencheckResult result = run_eigencheck(cfg);
    std::printf("max sup relative error %.3g\n", result.max_sup_rel_err);
    std::printf("max orthonormality error %.3g\n",
                result.max_orthonormality_err);
    print_paths(write_eigencheck_outputs(result, cfg));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Contraction-rate laboratory for posterior transport bounds"};
    app.require_subcommand(1);
    app.fallthrough();

    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<std::string> out_dir;
    std::optional<std::string> format;
    app.add_option("--seed", seed, "Override the experiment seed");
    app.add_option("--workers", workers,
                   "Worker threads (0 uses the hardware count)");
    app.add_option("--out-dir", out_dir, "Directory for output files");
    app.add_option("--format", format, "Output format: csv or json");

    struct Sub {
        const char* name;
        const char* help;
        int (*run)(const std::string&, const pcrlab::CommonOverrides&);
        std::string config;
    };
    std::vector<Sub> subs = {
        {"run-pcr", "Estimate contraction rates over an n ladder",
         run_pcr_command, {}},
        {"laplace-rates", "Spectral ratio-series and max-term rate curves",
         laplace_command, {}},
        {"poincare", "Grid Poincare constants for configured densities",
         poincare_command, {}},
        {"gc-rate", "Empirical-measure transport convergence rates",
         gc_rate_command, {}},
        {"eigencheck", "Information-operator eigenpair verification",
         eigencheck_command, {}},
        {"decompose", "Bound decomposition, Monte Carlo or predicted",
         decompose_command, {}},
    };
    for (Sub& sub : subs) {
        CLI::App* cmd = app.add_subcommand(sub.name, sub.help);
        cmd->add_option("config", sub.config, "JSON configuration file")
            ->required();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    pcrlab::CommonOverrides over;
    over.seed = seed;
    over.workers = workers;
    over.out_dir = out_dir;
    over.format = format;

    try {
        for (const Sub& sub : subs) {
            if (app.got_subcommand(sub.name)) return sub.run(sub.config, over);
        }
        std::fprintf(stderr, "no subcommand selected\n");
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "run error: %s\n", e.what());
        return 1;
    }
}
