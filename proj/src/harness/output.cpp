#include "pcrlab/output.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "pcrlab/errors.hpp"

namespace pcrlab {

namespace {

using nlohmann::json;

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw invalid_input("cannot open output file: " + path);
    out << text;
    if (!out) throw invalid_input("cannot write output file: " + path);
}

std::string joined(const std::filesystem::path& dir, const char* name) {
    return (dir / name).string();
}

json fit_json(const RateFit& fit, bool ok) {
    if (!ok) return nullptr;
    json j;
    j["slope"] = fit.slope;
    j["intercept"] = fit.intercept;
    j["r_squared"] = fit.r_squared;
    j["ci_lo"] = fit.ci_lo;
    j["ci_hi"] = fit.ci_hi;
    return j;
}

json echo_json(const std::string& echo) {
    if (echo.empty()) return json::object();
    json j = json::parse(echo, nullptr, false);
    return j.is_discarded() ? json::object() : j;
}

json run_json(const RunRecord& rec) {
    json j;
    j["n"] = rec.n;
    j["replication"] = rec.replication;
    j["eps"] = rec.eps;
    j["term1"] = rec.term1;
    j["term2"] = rec.term2;
    j["term3"] = rec.term3;
    j["term4"] = rec.term4;
    j["bound_total"] = rec.bound_total;
    j["jn"] = rec.jn;
    j["gc"] = rec.gc;
    j["seed"] = rec.seed;
    j["flagged"] = rec.flagged;
    return j;
}

json level_json(const LevelSummary& level) {
    json j;
    j["n"] = level.n;
    j["eps_mean"] = level.eps_mean;
    j["eps_se"] = level.eps_se;
    j["jn_rate"] = level.jn_rate;
    j["gc_mean"] = level.gc_mean;
    j["delta_n"] = level.delta_n;
    j["flagged_count"] = level.flagged_count;
    j["replications"] = level.replications;
    j["terms"] = {{"term1", level.terms.term1_shrinkage},
                  {"term2", level.terms.term2_tail_scaled},
                  {"term3", level.terms.term3_posterior_tail},
                  {"term4", level.terms.term4_lipschitz},
                  {"total", level.terms.total}};
    return j;
}

// Per-level mean and standard error of the bound totals, for the Monte
// Carlo decomposition summary.
std::string bound_summary_csv(const std::vector<RunRecord>& runs,
                              const RateFit& fit, bool fit_ok) {
    std::ostringstream out;
    out << "n,bound_mean,bound_se,slope,ci_lo,ci_hi\n";
    std::vector<double> ns;
    for (const RunRecord& rec : runs) {
        if (ns.empty() || rec.n != ns.back()) ns.push_back(rec.n);
    }
    for (double n : ns) {
        double sum = 0.0;
        int count = 0;
        for (const RunRecord& rec : runs) {
            if (rec.n == n && std::isfinite(rec.bound_total)) {
                sum += rec.bound_total;
                ++count;
            }
        }
        const double mean =
            count > 0 ? sum / count : std::numeric_limits<double>::quiet_NaN();
        double ss = 0.0;
        for (const RunRecord& rec : runs) {
            if (rec.n == n && std::isfinite(rec.bound_total)) {
                ss += (rec.bound_total - mean) * (rec.bound_total - mean);
            }
        }
        const double se =
            count > 1 ? std::sqrt(ss / (count - 1) / count) : 0.0;
        out << format_g12(n) << ',' << format_g12(mean) << ','
            << format_g12(se) << ','
            << format_g12(fit_ok ? fit.slope
                                 : std::numeric_limits<double>::quiet_NaN())
            << ','
            << format_g12(fit_ok ? fit.ci_lo
                                 : std::numeric_limits<double>::quiet_NaN())
            << ','
            << format_g12(fit_ok ? fit.ci_hi
                                 : std::numeric_limits<double>::quiet_NaN())
            << '\n';
    }
    return out.str();
}

std::filesystem::path prepare_dir(const CommonOptions& common) {
    std::filesystem::path dir(common.out_dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace

std::string format_g12(double value) {
    if (std::isnan(value)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", value);
    return buf;
}

std::string runs_csv(const std::vector<RunRecord>& runs) {
    std::ostringstream out;
    out << kRunsCsvHeader << '\n';
    for (const RunRecord& rec : runs) {
        out << format_g12(rec.n) << ',' << rec.replication << ','
            << format_g12(rec.eps) << ',' << format_g12(rec.term1) << ','
            << format_g12(rec.term2) << ',' << format_g12(rec.term3) << ','
            << format_g12(rec.term4) << ',' << format_g12(rec.bound_total)
            << ',' << rec.jn << ',' << format_g12(rec.gc) << ',' << rec.seed
            << '\n';
    }
    return out.str();
}

std::string summary_csv(const std::vector<LevelSummary>& levels,
                        const RateFit& fit, bool fit_ok) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::ostringstream out;
    out << kSummaryCsvHeader << '\n';
    for (const LevelSummary& level : levels) {
        out << format_g12(level.n) << ',' << format_g12(level.eps_mean) << ','
            << format_g12(level.eps_se) << ','
            << format_g12(fit_ok ? fit.slope : nan) << ','
            << format_g12(fit_ok ? fit.ci_lo : nan) << ','
            << format_g12(fit_ok ? fit.ci_hi : nan) << '\n';
    }
    return out.str();
}

std::vector<std::string> write_pcr_outputs(const PcrRunResult& result,
                                           const PcrExperimentConfig& cfg) {
    const auto dir = prepare_dir(cfg.common);
    std::vector<std::string> paths;
    if (cfg.common.format == "csv") {
        paths.push_back(joined(dir, "runs.csv"));
        write_file(paths.back(), runs_csv(result.runs));
        paths.push_back(joined(dir, "summary.csv"));
        write_file(paths.back(),
                   summary_csv(result.levels, result.eps_fit,
                               result.eps_fit_ok));
        return paths;
    }
    json j;
    j["config"] = echo_json(cfg.echo);
    j["delta_scale"] = result.delta_scale;
    j["failed"] = result.failed;
    j["failure_reason"] = result.failure_reason;
    j["eps_fit"] = fit_json(result.eps_fit, result.eps_fit_ok);
    j["bound_fit"] = fit_json(result.bound_fit, result.bound_fit_ok);
    j["levels"] = json::array();
    for (const LevelSummary& level : result.levels) {
        j["levels"].push_back(level_json(level));
    }
    j["runs"] = json::array();
    for (const RunRecord& rec : result.runs) j["runs"].push_back(run_json(rec));
    paths.push_back(joined(dir, "result.json"));
    write_file(paths.back(), j.dump(2) + "\n");
    return paths;
}

std::vector<std::string> write_gc_outputs(const GcRateResult& result,
                                          const GcRateConfig& cfg) {
    const auto dir = prepare_dir(cfg.common);
    std::vector<std::string> paths;
    if (cfg.common.format == "csv") {
        paths.push_back(joined(dir, "runs.csv"));
        write_file(paths.back(), runs_csv(result.runs));
        paths.push_back(joined(dir, "summary.csv"));
        write_file(paths.back(),
                   summary_csv(result.levels, result.fit, result.fit_ok));
        return paths;
    }
    json j;
    j["config"] = echo_json(cfg.echo);
    j["fit"] = fit_json(result.fit, result.fit_ok);
    j["levels"] = json::array();
    for (const LevelSummary& level : result.levels) {
        j["levels"].push_back(level_json(level));
    }
    j["runs"] = json::array();
    for (const RunRecord& rec : result.runs) j["runs"].push_back(run_json(rec));
    paths.push_back(joined(dir, "result.json"));
    write_file(paths.back(), j.dump(2) + "\n");
    return paths;
}

std::vector<std::string> write_laplace_outputs(const LaplaceRatesResult& result,
                                               const LaplaceRatesConfig& cfg) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const auto dir = prepare_dir(cfg.common);
    std::vector<std::string> paths;
    if (cfg.common.format == "csv") {
        std::ostringstream rates;
        rates << "a,b,c,n,series1,series2,maxterm\n";
        for (const LaplaceFamilyRates& fam : result.families) {
            for (std::size_t i = 0; i < fam.n.size(); ++i) {
                rates << format_g12(fam.family.a) << ','
                      << format_g12(fam.family.b) << ','
                      << (fam.family.c ? format_g12(*fam.family.c) : "") << ','
                      << format_g12(fam.n[i]) << ','
                      << format_g12(fam.series1[i]) << ','
                      << format_g12(fam.series2[i]) << ','
                      << format_g12(fam.maxterm[i]) << '\n';
            }
        }
        paths.push_back(joined(dir, "laplace_rates.csv"));
        write_file(paths.back(), rates.str());

        std::ostringstream summary;
        summary << "a,b,c,quantity,slope,predicted,ci_lo,ci_hi\n";
        for (const LaplaceFamilyRates& fam : result.families) {
            const std::string prefix =
                format_g12(fam.family.a) + "," + format_g12(fam.family.b) +
                "," + (fam.family.c ? format_g12(*fam.family.c) : "");
            summary << prefix << ",series1,"
                    << format_g12(fam.fits_ok ? fam.series1_fit.slope : nan)
                    << ',' << format_g12(fam.series1_predicted) << ','
                    << format_g12(fam.fits_ok ? fam.series1_fit.ci_lo : nan)
                    << ','
                    << format_g12(fam.fits_ok ? fam.series1_fit.ci_hi : nan)
                    << '\n';
            summary << prefix << ",series2,"
                    << format_g12(fam.series2_fit_ok ? fam.series2_fit.slope
                                                     : nan)
                    << ',' << format_g12(fam.series2_predicted) << ','
                    << format_g12(fam.series2_fit_ok ? fam.series2_fit.ci_lo
                                                     : nan)
                    << ','
                    << format_g12(fam.series2_fit_ok ? fam.series2_fit.ci_hi
                                                     : nan)
                    << '\n';
            summary << prefix << ",maxterm,"
                    << format_g12(fam.fits_ok ? fam.maxterm_fit.slope : nan)
                    << ',' << format_g12(fam.maxterm_predicted) << ','
                    << format_g12(fam.fits_ok ? fam.maxterm_fit.ci_lo : nan)
                    << ','
                    << format_g12(fam.fits_ok ? fam.maxterm_fit.ci_hi : nan)
                    << '\n';
        }
        paths.push_back(joined(dir, "laplace_summary.csv"));
        write_file(paths.back(), summary.str());
        return paths;
    }
    json j;
    j["config"] = echo_json(cfg.echo);
    j["families"] = json::array();
    for (const LaplaceFamilyRates& fam : result.families) {
        json f;
        f["a"] = fam.family.a;
        f["b"] = fam.family.b;
        if (fam.family.c) f["c"] = *fam.family.c;
        f["n"] = fam.n;
        f["series1"] = fam.series1;
        f["series2"] = fam.series2;
        f["maxterm"] = fam.maxterm;
        f["series1_fit"] = fit_json(fam.series1_fit, fam.fits_ok);
        f["series2_fit"] = fit_json(fam.series2_fit, fam.series2_fit_ok);
        f["maxterm_fit"] = fit_json(fam.maxterm_fit, fam.fits_ok);
        f["series1_predicted"] = fam.series1_predicted;
        f["series2_predicted"] = fam.series2_predicted;
        f["maxterm_predicted"] = fam.maxterm_predicted;
        f["shrinkage_exponent"] = fam.predicted.first;
        f["lipschitz_exponent"] = fam.predicted.fourth;
        f["overall_exponent"] = fam.predicted.overall;
        j["families"].push_back(std::move(f));
    }
    paths.push_back(joined(dir, "result.json"));
    write_file(paths.back(), j.dump(2) + "\n");
    return paths;
}

std::vector<std::string> write_decompose_mc_outputs(const PcrRunResult& result,
                                                    const DecomposeConfig& cfg) {
    if (!cfg.pcr) throw invalid_input("Monte Carlo decompose has no experiment");
    const auto dir = prepare_dir(cfg.common);
    std::vector<std::string> paths;
    if (cfg.common.format == "csv") {
        paths.push_back(joined(dir, "runs.csv"));
        write_file(paths.back(), runs_csv(result.runs));
        paths.push_back(joined(dir, "summary.csv"));
        write_file(paths.back(),
                   summary_csv(result.levels, result.eps_fit,
                               result.eps_fit_ok));
        paths.push_back(joined(dir, "bound_summary.csv"));
        write_file(paths.back(),
                   bound_summary_csv(result.runs, result.bound_fit,
                                     result.bound_fit_ok));
        return paths;
    }
    json j;
    j["config"] = echo_json(cfg.echo);
    j["delta_scale"] = result.delta_scale;
    j["failed"] = result.failed;
    j["failure_reason"] = result.failure_reason;
    j["eps_fit"] = fit_json(result.eps_fit, result.eps_fit_ok);
    j["bound_fit"] = fit_json(result.bound_fit, result.bound_fit_ok);
    j["levels"] = json::array();
    for (const LevelSummary& level : result.levels) {
        j["levels"].push_back(level_json(level));
    }
    j["runs"] = json::array();
    for (const RunRecord& rec : result.runs) j["runs"].push_back(run_json(rec));
    paths.push_back(joined(dir, "result.json"));
    write_file(paths.back(), j.dump(2) + "\n");
    return paths;
}

std::vector<std::string>
write_predicted_outputs(const PredictedDecomposition& result,
                        const DecomposeConfig& cfg) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const auto dir = prepare_dir(cfg.common);
    std::vector<std::string> paths;
    if (cfg.common.format == "csv") {
        std::ostringstream terms;
        terms << "n,term1,term2,term3,term4,bound_total,series1,series2,"
                 "maxterm,tail,l0n,mean_stat_dev\n";
        for (const PredictedRow& row : result.rows) {
            terms << format_g12(row.n) << ','
                  << format_g12(row.terms.term1_shrinkage) << ','
                  << format_g12(row.terms.term2_tail_scaled) << ','
                  << format_g12(row.terms.term3_posterior_tail) << ','
                  << format_g12(row.terms.term4_lipschitz) << ','
                  << format_g12(cfg.c_r * row.terms.total) << ','
                  << format_g12(row.series1) << ',' << format_g12(row.series2)
                  << ',' << format_g12(row.maxterm) << ','
                  << format_g12(row.tail) << ',' << format_g12(row.l0n) << ','
                  << format_g12(row.mean_stat_dev) << '\n';
        }
        paths.push_back(joined(dir, "decompose_terms.csv"));
        write_file(paths.back(), terms.str());

        std::ostringstream summary;
        summary << kSummaryCsvHeader << '\n';
        for (const PredictedRow& row : result.rows) {
            summary << format_g12(row.n) << ','
                    << format_g12(cfg.c_r * row.terms.total) << ",0,"
                    << format_g12(result.bound_fit_ok ? result.bound_fit.slope
                                                      : nan)
                    << ','
                    << format_g12(result.bound_fit_ok ? result.bound_fit.ci_lo
                                                      : nan)
                    << ','
                    << format_g12(result.bound_fit_ok ? result.bound_fit.ci_hi
                                                      : nan)
                    << '\n';
        }
        paths.push_back(joined(dir, "summary.csv"));
        write_file(paths.back(), summary.str());
        return paths;
    }
    json j;
    j["config"] = echo_json(cfg.echo);
    j["bound_fit"] = fit_json(result.bound_fit, result.bound_fit_ok);
    j["shrinkage_exponent"] = result.exponents.first;
    j["lipschitz_exponent"] = result.exponents.fourth;
    j["overall_exponent"] = result.exponents.overall;
    j["rows"] = json::array();
    for (const PredictedRow& row : result.rows) {
        json r;
        r["n"] = row.n;
        r["term1"] = row.terms.term1_shrinkage;
        r["term2"] = row.terms.term2_tail_scaled;
        r["term3"] = row.terms.term3_posterior_tail;
        r["term4"] = row.terms.term4_lipschitz;
        r["bound_total"] = cfg.c_r * row.terms.total;
        r["series1"] = row.series1;
        r["series2"] = row.series2;
        r["maxterm"] = row.maxterm;
        r["tail"] = row.tail;
        r["l0n"] = row.l0n;
        r["mean_stat_dev"] = row.mean_stat_dev;
        j["rows"].push_back(std::move(r));
    }
    paths.push_back(joined(dir, "result.json"));
    write_file(paths.back(), j.dump(2) + "\n");
    return paths;
}

std::vector<std::string> write_poincare_outputs(const PoincareResult& result,
                                                const PoincareConfig& cfg) {
    const auto dir = prepare_dir(cfg.common);
    std::vector<std::string> paths;
    if (cfg.common.format == "csv") {
        std::ostringstream out;
        out << "kind,n,lambda,gamma,c2,c2_sq\n";
        for (const PoincareRow& row : result.rows) {
            out << row.kind << ',' << format_g12(row.n) << ','
                << format_g12(row.lambda) << ',' << format_g12(row.gamma)
                << ',' << format_g12(row.c2) << ',' << format_g12(row.c2_sq)
                << '\n';
        }
        paths.push_back(joined(dir, "poincare.csv"));
        write_file(paths.back(), out.str());
        return paths;
    }
    json j;
    j["config"] = echo_json(cfg.echo);
    j["nodes"] = result.nodes;
    j["rows"] = json::array();
    for (const PoincareRow& row : result.rows) {
        json r;
        r["kind"] = row.kind;
        r["n"] = row.n;
        r["lambda"] = row.lambda;
        r["gamma"] = row.gamma;
        r["c2"] = row.c2;
        r["c2_sq"] = row.c2_sq;
        j["rows"].push_back(std::move(r));
    }
    paths.push_back(joined(dir, "result.json"));
    write_file(paths.back(), j.dump(2) + "\n");
    return paths;
}

std::vector<std::string>
write_eigencheck_outputs(const EigencheckResult& result,
                         const EigencheckConfig& cfg) {
    const auto dir = prepare_dir(cfg.common);
    std::vector<std::string> paths;
    if (cfg.common.format == "csv") {
        std::ostringstream rows;
        rows << "k,eigenvalue,predicted,sup_rel_err\n";
        for (const EigencheckRow& row : result.rows) {
            rows << row.k << ',' << format_g12(row.eigenvalue) << ','
                 << format_g12(row.predicted) << ','
                 << format_g12(row.sup_rel_err) << '\n';
        }
        paths.push_back(joined(dir, "eigencheck.csv"));
        write_file(paths.back(), rows.str());

        std::ostringstream summary;
        summary << "max_sup_rel_err,max_orthonormality_err,nodes,truncation\n"
                << format_g12(result.max_sup_rel_err) << ','
                << format_g12(result.max_orthonormality_err) << ','
                << result.nodes << ',' << result.rows.size() << '\n';
        paths.push_back(joined(dir, "eigencheck_summary.csv"));
        write_file(paths.back(), summary.str());
        return paths;
    }
    json j;
    j["config"] = echo_json(cfg.echo);
    j["nodes"] = result.nodes;
    j["max_sup_rel_err"] = result.max_sup_rel_err;
    j["max_orthonormality_err"] = result.max_orthonormality_err;
    j["rows"] = json::array();
    for (const EigencheckRow& row : result.rows) {
        json r;
        r["k"] = row.k;
        r["eigenvalue"] = row.eigenvalue;
        r["predicted"] = row.predicted;
        r["sup_rel_err"] = row.sup_rel_err;
        j["rows"].push_back(std::move(r));
    }
    paths.push_back(joined(dir, "result.json"));
    write_file(paths.back(), j.dump(2) + "\n");
    return paths;
}

} // namespace pcrlab
