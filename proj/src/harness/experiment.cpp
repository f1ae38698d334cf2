#include "pcrlab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <utility>

#include <Eigen/Eigenvalues>

#include "pcrlab/errors.hpp"
#include "pcrlab/expfam.hpp"
#include "pcrlab/measure.hpp"
#include "pcrlab/parallel.hpp"
#include "pcrlab/poincare.hpp"
#include "pcrlab/posterior.hpp"

namespace pcrlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Stream tags keep the sampling stages of one experiment independent.
constexpr std::uint64_t kTagData = 0;
constexpr std::uint64_t kTagSampler = 1;
constexpr std::uint64_t kTagShrink = 2;
constexpr std::uint64_t kTagTail = 3;
constexpr std::uint64_t kTagCalibrate = 4;
constexpr std::uint64_t kTagReplication = 5;

int resolve_workers(const CommonOptions& common) {
    return common.workers > 0 ? common.workers : hardware_workers();
}

double finite_mean(const std::vector<double>& v) {
    double sum = 0.0;
    std::size_t count = 0;
    for (double x : v) {
        if (std::isfinite(x)) {
            sum += x;
            ++count;
        }
    }
    return count == 0 ? kNaN : sum / static_cast<double>(count);
}

double finite_se(const std::vector<double>& v, double mean) {
    double ss = 0.0;
    std::size_t count = 0;
    for (double x : v) {
        if (std::isfinite(x)) {
            ss += (x - mean) * (x - mean);
            ++count;
        }
    }
    if (count < 2) return 0.0;
    return std::sqrt(ss / (static_cast<double>(count) - 1.0) /
                     static_cast<double>(count));
}

double median_of(std::vector<double> v) {
    if (v.empty()) throw invalid_input("median of an empty sample");
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    double hi = v[mid];
    if (v.size() % 2 == 1) return hi;
    std::nth_element(v.begin(), v.begin() + mid - 1, v.begin() + mid);
    return 0.5 * (v[mid - 1] + hi);
}

double calibrate_delta_scale(const StatModel& model, double n1, double q,
                             int draws, std::uint64_t seed, int workers) {
    const Eigen::VectorXd s0 = model.stat_mean_at(model.theta0());
    std::vector<double> dev(draws);
    parallel_for_index(static_cast<std::size_t>(draws), workers,
                       [&](std::size_t r) {
        RngStream rng{seed, kTagCalibrate, static_cast<std::uint64_t>(r)};
        const Eigen::MatrixXd data =
            model.sample_data(rng, static_cast<int>(n1), model.theta0());
        dev[r] = (model.suff_stat(data).value - s0).norm();
    });
    return median_of(std::move(dev)) * std::pow(n1, q);
}

// Squared Poincare constant of the level posterior, by the configured route.
double level_poincare_sq(const PcrExperimentConfig& cfg,
                         const StatModel& model, double n,
                         const PosteriorEstimate& shrink,
                         const Eigen::VectorXd& s0) {
    if (cfg.poincare_method == "maxterm") {
        const auto spec = model.spectral();
        if (!spec) {
            throw invalid_spec(
                "poincare_method 'maxterm' needs a model with spectral decay");
        }
        return maxterm_rate(n, *spec);
    }
    if (cfg.poincare_method == "grid1d") {
        if (model.dim() != 1) {
            throw invalid_spec(
                "poincare_method 'grid1d' needs a one dimensional parameter");
        }
        const PosteriorKernelSpec kernel = model.kernel(n, s0);
        Eigen::VectorXd lo, hi;
        model.param_box(lo, hi);
        const GridDensity1D density = GridDensity1D::from_function(
            [&](double t) {
                Eigen::VectorXd theta(1);
                theta[0] = t;
                return log_posterior_unnorm(kernel, theta);
            },
            lo[0], hi[0]);
        const double c2 = poincare_grid_1d(density);
        return c2 * c2;
    }
    // posterior_cov: the largest posterior variance direction (exact for
    // Gaussian posteriors, indicative otherwise).
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(shrink.cov);
    return std::max(solver.eigenvalues().maxCoeff(), 0.0);
}

std::vector<std::pair<double, double>> finite_pairs(
    const std::vector<RunRecord>& runs, bool bound) {
    std::vector<std::pair<double, double>> out;
    for (const RunRecord& rec : runs) {
        const double v = bound ? rec.bound_total : rec.eps;
        if (std::isfinite(v)) out.emplace_back(rec.n, v);
    }
    return out;
}

bool try_fit(const std::vector<std::pair<double, double>>& pairs,
             std::uint64_t seed, RateFit& fit) {
    std::vector<double> n(pairs.size()), v(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        n[i] = pairs[i].first;
        v[i] = pairs[i].second;
    }
    try {
        fit = fit_rate(n, v, 2000, seed);
        return true;
    } catch (const invalid_input&) {
        return false;
    }
}

} // namespace

double statistic_tail_probability(const StatModel& model, double n,
                                  double radius, int replications,
                                  std::uint64_t seed, int workers) {
    const int reps = std::max(replications, 200);
    const Eigen::VectorXd s0 = model.stat_mean_at(model.theta0());
    std::vector<int> outside(reps, 0);
    parallel_for_index(static_cast<std::size_t>(reps), workers,
                       [&](std::size_t r) {
        RngStream rng{seed, static_cast<std::uint64_t>(r)};
        const Eigen::MatrixXd data =
            model.sample_data(rng, static_cast<int>(n), model.theta0());
        const double dev = (model.suff_stat(data).value - s0).norm();
        outside[r] = dev >= radius ? 1 : 0;
    });
    long hits = 0;
    for (int h : outside) hits += h;
    return static_cast<double>(hits) / static_cast<double>(reps);
}

double measure_tail_probability(const StatModel& model, double n,
                                double radius, double p, int replications,
                                std::uint64_t seed, int workers) {
    const int reps = std::max(replications, 200);
    std::vector<int> outside(reps, 0);
    parallel_for_index(static_cast<std::size_t>(reps), workers,
                       [&](std::size_t r) {
        RngStream rng{seed, static_cast<std::uint64_t>(r)};
        const Eigen::MatrixXd data =
            model.sample_data(rng, static_cast<int>(n), model.theta0());
        outside[r] = model.gc_distance(data, p) >= radius ? 1 : 0;
    });
    long hits = 0;
    for (int h : outside) hits += h;
    return static_cast<double>(hits) / static_cast<double>(reps);
}

PcrRunResult run_pcr_experiment(const PcrExperimentConfig& cfg) {
    if (!cfg.model) throw invalid_input("experiment configuration has no model");
    if (cfg.n_ladder.empty()) throw invalid_input("empty ladder");
    if (cfg.replications < 20) {
        throw invalid_parameter("replications must be at least 20");
    }
    const StatModel& model = *cfg.model;
    const Eigen::VectorXd theta0 = model.theta0();
    const Eigen::VectorXd s0 = model.stat_mean_at(theta0);
    const int workers = resolve_workers(cfg.common);
    const std::uint64_t seed = cfg.common.seed;
    const int reps = cfg.replications;

    SamplerConfig sampler = cfg.sampler;
    sampler.p = cfg.p;
    sampler.moment_a = cfg.moment_a;
    sampler.validate();

    PcrRunResult out;
    out.delta_scale =
        cfg.delta_scale
            ? *cfg.delta_scale
            : calibrate_delta_scale(model, cfg.n_ladder.front(), cfg.delta_q,
                                    std::max(200, reps), seed, workers);

    const double grad =
        cfg.grad_moment ? *cfg.grad_moment : model.grad_g_moment();
    const double norm_theta0 = theta0.norm();
    std::vector<std::string> failures;

    for (std::size_t level = 0; level < cfg.n_ladder.size(); ++level) {
        const double n = cfg.n_ladder[level];
        const double delta_n = out.delta_scale * std::pow(n, -cfg.delta_q);
        const double measure_radius =
            cfg.neighborhood_k * std::pow(n, -cfg.neighborhood_a);

        // Shared level quantities: the posterior at the nonrandom statistic
        // (shrinkage and heavy-tail moments) and the dedicated tail estimate.
        const PosteriorEstimate shrink = estimate_posterior(
            model, n, s0, sampler, RngStream{seed, kTagShrink, level});
        const std::uint64_t tail_seed = mix_keys({seed, kTagTail, level});
        const double tail_prob =
            cfg.path == NeighborhoodPath::Statistic
                ? statistic_tail_probability(model, n, delta_n,
                                             std::max(200, reps), tail_seed,
                                             workers)
                : measure_tail_probability(model, n, measure_radius, cfg.p,
                                           std::max(200, reps), tail_seed,
                                           workers);
        const double poincare_sq =
            level_poincare_sq(cfg, model, n, shrink, s0);
        const double l0n = l0n_estimate(n, poincare_sq, grad);

        std::vector<RunRecord> records(reps);
        std::vector<double> devs(reps, kNaN);
        parallel_for_index(static_cast<std::size_t>(reps), workers,
                           [&](std::size_t r) {
            const std::uint64_t rep_seed =
                mix_keys({seed, kTagReplication, level,
                          static_cast<std::uint64_t>(r)});
            RunRecord rec;
            rec.n = n;
            rec.replication = static_cast<int>(r);
            rec.seed = rep_seed;
            try {
                RngStream data_rng{rep_seed, kTagData};
                const Eigen::MatrixXd data =
                    model.sample_data(data_rng, static_cast<int>(n), theta0);
                const SuffStat stat = model.suff_stat(data);
                const double dev = (stat.value - s0).norm();
                RngStream sampler_rng{rep_seed, kTagSampler};
                const PosteriorEstimate est = estimate_posterior(
                    model, n, stat.value, sampler, sampler_rng);
                rec.eps = est.eps;
                rec.flagged = est.flagged;
                rec.gc = model.gc_distance(data, cfg.p);
                rec.jn = cfg.path == NeighborhoodPath::Statistic
                             ? (dev >= delta_n ? 1 : 0)
                             : (rec.gc >= measure_radius ? 1 : 0);

                PcrBoundComponents comp;
                comp.shrinkage = shrink.eps;
                comp.l0n = l0n;
                comp.mean_stat_dev = dev;
                comp.tail_prob = tail_prob;
                comp.posterior_moment_ap = shrink.moment_ap;
                comp.a = cfg.moment_a;
                comp.p = cfg.p;
                comp.norm_theta0 = norm_theta0;
                const PcrBoundTerms terms = assemble_pcr_bound(comp);
                rec.term1 = terms.term1_shrinkage;
                rec.term2 = terms.term2_tail_scaled;
                rec.term3 = terms.term3_posterior_tail;
                rec.term4 = terms.term4_lipschitz;
                rec.bound_total = cfg.c_r * terms.total;
                devs[r] = dev;
            } catch (const std::exception&) {
                // A replication that cannot produce an estimate counts as
                // flagged; its columns stay NaN and the fits skip it.
                rec.eps = kNaN;
                rec.term1 = rec.term2 = rec.term3 = rec.term4 = kNaN;
                rec.bound_total = kNaN;
                rec.gc = kNaN;
                rec.flagged = true;
            }
            records[r] = std::move(rec);
        });

        LevelSummary summary;
        summary.n = n;
        summary.delta_n = delta_n;
        summary.replications = reps;
        summary.jn_rate = tail_prob;
        std::vector<double> eps_values(reps), gc_values(reps);
        for (int r = 0; r < reps; ++r) {
            eps_values[r] = records[r].eps;
            gc_values[r] = records[r].gc;
            if (records[r].flagged) ++summary.flagged_count;
        }
        summary.eps_mean = finite_mean(eps_values);
        summary.eps_se = finite_se(eps_values, summary.eps_mean);
        summary.gc_mean = finite_mean(gc_values);

        PcrBoundComponents comp;
        comp.shrinkage = shrink.eps;
        comp.l0n = l0n;
        comp.mean_stat_dev = finite_mean(devs);
        comp.tail_prob = tail_prob;
        comp.posterior_moment_ap = shrink.moment_ap;
        comp.a = cfg.moment_a;
        comp.p = cfg.p;
        comp.norm_theta0 = norm_theta0;
        summary.terms = assemble_pcr_bound(comp);
        summary.terms.total *= cfg.c_r;

        if (shrink.flagged) {
            std::ostringstream msg;
            msg << "n=" << n << ": shrinkage estimate flagged ("
                << shrink.flag_reason << ")";
            failures.push_back(msg.str());
        }
        if (summary.flagged_count * 5 > reps) {
            std::ostringstream msg;
            msg << "n=" << n << ": " << summary.flagged_count << " of " << reps
                << " replications flagged";
            failures.push_back(msg.str());
        }

        out.levels.push_back(std::move(summary));
        out.runs.insert(out.runs.end(),
                        std::make_move_iterator(records.begin()),
                        std::make_move_iterator(records.end()));
    }

    out.eps_fit_ok = try_fit(finite_pairs(out.runs, false), seed, out.eps_fit);
    out.bound_fit_ok =
        try_fit(finite_pairs(out.runs, true), seed, out.bound_fit);

    if (!failures.empty()) {
        out.failed = true;
        std::ostringstream msg;
        for (std::size_t i = 0; i < failures.size(); ++i) {
            if (i > 0) msg << "; ";
            msg << failures[i];
        }
        out.failure_reason = msg.str();
    }
    return out;
}

GcRateResult run_gc_rate(const GcRateConfig& cfg) {
    if (cfg.n_ladder.empty()) throw invalid_input("empty ladder");
    if (cfg.replications < 20) {
        throw invalid_parameter("replications must be at least 20");
    }
    if (!(cfg.p >= 1.0)) throw invalid_parameter("p must be at least 1");
    const int workers = resolve_workers(cfg.common);
    const int reps = cfg.replications;
    GcRateResult out;

    for (std::size_t level = 0; level < cfg.n_ladder.size(); ++level) {
        const double n = cfg.n_ladder[level];
        std::vector<RunRecord> records(reps);
        parallel_for_index(static_cast<std::size_t>(reps), workers,
                           [&](std::size_t r) {
            const std::uint64_t rep_seed =
                mix_keys({cfg.common.seed, kTagReplication, level,
                          static_cast<std::uint64_t>(r)});
            RngStream rng{rep_seed, kTagData};
            std::vector<double> draws(static_cast<std::size_t>(n));
            for (double& x : draws) {
                double u = rng.uniform01();
                while (u == 0.0) u = rng.uniform01();
                x = cfg.mu0.quantile(u);
            }
            const EmpiricalMeasure empirical(std::move(draws));
            const double dist = wasserstein_1d(empirical, cfg.mu0, cfg.p);
            RunRecord rec;
            rec.n = n;
            rec.replication = static_cast<int>(r);
            rec.seed = rep_seed;
            rec.eps = dist;
            rec.gc = dist;
            records[r] = std::move(rec);
        });

        LevelSummary summary;
        summary.n = n;
        summary.replications = reps;
        std::vector<double> values(reps);
        for (int r = 0; r < reps; ++r) values[r] = records[r].eps;
        summary.eps_mean = finite_mean(values);
        summary.eps_se = finite_se(values, summary.eps_mean);
        summary.gc_mean = summary.eps_mean;
        out.levels.push_back(std::move(summary));
        out.runs.insert(out.runs.end(),
                        std::make_move_iterator(records.begin()),
                        std::make_move_iterator(records.end()));
    }

    out.fit_ok = try_fit(finite_pairs(out.runs, false), cfg.common.seed,
                         out.fit);
    return out;
}

LaplaceRatesResult run_laplace_rates(const LaplaceRatesConfig& cfg) {
    if (cfg.families.empty()) throw invalid_input("no decay families");
    if (cfg.n_ladder.empty()) throw invalid_input("empty ladder");
    const int workers = resolve_workers(cfg.common);
    LaplaceRatesResult out;

    for (const LaplaceFamily& family : cfg.families) {
        const SpectralDecay spec = decay_from_family(family);
        LaplaceFamilyRates rates;
        rates.family = family;
        rates.n = cfg.n_ladder;
        for (double n : cfg.n_ladder) {
            const RatioSeries series = gaussian_ratio_series(n, spec, workers);
            rates.series1.push_back(series.series1);
            rates.series2.push_back(series.series2);
            rates.maxterm.push_back(maxterm_rate(n, spec));
        }
        rates.predicted = predicted_exponents(spec);
        const double denom = 1.0 + family.a + family.b;
        rates.series1_predicted = -family.a / denom;
        rates.series2_predicted = family.c ? -*family.c / denom : 0.0;
        rates.maxterm_predicted = -(1.0 + family.a) / denom;
        try {
            rates.series1_fit = fit_rate(rates.n, rates.series1, 0);
            rates.maxterm_fit = fit_rate(rates.n, rates.maxterm, 0);
            rates.fits_ok = true;
        } catch (const invalid_input&) {
            rates.fits_ok = false;
        }
        try {
            rates.series2_fit = fit_rate(rates.n, rates.series2, 0);
            rates.series2_fit_ok = true;
        } catch (const invalid_input&) {
            rates.series2_fit_ok = false;
        }
        out.families.push_back(std::move(rates));
    }
    return out;
}

PredictedDecomposition predicted_decomposition(const DecomposeConfig& cfg) {
    if (cfg.mode != DecomposeConfig::Mode::Predicted) {
        throw invalid_input(
            "predicted_decomposition needs a predicted-mode configuration");
    }
    if (cfg.n_ladder.empty()) throw invalid_input("empty ladder");
    const int workers = resolve_workers(cfg.common);
    const SpectralDecay spec = decay_from_family(cfg.decay);
    const double ap = cfg.moment_a * cfg.p;

    PredictedDecomposition out;
    out.exponents = predicted_exponents(spec);

    std::vector<double> totals;
    for (double n : cfg.n_ladder) {
        PredictedRow row;
        row.n = n;
        const RatioSeries series = gaussian_ratio_series(n, spec, workers);
        row.series1 = series.series1;
        row.series2 = series.series2;
        row.maxterm = maxterm_rate(n, spec);
        row.tail = std::exp(-std::pow(n, 1.0 - 2.0 * cfg.delta_q));
        row.l0n = l0n_estimate(n, row.maxterm, cfg.grad_moment);
        row.mean_stat_dev = cfg.stat_dev_scale / std::sqrt(n);

        // The ratio series is the posterior second moment about theta0; its
        // square root is the Gaussian shrinkage proxy, and the same moment
        // shifted by ||theta0||^2 feeds the heavy-tail term.
        const double moment2 = row.series1 + row.series2;
        PcrBoundComponents comp;
        comp.shrinkage = std::sqrt(moment2);
        comp.l0n = row.l0n;
        comp.mean_stat_dev = row.mean_stat_dev;
        comp.tail_prob = row.tail;
        comp.posterior_moment_ap =
            std::pow(cfg.norm_theta0 * cfg.norm_theta0 + moment2, ap / 2.0);
        comp.a = cfg.moment_a;
        comp.p = cfg.p;
        comp.norm_theta0 = cfg.norm_theta0;
        row.terms = assemble_pcr_bound(comp);
        totals.push_back(cfg.c_r * row.terms.total);
        out.rows.push_back(std::move(row));
    }

    try {
        out.bound_fit = fit_rate(cfg.n_ladder, totals, 0);
        out.bound_fit_ok = true;
    } catch (const invalid_input&) {
        out.bound_fit_ok = false;
    }
    return out;
}

PoincareResult run_poincare(const PoincareConfig& cfg) {
    if (cfg.targets.empty()) throw invalid_input("no density targets");
    PoincareResult out;
    out.nodes = cfg.nodes;

    for (const PoincareTarget& target : cfg.targets) {
        if (target.kind == "uniform") {
            const GridDensity1D density = GridDensity1D::from_function(
                [](double) { return 0.0; }, 0.0, 1.0, cfg.nodes);
            PoincareRow row;
            row.kind = target.kind;
            row.c2 = poincare_grid_1d(density);
            row.c2_sq = row.c2 * row.c2;
            out.rows.push_back(std::move(row));
        } else if (target.kind == "gaussian") {
            const GridDensity1D density = GridDensity1D::from_function(
                [](double x) { return -0.5 * x * x; }, -8.0, 8.0, cfg.nodes);
            PoincareRow row;
            row.kind = target.kind;
            row.c2 = poincare_grid_1d(density);
            row.c2_sq = row.c2 * row.c2;
            out.rows.push_back(std::move(row));
        } else {
            for (double n : target.n_values) {
                const double variance =
                    target.lambda / (n * target.lambda * target.gamma + 1.0);
                const double sd = std::sqrt(variance);
                const GridDensity1D density = GridDensity1D::from_function(
                    [variance](double x) { return -0.5 * x * x / variance; },
                    -8.0 * sd, 8.0 * sd, cfg.nodes);
                PoincareRow row;
                row.kind = target.kind;
                row.n = n;
                row.lambda = target.lambda;
                row.gamma = target.gamma;
                row.c2 = poincare_grid_1d(density);
                row.c2_sq = row.c2 * row.c2;
                out.rows.push_back(std::move(row));
            }
        }
    }
    return out;
}

EigencheckResult run_eigencheck(const EigencheckConfig& cfg) {
    EigencheckResult out;
    out.nodes = cfg.nodes;
    const int nodes = cfg.nodes;
    const double pi = 3.14159265358979323846;

    for (int k = 1; k <= cfg.truncation; ++k) {
        Eigen::VectorXd h(nodes);
        for (int i = 0; i < nodes; ++i) {
            h[i] = logistic_basis(k, static_cast<double>(i) / (nodes - 1));
        }
        const Eigen::VectorXd image = apply_istar(h);
        const double eigenvalue = 1.0 / (k * pi * k * pi);
        const Eigen::VectorXd predicted = h * eigenvalue;
        const double sup_err = (image - predicted).cwiseAbs().maxCoeff();
        const double sup_ref = predicted.cwiseAbs().maxCoeff();

        EigencheckRow row;
        row.k = k;
        row.eigenvalue = image.dot(h) / h.dot(h);
        row.predicted = eigenvalue;
        row.sup_rel_err = sup_err / sup_ref;
        out.max_sup_rel_err = std::max(out.max_sup_rel_err, row.sup_rel_err);
        out.rows.push_back(row);
    }

    for (int j = 1; j <= cfg.truncation; ++j) {
        for (int k = j; k <= cfg.truncation; ++k) {
            const double inner = h1star_inner(
                [j](double x) { return logistic_basis_deriv(j, x); },
                [k](double x) { return logistic_basis_deriv(k, x); });
            const double target = j == k ? 1.0 : 0.0;
            out.max_orthonormality_err =
                std::max(out.max_orthonormality_err, std::abs(inner - target));
        }
    }
    return out;
}

} // namespace pcrlab
