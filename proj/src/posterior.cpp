#include "pcrlab/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "pcrlab/errors.hpp"
#include "pcrlab/expfam.hpp"

namespace pcrlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double checked_pow(double base, double expo) {
    const double v = std::pow(base, expo);
    if (std::isnan(v)) throw numeric_failure("moment power evaluated to NaN");
    return v;
}

struct WeightedMoments {
    double moment_p = 0.0;
    double moment_ap = 0.0;
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    double total_weight = 0.0;
    double sq_weight = 0.0;
};

// Two passes over (theta_i, w_i): normalized moments about theta0 and the
// origin, weighted mean and covariance.
template <typename PointAt>
WeightedMoments weighted_moments(std::size_t count, PointAt&& point_at,
                                 const std::vector<double>& w,
                                 const Eigen::VectorXd& theta0, double p,
                                 double ap) {
    WeightedMoments m;
    const int dim = static_cast<int>(theta0.size());
    m.mean = Eigen::VectorXd::Zero(dim);
    m.cov = Eigen::MatrixXd::Zero(dim, dim);

    for (std::size_t i = 0; i < count; ++i) {
        if (w[i] == 0.0) continue;
        m.total_weight += w[i];
        m.sq_weight += w[i] * w[i];
        const Eigen::VectorXd theta = point_at(i);
        m.moment_p += w[i] * checked_pow((theta - theta0).norm(), p);
        m.moment_ap += w[i] * checked_pow(theta.norm(), ap);
        m.mean += w[i] * theta;
    }
    if (!(m.total_weight > 0.0)) return m;

    m.moment_p /= m.total_weight;
    m.moment_ap /= m.total_weight;
    m.mean /= m.total_weight;
    for (std::size_t i = 0; i < count; ++i) {
        if (w[i] == 0.0) continue;
        const Eigen::VectorXd d = point_at(i) - m.mean;
        m.cov += w[i] * d * d.transpose();
    }
    m.cov /= m.total_weight;
    return m;
}

PosteriorEstimate from_moments(const WeightedMoments& m, PosteriorMethod method,
                               double p) {
    PosteriorEstimate est;
    est.method = method;
    est.moment_p = m.moment_p;
    est.eps = checked_pow(m.moment_p, 1.0 / p);
    est.moment_ap = m.moment_ap;
    est.mean = m.mean;
    est.cov = m.cov;
    return est;
}

// ---------------------------------------------------------------- grid ----

struct GridPass {
    std::vector<Eigen::VectorXd> axes; // node coordinates per dimension
    std::vector<double> weights;       // normalized to max 1, flat row-major
    std::size_t total = 0;
    std::size_t argmax = 0;
    bool any_finite = false;
    double boundary_fraction = 0.0;
};

Eigen::VectorXd grid_point(const GridPass& g, std::size_t flat) {
    const int dim = static_cast<int>(g.axes.size());
    Eigen::VectorXd theta(dim);
    for (int d = dim - 1; d >= 0; --d) {
        const std::size_t nd = static_cast<std::size_t>(g.axes[d].size());
        theta[d] = g.axes[d][static_cast<Eigen::Index>(flat % nd)];
        flat /= nd;
    }
    return theta;
}

GridPass evaluate_grid(const PosteriorKernelSpec& kernel,
                       const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                       int nodes) {
    const int dim = static_cast<int>(lo.size());
    GridPass g;
    g.axes.resize(dim);
    g.total = 1;
    for (int d = 0; d < dim; ++d) {
        const double h = (hi[d] - lo[d]) / nodes;
        g.axes[d].resize(nodes);
        for (int j = 0; j < nodes; ++j) {
            g.axes[d][j] = lo[d] + (j + 0.5) * h;
        }
        g.total *= static_cast<std::size_t>(nodes);
    }

    std::vector<double> lw(g.total, -kInf);
    double best = -kInf;
    for (std::size_t i = 0; i < g.total; ++i) {
        const double v = log_posterior_unnorm(kernel, grid_point(g, i));
        lw[i] = v;
        if (v > best) {
            best = v;
            g.argmax = i;
        }
    }
    g.any_finite = std::isfinite(best);
    g.weights.assign(g.total, 0.0);
    if (!g.any_finite) return g;

    double total_w = 0.0;
    double boundary_w = 0.0;
    for (std::size_t i = 0; i < g.total; ++i) {
        const double w = std::exp(lw[i] - best);
        g.weights[i] = w;
        total_w += w;
        std::size_t rest = i;
        bool on_boundary = false;
        for (int d = dim - 1; d >= 0; --d) {
            const std::size_t nd = static_cast<std::size_t>(g.axes[d].size());
            const std::size_t jd = rest % nd;
            rest /= nd;
            if (jd == 0 || jd + 1 == nd) on_boundary = true;
        }
        if (on_boundary) boundary_w += w;
    }
    g.boundary_fraction = boundary_w / total_w;
    return g;
}

PosteriorEstimate grid_posterior(const StatModel& model,
                                 const PosteriorKernelSpec& kernel,
                                 const SamplerConfig& cfg) {
    const int dim = model.dim();
    if (dim > 2) {
        throw unsupported_spec("grid posteriors support up to 2 dimensions");
    }

    Eigen::VectorXd lo, hi;
    model.param_box(lo, hi);

    // Coarse scan: mode location and local curvature set the refined box.
    const GridPass coarse = evaluate_grid(kernel, lo, hi, cfg.coarse_nodes);
    Eigen::VectorXd lo2 = lo;
    Eigen::VectorXd hi2 = hi;
    if (coarse.any_finite) {
        const Eigen::VectorXd mode = grid_point(coarse, coarse.argmax);
        std::size_t rest = coarse.argmax;
        std::vector<std::size_t> mode_idx(dim);
        for (int d = dim - 1; d >= 0; --d) {
            const std::size_t nd =
                static_cast<std::size_t>(coarse.axes[d].size());
            mode_idx[d] = rest % nd;
            rest /= nd;
        }
        std::size_t stride = 1;
        std::vector<std::size_t> strides(dim);
        for (int d = dim - 1; d >= 0; --d) {
            strides[d] = stride;
            stride *= static_cast<std::size_t>(coarse.axes[d].size());
        }
        for (int d = 0; d < dim; ++d) {
            const double h = coarse.axes[d][1] - coarse.axes[d][0];
            const std::size_t nd =
                static_cast<std::size_t>(coarse.axes[d].size());
            const std::size_t j = std::clamp<std::size_t>(mode_idx[d], 1, nd - 2);
            const std::ptrdiff_t shift =
                (static_cast<std::ptrdiff_t>(j) -
                 static_cast<std::ptrdiff_t>(mode_idx[d])) *
                static_cast<std::ptrdiff_t>(strides[d]);
            const std::size_t base = coarse.argmax + shift;
            const double wm = coarse.weights[base - strides[d]];
            const double w0 = coarse.weights[base];
            const double wp = coarse.weights[base + strides[d]];
            double sd = (hi[d] - lo[d]) / 4.0;
            if (wm > 0.0 && w0 > 0.0 && wp > 0.0) {
                const double curv =
                    -(std::log(wm) - 2.0 * std::log(w0) + std::log(wp)) /
                    (h * h);
                if (curv > 0.0) sd = 1.0 / std::sqrt(curv);
            }
            lo2[d] = std::max(lo[d], mode[d] - 10.0 * sd);
            hi2[d] = std::min(hi[d], mode[d] + 10.0 * sd);
            if (!(lo2[d] < hi2[d])) {
                lo2[d] = lo[d];
                hi2[d] = hi[d];
            }
        }
    }

    GridPass fine = evaluate_grid(kernel, lo2, hi2, cfg.grid_nodes);
    if (fine.any_finite && fine.boundary_fraction > 1e-4) {
        // Mass touches the refined box edge: widen once before giving up.
        for (int d = 0; d < dim; ++d) {
            const double c = 0.5 * (lo2[d] + hi2[d]);
            const double half = hi2[d] - c;
            lo2[d] = std::max(lo[d], c - 2.0 * half);
            hi2[d] = std::min(hi[d], c + 2.0 * half);
        }
        fine = evaluate_grid(kernel, lo2, hi2, cfg.grid_nodes);
    }

    if (!fine.any_finite) {
        throw numeric_failure("every grid weight underflowed to zero");
    }

    const WeightedMoments m = weighted_moments(
        fine.total, [&](std::size_t i) { return grid_point(fine, i); },
        fine.weights, model.theta0(), cfg.p, cfg.moment_a * cfg.p);
    PosteriorEstimate est = from_moments(m, PosteriorMethod::Grid, cfg.p);
    est.ess = static_cast<double>(fine.total);
    if (fine.boundary_fraction > 1e-4) {
        est.flagged = true;
        est.flag_reason = "posterior mass reaches the grid boundary";
    }
    return est;
}

// ---------------------------------------------------------- importance ----

PosteriorEstimate importance_posterior(const StatModel& model,
                                       const PosteriorKernelSpec& kernel,
                                       const SamplerConfig& cfg,
                                       RngStream& rng) {
    std::vector<Eigen::VectorXd> thetas(static_cast<std::size_t>(cfg.draws));
    std::vector<double> w(static_cast<std::size_t>(cfg.draws), 0.0);
    std::vector<double> lw(static_cast<std::size_t>(cfg.draws), -kInf);
    double best = -kInf;
    for (int i = 0; i < cfg.draws; ++i) {
        thetas[i] = model.sample_prior(rng);
        const double lp = model.log_prior_density(thetas[i]);
        const double lpost = log_posterior_unnorm(kernel, thetas[i]);
        if (std::isfinite(lpost) && std::isfinite(lp)) {
            lw[i] = lpost - lp;
            best = std::max(best, lw[i]);
        }
    }

    PosteriorEstimate est;
    if (!std::isfinite(best)) {
        est.method = PosteriorMethod::Importance;
        est.mean = Eigen::VectorXd::Zero(model.dim());
        est.cov = Eigen::MatrixXd::Zero(model.dim(), model.dim());
        est.flagged = true;
        est.flag_reason = "no prior draw carried posterior weight";
        return est;
    }
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (std::isfinite(lw[i])) w[i] = std::exp(lw[i] - best);
    }

    const WeightedMoments m = weighted_moments(
        w.size(), [&](std::size_t i) { return thetas[i]; }, w, model.theta0(),
        cfg.p, cfg.moment_a * cfg.p);
    est = from_moments(m, PosteriorMethod::Importance, cfg.p);
    est.ess = m.total_weight * m.total_weight / m.sq_weight;
    if (est.ess < 50.0) {
        est.flagged = true;
        est.flag_reason = "effective sample size below 50";
    }
    return est;
}

// ---------------------------------------------------------------- mcmc ----

struct ChainDiagnostics {
    double rhat;
    double ess;
};

// Split-chain potential scale reduction plus a pairwise-truncated
// autocorrelation effective sample size, both on the scalar summaries.
ChainDiagnostics chain_diagnostics(const std::vector<std::vector<double>>& f) {
    std::size_t half = f[0].size() / 2;
    for (const auto& chain : f) half = std::min(half, chain.size() / 2);

    std::vector<std::vector<double>> seq;
    for (const auto& chain : f) {
        seq.emplace_back(chain.begin(), chain.begin() + half);
        seq.emplace_back(chain.end() - static_cast<std::ptrdiff_t>(half),
                         chain.end());
    }

    const double m = static_cast<double>(seq.size());
    const double n = static_cast<double>(half);
    std::vector<double> means(seq.size());
    std::vector<double> vars(seq.size());
    double grand = 0.0;
    for (std::size_t c = 0; c < seq.size(); ++c) {
        double acc = 0.0;
        for (double v : seq[c]) acc += v;
        means[c] = acc / n;
        grand += means[c] / m;
        double sq = 0.0;
        for (double v : seq[c]) sq += (v - means[c]) * (v - means[c]);
        vars[c] = sq / (n - 1.0);
    }
    double w = 0.0;
    double b = 0.0;
    for (std::size_t c = 0; c < seq.size(); ++c) {
        w += vars[c] / m;
        b += (means[c] - grand) * (means[c] - grand) * n / (m - 1.0);
    }

    ChainDiagnostics d;
    const double var_plus = (n - 1.0) / n * w + b / n;
    d.rhat = w > 0.0 ? std::sqrt(var_plus / w) : 1.0;

    // Mean within-chain autocorrelations, truncated at the first
    // non-positive even/odd pair.
    const std::size_t max_lag = std::min<std::size_t>(half > 1 ? half - 1 : 0, 512);
    double tau = 1.0;
    double prev_pair = kInf;
    for (std::size_t lag = 1; lag + 1 <= max_lag; lag += 2) {
        double pair = 0.0;
        for (std::size_t take : {lag, lag + 1}) {
            double acov = 0.0;
            for (std::size_t c = 0; c < seq.size(); ++c) {
                double acc = 0.0;
                for (std::size_t i = 0; i + take < seq[c].size(); ++i) {
                    acc += (seq[c][i] - means[c]) * (seq[c][i + take] - means[c]);
                }
                acov += acc / (n * m);
            }
            pair += var_plus > 0.0 ? acov / var_plus : 0.0;
        }
        if (pair < 0.0) break;
        pair = std::min(pair, prev_pair); // enforce monotone sequence
        tau += 2.0 * pair;
        prev_pair = pair;
    }
    d.ess = m * n / tau;
    return d;
}

PosteriorEstimate mcmc_posterior(const StatModel& model,
                                 const PosteriorKernelSpec& kernel,
                                 const SamplerConfig& cfg, RngStream& rng) {
    const int dim = model.dim();
    const int per_chain = std::max(cfg.draws / cfg.chains, 32);
    const int burn = static_cast<int>(per_chain * cfg.burn_fraction);
    const int kept = per_chain - burn;

    // Proposal shape starts at the prior scale; a Robbins-Monro log-scale
    // update chases the target acceptance during burn-in, and the second half
    // of burn-in replaces the shape with the chain's own coordinate spread.
    const Eigen::VectorXd prior_sd =
        model.prior_covariance().diagonal().cwiseSqrt();
    const double base_step = 2.38 / std::sqrt(static_cast<double>(dim));

    std::vector<Eigen::VectorXd> pooled;
    pooled.reserve(static_cast<std::size_t>(kept) * cfg.chains);
    std::vector<std::vector<double>> fchains(cfg.chains);
    std::int64_t post_burn_accepts = 0;

    for (int c = 0; c < cfg.chains; ++c) {
        RngStream chain_rng{rng.bits(), static_cast<std::uint64_t>(c)};

        Eigen::VectorXd theta = model.prior_mean();
        double ltheta = log_posterior_unnorm(kernel, theta);
        if (!std::isfinite(ltheta)) {
            throw numeric_failure("posterior density is not finite at the "
                                  "prior mean used to start the chains");
        }

        double log_scale = 0.0;
        Eigen::VectorXd shape = prior_sd;
        Eigen::VectorXd run_mean = Eigen::VectorXd::Zero(dim);
        Eigen::VectorXd run_m2 = Eigen::VectorXd::Zero(dim);
        int adapt_count = 0;

        for (int it = 0; it < per_chain; ++it) {
            Eigen::VectorXd prop(dim);
            const double step = base_step * std::exp(log_scale);
            for (int d = 0; d < dim; ++d) {
                prop[d] = theta[d] + step * shape[d] * chain_rng.normal();
            }
            const double lprop = log_posterior_unnorm(kernel, prop);
            const double log_u = std::log(chain_rng.uniform01_open());
            const bool accept =
                std::isfinite(lprop) && log_u < lprop - ltheta;
            if (accept) {
                theta = prop;
                ltheta = lprop;
            }

            if (it < burn) {
                const double acc = accept ? 1.0 : 0.0;
                log_scale += (acc - cfg.target_accept) /
                             std::pow(it + 1.0, 0.6);
                ++adapt_count;
                const Eigen::VectorXd delta = theta - run_mean;
                run_mean += delta / adapt_count;
                run_m2 += delta.cwiseProduct(theta - run_mean);
                if (it == burn / 2 && adapt_count > 16) {
                    const Eigen::VectorXd emp_sd =
                        (run_m2 / (adapt_count - 1)).cwiseSqrt();
                    for (int d = 0; d < dim; ++d) {
                        shape[d] = std::max(emp_sd[d], 1e-8 * prior_sd[d]);
                    }
                }
            } else {
                if (accept) ++post_burn_accepts;
                pooled.push_back(theta);
                fchains[c].push_back(
                    checked_pow((theta - model.theta0()).norm(), cfg.p));
            }
        }
    }

    const std::vector<double> unit(pooled.size(), 1.0);
    const WeightedMoments m = weighted_moments(
        pooled.size(), [&](std::size_t i) { return pooled[i]; }, unit,
        model.theta0(), cfg.p, cfg.moment_a * cfg.p);
    PosteriorEstimate est = from_moments(m, PosteriorMethod::Mcmc, cfg.p);

    const ChainDiagnostics diag = chain_diagnostics(fchains);
    est.rhat = diag.rhat;
    est.ess = diag.ess;
    est.accept_rate =
        static_cast<double>(post_burn_accepts) / static_cast<double>(pooled.size());
    if (est.rhat > 1.1) {
        est.flagged = true;
        est.flag_reason = "split-chain scale reduction above 1.1";
    } else if (est.ess < 50.0) {
        est.flagged = true;
        est.flag_reason = "effective sample size below 50";
    }
    return est;
}

} // namespace

PosteriorMethod posterior_method_from_string(const std::string& name) {
    if (name == "exact") return PosteriorMethod::Exact;
    if (name == "grid") return PosteriorMethod::Grid;
    if (name == "importance") return PosteriorMethod::Importance;
    if (name == "mcmc") return PosteriorMethod::Mcmc;
    throw invalid_parameter("unknown posterior method: " + name);
}

std::string to_string(PosteriorMethod method) {
    switch (method) {
    case PosteriorMethod::Exact: return "exact";
    case PosteriorMethod::Grid: return "grid";
    case PosteriorMethod::Importance: return "importance";
    case PosteriorMethod::Mcmc: return "mcmc";
    }
    return "unknown";
}

void SamplerConfig::validate() const {
    if (grid_nodes < 128) {
        throw invalid_parameter("grids need at least 128 nodes per axis");
    }
    if (coarse_nodes < 32) {
        throw invalid_parameter("the coarse scan needs at least 32 nodes per axis");
    }
    if (method == PosteriorMethod::Mcmc && draws < 10000) {
        throw invalid_parameter("chains need at least 10000 total draws");
    }
    if (draws < 64) throw invalid_parameter("needs at least 64 draws");
    if (chains < 2) throw invalid_parameter("needs at least 2 chains");
    if (!(burn_fraction > 0.0) || !(burn_fraction < 1.0)) {
        throw invalid_parameter("burn fraction must lie in (0, 1)");
    }
    if (!(target_accept > 0.0) || !(target_accept < 1.0)) {
        throw invalid_parameter("target acceptance must lie in (0, 1)");
    }
    if (!(p >= 1.0)) throw invalid_parameter("Wasserstein order must be >= 1");
    if (!(moment_a > 1.0)) throw invalid_parameter("moment exponent must be > 1");
}

PosteriorEstimate summarize_conjugate(const ConjugatePosterior& post,
                                      const Eigen::VectorXd& theta0,
                                      const SamplerConfig& config,
                                      RngStream rng) {
    config.validate();
    PosteriorEstimate est;
    est.method = PosteriorMethod::Exact;
    est.mean = post.mean();
    est.cov = post.covariance();

    const double ap = config.moment_a * config.p;
    const bool exact_p = config.p == 2.0;
    const bool exact_ap =
        ap == 2.0 ||
        (ap == 4.0 && post.kind() == ConjugatePosterior::Kind::Gaussian);

    if (exact_p) {
        est.moment_p = post.second_moment_about(theta0);
    }
    const Eigen::VectorXd origin = Eigen::VectorXd::Zero(theta0.size());
    if (exact_ap) {
        est.moment_ap = ap == 2.0 ? post.second_moment_about(origin)
                                  : post.fourth_moment_about(origin);
    }

    if (!exact_p || !exact_ap) {
        double acc_p = 0.0;
        double acc_ap = 0.0;
        for (int i = 0; i < config.draws; ++i) {
            const Eigen::VectorXd theta = post.sample(rng);
            acc_p += checked_pow((theta - theta0).norm(), config.p);
            acc_ap += checked_pow(theta.norm(), ap);
        }
        if (!exact_p) est.moment_p = acc_p / config.draws;
        if (!exact_ap) est.moment_ap = acc_ap / config.draws;
    }
    est.eps = checked_pow(est.moment_p, 1.0 / config.p);
    return est;
}

PosteriorEstimate estimate_posterior(const StatModel& model, double n,
                                     const Eigen::VectorXd& b,
                                     const SamplerConfig& config,
                                     RngStream rng) {
    config.validate();
    const PosteriorKernelSpec kernel = model.kernel(n, b);

    switch (config.method) {
    case PosteriorMethod::Exact: {
        SuffStat stat;
        stat.n = n;
        stat.value = b;
        const auto post = model.conjugate_posterior(stat);
        if (!post) {
            throw unsupported_spec("model has no conjugate closed form");
        }
        return summarize_conjugate(*post, model.theta0(), config, rng);
    }
    case PosteriorMethod::Grid:
        return grid_posterior(model, kernel, config);
    case PosteriorMethod::Importance:
        return importance_posterior(model, kernel, config, rng);
    case PosteriorMethod::Mcmc:
        return mcmc_posterior(model, kernel, config, rng);
    }
    throw invalid_parameter("unknown posterior method");
}

} // namespace pcrlab
