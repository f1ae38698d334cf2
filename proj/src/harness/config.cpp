#include "pcrlab/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "pcrlab/errors.hpp"

namespace pcrlab {

namespace {

using nlohmann::json;

json parse_root(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) {
        throw invalid_spec("configuration is not valid JSON");
    }
    if (!j.is_object()) {
        throw invalid_spec("configuration root must be a JSON object");
    }
    return j;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw invalid_input("cannot open configuration file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (allowed.find(it.key()) == allowed.end()) {
            throw invalid_spec("unknown key '" + it.key() + "' in " + where);
        }
    }
}

const json& member(const json& obj, const char* key) {
    if (!obj.contains(key)) {
        throw invalid_spec(std::string("missing required key '") + key + "'");
    }
    return obj.at(key);
}

double as_number(const json& v, const char* key) {
    if (!v.is_number()) {
        throw invalid_spec(std::string("key '") + key + "' must be a number");
    }
    return v.get<double>();
}

double num_at(const json& obj, const char* key) {
    return as_number(member(obj, key), key);
}

double num_or(const json& obj, const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    return as_number(obj.at(key), key);
}

int int_at(const json& obj, const char* key) {
    const double v = num_at(obj, key);
    if (v != std::floor(v)) {
        throw invalid_spec(std::string("key '") + key + "' must be an integer");
    }
    return static_cast<int>(v);
}

int int_or(const json& obj, const char* key, int fallback) {
    if (!obj.contains(key)) return fallback;
    const double v = as_number(obj.at(key), key);
    if (v != std::floor(v)) {
        throw invalid_spec(std::string("key '") + key + "' must be an integer");
    }
    return static_cast<int>(v);
}

std::string str_at(const json& obj, const char* key) {
    const json& v = member(obj, key);
    if (!v.is_string()) {
        throw invalid_spec(std::string("key '") + key + "' must be a string");
    }
    return v.get<std::string>();
}

std::string str_or(const json& obj, const char* key,
                   const std::string& fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_string()) {
        throw invalid_spec(std::string("key '") + key + "' must be a string");
    }
    return v.get<std::string>();
}

Eigen::VectorXd vec_at(const json& obj, const char* key) {
    const json& v = member(obj, key);
    if (!v.is_array() || v.empty()) {
        throw invalid_spec(std::string("key '") + key +
                           "' must be a nonempty array of numbers");
    }
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (const auto& e : v) out[i++] = as_number(e, key);
    return out;
}

std::vector<double> ladder_at(const json& obj, const char* key,
                              bool integers) {
    const json& v = member(obj, key);
    if (!v.is_array() || v.empty()) {
        throw invalid_spec(std::string("key '") + key +
                           "' must be a nonempty array");
    }
    std::vector<double> out;
    for (const auto& e : v) {
        const double x = as_number(e, key);
        if (!(x >= 1.0)) {
            throw invalid_parameter("ladder entries must be >= 1");
        }
        if (integers && x != std::floor(x)) {
            throw invalid_parameter("ladder entries must be integers");
        }
        if (!out.empty() && !(x > out.back())) {
            throw invalid_parameter("ladder entries must be strictly ascending");
        }
        out.push_back(x);
    }
    return out;
}

std::vector<double> ladder_or_range(const json& obj,
                                    const std::string& where) {
    const bool has_ladder = obj.contains("n_ladder");
    const bool has_range = obj.contains("n_range");
    if (has_ladder == has_range) {
        throw invalid_spec("exactly one of 'n_ladder' and 'n_range' must be "
                           "given in " + where);
    }
    if (has_ladder) return ladder_at(obj, "n_ladder", false);

    const json& r = obj.at("n_range");
    if (!r.is_object()) throw invalid_spec("'n_range' must be an object");
    check_keys(r, {"lo", "hi", "points"}, "n_range");
    const double lo = num_at(r, "lo");
    const double hi = num_at(r, "hi");
    const int points = int_at(r, "points");
    if (!(lo >= 1.0) || !(hi > lo)) {
        throw invalid_parameter("n_range needs 1 <= lo < hi");
    }
    if (points < 2) throw invalid_parameter("n_range needs at least 2 points");
    std::vector<double> out(points);
    for (int i = 0; i < points; ++i) {
        out[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1));
    }
    return out;
}

CommonOptions parse_common(const json& obj) {
    CommonOptions c;
    if (obj.contains("seed")) {
        const json& v = obj.at("seed");
        if (!v.is_number_integer() && !v.is_number_unsigned()) {
            throw invalid_spec("key 'seed' must be a nonnegative integer");
        }
        if (v.is_number_integer() && v.get<std::int64_t>() < 0) {
            throw invalid_parameter("seed must be nonnegative");
        }
        c.seed = v.get<std::uint64_t>();
    }
    c.workers = int_or(obj, "workers", 0);
    if (c.workers < 0) throw invalid_parameter("workers must be nonnegative");
    c.out_dir = str_or(obj, "out_dir", ".");
    c.format = str_or(obj, "format", "csv");
    if (c.format != "csv" && c.format != "json") {
        throw invalid_parameter("format must be 'csv' or 'json'");
    }
    return c;
}

const std::set<std::string> kCommonKeys = {"seed", "workers", "out_dir",
                                           "format"};

std::set<std::string> with_common(std::set<std::string> keys) {
    keys.insert(kCommonKeys.begin(), kCommonKeys.end());
    return keys;
}

std::unique_ptr<StatModel> build_model(const std::string& id,
                                       const json& params) {
    if (id == "multinomial") {
        check_keys(params, {"categories", "theta0", "prior_alpha"},
                   "model_params");
        return make_multinomial(int_at(params, "categories"),
                                vec_at(params, "theta0"),
                                num_at(params, "prior_alpha"));
    }
    if (id == "finite_logistic") {
        check_keys(params, {"theta0", "prior_mean", "prior_var"},
                   "model_params");
        return make_finite_logistic(vec_at(params, "theta0"),
                                    vec_at(params, "prior_mean"),
                                    vec_at(params, "prior_var"));
    }
    if (id == "infinite_logistic") {
        check_keys(params, {"truncation", "theta0", "decay_a", "prior_scale"},
                   "model_params");
        return make_infinite_logistic(int_at(params, "truncation"),
                                      vec_at(params, "theta0"),
                                      num_at(params, "decay_a"),
                                      num_or(params, "prior_scale", 1.0));
    }
    if (id == "linreg") {
        check_keys(params,
                   {"basis", "interval", "sigma", "theta0", "prior_mean",
                    "prior_var"},
                   "model_params");
        const Eigen::VectorXd interval = vec_at(params, "interval");
        if (interval.size() != 2) {
            throw invalid_spec("'interval' must be a two-number array");
        }
        return make_linreg(int_at(params, "basis"), interval[0], interval[1],
                           num_at(params, "sigma"), vec_at(params, "theta0"),
                           vec_at(params, "prior_mean"),
                           vec_at(params, "prior_var"));
    }
    if (id == "gaussian_location") {
        check_keys(params, {"sigma", "theta0", "prior_mean", "prior_var"},
                   "model_params");
        return make_gaussian_location(
            num_at(params, "sigma"), num_at(params, "theta0"),
            num_at(params, "prior_mean"), num_at(params, "prior_var"));
    }
    throw invalid_spec("unknown model '" + id + "'");
}

SamplerConfig parse_sampler(const json& obj, double p, double moment_a) {
    SamplerConfig s;
    s.p = p;
    s.moment_a = moment_a;
    check_keys(obj,
               {"method", "grid_nodes", "coarse_nodes", "draws", "chains",
                "burn_fraction", "target_accept"},
               "sampler");
    s.method = posterior_method_from_string(str_or(obj, "method", "grid"));
    s.grid_nodes = int_or(obj, "grid_nodes", s.grid_nodes);
    s.coarse_nodes = int_or(obj, "coarse_nodes", s.coarse_nodes);
    s.draws = int_or(obj, "draws", s.draws);
    s.chains = int_or(obj, "chains", s.chains);
    s.burn_fraction = num_or(obj, "burn_fraction", s.burn_fraction);
    s.target_accept = num_or(obj, "target_accept", s.target_accept);
    s.validate();
    return s;
}

PcrExperimentConfig parse_pcr_object(const json& j, bool allow_common,
                                     const std::string& where) {
    std::set<std::string> keys = {
        "model",      "model_params", "n_ladder",     "replications",
        "p",          "moment_a",     "delta_q",      "delta_scale",
        "sampler",    "path",         "neighborhood", "constants",
        "poincare_method"};
    check_keys(j, allow_common ? with_common(keys) : keys, where);

    PcrExperimentConfig cfg;
    cfg.model_id = str_at(j, "model");
    cfg.model = build_model(cfg.model_id, member(j, "model_params"));
    cfg.n_ladder = ladder_at(j, "n_ladder", true);

    cfg.p = num_or(j, "p", 2.0);
    cfg.moment_a = num_or(j, "moment_a", 2.0);
    cfg.sampler =
        parse_sampler(j.contains("sampler") ? j.at("sampler") : json::object(),
                      cfg.p, cfg.moment_a);

    cfg.replications = int_or(
        j, "replications",
        cfg.sampler.method == PosteriorMethod::Mcmc ? 50 : 200);
    if (cfg.replications < 20) {
        throw invalid_parameter("replications must be at least 20");
    }

    cfg.delta_q = num_or(j, "delta_q", 0.25);
    if (!(cfg.delta_q >= 0.0) || !(cfg.delta_q < 0.5)) {
        throw invalid_parameter("delta_q must lie in [0, 1/2)");
    }
    if (j.contains("delta_scale")) {
        const json& v = j.at("delta_scale");
        if (v.is_string()) {
            if (v.get<std::string>() != "auto") {
                throw invalid_spec("delta_scale must be a number or \"auto\"");
            }
        } else {
            const double d = as_number(v, "delta_scale");
            if (!(d > 0.0)) {
                throw invalid_parameter("delta_scale must be positive");
            }
            cfg.delta_scale = d;
        }
    }

    const std::string path = str_or(j, "path", "statistic");
    if (path == "statistic") {
        cfg.path = NeighborhoodPath::Statistic;
    } else if (path == "measure") {
        cfg.path = NeighborhoodPath::Measure;
    } else {
        throw invalid_spec("path must be 'statistic' or 'measure'");
    }

    if (j.contains("neighborhood")) {
        const json& nb = j.at("neighborhood");
        check_keys(nb, {"k", "a"}, "neighborhood");
        cfg.neighborhood_k = num_or(nb, "k", 1.0);
        cfg.neighborhood_a = num_or(nb, "a", 0.125);
        if (!(cfg.neighborhood_k > 0.0)) {
            throw invalid_parameter("neighborhood k must be positive");
        }
        if (!(cfg.neighborhood_a >= 0.0) || !(cfg.neighborhood_a < 0.25)) {
            throw invalid_parameter("neighborhood a must lie in [0, 1/4)");
        }
    }

    if (j.contains("constants")) {
        const json& cs = j.at("constants");
        check_keys(cs, {"c_r", "grad_moment"}, "constants");
        cfg.c_r = num_or(cs, "c_r", 1.0);
        if (!(cfg.c_r > 0.0)) throw invalid_parameter("c_r must be positive");
        if (cs.contains("grad_moment")) {
            const json& v = cs.at("grad_moment");
            if (v.is_string()) {
                if (v.get<std::string>() != "auto") {
                    throw invalid_spec(
                        "grad_moment must be a number or \"auto\"");
                }
            } else {
                const double g = as_number(v, "grad_moment");
                if (!(g > 0.0)) {
                    throw invalid_parameter("grad_moment must be positive");
                }
                cfg.grad_moment = g;
            }
        }
    }

    cfg.poincare_method = str_or(j, "poincare_method", "posterior_cov");
    if (cfg.poincare_method != "posterior_cov" &&
        cfg.poincare_method != "maxterm" && cfg.poincare_method != "grid1d") {
        throw invalid_spec("poincare_method must be 'posterior_cov', "
                           "'maxterm' or 'grid1d'");
    }

    if (allow_common) cfg.common = parse_common(j);
    cfg.echo = j.dump();
    return cfg;
}

LaplaceFamily parse_family(const json& obj) {
    if (!obj.is_object()) {
        throw invalid_spec("each decay family must be an object");
    }
    check_keys(obj, {"a", "b", "c"}, "families");
    LaplaceFamily fam;
    fam.a = num_at(obj, "a");
    fam.b = num_at(obj, "b");
    if (!(fam.a > 0.0) || !(fam.b >= 0.0)) {
        throw invalid_parameter("decay family needs a > 0 and b >= 0");
    }
    if (obj.contains("c")) {
        fam.c = num_at(obj, "c");
        if (!(*fam.c > 0.0)) throw invalid_parameter("decay c must be positive");
    }
    return fam;
}

} // namespace

SpectralDecay decay_from_family(const LaplaceFamily& family) {
    if (family.c) return SpectralDecay::power_family(family.a, family.b,
                                                     *family.c);
    return SpectralDecay::power_family(family.a, family.b);
}

void apply_overrides(CommonOptions& common, const CommonOverrides& overrides) {
    if (overrides.seed) common.seed = *overrides.seed;
    if (overrides.workers) {
        if (*overrides.workers < 0) {
            throw invalid_parameter("workers must be nonnegative");
        }
        common.workers = *overrides.workers;
    }
    if (overrides.out_dir) common.out_dir = *overrides.out_dir;
    if (overrides.format) {
        if (*overrides.format != "csv" && *overrides.format != "json") {
            throw invalid_parameter("format must be 'csv' or 'json'");
        }
        common.format = *overrides.format;
    }
}

PcrExperimentConfig parse_pcr_config_text(const std::string& text) {
    return parse_pcr_object(parse_root(text), true, "the configuration");
}

PcrExperimentConfig parse_pcr_config(const std::string& path) {
    return parse_pcr_config_text(slurp(path));
}

GcRateConfig parse_gc_config_text(const std::string& text) {
    const json j = parse_root(text);
    check_keys(j, with_common({"measure", "n_ladder", "replications", "p"}),
               "the configuration");
    GcRateConfig cfg;

    const json& m = member(j, "measure");
    if (!m.is_object()) throw invalid_spec("'measure' must be an object");
    const std::string kind = str_at(m, "kind");
    if (kind == "uniform") {
        check_keys(m, {"kind", "lo", "hi"}, "measure");
        const double lo = num_or(m, "lo", 0.0);
        const double hi = num_or(m, "hi", 1.0);
        if (!(hi > lo)) throw invalid_parameter("uniform needs lo < hi");
        cfg.mu0 = QuantileMeasure::uniform(lo, hi);
    } else if (kind == "gaussian") {
        check_keys(m, {"kind", "mean", "sd"}, "measure");
        const double sd = num_or(m, "sd", 1.0);
        if (!(sd > 0.0)) throw invalid_parameter("gaussian sd must be positive");
        cfg.mu0 = QuantileMeasure::gaussian(num_or(m, "mean", 0.0), sd);
    } else {
        throw invalid_spec("measure kind must be 'uniform' or 'gaussian'");
    }
    cfg.measure_id = kind;

    cfg.n_ladder = ladder_at(j, "n_ladder", true);
    cfg.replications = int_or(j, "replications", 200);
    if (cfg.replications < 20) {
        throw invalid_parameter("replications must be at least 20");
    }
    cfg.p = num_or(j, "p", 2.0);
    if (!(cfg.p >= 1.0)) throw invalid_parameter("p must be at least 1");
    cfg.common = parse_common(j);
    cfg.echo = j.dump();
    return cfg;
}

GcRateConfig parse_gc_config(const std::string& path) {
    return parse_gc_config_text(slurp(path));
}

LaplaceRatesConfig parse_laplace_config_text(const std::string& text) {
    const json j = parse_root(text);
    check_keys(j, with_common({"families", "n_ladder", "n_range"}),
               "the configuration");
    LaplaceRatesConfig cfg;
    const json& fams = member(j, "families");
    if (!fams.is_array() || fams.empty()) {
        throw invalid_spec("'families' must be a nonempty array");
    }
    for (const auto& f : fams) cfg.families.push_back(parse_family(f));
    cfg.n_ladder = ladder_or_range(j, "the configuration");
    cfg.common = parse_common(j);
    cfg.echo = j.dump();
    return cfg;
}

LaplaceRatesConfig parse_laplace_config(const std::string& path) {
    return parse_laplace_config_text(slurp(path));
}

DecomposeConfig parse_decompose_config_text(const std::string& text) {
    const json j = parse_root(text);
    DecomposeConfig cfg;
    const std::string mode = str_at(j, "mode");
    if (mode == "monte_carlo") {
        check_keys(j, with_common({"mode", "experiment"}), "the configuration");
        cfg.mode = DecomposeConfig::Mode::MonteCarlo;
        const json& exp = member(j, "experiment");
        if (!exp.is_object()) {
            throw invalid_spec("'experiment' must be an object");
        }
        cfg.pcr = std::make_unique<PcrExperimentConfig>(
            parse_pcr_object(exp, false, "experiment"));
        cfg.common = parse_common(j);
        cfg.pcr->common = cfg.common;
    } else if (mode == "predicted") {
        check_keys(j,
                   with_common({"mode", "decay", "n_ladder", "n_range", "p",
                                "moment_a", "delta_q", "constants"}),
                   "the configuration");
        cfg.mode = DecomposeConfig::Mode::Predicted;
        cfg.decay = parse_family(member(j, "decay"));
        cfg.n_ladder = ladder_or_range(j, "the configuration");
        cfg.p = num_or(j, "p", 2.0);
        cfg.moment_a = num_or(j, "moment_a", 2.0);
        if (!(cfg.p >= 1.0)) throw invalid_parameter("p must be at least 1");
        if (!(cfg.moment_a > 1.0)) {
            throw invalid_parameter("moment_a must exceed 1");
        }
        cfg.delta_q = num_or(j, "delta_q", 0.25);
        if (!(cfg.delta_q >= 0.0) || !(cfg.delta_q < 0.5)) {
            throw invalid_parameter("delta_q must lie in [0, 1/2)");
        }
        if (j.contains("constants")) {
            const json& cs = j.at("constants");
            check_keys(cs,
                       {"c_r", "grad_moment", "stat_dev_scale", "norm_theta0"},
                       "constants");
            cfg.c_r = num_or(cs, "c_r", 1.0);
            cfg.grad_moment = num_or(cs, "grad_moment", 1.0);
            cfg.stat_dev_scale = num_or(cs, "stat_dev_scale", 1.0);
            cfg.norm_theta0 = num_or(cs, "norm_theta0", 0.0);
            if (!(cfg.c_r > 0.0) || !(cfg.grad_moment > 0.0) ||
                !(cfg.stat_dev_scale > 0.0) || !(cfg.norm_theta0 >= 0.0)) {
                throw invalid_parameter("constants must be positive "
                                        "(norm_theta0 nonnegative)");
            }
        }
        cfg.common = parse_common(j);
    } else {
        throw invalid_spec("mode must be 'monte_carlo' or 'predicted'");
    }
    cfg.echo = j.dump();
    return cfg;
}

DecomposeConfig parse_decompose_config(const std::string& path) {
    return parse_decompose_config_text(slurp(path));
}

PoincareConfig parse_poincare_config_text(const std::string& text) {
    const json j = parse_root(text);
    check_keys(j, with_common({"targets", "nodes"}), "the configuration");
    PoincareConfig cfg;
    const json& ts = member(j, "targets");
    if (!ts.is_array() || ts.empty()) {
        throw invalid_spec("'targets' must be a nonempty array");
    }
    for (const auto& t : ts) {
        if (!t.is_object()) throw invalid_spec("each target must be an object");
        PoincareTarget target;
        target.kind = str_at(t, "kind");
        if (target.kind == "uniform" || target.kind == "gaussian") {
            check_keys(t, {"kind"}, "targets");
        } else if (target.kind == "gibbs") {
            check_keys(t, {"kind", "lambda", "gamma", "n_values"}, "targets");
            target.lambda = num_or(t, "lambda", 1.0);
            target.gamma = num_or(t, "gamma", 1.0);
            if (!(target.lambda > 0.0) || !(target.gamma > 0.0)) {
                throw invalid_parameter("gibbs lambda and gamma must be "
                                        "positive");
            }
            target.n_values = ladder_at(t, "n_values", false);
        } else {
            throw invalid_spec("target kind must be 'uniform', 'gaussian' or "
                               "'gibbs'");
        }
        cfg.targets.push_back(std::move(target));
    }
    cfg.nodes = int_or(j, "nodes", 4097);
    if (cfg.nodes < 65) throw invalid_parameter("nodes must be at least 65");
    cfg.common = parse_common(j);
    cfg.echo = j.dump();
    return cfg;
}

PoincareConfig parse_poincare_config(const std::string& path) {
    return parse_poincare_config_text(slurp(path));
}

EigencheckConfig parse_eigencheck_config_text(const std::string& text) {
    const json j = parse_root(text);
    check_keys(j, with_common({"truncation", "nodes"}), "the configuration");
    EigencheckConfig cfg;
    cfg.truncation = int_or(j, "truncation", 16);
    if (cfg.truncation < 1 || cfg.truncation > 64) {
        throw invalid_parameter("truncation must lie in [1, 64]");
    }
    cfg.nodes = int_or(j, "nodes", 4096);
    if (cfg.nodes < 257) throw invalid_parameter("nodes must be at least 257");
    cfg.common = parse_common(j);
    cfg.echo = j.dump();
    return cfg;
}

EigencheckConfig parse_eigencheck_config(const std::string& path) {
    return parse_eigencheck_config_text(slurp(path));
}

} // namespace pcrlab
