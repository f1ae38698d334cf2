#include "pcrlab/poincare.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "pcrlab/errors.hpp"
#include "pcrlab/laplace.hpp"

namespace pcrlab {

GridDensity1D GridDensity1D::from_function(const std::function<double(double)>& log_density_fn,
                                           double lo, double hi, int n_nodes) {
    if (n_nodes < kMinDensityNodes) {
        throw invalid_parameter("grid density needs at least 128 nodes");
    }
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi > lo)) {
        throw invalid_parameter("grid density interval must be finite with hi > lo");
    }
    GridDensity1D out;
    out.lo = lo;
    out.hi = hi;
    out.log_density.resize(n_nodes);
    const double step = (hi - lo) / (n_nodes - 1);
    for (int i = 0; i < n_nodes; ++i) {
        out.log_density[i] = log_density_fn(lo + step * i);
    }
    out.validate();
    return out;
}

void GridDensity1D::validate() const {
    if (log_density.size() < kMinDensityNodes) {
        throw invalid_input("grid density needs at least 128 nodes");
    }
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi > lo)) {
        throw invalid_input("grid density interval must be finite with hi > lo");
    }
    for (int i = 0; i < size(); ++i) {
        if (!std::isfinite(log_density[i])) {
            throw invalid_input("log-density must be finite at every node");
        }
    }
}

NeumannSystem assemble_neumann_system(const GridDensity1D& density) {
    density.validate();
    const int m = density.size();
    const double dx = density.step();
    const double shift = density.log_density.maxCoeff();

    Eigen::VectorXd rho(m);
    for (int i = 0; i < m; ++i) {
        rho[i] = std::exp(density.log_density[i] - shift);
    }

    NeumannSystem sys;
    sys.stiff_diag = Eigen::VectorXd::Zero(m);
    sys.stiff_off = Eigen::VectorXd::Zero(m - 1);
    sys.mass_diag = Eigen::VectorXd::Zero(m);
    for (int i = 0; i + 1 < m; ++i) {
        const double cell = 0.5 * (rho[i] + rho[i + 1]);
        const double k = cell / dx;
        sys.stiff_off[i] = -k;
        sys.stiff_diag[i] += k;
        sys.stiff_diag[i + 1] += k;
        const double half_mass = 0.5 * dx * cell;
        sys.mass_diag[i] += half_mass;
        sys.mass_diag[i + 1] += half_mass;
    }
    return sys;
}

double poincare_grid_1d(const GridDensity1D& density) {
    const NeumannSystem sys = assemble_neumann_system(density);
    const int m = static_cast<int>(sys.stiff_diag.size());

    // Similarity transform by the inverse square root of the mass diagonal keeps
    // the problem symmetric tridiagonal.
    std::vector<double> diag(m);
    std::vector<double> off(m > 1 ? m - 1 : 0);
    for (int i = 0; i < m; ++i) {
        diag[i] = sys.stiff_diag[i] / sys.mass_diag[i];
    }
    for (int i = 0; i + 1 < m; ++i) {
        off[i] = sys.stiff_off[i] / std::sqrt(sys.mass_diag[i] * sys.mass_diag[i + 1]);
    }

    std::vector<double> w(m, 0.0);
    std::vector<double> z(2 * static_cast<std::size_t>(m), 0.0);
    std::vector<lapack_int> isuppz(4, 0);
    lapack_int found = 0;
    const lapack_int info =
        LAPACKE_dstevr(LAPACK_COL_MAJOR, 'N', 'I', m, diag.data(), off.data(), 0.0, 0.0, 1, 2,
                       0.0, &found, w.data(), z.data(), m, isuppz.data());
    if (info != 0 || found < 2) {
        throw numeric_failure("tridiagonal eigensolve failed");
    }
    const double mu1 = w[1];
    if (!(mu1 > 0.0)) {
        throw numeric_failure("smallest nonzero Neumann eigenvalue is not positive");
    }
    return 1.0 / std::sqrt(mu1);
}

void FrancesiParams::validate() const {
    if (!(alpha > 0.0) || !(c > 0.0) || !(R > 0.0)) {
        throw invalid_parameter("francesi params need alpha > 0, c > 0 and R > 0");
    }
    if (d < 1) {
        throw invalid_parameter("francesi params need dimension d >= 1");
    }
    if (g_r < 0.0 || u_r < 0.0 || c_r < 0.0 || d_r < 0.0) {
        throw invalid_parameter("francesi sup-norm constants must be nonnegative");
    }
    if (!(c1 > 0.0) || !(c2 > 0.0)) {
        throw invalid_parameter("francesi variant-2 constants c1 and c2 must be positive");
    }
    if (!std::isfinite(h) || !std::isfinite(ell) || !std::isfinite(g_r_star) ||
        !std::isfinite(w_r) || !std::isfinite(omega_r)) {
        throw invalid_parameter("francesi params must be finite");
    }
}

double francesi_threshold(const FrancesiParams& params, int variant) {
    params.validate();
    if (variant == 1) {
        return std::max(-params.h / params.alpha, (params.d_r + 1.0 - params.ell) / params.c);
    }
    if (variant == 2) {
        return std::max(1.0 + 1.0 / params.c2, -params.h / params.alpha);
    }
    throw invalid_parameter("francesi variant must be 1 or 2");
}

double francesi_bound(double n, const FrancesiParams& params, int variant) {
    const double threshold = francesi_threshold(params, variant);
    if (!(n > threshold)) {
        throw below_threshold("n is not past the validity threshold of the bound", threshold);
    }
    const double an = params.alpha * n + params.h;
    if (variant == 1) {
        const double lin = params.c * n + params.ell - params.d_r;
        return (an + (lin + n * params.g_r + params.u_r) * params.c_r) / (an * (lin - 1.0));
    }
    return (an + std::exp(params.omega_r) * (params.c1 * n + params.g_r_star + params.w_r)) /
           (an * params.c1 * n);
}

void InfiniteBoundConsts::validate(int variant) const {
    if (variant == 1) {
        if (!(c > 0.0) || !(R > 0.0)) {
            throw invalid_parameter("infinite bound needs c > 0 and R > 0");
        }
        if (c_r < 0.0 || g_r < 0.0) {
            throw invalid_parameter("infinite bound sup-norm constants must be nonnegative");
        }
        if (!std::isnan(trace_q) && !(std::isfinite(trace_q) && trace_q >= 0.0)) {
            throw invalid_parameter("trace_q must be nonnegative when supplied");
        }
        return;
    }
    if (variant == 2) {
        if (!(c1 > 0.0) || !(c2 > 0.0)) {
            throw invalid_parameter("infinite bound variant 2 needs c1 > 0 and c2 > 0");
        }
        if (g_r_star < 0.0 || !std::isfinite(omega_r)) {
            throw invalid_parameter("infinite bound variant-2 constants are out of range");
        }
        return;
    }
    throw invalid_parameter("infinite bound variant must be 1 or 2");
}

double infinite_bound(double n, const SpectralDecay& spec, const InfiniteBoundConsts& consts,
                      int variant) {
    consts.validate(variant);
    spec.validate();
    if (variant == 1) {
        const double trace_q =
            std::isnan(consts.trace_q) ? gaussian_ratio_series(0.0, spec).series1 : consts.trace_q;
        const double threshold = trace_q * (1.0 + 1.0 / consts.R) / consts.c;
        if (!(n > threshold)) {
            throw below_threshold("n is not past Tr[Q](1 + 1/R)/c", threshold);
        }
        const double tau = consts.c * n - trace_q * (1.0 + 1.0 / consts.R);
        const double maxterm = maxterm_rate(n, spec);
        return (1.0 + consts.c_r * (1.0 + tau + n * consts.g_r) * maxterm) / tau;
    }
    const double threshold = 1.0 + 1.0 / consts.c2;
    if (!(n > threshold)) {
        throw below_threshold("n is not past 1 + 1/c2", threshold);
    }
    const double maxterm = maxterm_rate(n, spec);
    return (1.0 + std::exp(consts.omega_r) * (consts.c1 * n + consts.g_r_star) * maxterm) /
           (consts.c1 * n);
}

double l0n_estimate(double n, double poincare_sq, double grad_g_moment) {
    if (!(n >= 0.0) || !(poincare_sq >= 0.0) || !(grad_g_moment >= 0.0)) {
        throw invalid_parameter("l0n inputs must be nonnegative");
    }
    return n * poincare_sq * std::sqrt(grad_g_moment);
}

}  // namespace pcrlab
