#include "pcrlab/quadrature.hpp"

#include <gsl/gsl_cdf.h>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <memory>
#include <string>

#include "pcrlab/errors.hpp"

namespace pcrlab {

namespace {

// GSL's default error handler aborts the process; run with it disabled and
// translate status codes into exceptions instead.
const int g_gsl_handler_off = [] {
    gsl_set_error_handler_off();
    return 0;
}();

double call_std_function(double x, void* params) {
    const auto* f = static_cast<const std::function<double(double)>*>(params);
    return (*f)(x);
}

} // namespace

GaussLegendre::GaussLegendre(std::size_t n, double a, double b) {
    (void)g_gsl_handler_off;
    gsl_integration_glfixed_table* table = gsl_integration_glfixed_table_alloc(n);
    if (table == nullptr) {
        throw numeric_failure("failed to allocate Gauss-Legendre table");
    }
    nodes_.resize(n);
    weights_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        gsl_integration_glfixed_point(a, b, i, &nodes_[i], &weights_[i], table);
    }
    gsl_integration_glfixed_table_free(table);
}

double GaussLegendre::integrate(const std::function<double(double)>& f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        s += weights_[i] * f(nodes_[i]);
    }
    return s;
}

double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, double abs_tol, double rel_tol) {
    (void)g_gsl_handler_off;
    constexpr std::size_t kLimit = 512;
    std::unique_ptr<gsl_integration_workspace,
                    decltype(&gsl_integration_workspace_free)>
        ws(gsl_integration_workspace_alloc(kLimit),
           &gsl_integration_workspace_free);
    if (!ws) throw numeric_failure("failed to allocate quadrature workspace");

    gsl_function gf;
    gf.function = &call_std_function;
    gf.params = const_cast<std::function<double(double)>*>(&f);

    double result = 0.0;
    double abserr = 0.0;
    const int status =
        gsl_integration_qag(&gf, a, b, abs_tol, rel_tol, kLimit,
                            GSL_INTEG_GAUSS61, ws.get(), &result, &abserr);
    if (status != GSL_SUCCESS && abserr > abs_tol) {
        throw numeric_failure("adaptive quadrature did not converge (status " +
                              std::to_string(status) + ", abserr " +
                              std::to_string(abserr) + ")");
    }
    return result;
}

double gaussian_quantile(double u) {
    if (!(u > 0.0 && u < 1.0)) {
        throw invalid_parameter("gaussian quantile needs u in (0,1)");
    }
    return gsl_cdf_ugaussian_Pinv(u);
}

std::vector<double> cumulative_integral(const std::vector<double>& f, double dx) {
    const std::size_t m = f.size();
    if (m < 4) throw invalid_input("cumulative integral needs at least 4 nodes");
    if (!(dx > 0.0)) throw invalid_parameter("cumulative integral needs dx > 0");

    std::vector<double> out(m, 0.0);
    // First and last intervals use the cubic through the nearest four nodes;
    // interior intervals use the centered cubic through i-1..i+2.
    out[1] = out[0] +
             dx * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]) / 24.0;
    for (std::size_t i = 1; i + 2 < m; ++i) {
        out[i + 1] = out[i] + dx *
                                  (-f[i - 1] + 13.0 * f[i] + 13.0 * f[i + 1] -
                                   f[i + 2]) /
                                  24.0;
    }
    out[m - 1] = out[m - 2] +
                 dx * (f[m - 4] - 5.0 * f[m - 3] + 19.0 * f[m - 2] +
                       9.0 * f[m - 1]) /
                     24.0;
    return out;
}

double simpson_uniform(const std::vector<double>& f, double dx) {
    const std::size_t m = f.size();
    if (m < 4) throw invalid_input("simpson rule needs at least 4 nodes");
    if (!(dx > 0.0)) throw invalid_parameter("simpson rule needs dx > 0");

    const std::size_t intervals = m - 1;
    std::size_t simpson_end = intervals;          // node index closing the 1/3 part
    if (intervals % 2 != 0) simpson_end = intervals - 3;

    double s = 0.0;
    for (std::size_t i = 0; i + 2 <= simpson_end; i += 2) {
        s += dx / 3.0 * (f[i] + 4.0 * f[i + 1] + f[i + 2]);
    }
    if (simpson_end != intervals) {
        const std::size_t j = simpson_end;
        s += 3.0 * dx / 8.0 * (f[j] + 3.0 * f[j + 1] + 3.0 * f[j + 2] + f[j + 3]);
    }
    return s;
}

} // namespace pcrlab
