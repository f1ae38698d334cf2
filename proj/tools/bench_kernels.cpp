#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "pcrlab/laplace.hpp"
#include "pcrlab/parallel.hpp"
#include "pcrlab/spectral.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// The ratio-series summand at a representative operating point: heavy on
// pow, matching what dominates the spectral rate sweeps.
double ratio_term(std::size_t i, double n) {
    const double k = static_cast<double>(i + 1);
    const double lam = std::pow(k, -2.0);
    const double gam = std::pow(k, -2.0);
    return lam / (n * lam * gam + 1.0);
}

void bench_sum(std::size_t terms, int workers, int repeats) {
    const auto term = [](std::size_t i) { return ratio_term(i, 1e6); };

    double serial = 0.0;
    auto start = Clock::now();
    for (int r = 0; r < repeats; ++r) {
        serial = pcrlab::serial_term_sum(terms, term);
    }
    const double t_serial = seconds_since(start) / repeats;

    double parallel = 0.0;
    start = Clock::now();
    for (int r = 0; r < repeats; ++r) {
        parallel = pcrlab::parallel_term_sum(terms, term, workers);
    }
    const double t_parallel = seconds_since(start) / repeats;

    const bool identical = serial == parallel;
    std::printf("term_sum  n %-10zu workers %-3d serial %8.2f ms  "
                "parallel %8.2f ms  speedup %5.2fx  bit-identical %s\n",
                terms, workers, 1e3 * t_serial, 1e3 * t_parallel,
                t_serial / t_parallel, identical ? "yes" : "NO");
    if (!identical) {
        std::fprintf(stderr,
                     "parallel kernel diverged from the serial reference\n");
        std::exit(1);
    }
}

void bench_ratio_series(double n, int workers, int repeats) {
    const auto spec = pcrlab::SpectralDecay::power_family(1.0, 2.0);

    auto start = Clock::now();
    pcrlab::RatioSeries serial{};
    for (int r = 0; r < repeats; ++r) {
        serial = pcrlab::gaussian_ratio_series(n, spec, 1);
    }
    const double t_serial = seconds_since(start) / repeats;

    start = Clock::now();
    pcrlab::RatioSeries parallel{};
    for (int r = 0; r < repeats; ++r) {
        parallel = pcrlab::gaussian_ratio_series(n, spec, workers);
    }
    const double t_parallel = seconds_since(start) / repeats;

    const bool identical = serial.series1 == parallel.series1 &&
                           serial.series2 == parallel.series2;
    std::printf("ratio_series n %-8.2g workers %-3d serial %8.2f ms  "
                "parallel %8.2f ms  speedup %5.2fx  bit-identical %s\n",
                n, workers, 1e3 * t_serial, 1e3 * t_parallel,
                t_serial / t_parallel, identical ? "yes" : "NO");
    if (!identical) {
        std::fprintf(stderr,
                     "parallel kernel diverged from the serial reference\n");
        std::exit(1);
    }
}

} // namespace

int main(int argc, char** argv) {
    const int workers =
        argc > 1 ? std::atoi(argv[1]) : pcrlab::hardware_workers();
    std::printf("benchmarking with %d workers\n", workers);
    for (std::size_t terms : {std::size_t{1} << 20, std::size_t{1} << 23,
                              std::size_t{1} << 25}) {
        bench_sum(terms, workers, 3);
    }
    for (double n : {1e5, 1e7}) {
        bench_ratio_series(n, workers, 3);
    }
    return 0;
}
