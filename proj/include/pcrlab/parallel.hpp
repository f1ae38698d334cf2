#pragma once

#include <cstddef>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pcrlab {

// Pairwise (cascade) summation: O(log n) error growth and a fixed reduction
// tree, so the result is identical no matter how the terms were produced.
inline double pairwise_sum(const double* x, std::size_t n) {
    if (n <= 32) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

inline double pairwise_sum(const std::vector<double>& x) {
    return pairwise_sum(x.data(), x.size());
}

namespace detail {
constexpr std::size_t kSumBlock = 4096;
}

// Serial reference: sum of term(i) for i in [0, n) over the same blocked
// pairwise tree the parallel kernel uses.  Kept for testing and benchmarks;
// parallel_term_sum must match it bit for bit.
template <typename TermFn>
double serial_term_sum(std::size_t n, TermFn&& term) {
    const std::size_t nblocks = (n + detail::kSumBlock - 1) / detail::kSumBlock;
    std::vector<double> block_sums(nblocks);
    std::vector<double> buf(detail::kSumBlock);
    for (std::size_t b = 0; b < nblocks; ++b) {
        const std::size_t lo = b * detail::kSumBlock;
        const std::size_t hi = lo + detail::kSumBlock < n ? lo + detail::kSumBlock : n;
        for (std::size_t i = lo; i < hi; ++i) buf[i - lo] = term(i);
        block_sums[b] = pairwise_sum(buf.data(), hi - lo);
    }
    return pairwise_sum(block_sums);
}

// OpenMP-partitioned sum with the deterministic blocked pairwise reduction.
// Block sums land in an index-addressed buffer, so the combination order is
// independent of scheduling and the result is bit-stable for any worker count.
template <typename TermFn>
double parallel_term_sum(std::size_t n, TermFn&& term, int workers) {
    if (workers <= 1 || n < 2 * detail::kSumBlock) {
        return serial_term_sum(n, term);
    }
    const std::size_t nblocks = (n + detail::kSumBlock - 1) / detail::kSumBlock;
    std::vector<double> block_sums(nblocks);
#ifdef _OPENMP
#pragma omp parallel num_threads(workers)
    {
        std::vector<double> buf(detail::kSumBlock);
#pragma omp for schedule(dynamic)
        for (long long b = 0; b < static_cast<long long>(nblocks); ++b) {
            const std::size_t lo = static_cast<std::size_t>(b) * detail::kSumBlock;
            const std::size_t hi =
                lo + detail::kSumBlock < n ? lo + detail::kSumBlock : n;
            for (std::size_t i = lo; i < hi; ++i) buf[i - lo] = term(i);
            block_sums[b] = pairwise_sum(buf.data(), hi - lo);
        }
    }
#else
    return serial_term_sum(n, term);
#endif
    return pairwise_sum(block_sums);
}

// Run job(i) for i in [0, count) on up to `workers` threads.  Each job writes
// only to its own index; callers derive per-index RNG streams, so the fan-out
// is deterministic regardless of thread count.
template <typename JobFn>
void parallel_for_index(std::size_t count, int workers, JobFn&& job) {
#ifdef _OPENMP
    if (workers > 1) {
#pragma omp parallel for schedule(dynamic) num_threads(workers)
        for (long long i = 0; i < static_cast<long long>(count); ++i) {
            job(static_cast<std::size_t>(i));
        }
        return;
    }
#endif
    for (std::size_t i = 0; i < count; ++i) job(i);
}

inline int hardware_workers() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

} // namespace pcrlab
