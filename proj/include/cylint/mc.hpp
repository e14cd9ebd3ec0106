#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>
#include <vector>

#include "cylint/errors.hpp"

namespace cylint {

/// Sum with a fixed pairwise association order. The result depends only on
/// the element order, not on chunking or thread count, and the error grows
/// like log(n) rather than n.
inline double pairwise_sum(const double* xs, std::size_t n) {
    if (n <= 32) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += xs[i];
        return acc;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(xs, half) + pairwise_sum(xs + half, n - half);
}

inline double pairwise_sum(const std::vector<double>& xs) {
    return pairwise_sum(xs.data(), xs.size());
}

/// Monte Carlo summary of a sample of scalar replicates.
struct MCEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::uint64_t replicas = 0;

    /// Half-width of the k-sigma band around the mean.
    [[nodiscard]] double band(double k) const noexcept { return k * std_error; }
};

/// Mean and standard error of the mean, both from pairwise sums so the
/// summary is identical however the replicates were produced.
inline MCEstimate mc_estimate(const std::vector<double>& xs) {
    MCEstimate est;
    est.replicas = xs.size();
    if (xs.empty()) return est;
    est.mean = pairwise_sum(xs) / static_cast<double>(xs.size());
    if (xs.size() < 2) return est;
    std::vector<double> sq(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double d = xs[i] - est.mean;
        sq[i] = d * d;
    }
    const double var = pairwise_sum(sq) / static_cast<double>(xs.size() - 1);
    est.std_error = std::sqrt(var / static_cast<double>(xs.size()));
    return est;
}

/// Run `task(replica)` for replica = 0..replicas-1 across `workers` threads
/// and return the results indexed by replica. Work is handed out through a
/// shared counter, but every replica writes only its own slot, so the
/// returned vector is byte-identical for any worker count. The first task
/// exception is rethrown after all threads join.
template <class T, class Task>
std::vector<T> fanout(std::uint64_t replicas, unsigned workers, Task&& task) {
    if (workers == 0)
        throw invalid_input("fanout: worker count must be positive");
    std::vector<T> results(static_cast<std::size_t>(replicas));
    if (replicas == 0) return results;

    if (workers == 1 || replicas == 1) {
        for (std::uint64_t r = 0; r < replicas; ++r)
            results[static_cast<std::size_t>(r)] = task(r);
        return results;
    }

    std::atomic<std::uint64_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    std::uint64_t first_error_replica = std::numeric_limits<std::uint64_t>::max();

    auto worker_loop = [&] {
        for (;;) {
            const std::uint64_t r = next.fetch_add(1, std::memory_order_relaxed);
            if (r >= replicas) return;
            try {
                results[static_cast<std::size_t>(r)] = task(r);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (r < first_error_replica) {
                    first_error_replica = r;
                    first_error = std::current_exception();
                }
            }
        }
    };

    std::vector<std::thread> pool;
    const unsigned spawn = static_cast<unsigned>(
        std::min<std::uint64_t>(workers, replicas));
    pool.reserve(spawn);
    for (unsigned w = 0; w < spawn; ++w) pool.emplace_back(worker_loop);
    for (auto& t : pool) t.join();

    if (first_error) std::rethrow_exception(first_error);
    return results;
}

/// fanout specialized to scalar replicates, reduced to a Monte Carlo summary.
template <class Task>
MCEstimate fanout_estimate(std::uint64_t replicas, unsigned workers, Task&& task) {
    return mc_estimate(fanout<double>(replicas, workers, task));
}

} // namespace cylint
