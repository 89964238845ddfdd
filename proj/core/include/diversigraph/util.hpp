#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace dvg {

/// Type-1 (inverse CDF) quantile: the smallest attained value x with
/// CDF(x) >= p. `sorted` must be ascending and non-empty.
template <typename T>
T quantile_type1(std::span<const T> sorted, double p) {
    if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("quantile p outside [0,1]");
    if (p <= 0.0) return sorted.front();
    // the slack keeps ceil(p*n) exact when p*n is an integer up to rounding
    // (0.9 * 1000 lands just above 900 in binary)
    size_t k = static_cast<size_t>(
        std::ceil(p * static_cast<double>(sorted.size()) - 1e-9));
    if (k == 0) k = 1;
    if (k > sorted.size()) k = sorted.size();
    return sorted[k - 1];
}

template <typename T>
T quantile_type1(std::vector<T> values, double p) {
    std::sort(values.begin(), values.end());
    return quantile_type1<T>(std::span<const T>(values), p);
}

struct MeanSd {
    double mean = 0.0;
    double sd = 0.0;  // population convention; 0 when n < 2
    size_t n = 0;
};

inline MeanSd mean_sd(std::span<const double> xs) {
    MeanSd r;
    r.n = xs.size();
    if (r.n == 0) return r;
    double sum = 0.0, sumsq = 0.0;
    for (double x : xs) {
        sum += x;
        sumsq += x * x;
    }
    r.mean = sum / static_cast<double>(r.n);
    if (r.n >= 2) {
        double var = sumsq / static_cast<double>(r.n) - r.mean * r.mean;
        r.sd = var > 0.0 ? std::sqrt(var) : 0.0;
    }
    return r;
}

/// Runs fn over [0, n) in fixed-size chunks. Chunk boundaries do not depend
/// on the thread count, so per-slot writes and per-chunk partials give
/// identical results for any `threads`. fn receives [begin, end). The first
/// exception thrown by fn is rethrown on the calling thread.
inline void parallel_for(size_t n, int threads,
                         const std::function<void(size_t, size_t)>& fn,
                         size_t chunk = 2048) {
    if (n == 0) return;
    if (threads <= 1 || n <= chunk) {
        fn(0, n);
        return;
    }
    size_t n_chunks = (n + chunk - 1) / chunk;
    std::atomic<size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mu;
    auto worker = [&] {
        for (;;) {
            if (failed.load(std::memory_order_relaxed)) break;
            size_t c = next.fetch_add(1);
            if (c >= n_chunks) break;
            size_t b = c * chunk;
            try {
                fn(b, std::min(b + chunk, n));
            } catch (...) {
                std::lock_guard lock(error_mu);
                if (!error) error = std::current_exception();
                failed.store(true, std::memory_order_relaxed);
            }
        }
    };
    size_t n_workers = std::min<size_t>(static_cast<size_t>(threads), n_chunks);
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (size_t i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

/// Shortest round-trip decimal form of v; stable across runs and platforms
/// that share IEEE-754 doubles. Used for all CSV/JSON numeric output.
std::string format_double(double v);

/// FNV-1a 64-bit over a byte range; used for input-file digests in manifests.
uint64_t fnv1a64(std::span<const unsigned char> bytes);
uint64_t fnv1a64_file(const std::string& path);

}  // namespace dvg
