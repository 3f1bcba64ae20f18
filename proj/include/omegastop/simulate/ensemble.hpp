#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "omegastop/errors.hpp"
#include "omegastop/simulate/killed_path.hpp"

namespace omegastop::sim {

/// Worker count: explicit request, else OMEGASTOP_THREADS, else hardware
/// concurrency.
inline unsigned resolve_threads(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("OMEGASTOP_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Compensated summation.
class KahanSum {
public:
    void add(double v) noexcept {
        const double y = v - c_;
        const double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const noexcept { return s_; }

private:
    double s_ = 0.0;
    double c_ = 0.0;
};

/// Per-path outputs laid out as n_paths rows of `width` doubles. Rows are
/// filled by whichever worker runs the path; reductions walk rows in index
/// order, so results do not depend on the number of workers.
class PathTable {
public:
    PathTable(std::uint64_t rows, std::size_t width) : rows_(rows), width_(width), data_(rows * width, 0.0) {}

    double* row(std::uint64_t i) noexcept { return data_.data() + i * width_; }
    const double* row(std::uint64_t i) const noexcept { return data_.data() + i * width_; }
    std::uint64_t rows() const noexcept { return rows_; }
    std::size_t width() const noexcept { return width_; }

private:
    std::uint64_t rows_;
    std::size_t width_;
    std::vector<double> data_;
};

/// Runs body(i, rng, row) for every path i with its own keyed stream.
template <class Body>
PathTable run_paths(const PathConfig& config, std::size_t width, Body&& body) {
    validate(config);
    PathTable table(config.n_paths, width);
    const unsigned workers =
        static_cast<unsigned>(std::min<std::uint64_t>(resolve_threads(config.threads), config.n_paths));
    constexpr std::uint64_t kChunk = 64;
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto work = [&] {
        try {
            for (;;) {
                const std::uint64_t begin = next.fetch_add(kChunk);
                if (begin >= config.n_paths) return;
                const std::uint64_t end = std::min(begin + kChunk, config.n_paths);
                for (std::uint64_t i = begin; i < end; ++i) {
                    PathRng rng(config.seed, i);
                    body(i, rng, table.row(i));
                }
            }
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next.store(config.n_paths);
        }
    };

    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    return table;
}

/// Monte Carlo estimate with its sampling error and run metadata.
struct PathEnsembleReport {
    double estimate = 0.0;
    double std_error = 0.0;  ///< sample standard deviation / sqrt(n_effective)
    std::uint64_t n_effective = 0;
    std::uint64_t n_paths = 0;
    std::uint64_t n_censored = 0;  ///< alive and unresolved at the horizon
    double x0 = 0.0;
    PathConfig config;
    double bias_bound = 0.0;  ///< bound on the horizon truncation bias (0 when not available)
    std::string bias_notes;
};

/// Mean and standard error of column `col` over rows whose `mask` column is
/// nonzero (all rows when mask < 0).
struct ColumnStats {
    double mean = 0.0;
    double std_error = 0.0;
    std::uint64_t count = 0;
};

inline ColumnStats column_stats(const PathTable& table, std::size_t col, long mask = -1) {
    KahanSum sum;
    std::uint64_t n = 0;
    for (std::uint64_t i = 0; i < table.rows(); ++i) {
        const double* r = table.row(i);
        if (mask >= 0 && r[mask] == 0.0) continue;
        sum.add(r[col]);
        ++n;
    }
    ColumnStats out;
    out.count = n;
    if (n == 0) return out;
    out.mean = sum.value() / static_cast<double>(n);
    KahanSum sq;
    for (std::uint64_t i = 0; i < table.rows(); ++i) {
        const double* r = table.row(i);
        if (mask >= 0 && r[mask] == 0.0) continue;
        const double d = r[col] - out.mean;
        sq.add(d * d);
    }
    if (n > 1) out.std_error = std::sqrt(sq.value() / static_cast<double>(n - 1) / static_cast<double>(n));
    return out;
}

inline double column_mean(const PathTable& table, std::size_t col) { return column_stats(table, col).mean; }

}  // namespace omegastop::sim
