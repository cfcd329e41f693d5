#pragma once

#include <cstdint>
#include <cstdlib>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace memsys {

inline constexpr const char* kVersion = "0.1.0";

// One value per catalog objective, all minimized.
using ObjectiveVector = std::vector<double>;

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Input file could not be read or is not well-formed JSON.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& msg) : Error(msg) {}
};

// A type invariant of the catalog/system schema is violated. The message
// names the first violated invariant and its location.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& msg) : Error(msg) {}
};

// A memory cannot be built by any compiler of the catalog.
class NoEligibleCompilerError : public ValidationError {
public:
    explicit NoEligibleCompilerError(const std::string& msg) : ValidationError(msg) {}
};

// Estimator backend failed (process exit, protocol violation, timeout).
class BackendError : public Error {
public:
    explicit BackendError(const std::string& msg) : Error(msg) {}
};

// A configured capacity limit was exceeded.
class CapacityError : public Error {
public:
    explicit CapacityError(const std::string& msg) : Error(msg) {}
};

// Deterministic random source. All draws go through the helpers below so
// results do not depend on the standard library's distribution objects.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

    // Uniform integer in [0, n). Rejection sampling keeps it unbiased.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("Rng::below: n must be positive");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t r = gen_();
        while (r >= limit) r = gen_();
        return r % n;
    }

    std::int64_t range(std::int64_t lo, std::int64_t hi) {  // inclusive
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

private:
    std::mt19937_64 gen_;
};

// Worker count: MEMSYS_EVO_THREADS when set (and >= 1), else hardware.
inline unsigned worker_count() {
    if (const char* env = std::getenv("MEMSYS_EVO_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

// Index-sharded parallel loop. Results must be written to per-index slots;
// the shard boundaries never influence what gets computed, so output is
// identical for any worker count.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn, unsigned workers = 0) {
    if (workers == 0) workers = worker_count();
    if (n == 0) return;
    if (workers <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t shards = std::min<std::size_t>(workers, n);
    std::vector<std::thread> pool;
    pool.reserve(shards);
    std::vector<std::exception_ptr> errors(shards);
    for (std::size_t s = 0; s < shards; ++s) {
        pool.emplace_back([&, s] {
            try {
                for (std::size_t i = s; i < n; i += shards) fn(i);
            } catch (...) {
                errors[s] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace memsys
