#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace edc {

using cxd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using Index = Eigen::Index;

namespace tol {
inline constexpr double state_norm = 1e-12;
inline constexpr double hermitian = 1e-10;
inline constexpr double trace_one = 1e-10;
inline constexpr double psd = 1e-10;
inline constexpr double entropy_floor = 1e-14;  // eigenvalue floor inside entropy sums
inline constexpr double rank_cutoff = 1e-12;
}  // namespace tol

// ---------------------------------------------------------------------------
// Error types. One base so callers can catch everything from this library.
// ---------------------------------------------------------------------------
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidRegion : Error { using Error::Error; };
struct RegionTooLarge : Error { using Error::Error; };
struct InvalidSubsystem : Error { using Error::Error; };
struct NotAState : Error { using Error::Error; };
struct DimMismatch : Error { using Error::Error; };
struct NotQubits : Error { using Error::Error; };
struct DoesNotFit : Error { using Error::Error; };
struct InsufficientPoints : Error { using Error::Error; };
struct NotDecaying : Error { using Error::Error; };
struct DimTooLarge : Error { using Error::Error; };
struct NotDivisible : Error { using Error::Error; };
struct ZeroProbabilityOutcome : Error { using Error::Error; };
struct RankTooLarge : Error { using Error::Error; };
struct TooLarge : Error { using Error::Error; };
struct RingUnsupported : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

struct SolverDidNotConverge : Error {
    SolverDidNotConverge(const std::string& msg, double lo, double up)
        : Error(msg), best_lower(lo), best_upper(up) {}
    double best_lower;
    double best_upper;
};

struct NoConvergence : Error {
    NoConvergence(const std::string& msg, std::vector<double> trace)
        : Error(msg), iteration_trace(std::move(trace)) {}
    std::vector<double> iteration_trace;
};

// ---------------------------------------------------------------------------
// Deterministic RNG. Streams are derived from a master seed by splitmix64 so
// results do not depend on evaluation order or thread scheduling.
// ---------------------------------------------------------------------------
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return splitmix64(master ^ splitmix64(stream + 0x51ed2701u));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(splitmix64(seed ^ 0xabcdef12345678ull)) {}

    std::uint64_t next_u64() {
        state_ = splitmix64(state_ + 0x9e3779b97f4a7c15ull);
        return state_;
    }

    // uniform in (0, 1]
    double next_double() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    // standard normal via Box-Muller; sequence is platform-independent
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = next_double();
        double u2 = next_double();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    cxd next_cnormal() {
        double re = next_normal();
        double im = next_normal();
        return cxd(re, im) / std::sqrt(2.0);
    }

    // uniform integer in [0, n)
    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// ---------------------------------------------------------------------------
// Bounded worker pool. EDC_NUM_WORKERS caps the fan-out; results land in
// preassigned slots so output is independent of scheduling.
// ---------------------------------------------------------------------------
inline int worker_count() {
    unsigned hw = std::thread::hardware_concurrency();
    int n = hw == 0 ? 1 : static_cast<int>(hw);
    if (const char* env = std::getenv("EDC_NUM_WORKERS")) {
        int cap = std::atoi(env);
        if (cap >= 1) n = std::min(n, cap);
    }
    return std::max(1, n);
}

template <typename Fn>
void parallel_for(Index count, Fn&& fn) {
    int workers = std::min<Index>(worker_count(), count);
    if (workers <= 1) {
        for (Index i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::atomic<Index> cursor{0};
    std::exception_ptr first_error;
    std::mutex err_mutex;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                Index i = cursor.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace edc
