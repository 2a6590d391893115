#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace idpath {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
inline constexpr double kPi = 3.14159265358979323846;

enum class ErrorCode {
    kConfigInvalid,
    kKernelUnbounded,
    kAssumption3A,
    kDomain,
    kUnsupported,
    kIo,
};

inline const char* to_string(ErrorCode c) {
    switch (c) {
        case ErrorCode::kConfigInvalid:   return "CONFIG_INVALID";
        case ErrorCode::kKernelUnbounded: return "KERNEL_UNBOUNDED";
        case ErrorCode::kAssumption3A:    return "ASSUMPTION_3A";
        case ErrorCode::kDomain:          return "DOMAIN";
        case ErrorCode::kUnsupported:     return "UNSUPPORTED";
        case ErrorCode::kIo:              return "IO";
    }
    return "UNKNOWN";
}

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code(code) {}
    ErrorCode code;
};

// Closed/open distinctions matter only on sets of measure zero here; an
// Interval is the pair of endpoints, possibly infinite.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double length() const { return hi - lo; }
    bool empty() const { return !(lo < hi); }
    bool finite() const { return std::isfinite(lo) && std::isfinite(hi); }
    bool contains(double x) const { return lo <= x && x <= hi; }
    bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }

    Interval intersect(const Interval& o) const {
        return Interval{std::max(lo, o.lo), std::min(hi, o.hi)};
    }
};

inline Interval whole_line() { return {-kInf, kInf}; }

// Neumaier variant of Kahan summation; the running compensation keeps long
// jump sums stable without extended precision.
struct CompensatedSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double x) {
        double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// All randomness flows through this wrapper. The engine (mt19937_64) has a
// bit-exact standardized output sequence, and every distribution below is
// hand-inverted from raw 64-bit draws, so a (seed, stream) pair yields the
// same doubles on any conforming platform.
class Rng {
  public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    // Stream derivation: seed_i = splitmix64 chain over (master, stream_id).
    static Rng stream(uint64_t master_seed, uint64_t stream_id) {
        uint64_t s = master_seed;
        uint64_t a = splitmix64(s);
        s = master_seed ^ (0x9E3779B97F4A7C15ULL + stream_id * 0xD1342543DE82EF95ULL);
        uint64_t b = splitmix64(s);
        return Rng(a ^ (b + 0x2545F4914F6CDD1DULL));
    }

    uint64_t next_u64() { return eng_(); }

    // Uniform on the open interval (0,1); never returns an endpoint.
    double uniform() { return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    double exponential() { return -std::log(uniform()); }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform(), u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * kPi * u2);
        have_spare_ = true;
        return r * std::cos(2.0 * kPi * u2);
    }

    // Inversion by counting; intended for small means (oracle samplers).
    int poisson(double lambda) {
        int k = 0;
        double acc = exponential();
        while (acc <= lambda) {
            ++k;
            acc += exponential();
        }
        return k;
    }

    // Index in [0, n) with probability weights[i] / sum(weights).
    int discrete(const std::vector<double>& weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double u = uniform() * total;
        double acc = 0.0;
        for (size_t i = 0; i + 1 < weights.size(); ++i) {
            acc += weights[i];
            if (u < acc) return static_cast<int>(i);
        }
        return static_cast<int>(weights.size()) - 1;
    }

  private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

inline int env_thread_cap() {
    if (const char* s = std::getenv("IDPATH_THREADS")) {
        int v = std::atoi(s);
        if (v > 0) return v;
    }
    return 0;  // 0 = no cap
}

}  // namespace idpath
