#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace bcmpc {

// ---------------------------------------------------------------------------
// Error taxonomy. The CLI maps these onto exit codes.
// ---------------------------------------------------------------------------

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Branch-and-bound gave up before proving optimality.
struct NodeLimitError : SolverError {
    using SolverError::SolverError;
};

struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Deterministic seeding and hashing.
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Derive an independent stream seed from a master seed, a purpose tag and
/// up to two indices. Streams with different tags or indices never collide
/// in practice; the whole pipeline seeds its RNGs this way so that every
/// stage is a pure function of the master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                                 std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t h = fnv1a64(tag, master ^ 0xcbf29ce484222325ULL);
    h = splitmix64(h ^ splitmix64(a));
    h = splitmix64(h ^ splitmix64(b ^ 0x5851f42d4c957f2dULL));
    return h;
}

inline std::string hex16(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return s;
}

// ---------------------------------------------------------------------------
// Float <-> text. Shortest round-trip formatting keeps CSV/JSON output both
// byte-deterministic and exact under reload.
// ---------------------------------------------------------------------------

inline std::string format_double(double v) {
    if (v != v) return "nan";
    if (v == std::numeric_limits<double>::infinity()) return "inf";
    if (v == -std::numeric_limits<double>::infinity()) return "-inf";
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, const std::string& context) {
    std::string tmp(s);
    const char* begin = tmp.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    while (end && *end == ' ') ++end;
    if (end == begin || (end && *end != '\0'))
        throw DataError("cannot parse number '" + tmp + "' (" + context + ")");
    return v;
}

inline long parse_long(std::string_view s, const std::string& context) {
    long v = 0;
    auto trimmed = s;
    while (!trimmed.empty() && trimmed.front() == ' ') trimmed.remove_prefix(1);
    while (!trimmed.empty() && trimmed.back() == ' ') trimmed.remove_suffix(1);
    auto res = std::from_chars(trimmed.data(), trimmed.data() + trimmed.size(), v);
    if (res.ec != std::errc{} || res.ptr != trimmed.data() + trimmed.size())
        throw DataError("cannot parse integer '" + std::string(s) + "' (" + context + ")");
    return v;
}

// ---------------------------------------------------------------------------
// Index-stable parallel loop. Worker i writes only to slot i, so the result
// is independent of thread count and completion order.
// ---------------------------------------------------------------------------

inline void parallel_for(std::size_t jobs, std::size_t n,
                         const std::function<void(std::size_t)>& body) {
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::size_t workers = std::min(jobs, n);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace bcmpc
