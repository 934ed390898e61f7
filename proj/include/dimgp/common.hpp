#pragma once

#include <charconv>
#include <cstdint>
#include <future>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace dimgp {

/// Invalid or inconsistent configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Problems with input data: missing files, malformed cells, degenerate
/// datasets (CLI exit code 3).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// An intrinsic-dimension estimator that cannot produce a value for the
/// given dataset. The message is the failure reason recorded in profiles.
class EstimatorError : public DataError {
public:
    explicit EstimatorError(const std::string& msg) : DataError(msg) {}
};

/// splitmix64 step; used to derive independent stage seeds from one
/// master seed without correlated streams.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Shortest round-trip decimal representation of a double.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

/// Index-parallel loop. Results must be written to disjoint slots so the
/// outcome is identical for any thread count; `threads <= 1` runs inline.
template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
    if (threads <= 0) {
        threads = static_cast<int>(std::thread::hardware_concurrency());
        if (threads <= 0) threads = 1;
    }
    if (threads == 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    const std::size_t n_workers = std::min<std::size_t>(threads, count);
    std::vector<std::future<void>> futures;
    futures.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) {
        futures.push_back(std::async(std::launch::async, [&, w] {
            for (std::size_t i = w; i < count; i += n_workers) fn(i);
        }));
    }
    for (auto& f : futures) f.get();
}

} // namespace dimgp
