#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>

namespace ensamp {

// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Folds a sequence of identifiers into a single stream key. Order matters:
// (seed, 1, 2) and (seed, 2, 1) give unrelated keys.
constexpr std::uint64_t stream_key(std::uint64_t seed, std::initializer_list<std::uint64_t> ids) noexcept {
    std::uint64_t h = mix64(seed ^ 0x6a09e667f3bcc909ULL);
    std::uint64_t position = 0;
    for (std::uint64_t id : ids) {
        ++position;
        h = mix64(h + 0x9e3779b97f4a7c15ULL * position + mix64(id ^ 0xbb67ae8584caa73bULL));
    }
    return h;
}

// Roles that partition the random streams of one realization.
enum class StreamRole : std::uint64_t {
    environment = 1,
    reward_noise = 2,
    coupled_reward = 3,
    coupled_perturbation = 4,
    prior_draw = 5,
    perturbation = 6,
    selection = 7,
    minibatch = 8,
    dropout = 9,
    exploration = 10,
    test = 99,
};

constexpr std::uint64_t role_id(StreamRole role) noexcept { return static_cast<std::uint64_t>(role); }

// Counter-based generator: the n-th output is mix64(key + n * golden), which is
// SplitMix64 started at `key`. A stream is identified by its key alone, so
// independent streams come from hashing (seed, ids...) with stream_key.
class SeededRng {
public:
    using result_type = std::uint64_t;

    explicit SeededRng(std::uint64_t key = 0) noexcept : key_(key) {}

    static SeededRng stream(std::uint64_t seed, std::initializer_list<std::uint64_t> ids) noexcept {
        return SeededRng(stream_key(seed, ids));
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        ++counter_;
        return mix64(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
    }

    double normal() { return normal_(*this); }
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(*this); }
    // Uniform integer in [0, n). n must be positive.
    std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(*this); }
    bool bernoulli(double p) { return std::bernoulli_distribution(p)(*this); }

    std::uint64_t key() const noexcept { return key_; }
    std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace ensamp
