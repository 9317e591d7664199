#pragma once
// Deterministic random number generation with fully specified algorithms.
// std::mt19937 is portable but the standard distributions are not, so the
// samplers here are written out explicitly: identical seeds give identical
// streams on every platform and compiler.

#include <cstdint>
#include <cmath>
#include <vector>
#include <stdexcept>

namespace tworelay {

// splitmix64: used for seeding and for deriving independent substreams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Mix a stream index into a base seed so per-trial / per-restart substreams
// are decorrelated but reproducible.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t s = base ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
    std::uint64_t a = splitmix64(s);
    std::uint64_t b = splitmix64(s);
    return a ^ (b << 1);
}

// xoshiro256++ by Blackman and Vigna; state seeded via splitmix64.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform double in [0, 1) with 53 bits of precision.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, n). Fixed-point multiply keeps the mapping
    // reproducible; the modulus bias is negligible for the n used here
    // and, more importantly, identical everywhere.
    std::uint64_t next_index(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("next_index: n must be positive");
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    // Standard exponential via inversion.
    double next_exponential() {
        double u;
        do { u = next_double(); } while (u <= 0.0);
        return -std::log(u);
    }

    // Flat Dirichlet sample: normalized unit-rate exponentials.
    std::vector<double> next_dirichlet(std::size_t k) {
        std::vector<double> v(k);
        double sum = 0.0;
        for (auto& x : v) { x = next_exponential(); sum += x; }
        for (auto& x : v) x /= sum;
        return v;
    }

    // Sample an index from a probability row by CDF inversion.
    std::size_t next_categorical(const std::vector<double>& probs) {
        double u = next_double();
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
            acc += probs[i];
            if (u < acc) return i;
        }
        return probs.empty() ? 0 : probs.size() - 1;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t state_[4];
};

} // namespace tworelay
