#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace rewardlab {

/**
 * Deterministic counter-based random stream.
 *
 * Streams are derived by hashing (seed, name, index), so independent modules
 * and suite instances draw from disjoint, order-independent streams and a rerun
 * with the same seed reproduces every draw bit-for-bit regardless of thread
 * scheduling. The generator is splitmix64; uniform doubles take the top 53 bits.
 */
class RandomStream {
public:
    explicit RandomStream(std::uint64_t state) : state_(state) {}

    static RandomStream derive(std::uint64_t seed, std::string_view name, std::uint64_t index) {
        // FNV-1a over the three components, then one splitmix scramble.
        std::uint64_t h = 0xcbf29ce484222325ULL;
        auto mix = [&h](std::uint64_t v) {
            for (int i = 0; i < 8; ++i) {
                h ^= (v >> (8 * i)) & 0xffULL;
                h *= 0x100000001b3ULL;
            }
        };
        mix(seed);
        for (char c : name) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ULL;
        }
        mix(index);
        return RandomStream(h);
    }

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Uniform integer in [0, n).
    int next_int(int n) { return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n)); }

    // Flat Dirichlet draw: normalized standard exponentials.
    std::vector<double> dirichlet(int n) {
        std::vector<double> x(static_cast<std::size_t>(n));
        double total = 0.0;
        for (double& v : x) {
            v = -std::log(1.0 - next_double());
            total += v;
        }
        for (double& v : x) v /= total;
        return x;
    }

private:
    std::uint64_t state_;
};

} // namespace rewardlab
