#ifndef ACSBAYES_RNG_HPP
#define ACSBAYES_RNG_HPP

#include <cstdint>
#include <random>
#include <stdexcept>

namespace acsbayes {

// splitmix64 step; used both for seed mixing and stream derivation.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derive a child seed from (parent seed, index). Used for replication and
// chain streams so that no two derived streams share a generator state.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(splitmix64(seed) ^ splitmix64(index * 0xda942042e4dd58b5ULL + 1));
}

// Random generator with hand-rolled variate transforms. std::* distributions
// are implementation-defined, so every transform lives here; given the same
// seed the draw sequence is identical on any platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(splitmix64(seed)) {}

    std::uint64_t raw() { return gen_(); }

    // uniform on [0, 1)
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    // uniform on (0, 1)
    double uniform_pos() {
        double u;
        do { u = uniform(); } while (u <= 0.0);
        return u;
    }

    // uniform integer in {0, ..., n-1}
    int uniform_int(int n) {
        if (n <= 0) throw std::invalid_argument("uniform_int: n must be positive");
        const std::uint64_t bound = static_cast<std::uint64_t>(n);
        unsigned __int128 m = static_cast<unsigned __int128>(gen_()) * bound;
        auto low = static_cast<std::uint64_t>(m);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                m = static_cast<unsigned __int128>(gen_()) * bound;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<int>(m >> 64);
    }

    // standard normal (Box-Muller, second value cached)
    double normal();

    // Gamma(shape, 1), Marsaglia-Tsang
    double gamma(double shape);

    double beta(double a, double b) {
        const double x = gamma(a);
        const double y = gamma(b);
        return x / (x + y);
    }

    // exact Poisson sampler; additivity splitting keeps the sequential-search
    // intensity small enough that exp(-lambda) never underflows
    long poisson(double lambda);

private:
    long poisson_small(double lambda);

    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace acsbayes

#endif
