#pragma once

// Seeded RNG with a draw counter so its position can be digested into
// checkpoints. Gaussian draws use Box-Muller rather than
// std::normal_distribution to keep streams identical across standard
// library implementations.

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

namespace mtscgan {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

    std::uint64_t next_u64() {
        ++count_;
        return engine_();
    }

    // [0, 1)
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    std::size_t index(std::size_t n) {
        return static_cast<std::size_t>(uniform() * static_cast<double>(n)) %
               n;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[index(i)]);
    }

    // Derive an independent stream (e.g. per epoch or per sweep entry).
    Rng fork() { return Rng(next_u64() ^ 0x9e3779b97f4a7c15ULL); }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t draw_count() const { return count_; }

    std::uint64_t digest() const {
        std::uint64_t h = seed_ ^ (count_ * 0x9e3779b97f4a7c15ULL);
        h ^= h >> 33;
        h *= 0xff51afd7ed558ccdULL;
        h ^= h >> 33;
        return h;
    }

private:
    std::mt19937_64 engine_;
    std::uint64_t seed_;
    std::uint64_t count_ = 0;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace mtscgan
