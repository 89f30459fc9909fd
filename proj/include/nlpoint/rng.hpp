#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace nlpoint {

// splitmix64 output function. Used to derive independent stream seeds from a
// master seed: stream k gets the k-th splitmix64 output. The generator is
// fully specified here so that seeds reproduce on any platform.
inline std::uint64_t stream_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t z = master + (stream + 1) * 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// mt19937_64 with explicit scalar recipes on top. std::mt19937_64 itself is
// bit-exact across implementations, but the standard distributions are not,
// so the uniform and normal transformations are spelled out here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    // Uniform on [0, 1) with 53-bit resolution.
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // Standard normal via Box-Muller; consumes two uniforms per pair and
    // caches the second member.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u = 1.0 - uniform01();           // (0, 1], keeps log finite
        const double v = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u));
        const double c = std::cos(6.283185307179586477 * v);
        const double s = std::sin(6.283185307179586477 * v);
        spare_ = r * s;
        have_spare_ = true;
        return r * c;
    }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace nlpoint
