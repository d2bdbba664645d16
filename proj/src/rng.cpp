#include "otfs/rng.hpp"

#include <cmath>

namespace otfs {

uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

uint64_t substream_seed(uint64_t master, uint64_t key1, uint64_t key2) {
    uint64_t s = master;
    uint64_t h = splitmix64(s);
    s = h ^ (key1 * 0x9e3779b97f4a7c15ULL);
    h = splitmix64(s);
    s = h ^ (key2 * 0xc2b2ae3d27d4eb4fULL);
    return splitmix64(s);
}

Rng::Rng(uint64_t seed) {
    for (auto& s : s_) s = splitmix64(seed);
}

static inline uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

uint64_t Rng::next() {
    const uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

double Rng::gaussian() {
    // u1 in (0, 1] so the log is finite.
    double u1 = 1.0 - uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

Complex Rng::cgaussian(double var) {
    double u1 = 1.0 - uniform();
    double u2 = uniform();
    double mag = std::sqrt(-var * std::log(u1));
    return mag * Complex(std::cos(2.0 * kPi * u2), std::sin(2.0 * kPi * u2));
}

}  // namespace otfs
