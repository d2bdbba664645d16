#pragma once

#include <cstdint>

#include "otfs/types.hpp"

namespace otfs {

// xoshiro256** seeded through SplitMix64. Self-contained so that streams are
// bit-identical across platforms and standard-library versions.
class Rng {
public:
    explicit Rng(uint64_t seed);

    uint64_t next();

    // Uniform on [0, 1).
    double uniform();
    double uniform(double lo, double hi);

    // One N(0,1) draw (Box-Muller, no cached spare).
    double gaussian();

    // CN(0, var).
    Complex cgaussian(double var);

private:
    uint64_t s_[4];
};

uint64_t splitmix64(uint64_t& state);

// Deterministic substream derivation: hash(master, key1, key2). Used so that
// parallel and serial runs draw identical streams per (sweep point, realization).
uint64_t substream_seed(uint64_t master, uint64_t key1, uint64_t key2);

}  // namespace otfs
