#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace sbm {

/// (base_seed, stream_id) -> generator state, injectively. Replica k of a run
/// uses stream_id = stream_block + k, so replicas never share a stream.
struct SeedSpec {
    std::uint64_t base_seed = 0;
    std::uint64_t stream_id = 0;

    bool operator==(const SeedSpec&) const = default;
};

/// Counter-based Philox4x32-10 generator (Salmon et al.). The 128-bit counter
/// holds (block index, stream id); the 64-bit key is the base seed. Distinct
/// stream ids therefore yield disjoint counter ranges with no coordination,
/// and the output is bit-reproducible given the same SeedSpec and call
/// sequence. Gaussians come from one Box-Muller transform per block.
class NoiseGenerator {
public:
    explicit NoiseGenerator(SeedSpec seed);

    /// Raw 128-bit block output; advances the block counter by one.
    std::array<std::uint32_t, 4> next_block();

    /// Fills out[0..n) with independent standard normals. Consumes exactly
    /// ceil(n/2) blocks; a spare half-pair is discarded, never cached, so the
    /// stream position is a pure function of the fill sizes requested so far.
    void fill_normals(double* out, int n);

    double next_normal();

    /// Counter-based jump-ahead: position the generator at an absolute block
    /// index in O(1).
    void seek(std::uint64_t block) { block_ = block; }

    std::uint64_t blocks_consumed() const { return block_; }
    SeedSpec seed() const { return seed_; }

private:
    SeedSpec seed_;
    std::uint64_t block_ = 0;
};

/// One standard normal per cell per step (xi), plus the rho-correlated
/// partner (xi2) when a pair was requested. The solver applies the space-time
/// scaling xi * sqrt(dt/dx); increments here are unscaled N(0,1).
struct NoiseIncrement {
    std::vector<double> xi;
    std::optional<std::vector<double>> xi2;
};

NoiseIncrement white_increment(NoiseGenerator& gen, int n);

/// xi2 = rho * xi + sqrt(1 - rho^2) * xi_perp. For |rho| = 1 the second draw
/// still happens (fixed stream consumption) but xi2 equals +-xi bit-exactly.
NoiseIncrement correlated_pair(NoiseGenerator& gen, int n, double rho);

/// Recorded in every CSV header for reproducibility.
const char* generator_version();

}  // namespace sbm
