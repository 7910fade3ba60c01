#include "sbmlab/noise.hpp"

#include <cmath>
#include <stdexcept>

namespace sbm {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void philox_round(std::array<std::uint32_t, 4>& ctr, const std::array<std::uint32_t, 2>& key) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
}

inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                                  std::array<std::uint32_t, 2> key) {
    for (int r = 0; r < 10; ++r) {
        philox_round(ctr, key);
        if (r < 9) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
    }
    return ctr;
}

inline double u64_to_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32) | lo;
    return static_cast<double>(bits >> 11) * 0x1.0p-53;  // [0, 1)
}

// One Box-Muller pair per block: u1 in (0,1], u2 in [0,1).
inline void block_to_normals(const std::array<std::uint32_t, 4>& blk, double& z0, double& z1) {
    const double u1 = 1.0 - u64_to_unit(blk[0], blk[1]);
    const double u2 = u64_to_unit(blk[2], blk[3]);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    z0 = r * std::cos(a);
    z1 = r * std::sin(a);
}

}  // namespace

NoiseGenerator::NoiseGenerator(SeedSpec seed) : seed_(seed) {}

std::array<std::uint32_t, 4> NoiseGenerator::next_block() {
    const std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(block_),
        static_cast<std::uint32_t>(block_ >> 32),
        static_cast<std::uint32_t>(seed_.stream_id),
        static_cast<std::uint32_t>(seed_.stream_id >> 32),
    };
    const std::array<std::uint32_t, 2> key = {
        static_cast<std::uint32_t>(seed_.base_seed),
        static_cast<std::uint32_t>(seed_.base_seed >> 32),
    };
    ++block_;
    return philox4x32_10(ctr, key);
}

void NoiseGenerator::fill_normals(double* out, int n) {
    int j = 0;
    while (j + 1 < n) {
        block_to_normals(next_block(), out[j], out[j + 1]);
        j += 2;
    }
    if (j < n) {
        double z0, z1;
        block_to_normals(next_block(), z0, z1);
        out[j] = z0;  // z1 discarded
    }
}

double NoiseGenerator::next_normal() {
    double z;
    fill_normals(&z, 1);
    return z;
}

NoiseIncrement white_increment(NoiseGenerator& gen, int n) {
    NoiseIncrement inc;
    inc.xi.resize(static_cast<size_t>(n));
    gen.fill_normals(inc.xi.data(), n);
    return inc;
}

NoiseIncrement correlated_pair(NoiseGenerator& gen, int n, double rho) {
    if (std::fabs(rho) > 1.0)
        throw std::invalid_argument("correlated_pair: rho must lie in [-1, 1]");
    NoiseIncrement inc;
    inc.xi.resize(static_cast<size_t>(n));
    gen.fill_normals(inc.xi.data(), n);
    std::vector<double> perp(static_cast<size_t>(n));
    gen.fill_normals(perp.data(), n);
    const double tail = std::sqrt(std::max(0.0, 1.0 - rho * rho));
    inc.xi2.emplace(static_cast<size_t>(n));
    auto& xi2 = *inc.xi2;
    for (int j = 0; j < n; ++j) xi2[static_cast<size_t>(j)] = rho * inc.xi[static_cast<size_t>(j)] + tail * perp[static_cast<size_t>(j)];
    return inc;
}

const char* generator_version() { return "philox4x32-10+box-muller/1"; }

}  // namespace sbm
