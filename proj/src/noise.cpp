#include "sdmp/noise.hpp"

#include <cmath>
#include <numbers>

#include "sdmp/errors.hpp"

namespace sdmp {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void philox_round(std::array<std::uint32_t, 4>& c, const std::array<std::uint32_t, 2>& k) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

// Uniform on (0, 1] from 53 high bits.
inline double to_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32) | lo;
    return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

inline std::array<double, 2> normal_pair(std::uint64_t seed, std::uint64_t path, std::uint64_t pair) {
    const auto r = philox4x32_10(
        {static_cast<std::uint32_t>(pair), static_cast<std::uint32_t>(pair >> 32),
         static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32)},
        {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
    const double u1 = to_unit(r[0], r[1]);
    const double u2 = to_unit(r[2], r[3]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kPhiloxW0;
            key[1] += kPhiloxW1;
        }
        philox_round(counter, key);
    }
    return counter;
}

double counter_normal(std::uint64_t seed, std::uint64_t path, std::uint64_t index) {
    return normal_pair(seed, path, index / 2)[index % 2];
}

NoiseEnsemble::NoiseEnsemble(const TimeGrid& grid, std::uint64_t seed, std::size_t n_paths,
                             int substeps)
    : grid_(grid), seed_(seed), n_paths_(n_paths), substeps_(substeps) {
    if (n_paths < 1) throw ConfigError("noise ensemble needs n_paths >= 1");
    if (substeps < 1) throw ConfigError("noise ensemble needs substeps >= 1");
    scale_ = std::sqrt(grid.delay() / static_cast<double>(grid.steps_per_delay() * substeps));
}

double NoiseEnsemble::increment(std::size_t path, int step) const {
    const auto s = static_cast<std::uint64_t>(substeps_);
    const std::uint64_t first = static_cast<std::uint64_t>(step) * s;
    double sum = 0.0;
    for (std::uint64_t j = 0; j < s; ++j) sum += scale_ * counter_normal(seed_, path, first + j);
    return sum;
}

void NoiseEnsemble::fill_path(std::size_t path, std::span<double> out) const {
    const int n = grid_.steps();
    if (out.size() < static_cast<std::size_t>(n))
        throw ConfigError("fill_path: output span shorter than the number of steps");
    if (substeps_ == 1) {
        for (int k = 0; k < n; k += 2) {
            const auto z = normal_pair(seed_, path, static_cast<std::uint64_t>(k) / 2);
            out[static_cast<std::size_t>(k)] = scale_ * z[0];
            if (k + 1 < n) out[static_cast<std::size_t>(k) + 1] = scale_ * z[1];
        }
        return;
    }
    for (int k = 0; k < n; ++k) out[static_cast<std::size_t>(k)] = increment(path, k);
}

std::vector<double> NoiseEnsemble::materialize() const {
    const auto n = static_cast<std::size_t>(grid_.steps());
    std::vector<double> out(n_paths_ * n);
    for (std::size_t i = 0; i < n_paths_; ++i) fill_path(i, std::span<double>(out).subspan(i * n, n));
    return out;
}

NoiseEnsemble NoiseEnsemble::coarsened(int factor) const {
    if (factor < 1 || grid_.steps_per_delay() % factor != 0)
        throw ConfigError("coarsening factor must divide steps_per_delay");
    const TimeGrid coarse =
        TimeGrid::make(grid_.horizon(), grid_.delay(), grid_.steps_per_delay() / factor);
    return NoiseEnsemble(coarse, seed_, n_paths_, substeps_ * factor);
}

}  // namespace sdmp
