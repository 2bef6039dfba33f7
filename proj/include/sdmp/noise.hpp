#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sdmp/timegrid.hpp"

namespace sdmp {

// Philox4x32 with 10 rounds (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

// Standard normal draw number `index` of stream `path`: a pure function of
// (seed, path, index). Draws come in Box-Muller pairs sharing one Philox block.
double counter_normal(std::uint64_t seed, std::uint64_t path, std::uint64_t index);

// Brownian increments over [0, T] for n_paths paths. Nothing is sampled on
// [-delta, 0] or (T, T + delta]. Increments are computed on demand from
// (seed, path, step), so two ensembles with equal inputs agree bit for bit
// and no storage is needed.
//
// With substeps s > 1, each increment is the sum of s finer increments of the
// same underlying Brownian path; coarsened() uses this to couple grids.
class NoiseEnsemble {
public:
    NoiseEnsemble(const TimeGrid& grid, std::uint64_t seed, std::size_t n_paths, int substeps = 1);

    const TimeGrid& grid() const { return grid_; }
    std::uint64_t seed() const { return seed_; }
    std::size_t n_paths() const { return n_paths_; }
    int substeps() const { return substeps_; }
    int steps() const { return grid_.steps(); }

    // Increment over [t_step, t_step+1]; step in [0, N).
    double increment(std::size_t path, int step) const;
    // Writes the N increments of one path.
    void fill_path(std::size_t path, std::span<double> out) const;
    // Path-major n_paths x N matrix.
    std::vector<double> materialize() const;

    // Same Brownian paths on a grid with steps_per_delay / factor.
    NoiseEnsemble coarsened(int factor) const;

private:
    TimeGrid grid_;
    std::uint64_t seed_;
    std::size_t n_paths_;
    int substeps_;
    double scale_;  // sqrt of the finest step
};

inline NoiseEnsemble sample_noise(const TimeGrid& grid, std::uint64_t seed, std::size_t n_paths) {
    return NoiseEnsemble(grid, seed, n_paths);
}

}  // namespace sdmp
