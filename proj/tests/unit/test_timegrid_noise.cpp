#include <doctest.h>

#include <cmath>
#include <vector>

#include "sdmp/errors.hpp"
#include "sdmp/noise.hpp"
#include "sdmp/stats.hpp"
#include "sdmp/timegrid.hpp"

using namespace sdmp;

TEST_SUITE("timegrid_noise") {

TEST_CASE("grid geometry on the benchmark horizon") {
    const TimeGrid g = TimeGrid::make(1.0, 0.25, 8);
    CHECK(g.steps() == 32);
    CHECK(g.dt() == 0.03125);
    CHECK(g.first_node() == -8);
    CHECK(g.last_node() == 40);
    CHECK(g.node_count() == 49);
    CHECK(g.time(-8) == -0.25);
    CHECK(g.time(32) == 1.0);
    CHECK(g.delayed(10) == 2);
    CHECK(g.advanced(10) == 18);
    CHECK(g.index_of(0.5) == 16);
    CHECK(g.is_node(0.125));
    CHECK_FALSE(g.is_node(0.01));
}

TEST_CASE("grid rejects a step that does not divide the horizon") {
    CHECK_THROWS_AS(TimeGrid::make(1.0, 0.3, 8), ConfigError);
    CHECK_THROWS_AS(TimeGrid::make(1.0, 0.0, 8), ConfigError);
    CHECK_THROWS_AS(TimeGrid::make(1.0, 2.0, 8), ConfigError);
    CHECK_THROWS_AS(TimeGrid::make(1.0, 0.25, 0), ConfigError);
    CHECK_THROWS_AS(TimeGrid::make(-1.0, 0.25, 4), ConfigError);
}

TEST_CASE("refinement keeps the horizon and delay") {
    const TimeGrid g = TimeGrid::make(1.0, 0.25, 4).refined(4);
    CHECK(g.steps_per_delay() == 16);
    CHECK(g.steps() == 64);
}

// Known-answer vectors published with the Random123 library.
TEST_CASE("Philox4x32-10 known answers") {
    using A4 = std::array<std::uint32_t, 4>;
    CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
          A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
          A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("counter normals are reproducible and standard") {
    CHECK(counter_normal(5, 3, 7) == counter_normal(5, 3, 7));
    CHECK(counter_normal(5, 3, 7) != counter_normal(6, 3, 7));
    Moments m;
    for (std::uint64_t j = 0; j < 200000; ++j) m.add(counter_normal(1, j / 1000, j % 1000));
    CHECK(std::abs(m.mean()) < 4.0 / std::sqrt(200000.0));
    CHECK(std::abs(m.variance() - 1.0) < 0.02);
}

TEST_CASE("increments have variance dt and no storage dependence") {
    const TimeGrid g = TimeGrid::make(1.0, 0.25, 8);
    const NoiseEnsemble noise(g, 42, 4000);
    Moments m;
    for (std::size_t i = 0; i < noise.n_paths(); ++i)
        for (int k = 0; k < g.steps(); ++k) m.add(noise.increment(i, k));
    CHECK(std::abs(m.mean()) < 4.0 * std::sqrt(g.dt() / m.n));
    CHECK(std::abs(m.variance() / g.dt() - 1.0) < 0.02);

    std::vector<double> row(static_cast<std::size_t>(g.steps()));
    noise.fill_path(17, row);
    for (int k = 0; k < g.steps(); ++k) CHECK(row[static_cast<std::size_t>(k)] == noise.increment(17, k));
    const std::vector<double> all = noise.materialize();
    CHECK(all.size() == noise.n_paths() * static_cast<std::size_t>(g.steps()));
    CHECK(all[17 * static_cast<std::size_t>(g.steps()) + 3] == noise.increment(17, 3));
}

TEST_CASE("coarsened noise sums the fine increments") {
    const TimeGrid fine = TimeGrid::make(1.0, 0.25, 16);
    const NoiseEnsemble noise(fine, 9, 10);
    const NoiseEnsemble coarse = noise.coarsened(4);
    CHECK(coarse.grid().steps_per_delay() == 4);
    for (std::size_t i = 0; i < 10; ++i) {
        for (int k = 0; k < coarse.steps(); ++k) {
            double s = 0.0;
            for (int j = 0; j < 4; ++j) s += noise.increment(i, 4 * k + j);
            CHECK(coarse.increment(i, k) == doctest::Approx(s).epsilon(1e-13));
        }
    }
}

}  // TEST_SUITE
