#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "qoct/grid.hpp"
#include "qoct/model.hpp"

using namespace qoct;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
const MolecularModel kModel = MolecularModel::tabulated();
}

TEST_CASE("ground potential is a Morse well with the tabulated constants") {
  CHECK(kModel.ground_potential(4.125) == 0.0);
  CHECK_THAT(kModel.ground_potential(1e6), WithinRel(0.075, 1e-9));
  // recompute y and E1 independently of the model code
  const double y = 0.0077782 * std::sqrt(1836.0 / (2.0 * 0.075));
  const double u = 1.0 - std::exp(-y * (3.5 - 4.125));
  CHECK_THAT(kModel.ground_potential(3.5), WithinRel(0.075 * u * u, 1e-12));
  CHECK_THAT(kModel.ground_potential(3.5), WithinAbs(0.03805, 5e-5));
}

TEST_CASE("y consistency holds to 1e-12 relative") {
  CHECK_THAT(kModel.morse.y, WithinRel(kModel.derived_y(), 1e-12));
  MolecularModel broken = kModel;
  broken.morse.y *= 1.0 + 1e-6;
  CHECK_THROWS_AS(broken.validate(), ConfigError);
}

TEST_CASE("dissociative potentials at the pivot and beyond") {
  CHECK_THAT(kModel.dissociative_potential(3, 3.15), WithinRel(0.45, 1e-12));
  CHECK_THAT(kModel.dissociative_potential(2, 3.15), WithinRel(0.4305, 1e-12));
  const double e3 = -0.01736 * 0.975 + 0.2 + 0.25 * std::exp(-5.0 * 0.975);
  CHECK_THAT(kModel.dissociative_potential(3, 4.125), WithinRel(e3, 1e-12));
  CHECK_THAT(kModel.dissociative_potential(3, 4.125), WithinAbs(0.18498, 5e-5));
  CHECK_THROWS_AS(kModel.dissociative_potential(1, 4.0), std::invalid_argument);
  CHECK_THROWS_AS(kModel.dissociative_potential(4, 4.0), std::invalid_argument);
}

TEST_CASE("dipole functions") {
  CHECK_THAT(kModel.dipole_moment(1, 2, 5.25), WithinRel(0.2, 1e-12));
  CHECK(kModel.dipole_moment(1, 3, 8.0) == 0.0);
  CHECK(kModel.dipole_moment(1, 3, 3.0) == 0.0);
  CHECK_THROWS_AS(kModel.dipole_moment(2, 2, 5.0), std::invalid_argument);

  SECTION("mu12 equals mu23 everywhere and both are symmetric in (k,l)") {
    for (double r = 1.0; r < 11.0; r += 0.37) {
      CHECK(kModel.dipole_moment(1, 2, r) == kModel.dipole_moment(2, 3, r));
      CHECK(kModel.dipole_moment(1, 2, r) == kModel.dipole_moment(2, 1, r));
      CHECK(kModel.dipole_moment(1, 3, r) == kModel.dipole_moment(3, 1, r));
    }
  }
  SECTION("mu13 is continuous across the branch point") {
    const double eps = 1e-8;
    const double left = kModel.dipole_moment(1, 3, 5.25 - eps);
    const double right = kModel.dipole_moment(1, 3, 5.25 + eps);
    CHECK(std::abs(left - right) < 1e-6);
    CHECK_THAT(left, WithinAbs(-0.2, 1e-6));
  }
}

TEST_CASE("diabatic coupling peaks at r_x with the configured amplitude") {
  CHECK_THAT(kModel.diabatic_coupling(5.25), WithinRel(0.003, 1e-12));
  const auto strong = MolecularModel::tabulated(CouplingRegime::strong);
  CHECK_THAT(strong.diabatic_coupling(5.25), WithinRel(0.0075, 1e-12));
  CHECK(kModel.diabatic_coupling(100.0) == 0.0);
  for (double r = 1.0; r < 11.0; r += 0.1) {
    CHECK(kModel.diabatic_coupling(r) >= 0.0);
    CHECK(kModel.diabatic_coupling(r) <= kModel.diabatic_coupling(5.25));
  }
}

TEST_CASE("absorbing potential ramp") {
  const double r_max = 11.165625;
  const auto& ab = kModel.absorber;
  CHECK(kModel.absorbing_potential(ab.onset, r_max) == 0.0);
  CHECK(kModel.absorbing_potential(ab.onset - 1.0, r_max) == 0.0);
  CHECK_THAT(kModel.absorbing_potential(r_max, r_max), WithinRel(ab.strength, 1e-12));
  SECTION("quadratic ramp midpoint") {
    MolecularModel quad = kModel;
    quad.absorber.exponent = 2.0;
    const double mid = 0.5 * (ab.onset + r_max);
    CHECK_THAT(quad.absorbing_potential(mid, r_max), WithinRel(ab.strength / 4.0, 1e-12));
  }
  SECTION("monotone non-decreasing") {
    double prev = 0.0;
    for (double r = 0.95; r <= r_max; r += 0.01) {
      const double w = kModel.absorbing_potential(r, r_max);
      CHECK(w >= prev);
      prev = w;
    }
  }
}

TEST_CASE("all model functions stay finite over the tabulated grid") {
  const auto g = build_grid(0.9, 4.6875e-2, 220);
  for (const double r : g.points) {
    CHECK(std::isfinite(kModel.ground_potential(r)));
    CHECK(std::isfinite(kModel.dissociative_potential(2, r)));
    CHECK(std::isfinite(kModel.dissociative_potential(3, r)));
    CHECK(std::isfinite(kModel.dipole_moment(1, 2, r)));
    CHECK(std::isfinite(kModel.dipole_moment(1, 3, r)));
    CHECK(std::isfinite(kModel.diabatic_coupling(r)));
    CHECK(std::isfinite(kModel.absorbing_potential(r, g.r_max())));
  }
}

TEST_CASE("initial wavepacket") {
  const auto g = build_grid(0.9, 4.6875e-2, 220);
  const auto s = initial_wavepacket(g, 4.125, 0.265, 3);

  CHECK_THAT(channel_norm(s, 3, g.dr), WithinAbs(1.0, 1e-12));
  CHECK(channel_norm(s, 1, g.dr) == 0.0);
  CHECK(channel_norm(s, 2, g.dr) == 0.0);

  SECTION("peak sits on the grid point nearest the center") {
    std::size_t argmax = 0;
    for (std::size_t j = 1; j < g.n_r; ++j)
      if (std::abs(s.channels[2][j]) > std::abs(s.channels[2][argmax])) argmax = j;
    CHECK(argmax == g.nearest_index(4.125));
  }
  SECTION("first moment by independent quadrature") {
    double mean = 0.0;
    for (std::size_t j = 0; j < g.n_r; ++j)
      mean += g.points[j] * std::norm(s.channels[2][j]) * g.dr;
    CHECK_THAT(mean, WithinAbs(4.125, 0.5 * g.dr));
  }
  SECTION("zero mean momentum: amplitudes are real") {
    for (const auto& z : s.channels[2]) CHECK(z.imag() == 0.0);
  }

  CHECK_THROWS_AS(initial_wavepacket(g, 4.125, 0.265, 0), std::invalid_argument);
  CHECK_THROWS_AS(initial_wavepacket(g, 1.0, 0.265, 3), std::invalid_argument);
  // wide packet: tail at the boundary exceeds 1e-6 of the peak
  CHECK_THROWS_AS(initial_wavepacket(g, 6.0, 1.4, 3), ConfigError);
}
