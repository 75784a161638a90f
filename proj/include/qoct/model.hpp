#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>

#include "qoct/errors.hpp"
#include "qoct/grid.hpp"
#include "qoct/state.hpp"

namespace qoct {

enum class CouplingRegime { intermediate, strong };

inline double coupling_amplitude_for(CouplingRegime regime) {
  return regime == CouplingRegime::strong ? 0.0075 : 0.003;
}

/// Morse well for the ground channel: E1(R) = D_e (1 - exp(-y (R - r_e)))^2.
struct MorseParams {
  double d_e = 0.075;
  double omega_e = 0.0077782;
  double r_e = 4.125;
  double y = 0.0;  ///< omega_e * sqrt(M / (2 D_e)); derived, see derived_y()
};

/// Linear-plus-exponential dissociative channel, shifted pivot at diss_pivot.
struct DissociativeParams {
  double slope = 0.0;   ///< m_alpha
  double offset = 0.0;  ///< b_alpha
};

/// Power-ramp optical potential: 0 inside, eta*((R-onset)/(R_max-onset))^p outside.
/// Defaults calibrated on the tabulated grid so that a slow outgoing packet
/// (k = 5) reflects < 1e-3 of its norm while the fast dissociating packet
/// (k ~ 21) transmits < 1e-3 past the grid edge.
struct AbsorberParams {
  double onset = 8.5;
  double strength = 0.07;
  double exponent = 3.0;
};

struct MolecularModel {
  double mass = 1836.0;

  MorseParams morse{};
  DissociativeParams diss2{-0.008681, 0.1805};
  DissociativeParams diss3{-0.01736, 0.2};
  double diss_pivot = 3.15;
  double diss_exp_amp = 0.25;  ///< c
  double diss_exp_rate = 5.0;  ///< d

  double dipole_mu = 0.2;
  double dipole_a = 5.0;
  double dipole_rx = 5.25;
  double mu13_rate = 10.0;
  double mu13_inner = 3.0;
  double mu13_outer = 8.0;

  double coupling_amplitude = 0.003;  ///< A in C23
  double interaction_prefactor = 1.0;

  AbsorberParams absorber{};

  double derived_y() const { return morse.omega_e * std::sqrt(mass / (2.0 * morse.d_e)); }

  double ground_potential(double r) const {
    const double u = 1.0 - std::exp(-morse.y * (r - morse.r_e));
    return morse.d_e * u * u;
  }

  double dissociative_potential(int alpha, double r) const {
    if (alpha != 2 && alpha != 3)
      throw std::invalid_argument("dissociative_potential: channel must be 2 or 3");
    const DissociativeParams& p = alpha == 2 ? diss2 : diss3;
    const double x = r - diss_pivot;
    return p.slope * x + p.offset + diss_exp_amp * std::exp(-diss_exp_rate * x);
  }

  double channel_potential(int i, double r) const {
    return i == 1 ? ground_potential(r) : dissociative_potential(i, r);
  }

  /// Transition dipole mu_kl(R); symmetric in (k, l). No permanent dipoles.
  double dipole_moment(int k, int l, double r) const {
    if (k > l) std::swap(k, l);
    if (k == l) throw std::invalid_argument("dipole_moment: no permanent dipoles in this model");
    if (k < 1 || l > 3) throw std::invalid_argument("dipole_moment: channels must be in 1..3");
    if (k == 1 && l == 3) {
      return r >= dipole_rx ? dipole_mu * std::tanh(-mu13_rate * (mu13_outer - r))
                            : dipole_mu * std::tanh(-mu13_rate * (r - mu13_inner));
    }
    const double d = r - dipole_rx;
    return dipole_mu * std::exp(-dipole_a * d * d);
  }

  /// Static diabatic coupling C23(R), Gaussian centered at dipole_rx.
  double diabatic_coupling(double r) const {
    const double d = r - dipole_rx;
    return coupling_amplitude * std::exp(-dipole_a * d * d);
  }

  double absorbing_potential(double r, double r_max) const {
    if (r <= absorber.onset) return 0.0;
    const double u = (r - absorber.onset) / (r_max - absorber.onset);
    return absorber.strength * std::pow(u, absorber.exponent);
  }

  void validate() const {
    if (!(mass > 0.0)) throw ConfigError("model.mass must be positive");
    if (!(morse.d_e > 0.0)) throw ConfigError("model.morse.d_e must be positive");
    const double y_ref = derived_y();
    if (std::abs(morse.y - y_ref) > 1e-12 * std::abs(y_ref))
      throw ConfigError("model.morse.y inconsistent with omega_e*sqrt(M/(2 D_e))");
    if (!(absorber.strength >= 0.0)) throw ConfigError("model.absorber.strength must be >= 0");
    if (!(absorber.exponent > 0.0)) throw ConfigError("model.absorber.exponent must be positive");
    if (!(absorber.onset > 0.0)) throw ConfigError("model.absorber.onset must be positive");
  }

  static MolecularModel tabulated(CouplingRegime regime = CouplingRegime::intermediate) {
    MolecularModel m;
    m.coupling_amplitude = coupling_amplitude_for(regime);
    m.morse.y = m.derived_y();
    m.validate();
    return m;
  }
};

/// Gaussian wavepacket with zero mean momentum on one channel, normalized to
/// total norm 1 on the grid. `width` is the amplitude standard deviation.
inline WavepacketState initial_wavepacket(const SpatialGrid& grid, double center, double width,
                                          int channel) {
  if (channel < 1 || channel > 3)
    throw std::invalid_argument("initial_wavepacket: channel must be in 1..3");
  if (!(width > 0.0)) throw std::invalid_argument("initial_wavepacket: width must be positive");
  if (center - 3.0 * width < grid.points.front() || center + 3.0 * width > grid.points.back())
    throw std::invalid_argument("initial_wavepacket: center +/- 3*width must lie inside the grid");

  WavepacketState s = WavepacketState::zero(grid.n_r);
  auto& chi = s.channels[static_cast<std::size_t>(channel - 1)];
  double norm_sq = 0.0;
  for (std::size_t j = 0; j < grid.n_r; ++j) {
    const double d = grid.points[j] - center;
    const double a = std::exp(-d * d / (2.0 * width * width));
    chi[j] = a;
    norm_sq += a * a;
  }
  if (std::abs(chi.front()) > 1e-6 || std::abs(chi.back()) > 1e-6)
    throw ConfigError("initial_wavepacket: tail clipped by grid edge");
  const double scale = 1.0 / std::sqrt(norm_sq * grid.dr);
  for (auto& z : chi) z *= scale;
  return s;
}

}  // namespace qoct
