#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "qoct/fft.hpp"
#include "qoct/grid.hpp"
#include "qoct/model.hpp"
#include "qoct/observables.hpp"
#include "qoct/state.hpp"
#include "qoct/sym3.hpp"

namespace qoct {

/// Field samples with magnitude below this are treated as exactly zero, which
/// routes the potential step through the precomputed field-free operator.
inline constexpr double kFieldZeroThreshold = 1e-14;

/// Precomputed per-step factors for the symmetric splitting
/// exp(-i T dt/2) exp(-i V dt) exp(-i T dt/2), absorber applied once per step.
struct PropagatorPlan {
  SpatialGrid grid;
  double mass = 0.0;
  double dt_full = 0.0;  ///< the full step (two kinetic half steps per step)
  std::size_t n_steps = 0;
  bool absorber_enabled = true;
  std::vector<cplx> kinetic_phase;    ///< exp(-i k^2/(2M) * dt_full/2), unit modulus
  std::vector<double> absorber_decay; ///< exp(-W(R) dt_full), in (0, 1]
};

inline PropagatorPlan make_plan(const SpatialGrid& grid, const MolecularModel& model,
                                double dt_full, std::size_t n_steps, bool absorber_on = true) {
  if (!(dt_full > 0.0)) throw std::invalid_argument("make_plan: dt_full must be positive");
  PropagatorPlan p;
  p.grid = grid;
  p.mass = model.mass;
  p.dt_full = dt_full;
  p.n_steps = n_steps;
  p.absorber_enabled = absorber_on;
  p.kinetic_phase.resize(grid.n_r);
  p.absorber_decay.resize(grid.n_r);
  const double half_dt = 0.5 * dt_full;
  for (std::size_t j = 0; j < grid.n_r; ++j) {
    const double k = grid.momenta[j];
    p.kinetic_phase[j] = std::polar(1.0, -k * k / (2.0 * model.mass) * half_dt);
    const double w = absorber_on ? model.absorbing_potential(grid.points[j], grid.r_max()) : 0.0;
    p.absorber_decay[j] = std::exp(-w * dt_full);
  }
  return p;
}

/// Field-independent parts of the 3x3 potential matrix on every grid point,
/// plus the dipole profiles needed to assemble the field coupling, plus the
/// exact field-free step operator (channel 1 phase and the static 2-3 block).
class PotentialMatrixCache {
 public:
  double dt_full = 0.0;
  double prefactor = 1.0;
  std::vector<double> e1, e2, e3, c23, mu12, mu13, mu23;

  std::vector<cplx> phase1;  ///< exp(-i E1 dt_full)
  struct Block23 {
    cplx b22, b23, b33;  ///< exp(-i H23 dt_full), H23 = [[E2, C23], [C23, E3]]
  };
  std::vector<Block23> static23;

  std::size_t size() const { return e1.size(); }

  static PotentialMatrixCache from_model(const MolecularModel& m, const SpatialGrid& g,
                                         double dt_full) {
    PotentialMatrixCache c;
    c.dt_full = dt_full;
    c.prefactor = m.interaction_prefactor;
    const std::size_t n = g.n_r;
    c.e1.resize(n);
    c.e2.resize(n);
    c.e3.resize(n);
    c.c23.resize(n);
    c.mu12.resize(n);
    c.mu13.resize(n);
    c.mu23.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double r = g.points[j];
      c.e1[j] = m.ground_potential(r);
      c.e2[j] = m.dissociative_potential(2, r);
      c.e3[j] = m.dissociative_potential(3, r);
      c.c23[j] = m.diabatic_coupling(r);
      c.mu12[j] = m.dipole_moment(1, 2, r);
      c.mu13[j] = m.dipole_moment(1, 3, r);
      c.mu23[j] = m.dipole_moment(2, 3, r);
    }
    c.finalize();
    return c;
  }

  static PotentialMatrixCache from_tables(std::vector<double> e1, std::vector<double> e2,
                                          std::vector<double> e3, std::vector<double> c23,
                                          std::vector<double> mu12, std::vector<double> mu13,
                                          std::vector<double> mu23, double prefactor,
                                          double dt_full) {
    PotentialMatrixCache c;
    c.dt_full = dt_full;
    c.prefactor = prefactor;
    c.e1 = std::move(e1);
    c.e2 = std::move(e2);
    c.e3 = std::move(e3);
    c.c23 = std::move(c23);
    c.mu12 = std::move(mu12);
    c.mu13 = std::move(mu13);
    c.mu23 = std::move(mu23);
    const std::size_t n = c.e1.size();
    if (c.e2.size() != n || c.e3.size() != n || c.c23.size() != n || c.mu12.size() != n ||
        c.mu13.size() != n || c.mu23.size() != n)
      throw std::invalid_argument("PotentialMatrixCache: table length mismatch");
    c.finalize();
    return c;
  }

 private:
  void finalize() {
    const std::size_t n = e1.size();
    phase1.resize(n);
    static23.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      phase1[j] = std::polar(1.0, -e1[j] * dt_full);
      // exp(-i H dt) = e^{-i h dt} (cos(r dt) I - i sin(r dt)/r * [[d, c], [c, -d]])
      const double h = 0.5 * (e2[j] + e3[j]);
      const double d = 0.5 * (e2[j] - e3[j]);
      const double c = c23[j];
      const double r = std::hypot(d, c);
      const cplx ph = std::polar(1.0, -h * dt_full);
      if (r == 0.0) {
        static23[j] = {ph, cplx{0.0, 0.0}, ph};
      } else {
        const double cr = std::cos(r * dt_full);
        const double sr = std::sin(r * dt_full) / r;
        const cplx i_sr{0.0, -sr};
        static23[j] = {ph * (cr + i_sr * d), ph * (i_sr * c), ph * (cr - i_sr * d)};
      }
    }
  }
};

inline void kinetic_half_step(WavepacketState& state, const PropagatorPlan& plan,
                              FourierTransformer& fft) {
  const std::size_t n = plan.grid.n_r;
  for (auto& channel : state.channels) {
    fft.forward(channel.data());
    for (std::size_t j = 0; j < n; ++j) channel[j] *= plan.kinetic_phase[j];
    fft.inverse(channel.data());
  }
}

/// One full potential step exp(-i V(eps) dt) applied pointwise. With the field
/// coupling present the 3x3 matrix is diagonalized per point; without it the
/// precomputed field-free operator is applied.
inline void potential_full_step(WavepacketState& state, const PotentialMatrixCache& cache,
                                double field_value) {
  const std::size_t n = state.size();
  if (cache.size() != n)
    throw std::invalid_argument("potential_full_step: cache/state size mismatch");
  auto& c1 = state.channels[0];
  auto& c2 = state.channels[1];
  auto& c3 = state.channels[2];

  if (std::abs(field_value) < kFieldZeroThreshold) {
    for (std::size_t j = 0; j < n; ++j) {
      c1[j] *= cache.phase1[j];
      const auto& b = cache.static23[j];
      const cplx x2 = c2[j];
      const cplx x3 = c3[j];
      c2[j] = b.b22 * x2 + b.b23 * x3;
      c3[j] = b.b23 * x2 + b.b33 * x3;
    }
    return;
  }

  const double f = cache.prefactor * field_value;
  const double dt = cache.dt_full;
  for (std::size_t j = 0; j < n; ++j) {
    const Sym3 a{cache.e1[j], f * cache.mu12[j],        f * cache.mu13[j],
                 cache.e2[j], f * cache.mu23[j] + cache.c23[j], cache.e3[j]};
    const Sym3Eigen eig = eigen_sym3(a);
    const cplx psi0 = c1[j];
    const cplx psi1 = c2[j];
    const cplx psi2 = c3[j];
    cplx out0{}, out1{}, out2{};
    for (int k = 0; k < 3; ++k) {
      const auto& v = eig.vec[k];
      cplx y = v[0] * psi0 + v[1] * psi1 + v[2] * psi2;
      y *= std::polar(1.0, -eig.val[k] * dt);
      out0 += v[0] * y;
      out1 += v[1] * y;
      out2 += v[2] * y;
    }
    c1[j] = out0;
    c2[j] = out1;
    c3[j] = out2;
  }
}

inline void apply_absorber(WavepacketState& state, const PropagatorPlan& plan) {
  if (!plan.absorber_enabled) return;
  const std::size_t n = plan.grid.n_r;
  for (auto& channel : state.channels)
    for (std::size_t j = 0; j < n; ++j) channel[j] *= plan.absorber_decay[j];
}

struct ProbeSet {
  std::size_t detector_index = 0;
  std::size_t record_stride = 0;  ///< 0 disables the time series
};

/// Advance the state through plan.n_steps full steps under the given field
/// midpoint samples, accumulating run observables. Single-threaded with a
/// fixed evaluation order: identical inputs give bit-identical results.
inline RunObservables propagate(WavepacketState state, const PotentialMatrixCache& cache,
                                const PropagatorPlan& plan, std::span<const double> field_midpoints,
                                const ProbeSet& probes) {
  const std::size_t n = plan.grid.n_r;
  if (state.size() != n) throw std::invalid_argument("propagate: state/grid size mismatch");
  if (cache.size() != n) throw std::invalid_argument("propagate: cache/grid size mismatch");
  if (cache.dt_full != plan.dt_full)
    throw std::invalid_argument("propagate: cache and plan disagree on dt_full");
  if (field_midpoints.size() != plan.n_steps)
    throw std::invalid_argument("propagate: need one field midpoint sample per step");
  if (probes.detector_index == 0 || probes.detector_index + 1 >= n)
    throw std::invalid_argument("propagate: detector must be an interior grid point");

  FourierTransformer fft(n);
  RunAccumulator acc(plan.grid.dr, plan.mass, probes.detector_index, plan.dt_full,
                     plan.grid.points, probes.record_stride);
  const double t0 = state.time;
  acc.begin(state);
  for (std::size_t step = 0; step < plan.n_steps; ++step) {
    kinetic_half_step(state, plan, fft);
    potential_full_step(state, cache, field_midpoints[step]);
    kinetic_half_step(state, plan, fft);
    apply_absorber(state, plan);
    state.time = t0 + plan.dt_full * static_cast<double>(step + 1);
    acc.step(state, field_midpoints[step], step);
  }
  return acc.finish(state, plan.n_steps);
}

}  // namespace qoct
