#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "qoct/errors.hpp"
#include "qoct/state.hpp"

namespace qoct {

struct TrajectorySample {
  double t = 0.0;
  std::array<double, 3> pop{};
  double norm = 0.0;
  std::array<double, 3> flux_cum{};
};

/// Everything a single propagation reports: time-integrated currents at the
/// detector, fluence, time-integrated transition moment integrals and the
/// (optional) stride-sampled population series.
struct RunObservables {
  std::array<double, 3> j_flux{};  ///< J1, J2, J3
  double fluence = 0.0;
  double p12 = 0.0, p23 = 0.0, p31 = 0.0;
  double final_time = 0.0;
  double final_norm = 0.0;
  std::vector<TrajectorySample> series;
};

inline double channel_population(const WavepacketState& s, int i, double dr) {
  return channel_norm(s, i, dr);
}

/// Probability current of channel i at an interior detector point:
/// Im[chi* dchi/dR] / M with a central-difference derivative.
inline double instantaneous_flux(const WavepacketState& s, int i, std::size_t detector_index,
                                 double dr, double mass) {
  if (detector_index == 0 || detector_index + 1 >= s.size())
    throw std::invalid_argument("instantaneous_flux: detector must be an interior grid point");
  const auto& c = s.channels[static_cast<std::size_t>(i - 1)];
  const cplx dpsi = (c[detector_index + 1] - c[detector_index - 1]) / (2.0 * dr);
  return std::imag(std::conj(c[detector_index]) * dpsi) / mass;
}

struct FitnessConfig {
  double alpha_fluence = 0.0;
  double epsilon_floor = 1e-8;
};

/// J = J2 + 1/max(J3, floor) - alpha * fluence.
inline double fitness(const RunObservables& o, const FitnessConfig& cfg) {
  const double inv = 1.0 / std::max(o.j_flux[2], cfg.epsilon_floor);
  return o.j_flux[1] + inv - cfg.alpha_fluence * o.fluence;
}

/// Per-step accumulator used inside propagate(). Flux and transition-moment
/// integrands use the trapezoid rule on the step boundaries; the fluence uses
/// the midpoint field samples directly.
class RunAccumulator {
 public:
  RunAccumulator(double dr, double mass, std::size_t detector_index, double dt,
                 const std::vector<double>& r_points, std::size_t record_stride)
      : dr_(dr),
        mass_(mass),
        det_(detector_index),
        dt_(dt),
        r_(r_points),
        stride_(record_stride) {}

  void begin(const WavepacketState& s0) {
    t0_ = s0.time;
    for (int i = 0; i < 3; ++i) prev_flux_[i] = instantaneous_flux(s0, i + 1, det_, dr_, mass_);
    prev_msq_ = moment_sq_all(s0);
    if (stride_ > 0) record(s0);
  }

  void step(const WavepacketState& s, double field_mid, std::size_t step_index) {
    for (int i = 0; i < 3; ++i) {
      const double f = instantaneous_flux(s, i + 1, det_, dr_, mass_);
      flux_cum_[i] += 0.5 * (prev_flux_[i] + f) * dt_;
      prev_flux_[i] = f;
    }
    fluence_ += field_mid * field_mid * dt_;
    const auto msq = moment_sq_all(s);
    for (int k = 0; k < 3; ++k) {
      moment_cum_[k] += 0.5 * (prev_msq_[k] + msq[k]) * dt_;
      prev_msq_[k] = msq[k];
    }
    const double sentinel = flux_cum_[0] + flux_cum_[1] + flux_cum_[2] + fluence_ +
                            moment_cum_[0] + moment_cum_[1] + moment_cum_[2];
    if (!std::isfinite(sentinel))
      throw PropagationError(step_index, "propagation diverged (non-finite amplitude) at step " +
                                             std::to_string(step_index));
    if (stride_ > 0 && (step_index + 1) % stride_ == 0) record(s);
  }

  RunObservables finish(const WavepacketState& s_final, std::size_t n_steps) {
    RunObservables out;
    out.j_flux = flux_cum_;
    out.fluence = fluence_;
    const double elapsed = dt_ * static_cast<double>(n_steps);
    if (elapsed > 0.0) {
      out.p12 = moment_cum_[0] / elapsed;
      out.p23 = moment_cum_[1] / elapsed;
      out.p31 = moment_cum_[2] / elapsed;
    }
    out.final_time = s_final.time;
    out.final_norm = total_norm(s_final, dr_);
    out.series = std::move(samples_);
    return out;
  }

 private:
  /// |<chi_i|R|chi_j>|^2 for the ordered pairs (1,2), (2,3), (3,1).
  std::array<double, 3> moment_sq_all(const WavepacketState& s) const {
    const auto& c1 = s.channels[0];
    const auto& c2 = s.channels[1];
    const auto& c3 = s.channels[2];
    cplx m12{}, m23{}, m31{};
    const std::size_t n = c1.size();
    for (std::size_t j = 0; j < n; ++j) {
      const double w = r_[j] * dr_;
      m12 += std::conj(c1[j]) * c2[j] * w;
      m23 += std::conj(c2[j]) * c3[j] * w;
      m31 += std::conj(c3[j]) * c1[j] * w;
    }
    return {std::norm(m12), std::norm(m23), std::norm(m31)};
  }

  void record(const WavepacketState& s) {
    TrajectorySample row;
    row.t = s.time;
    for (int i = 0; i < 3; ++i) row.pop[i] = channel_population(s, i + 1, dr_);
    row.norm = row.pop[0] + row.pop[1] + row.pop[2];
    row.flux_cum = flux_cum_;
    samples_.push_back(row);
  }

  double dr_, mass_;
  std::size_t det_;
  double dt_;
  const std::vector<double>& r_;
  std::size_t stride_;
  double t0_ = 0.0;
  std::array<double, 3> flux_cum_{};
  std::array<double, 3> prev_flux_{};
  std::array<double, 3> moment_cum_{};
  std::array<double, 3> prev_msq_{};
  double fluence_ = 0.0;
  std::vector<TrajectorySample> samples_;
};

}  // namespace qoct
