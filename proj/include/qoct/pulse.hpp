#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qoct/errors.hpp"
#include "qoct/fft.hpp"

namespace qoct {

/// One linearly chirped pulse:
/// E0 exp(-(t-tau0)^2/(2 tau^2)) cos(c (t-tau0)^2 / 2 + omega0 (t-tau0)).
struct LcpParams {
  double e0 = 0.0;
  double tau0 = 0.0;
  double chirp = 0.0;
  double width = 1.0;
  double omega0 = 0.0;
};

inline double lcp_value(const LcpParams& p, double t) {
  const double s = t - p.tau0;
  const double envelope = std::exp(-s * s / (2.0 * p.width * p.width));
  return p.e0 * envelope * std::cos(0.5 * p.chirp * s * s + p.omega0 * s);
}

struct PulseEnsemble {
  std::vector<LcpParams> pulses;
};

inline double field_value(const PulseEnsemble& ens, double t) {
  double acc = 0.0;
  for (const auto& p : ens.pulses) acc += lcp_value(p, t);
  return acc;
}

/// Field samples at the step midpoints (k + 1/2) dt, k = 0..n_steps-1, as
/// consumed by propagate().
inline std::vector<double> sample_field(const PulseEnsemble& ens, double dt_full,
                                        std::size_t n_steps) {
  std::vector<double> out(n_steps);
  for (std::size_t k = 0; k < n_steps; ++k)
    out[k] = field_value(ens, (static_cast<double>(k) + 0.5) * dt_full);
  return out;
}

struct SpectrumPoint {
  double omega = 0.0;
  double power = 0.0;
};

/// One-sided energy spectral density on the angular-frequency axis with
/// rectangular windowing; the bin integral reproduces the fluence (Parseval).
inline std::vector<SpectrumPoint> power_spectrum_of_samples(std::span<const double> samples,
                                                            double dt) {
  const std::size_t n = samples.size();
  if (n == 0) return {};
  FourierTransformer fft(n);
  std::vector<cplx> buf(n);
  for (std::size_t k = 0; k < n; ++k) buf[k] = samples[k];
  fft.forward(buf.data());
  const std::size_t n_bins = n / 2 + 1;
  const double t_total = dt * static_cast<double>(n);
  const double scale = dt * dt / (2.0 * std::numbers::pi);
  std::vector<SpectrumPoint> out(n_bins);
  for (std::size_t k = 0; k < n_bins; ++k) {
    double power = std::norm(buf[k]);
    const std::size_t mirror = (n - k) % n;
    if (mirror != k) power += std::norm(buf[mirror]);
    out[k].omega = 2.0 * std::numbers::pi * static_cast<double>(k) / t_total;
    out[k].power = scale * power;
  }
  return out;
}

inline std::vector<SpectrumPoint> power_spectrum(const PulseEnsemble& ens, double dt_full,
                                                 std::size_t n_steps) {
  const auto samples = sample_field(ens, dt_full, n_steps);
  return power_spectrum_of_samples(samples, dt_full);
}

/// Fraction of total spectral power inside [lo, hi].
inline double band_power_fraction(const std::vector<SpectrumPoint>& spectrum, double lo,
                                  double hi) {
  double total = 0.0;
  double in_band = 0.0;
  for (const auto& pt : spectrum) {
    total += pt.power;
    if (pt.omega >= lo && pt.omega <= hi) in_band += pt.power;
  }
  return total > 0.0 ? in_band / total : 0.0;
}

struct BandDiagnostic {
  double lo = 0.0, hi = 0.0;     ///< carrier range broadened by width and chirp
  double power_fraction = 0.0;   ///< spectral power inside [lo, hi]
  double peak_omega = 0.0;
};

/// Band-limitation diagnostic: the carrier range of the ensemble widened by
/// two spectral sigmas (1/tau per pulse) plus the chirp excursion.
inline BandDiagnostic band_diagnostic(const PulseEnsemble& ens,
                                      const std::vector<SpectrumPoint>& spectrum) {
  BandDiagnostic d;
  if (ens.pulses.empty() || spectrum.empty()) return d;
  double lo = ens.pulses.front().omega0;
  double hi = lo;
  double widen = 0.0;
  for (const auto& p : ens.pulses) {
    lo = std::min(lo, p.omega0);
    hi = std::max(hi, p.omega0);
    widen = std::max(widen, 2.0 / p.width + 2.0 * std::abs(p.chirp) * p.width);
  }
  d.lo = std::max(0.0, lo - widen);
  d.hi = hi + widen;
  d.power_fraction = band_power_fraction(spectrum, d.lo, d.hi);
  std::size_t argmax = 0;
  for (std::size_t k = 1; k < spectrum.size(); ++k)
    if (spectrum[k].power > spectrum[argmax].power) argmax = k;
  d.peak_omega = spectrum[argmax].omega;
  return d;
}

// JSON schema: array of {e0, tau0, chirp, width, omega0}.

inline nlohmann::ordered_json pulses_to_json(const PulseEnsemble& ens) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& p : ens.pulses) {
    arr.push_back({{"e0", p.e0},
                   {"tau0", p.tau0},
                   {"chirp", p.chirp},
                   {"width", p.width},
                   {"omega0", p.omega0}});
  }
  return arr;
}

inline PulseEnsemble pulses_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw ConfigError("pulse file: top-level value must be an array of pulses");
  PulseEnsemble ens;
  std::size_t idx = 0;
  for (const auto& item : j) {
    const std::string where = "pulse[" + std::to_string(idx) + "]";
    if (!item.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, value] : item.items()) {
      if (key != "e0" && key != "tau0" && key != "chirp" && key != "width" && key != "omega0")
        throw ConfigError(where + ": unknown key '" + key + "'");
      if (!value.is_number()) throw ConfigError(where + "." + key + ": expected a number");
    }
    LcpParams p;
    try {
      p.e0 = item.at("e0").get<double>();
      p.tau0 = item.at("tau0").get<double>();
      p.chirp = item.at("chirp").get<double>();
      p.width = item.at("width").get<double>();
      p.omega0 = item.at("omega0").get<double>();
    } catch (const nlohmann::json::out_of_range&) {
      throw ConfigError(where + ": needs all of e0, tau0, chirp, width, omega0");
    }
    if (!(p.width > 0.0)) throw ConfigError(where + ".width: must be positive");
    if (!(p.e0 >= 0.0)) throw ConfigError(where + ".e0: must be non-negative");
    ens.pulses.push_back(p);
    ++idx;
  }
  if (ens.pulses.empty()) throw ConfigError("pulse file: needs at least one pulse");
  return ens;
}

}  // namespace qoct
