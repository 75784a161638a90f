#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include <json.hpp>

#include "qoct/errors.hpp"
#include "qoct/evolver.hpp"
#include "qoct/grid.hpp"
#include "qoct/model.hpp"
#include "qoct/observables.hpp"
#include "qoct/propagator.hpp"

namespace qoct {

namespace cfgdetail {

inline void reject_unknown_keys(const nlohmann::json& j, const std::string& path,
                                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) {
        ok = true;
        break;
      }
    if (!ok) throw ConfigError("unknown key '" + path + "." + key + "'");
  }
}

template <typename T>
T fetch(const nlohmann::json& j, const std::string& path, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(path + "." + key + ": wrong type");
  }
}

inline std::array<double, 2> fetch_interval(const nlohmann::json& j, const std::string& path,
                                            const char* key, std::array<double, 2> fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw ConfigError(path + "." + key + ": expected [min, max]");
  return {v[0].get<double>(), v[1].get<double>()};
}

}  // namespace cfgdetail

/// Full run configuration; defaults reproduce the tabulated model, grid,
/// time discretization, detector and search boxes exactly.
struct RunConfig {
  MolecularModel model = MolecularModel::tabulated();
  std::string coupling_regime = "intermediate";
  bool absorber_enabled = true;

  double grid_r_min = 0.9;
  double grid_dr = 4.6875e-2;
  std::size_t grid_n_r = 220;

  double dt_full = 1.875e-1;
  std::size_t n_steps = 8192;

  double detector_r_d = 8.4;

  double initial_center = 4.125;
  double initial_width = 0.265;
  int initial_channel = 3;

  GaConfig ga;
  FitnessConfig fitness_cfg;

  std::size_t trajectory_stride = 16;

  static RunConfig defaults() { return RunConfig{}; }

  void validate() const {
    model.validate();
    if (!(grid_dr > 0.0)) throw ConfigError("grid.dr must be positive");
    if (grid_n_r < 8) throw ConfigError("grid.n_r must be at least 8");
    if (!(dt_full > 0.0)) throw ConfigError("time.dt_full must be positive");
    if (n_steps == 0) throw ConfigError("time.n_steps must be at least 1");
    if (initial_channel < 1 || initial_channel > 3)
      throw ConfigError("initial_state.channel must be 1, 2 or 3");
    if (!(initial_width > 0.0)) throw ConfigError("initial_state.width must be positive");
    ga.validate();
    if (!(fitness_cfg.epsilon_floor > 0.0))
      throw ConfigError("fitness.epsilon_floor must be positive");
  }

  SpatialGrid build_grid() const { return qoct::build_grid(grid_r_min, grid_dr, grid_n_r); }

  PropagatorPlan build_plan(const SpatialGrid& grid) const {
    return make_plan(grid, model, dt_full, n_steps, absorber_enabled);
  }

  PotentialMatrixCache build_cache(const SpatialGrid& grid) const {
    return PotentialMatrixCache::from_model(model, grid, dt_full);
  }

  WavepacketState build_initial(const SpatialGrid& grid) const {
    return initial_wavepacket(grid, initial_center, initial_width, initial_channel);
  }

  std::size_t detector_index(const SpatialGrid& grid) const {
    const std::size_t idx = grid.nearest_index(detector_r_d);
    if (idx == 0 || idx + 1 >= grid.n_r)
      throw ConfigError("detector.r_d must map to an interior grid point");
    return idx;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["model"] = {
        {"mass", model.mass},
        {"morse", {{"d_e", model.morse.d_e}, {"omega_e", model.morse.omega_e}, {"r_e", model.morse.r_e}}},
        {"dissociative",
         {{"pivot", model.diss_pivot},
          {"slope2", model.diss2.slope},
          {"offset2", model.diss2.offset},
          {"slope3", model.diss3.slope},
          {"offset3", model.diss3.offset},
          {"exp_amp", model.diss_exp_amp},
          {"exp_rate", model.diss_exp_rate}}},
        {"dipole",
         {{"mu", model.dipole_mu},
          {"a", model.dipole_a},
          {"r_x", model.dipole_rx},
          {"mu13_rate", model.mu13_rate},
          {"mu13_inner", model.mu13_inner},
          {"mu13_outer", model.mu13_outer}}},
        {"coupling_regime", coupling_regime},
        {"coupling_amplitude", model.coupling_amplitude},
        {"interaction_prefactor", model.interaction_prefactor},
        {"absorber",
         {{"onset", model.absorber.onset},
          {"strength", model.absorber.strength},
          {"exponent", model.absorber.exponent},
          {"enabled", absorber_enabled}}}};
    j["grid"] = {{"r_min", grid_r_min}, {"dr", grid_dr}, {"n_r", grid_n_r}};
    j["time"] = {{"dt_full", dt_full}, {"n_steps", n_steps}};
    j["detector"] = {{"r_d", detector_r_d}};
    j["initial_state"] = {
        {"center", initial_center}, {"width", initial_width}, {"channel", initial_channel}};
    j["ga"] = {{"n_lcp", ga.n_lcp},
               {"pop_size", ga.pop_size},
               {"n_generations", ga.n_generations},
               {"pi_m", ga.pi_m},
               {"pi_x", ga.pi_x},
               {"seed", ga.seed},
               {"elitism", ga.elitism},
               {"bounds",
                {{"e0", {ga.bounds.lo[0], ga.bounds.hi[0]}},
                 {"tau0", {ga.bounds.lo[1], ga.bounds.hi[1]}},
                 {"chirp", {ga.bounds.lo[2], ga.bounds.hi[2]}},
                 {"width", {ga.bounds.lo[3], ga.bounds.hi[3]}},
                 {"omega0", {ga.bounds.lo[4], ga.bounds.hi[4]}}}}};
    j["fitness"] = {{"alpha_fluence", fitness_cfg.alpha_fluence},
                    {"epsilon_floor", fitness_cfg.epsilon_floor}};
    j["output"] = {{"trajectory_stride", trajectory_stride}};
    return j;
  }

  static RunConfig from_json(const nlohmann::json& j) {
    using cfgdetail::fetch;
    using cfgdetail::fetch_interval;
    using cfgdetail::reject_unknown_keys;

    RunConfig cfg;
    reject_unknown_keys(j, "config",
                        {"model", "grid", "time", "detector", "initial_state", "ga", "fitness",
                         "output"});

    if (j.contains("model")) {
      const auto& jm = j.at("model");
      reject_unknown_keys(jm, "model",
                          {"mass", "morse", "dissociative", "dipole", "coupling_regime",
                           "coupling_amplitude", "interaction_prefactor", "absorber"});
      cfg.model.mass = fetch(jm, "model", "mass", cfg.model.mass);
      if (jm.contains("morse")) {
        const auto& jo = jm.at("morse");
        reject_unknown_keys(jo, "model.morse", {"d_e", "omega_e", "r_e"});
        cfg.model.morse.d_e = fetch(jo, "model.morse", "d_e", cfg.model.morse.d_e);
        cfg.model.morse.omega_e = fetch(jo, "model.morse", "omega_e", cfg.model.morse.omega_e);
        cfg.model.morse.r_e = fetch(jo, "model.morse", "r_e", cfg.model.morse.r_e);
      }
      if (jm.contains("dissociative")) {
        const auto& jd = jm.at("dissociative");
        reject_unknown_keys(jd, "model.dissociative",
                            {"pivot", "slope2", "offset2", "slope3", "offset3", "exp_amp",
                             "exp_rate"});
        cfg.model.diss_pivot = fetch(jd, "model.dissociative", "pivot", cfg.model.diss_pivot);
        cfg.model.diss2.slope = fetch(jd, "model.dissociative", "slope2", cfg.model.diss2.slope);
        cfg.model.diss2.offset = fetch(jd, "model.dissociative", "offset2", cfg.model.diss2.offset);
        cfg.model.diss3.slope = fetch(jd, "model.dissociative", "slope3", cfg.model.diss3.slope);
        cfg.model.diss3.offset = fetch(jd, "model.dissociative", "offset3", cfg.model.diss3.offset);
        cfg.model.diss_exp_amp = fetch(jd, "model.dissociative", "exp_amp", cfg.model.diss_exp_amp);
        cfg.model.diss_exp_rate =
            fetch(jd, "model.dissociative", "exp_rate", cfg.model.diss_exp_rate);
      }
      if (jm.contains("dipole")) {
        const auto& jd = jm.at("dipole");
        reject_unknown_keys(jd, "model.dipole",
                            {"mu", "a", "r_x", "mu13_rate", "mu13_inner", "mu13_outer"});
        cfg.model.dipole_mu = fetch(jd, "model.dipole", "mu", cfg.model.dipole_mu);
        cfg.model.dipole_a = fetch(jd, "model.dipole", "a", cfg.model.dipole_a);
        cfg.model.dipole_rx = fetch(jd, "model.dipole", "r_x", cfg.model.dipole_rx);
        cfg.model.mu13_rate = fetch(jd, "model.dipole", "mu13_rate", cfg.model.mu13_rate);
        cfg.model.mu13_inner = fetch(jd, "model.dipole", "mu13_inner", cfg.model.mu13_inner);
        cfg.model.mu13_outer = fetch(jd, "model.dipole", "mu13_outer", cfg.model.mu13_outer);
      }
      cfg.coupling_regime = fetch<std::string>(jm, "model", "coupling_regime", cfg.coupling_regime);
      if (cfg.coupling_regime != "intermediate" && cfg.coupling_regime != "strong")
        throw ConfigError("model.coupling_regime must be 'intermediate' or 'strong'");
      cfg.model.coupling_amplitude =
          coupling_amplitude_for(cfg.coupling_regime == "strong" ? CouplingRegime::strong
                                                                 : CouplingRegime::intermediate);
      cfg.model.coupling_amplitude =
          fetch(jm, "model", "coupling_amplitude", cfg.model.coupling_amplitude);
      cfg.model.interaction_prefactor =
          fetch(jm, "model", "interaction_prefactor", cfg.model.interaction_prefactor);
      if (jm.contains("absorber")) {
        const auto& ja = jm.at("absorber");
        reject_unknown_keys(ja, "model.absorber", {"onset", "strength", "exponent", "enabled"});
        cfg.model.absorber.onset = fetch(ja, "model.absorber", "onset", cfg.model.absorber.onset);
        cfg.model.absorber.strength =
            fetch(ja, "model.absorber", "strength", cfg.model.absorber.strength);
        cfg.model.absorber.exponent =
            fetch(ja, "model.absorber", "exponent", cfg.model.absorber.exponent);
        cfg.absorber_enabled = fetch(ja, "model.absorber", "enabled", cfg.absorber_enabled);
      }
      cfg.model.morse.y = cfg.model.derived_y();
    }

    if (j.contains("grid")) {
      const auto& jg = j.at("grid");
      reject_unknown_keys(jg, "grid", {"r_min", "dr", "n_r"});
      cfg.grid_r_min = fetch(jg, "grid", "r_min", cfg.grid_r_min);
      cfg.grid_dr = fetch(jg, "grid", "dr", cfg.grid_dr);
      cfg.grid_n_r = fetch(jg, "grid", "n_r", cfg.grid_n_r);
    }
    if (j.contains("time")) {
      const auto& jt = j.at("time");
      reject_unknown_keys(jt, "time", {"dt_full", "n_steps"});
      cfg.dt_full = fetch(jt, "time", "dt_full", cfg.dt_full);
      cfg.n_steps = fetch(jt, "time", "n_steps", cfg.n_steps);
    }
    if (j.contains("detector")) {
      const auto& jd = j.at("detector");
      reject_unknown_keys(jd, "detector", {"r_d"});
      cfg.detector_r_d = fetch(jd, "detector", "r_d", cfg.detector_r_d);
    }
    if (j.contains("initial_state")) {
      const auto& ji = j.at("initial_state");
      reject_unknown_keys(ji, "initial_state", {"center", "width", "channel"});
      cfg.initial_center = fetch(ji, "initial_state", "center", cfg.initial_center);
      cfg.initial_width = fetch(ji, "initial_state", "width", cfg.initial_width);
      cfg.initial_channel = fetch(ji, "initial_state", "channel", cfg.initial_channel);
    }
    if (j.contains("ga")) {
      const auto& jg = j.at("ga");
      reject_unknown_keys(jg, "ga",
                          {"n_lcp", "pop_size", "n_generations", "pi_m", "pi_x", "seed", "elitism",
                           "bounds"});
      cfg.ga.n_lcp = fetch(jg, "ga", "n_lcp", cfg.ga.n_lcp);
      cfg.ga.pop_size = fetch(jg, "ga", "pop_size", cfg.ga.pop_size);
      cfg.ga.n_generations = fetch(jg, "ga", "n_generations", cfg.ga.n_generations);
      cfg.ga.pi_m = fetch(jg, "ga", "pi_m", cfg.ga.pi_m);
      cfg.ga.pi_x = fetch(jg, "ga", "pi_x", cfg.ga.pi_x);
      cfg.ga.seed = fetch(jg, "ga", "seed", cfg.ga.seed);
      cfg.ga.elitism = fetch(jg, "ga", "elitism", cfg.ga.elitism);
      if (jg.contains("bounds")) {
        const auto& jb = jg.at("bounds");
        reject_unknown_keys(jb, "ga.bounds", {"e0", "tau0", "chirp", "width", "omega0"});
        const char* names[5] = {"e0", "tau0", "chirp", "width", "omega0"};
        for (std::size_t f = 0; f < 5; ++f) {
          const auto iv = fetch_interval(jb, "ga.bounds", names[f],
                                         {cfg.ga.bounds.lo[f], cfg.ga.bounds.hi[f]});
          cfg.ga.bounds.lo[f] = iv[0];
          cfg.ga.bounds.hi[f] = iv[1];
        }
      }
    }
    if (j.contains("fitness")) {
      const auto& jf = j.at("fitness");
      reject_unknown_keys(jf, "fitness", {"alpha_fluence", "epsilon_floor"});
      cfg.fitness_cfg.alpha_fluence =
          fetch(jf, "fitness", "alpha_fluence", cfg.fitness_cfg.alpha_fluence);
      cfg.fitness_cfg.epsilon_floor =
          fetch(jf, "fitness", "epsilon_floor", cfg.fitness_cfg.epsilon_floor);
    }
    if (j.contains("output")) {
      const auto& jo = j.at("output");
      reject_unknown_keys(jo, "output", {"trajectory_stride"});
      cfg.trajectory_stride = fetch(jo, "output", "trajectory_stride", cfg.trajectory_stride);
    }

    cfg.validate();
    return cfg;
  }
};

/// Observables document: {j1, j2, j3, fluence, p12, p23, p31, ratio_j2_j3}.
inline nlohmann::ordered_json observables_to_json(const RunObservables& o) {
  nlohmann::ordered_json j;
  j["j1"] = o.j_flux[0];
  j["j2"] = o.j_flux[1];
  j["j3"] = o.j_flux[2];
  j["fluence"] = o.fluence;
  j["p12"] = o.p12;
  j["p23"] = o.p23;
  j["p31"] = o.p31;
  if (o.j_flux[2] != 0.0)
    j["ratio_j2_j3"] = o.j_flux[1] / o.j_flux[2];
  else
    j["ratio_j2_j3"] = nullptr;
  return j;
}

}  // namespace qoct
