// Command-line front end: free evolution, driven propagation, pulse
// optimization, spectrum export and PCA analysis of optimization records.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qoct/qoct.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitNumericalError = 3;

std::string format_g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << content;
}

json load_json(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw qoct::ConfigError("cannot open " + path.string());
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw qoct::ConfigError(path.string() + ": " + e.what());
  }
}

qoct::RunConfig load_config(const std::string& path, std::optional<std::uint64_t> seed_override) {
  auto cfg = qoct::RunConfig::from_json(load_json(path));
  if (seed_override) cfg.ga.seed = *seed_override;
  return cfg;
}

struct Workspace {
  qoct::RunConfig cfg;
  qoct::SpatialGrid grid;
  qoct::PropagatorPlan plan;
  qoct::PotentialMatrixCache cache;
  qoct::WavepacketState initial;
  qoct::ProbeSet probes;
};

Workspace make_workspace(const qoct::RunConfig& cfg) {
  Workspace ws{cfg, cfg.build_grid(), {}, {}, {}, {}};
  ws.plan = cfg.build_plan(ws.grid);
  ws.cache = cfg.build_cache(ws.grid);
  ws.initial = cfg.build_initial(ws.grid);
  ws.probes = qoct::ProbeSet{cfg.detector_index(ws.grid), cfg.trajectory_stride};
  return ws;
}

std::string trajectory_csv(const qoct::RunObservables& obs) {
  std::ostringstream os;
  os << "t,pop1,pop2,pop3,norm,flux2_cum,flux3_cum\n";
  for (const auto& s : obs.series) {
    os << format_g17(s.t) << ',' << format_g17(s.pop[0]) << ',' << format_g17(s.pop[1]) << ','
       << format_g17(s.pop[2]) << ',' << format_g17(s.norm) << ',' << format_g17(s.flux_cum[1])
       << ',' << format_g17(s.flux_cum[2]) << '\n';
  }
  return os.str();
}

std::string spectrum_csv(const std::vector<qoct::SpectrumPoint>& spec) {
  std::ostringstream os;
  os << "omega,power\n";
  for (const auto& p : spec) os << format_g17(p.omega) << ',' << format_g17(p.power) << '\n';
  return os.str();
}

std::string field_csv(const std::vector<double>& samples, double dt) {
  std::ostringstream os;
  os << "t,field\n";
  for (std::size_t k = 0; k < samples.size(); ++k)
    os << format_g17((static_cast<double>(k) + 0.5) * dt) << ',' << format_g17(samples[k]) << '\n';
  return os.str();
}

void run_propagation(const Workspace& ws, const std::vector<double>& field,
                     const fs::path& out_dir) {
  const auto obs = qoct::propagate(ws.initial, ws.cache, ws.plan, field, ws.probes);
  write_text(out_dir / "trajectory.csv", trajectory_csv(obs));
  write_text(out_dir / "observables.json", qoct::observables_to_json(obs).dump(2) + "\n");
  std::printf("J1=%.8g J2=%.8g J3=%.8g fluence=%.8g\n", obs.j_flux[0], obs.j_flux[1],
              obs.j_flux[2], obs.fluence);
  if (obs.j_flux[2] != 0.0) std::printf("ratio J2/J3 = %.8g\n", obs.j_flux[1] / obs.j_flux[2]);
}

ordered_json pca_result_json(const qoct::PcaResult& res) {
  ordered_json j;
  j["singular_values"] = res.singular_values;
  j["components"] = res.components;
  j["explained_fraction"] = res.explained_fraction;
  j["column_means"] = res.column_means;
  return j;
}

int cmd_default_config(const std::string& out_path) {
  const std::string text = qoct::RunConfig::defaults().to_json().dump(2) + "\n";
  if (out_path.empty())
    std::cout << text;
  else
    write_text(out_path, text);
  return 0;
}

int cmd_free_run(const qoct::RunConfig& cfg, const fs::path& out_dir) {
  const auto ws = make_workspace(cfg);
  run_propagation(ws, std::vector<double>(ws.plan.n_steps, 0.0), out_dir);
  return 0;
}

int cmd_propagate(const qoct::RunConfig& cfg, const std::string& pulse_path,
                  const fs::path& out_dir) {
  const auto ws = make_workspace(cfg);
  const auto ens = qoct::pulses_from_json(load_json(pulse_path));
  run_propagation(ws, qoct::sample_field(ens, ws.plan.dt_full, ws.plan.n_steps), out_dir);
  return 0;
}

int cmd_optimize(const qoct::RunConfig& cfg, std::size_t workers, const fs::path& out_dir) {
  const auto ws = make_workspace(cfg);
  qoct::EvaluationContext ctx{&ws.cache, &ws.plan, ws.initial,
                              qoct::ProbeSet{ws.probes.detector_index, 0}, cfg.fitness_cfg};
  const auto record = qoct::evolve(cfg.ga, ctx, workers);

  std::ostringstream jsonl;
  qoct::record_to_jsonl(record, jsonl);
  write_text(out_dir / "record.jsonl", jsonl.str());

  const auto best = qoct::to_ensemble(record.best_genes);
  write_text(out_dir / "best_pulse.json", qoct::pulses_to_json(best).dump(2) + "\n");
  const auto spectrum = qoct::power_spectrum(best, ws.plan.dt_full, ws.plan.n_steps);
  write_text(out_dir / "best_spectrum.csv", spectrum_csv(spectrum));
  const auto band = qoct::band_diagnostic(best, spectrum);

  ordered_json summary;
  summary["seed"] = cfg.ga.seed;
  summary["config"] = cfg.to_json();
  summary["generations"] = record.generations.size();
  summary["best_fitness"] = record.best_fitness;
  summary["best_genes"] = record.best_genes;
  summary["best_observables"] = qoct::observables_to_json(record.best_obs);
  summary["best_spectrum_band"] = {{"lo", band.lo},
                                   {"hi", band.hi},
                                   {"power_fraction", band.power_fraction},
                                   {"peak_omega", band.peak_omega}};
  write_text(out_dir / "summary.json", summary.dump(2) + "\n");

  const auto& obs = record.best_obs;
  std::printf("generations=%zu best_fitness=%.8g\n", record.generations.size(),
              record.best_fitness);
  std::printf("best J2=%.8g J3=%.8g", obs.j_flux[1], obs.j_flux[2]);
  if (obs.j_flux[2] != 0.0) std::printf(" ratio=%.8g", obs.j_flux[1] / obs.j_flux[2]);
  std::printf("\n");
  return 0;
}

int cmd_analyze(const std::string& record_path, const fs::path& out_dir) {
  std::ifstream is(record_path);
  if (!is) throw qoct::ConfigError("cannot open " + record_path);
  const auto record = qoct::record_from_jsonl(is);
  const auto chain = qoct::assemble_chain(record);

  std::ostringstream csv;
  csv << "generation,slot,p12,p23,p31\n";
  for (std::size_t i = 0; i < chain.rows.size(); ++i) {
    csv << chain.provenance[i].first << ',' << chain.provenance[i].second << ','
        << format_g17(chain.rows[i][0]) << ',' << format_g17(chain.rows[i][1]) << ','
        << format_g17(chain.rows[i][2]) << '\n';
  }
  write_text(out_dir / "chain.csv", csv.str());

  const auto centered = qoct::pca(chain, {true, true});
  const auto uncentered = qoct::pca(chain, {false, true});

  ordered_json report;
  report["singular_values"] = centered.singular_values;
  report["components"] = centered.components;
  report["explained_fraction"] = centered.explained_fraction;
  report["column_means"] = centered.column_means;
  report["convention"] = {{"center_columns", true},
                          {"scale_by_sqrt_nm1", true},
                          {"sign", "largest-loading-positive"},
                          {"row_order", {"P1->2", "P2->3", "P3->1"}}};
  report["uncentered"] = pca_result_json(uncentered);
  write_text(out_dir / "pca_report.json", report.dump(2) + "\n");

  const auto table = qoct::report_processes(centered, 2);
  std::printf("%s", qoct::format_process_table(table).c_str());
  return 0;
}

int cmd_spectrum(const qoct::RunConfig& cfg, const std::string& pulse_path,
                 const fs::path& out_dir) {
  const auto ens = qoct::pulses_from_json(load_json(pulse_path));
  const auto samples = qoct::sample_field(ens, cfg.dt_full, cfg.n_steps);
  write_text(out_dir / "spectrum.csv",
             spectrum_csv(qoct::power_spectrum_of_samples(samples, cfg.dt_full)));
  write_text(out_dir / "field.csv", field_csv(samples, cfg.dt_full));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wavepacket control toolkit: split-operator propagation on three "
               "coupled channels, pulse optimization over chirped-pulse "
               "superpositions, and PCA of optimization records"};
  app.require_subcommand(1);

  std::string config_path;
  std::string pulse_path;
  std::string record_path;
  std::string out_dir = ".";
  std::string config_out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::size_t workers = 1;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("--config", config_path, "run configuration JSON");
    if (needs_config) opt->required();
    sub->add_option("--out", out_dir, "output directory (created if missing)");
    sub->add_option("--seed", seed, "override ga.seed")->each([&](const std::string&) {
      seed_set = true;
    });
  };

  auto* sc_default = app.add_subcommand("default-config", "print the default configuration");
  sc_default->add_option("--out", config_out, "write to file instead of stdout");

  auto* sc_free = app.add_subcommand("free-run", "field-free propagation");
  add_common(sc_free, true);

  auto* sc_prop = app.add_subcommand("propagate", "propagation under a pulse ensemble");
  add_common(sc_prop, true);
  sc_prop->add_option("--pulse", pulse_path, "pulse ensemble JSON")->required();

  auto* sc_opt = app.add_subcommand("optimize", "genetic-algorithm pulse optimization");
  add_common(sc_opt, true);
  sc_opt->add_option("--workers", workers, "max concurrent fitness evaluations");

  auto* sc_ana = app.add_subcommand("analyze", "PCA over an optimization record");
  sc_ana->add_option("--record", record_path, "record.jsonl from optimize")->required();
  sc_ana->add_option("--out", out_dir, "output directory (created if missing)");

  auto* sc_spec = app.add_subcommand("spectrum", "power spectrum and time profile of a pulse file");
  add_common(sc_spec, true);
  sc_spec->add_option("--pulse", pulse_path, "pulse ensemble JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const std::optional<std::uint64_t> seed_override =
        seed_set ? std::optional<std::uint64_t>(seed) : std::nullopt;
    fs::path out(out_dir);
    if (!out.empty()) fs::create_directories(out);

    if (sc_default->parsed()) return cmd_default_config(config_out);
    if (sc_free->parsed()) return cmd_free_run(load_config(config_path, seed_override), out);
    if (sc_prop->parsed())
      return cmd_propagate(load_config(config_path, seed_override), pulse_path, out);
    if (sc_opt->parsed())
      return cmd_optimize(load_config(config_path, seed_override), workers, out);
    if (sc_ana->parsed()) return cmd_analyze(record_path, out);
    if (sc_spec->parsed())
      return cmd_spectrum(load_config(config_path, seed_override), pulse_path, out);
  } catch (const qoct::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const qoct::PropagationError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumericalError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
