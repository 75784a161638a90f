// Acceptance suite: one numbered criterion per block, one PASS/FAIL line
// each, nonzero exit when any criterion fails. Heavier end-to-end runs
// (optimization, spectrum, analysis) go through the CLI binary named by the
// QOCT_CLI environment variable.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "qoct/qoct.hpp"

namespace fs = std::filesystem;
using namespace qoct;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %2d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return buf;
}

const double kDt = 1.875e-1;

struct Setup {
  SpatialGrid grid = build_grid(0.9, 4.6875e-2, 220);
  MolecularModel model = MolecularModel::tabulated();
  PotentialMatrixCache cache;
  WavepacketState psi0;
  Setup() {
    cache = PotentialMatrixCache::from_model(model, grid, kDt);
    psi0 = initial_wavepacket(grid, 4.125, 0.265, 3);
  }
};

void step_once(WavepacketState& s, const PropagatorPlan& plan, const PotentialMatrixCache& cache,
               FourierTransformer& fft, double eps) {
  kinetic_half_step(s, plan, fft);
  potential_full_step(s, cache, eps);
  kinetic_half_step(s, plan, fft);
  apply_absorber(s, plan);
}

// ---- criterion 1: unitarity over the full 8192-step run, absorbers off ----
void criterion_unitarity(const Setup& su) {
  Timer timer;
  const auto plan = make_plan(su.grid, su.model, kDt, 8192, false);
  std::vector<double> zeros(plan.n_steps, 0.0);
  const auto obs = propagate(su.psi0, su.cache, plan, zeros, ProbeSet{160, 0});
  const double drift = std::abs(obs.final_norm - 1.0);
  const double secs = timer.seconds();
  report(1, drift < 1e-9 && secs < 5.0,
         fmt("unitarity: |norm-1| = %.3e after 8192 steps (%.2f s)", drift, secs));
}

// ---- criterion 2: second-order Trotter convergence of populations at t=300 ----
void criterion_trotter(const Setup& su) {
  Timer timer;
  const PulseEnsemble ens{{LcpParams{0.1, 150.0, 1e-7, 40.0, 0.15}}};
  auto pops = [&](double dt, std::size_t n) {
    const auto plan = make_plan(su.grid, su.model, dt, n, true);
    const auto cache = PotentialMatrixCache::from_model(su.model, su.grid, dt);
    const auto field = sample_field(ens, dt, n);
    auto s = su.psi0;
    FourierTransformer fft(su.grid.n_r);
    for (std::size_t k = 0; k < n; ++k) step_once(s, plan, cache, fft, field[k]);
    return std::array<double, 3>{channel_population(s, 1, su.grid.dr),
                                 channel_population(s, 2, su.grid.dr),
                                 channel_population(s, 3, su.grid.dr)};
  };
  const auto p1 = pops(kDt, 1600);
  const auto p2 = pops(kDt / 2, 3200);
  const auto p8 = pops(kDt / 8, 12800);
  double e1 = 0, e2 = 0;
  for (int i = 0; i < 3; ++i) {
    e1 += std::abs(p1[i] - p8[i]);
    e2 += std::abs(p2[i] - p8[i]);
  }
  const double ratio = e1 / e2;
  const double secs = timer.seconds();
  report(2, ratio >= 3.2 && ratio <= 4.8 && secs < 30.0,
         fmt("Trotter order: err(dt)/err(dt/2) = %.3f, expected in [3.2, 4.8] (%.2f s)", ratio,
             secs));
}

// ---- criterion 3: potential step against brute-force matrix exponentials ----
void criterion_expm(const Setup& su) {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, su.grid.n_r - 1);
  double worst = 0.0;
  std::size_t samples = 0;
  for (int trial = 0; trial < 10; ++trial) {
    auto s = WavepacketState::zero(su.grid.n_r);
    for (auto& ch : s.channels)
      for (auto& z : ch) z = cplx(u(gen), u(gen));
    double eps = 0.01 + 0.19 * std::abs(u(gen));
    if (u(gen) < 0) eps = -eps;
    const auto before = s;
    potential_full_step(s, su.cache, eps);
    for (int k = 0; k < 100; ++k) {
      const std::size_t j = pick(gen);
      const double f = su.cache.prefactor * eps;
      oracle::C3x3 h;
      h.m[0][0] = su.cache.e1[j];
      h.m[1][1] = su.cache.e2[j];
      h.m[2][2] = su.cache.e3[j];
      h.m[0][1] = h.m[1][0] = f * su.cache.mu12[j];
      h.m[0][2] = h.m[2][0] = f * su.cache.mu13[j];
      h.m[1][2] = h.m[2][1] = f * su.cache.mu23[j] + su.cache.c23[j];
      oracle::C3x3 a;
      for (int i = 0; i < 3; ++i)
        for (int c = 0; c < 3; ++c) a.m[i][c] = cplx(0.0, -kDt) * h.m[i][c];
      const auto e = oracle::expm(a);
      const cplx in[3] = {before.channels[0][j], before.channels[1][j], before.channels[2][j]};
      for (int i = 0; i < 3; ++i) {
        const cplx want = e.m[i][0] * in[0] + e.m[i][1] * in[1] + e.m[i][2] * in[2];
        worst = std::max(worst, std::abs(want - s.channels[i][j]));
      }
      ++samples;
    }
  }
  report(3, worst < 1e-10,
         fmt("potential-step oracle: max |diff| = %.3e over %zu samples", worst, samples));
}

// ---- criterion 4: two-level Rabi reduction ----
void criterion_rabi(const Setup& su) {
  std::vector<double> z(su.grid.n_r, 0.0), mu(su.grid.n_r, 0.2), far(su.grid.n_r, 1.0);
  const auto cache = PotentialMatrixCache::from_tables(z, z, far, z, mu, z, z, 1.0, kDt);
  const auto plan = make_plan(su.grid, su.model, kDt, 1700, false);
  FourierTransformer fft(su.grid.n_r);
  auto s = initial_wavepacket(su.grid, 4.125, 0.265, 1);
  const double e0 = 0.05;  // one Rabi period = pi/(mu e0) ~ 314 a.u.
  double worst = 0.0;
  for (std::size_t k = 0; k < plan.n_steps; ++k) {
    step_once(s, plan, cache, fft, e0);
    const double t = kDt * static_cast<double>(k + 1);
    const double want = std::pow(std::sin(0.2 * e0 * t), 2.0);
    worst = std::max(worst, std::abs(channel_population(s, 2, su.grid.dr) - want));
  }
  report(4, worst < 0.01, fmt("Rabi oracle: max |pop2 - sin^2| = %.3e over one period", worst));
}

// ---- criterion 5: free-evolution physics, golden baseline ----
double g_baseline_ratio = 0.0;

void criterion_free_run(const Setup& su) {
  const auto plan = make_plan(su.grid, su.model, kDt, 8192, true);
  std::vector<double> zeros(plan.n_steps, 0.0);
  const auto obs = propagate(su.psi0, su.cache, plan, zeros, ProbeSet{160, 16});
  double early = 0.0;
  for (const auto& row : obs.series)
    if (row.t < 150.0) early = std::max(early, row.pop[1]);
  double pop2_at_400 = 0.0;
  for (const auto& row : obs.series)
    if (std::abs(row.t - 400.0) < 1.6) pop2_at_400 = row.pop[1];
  // golden values frozen from this implementation's oracle run
  const double golden_j2 = 0.19028768322583603;
  const double golden_j3 = 0.71346163025637266;
  g_baseline_ratio = obs.j_flux[1] / obs.j_flux[2];
  const bool pass = early < 1e-3 && pop2_at_400 > early && pop2_at_400 > 0.01 &&
                    obs.j_flux[2] > obs.j_flux[1] && obs.j_flux[1] > 0.0 &&
                    std::abs(obs.j_flux[1] - golden_j2) < 1e-6 * golden_j2 &&
                    std::abs(obs.j_flux[2] - golden_j3) < 1e-6 * golden_j3;
  report(5, pass,
         fmt("free evolution: pop2(t<150) <= %.2e, pop2(400) = %.3f, J2 = %.6f, J3 = %.6f, "
             "J2/J3 = %.4f",
             early, pop2_at_400, obs.j_flux[1], obs.j_flux[2], g_baseline_ratio));
}

// ---- criterion 6: Morse autocorrelation frequency ----
void criterion_morse(const Setup& su) {
  std::vector<double> e1(su.grid.n_r), z(su.grid.n_r, 0.0);
  for (std::size_t j = 0; j < su.grid.n_r; ++j)
    e1[j] = su.model.ground_potential(su.grid.points[j]);
  const auto cache = PotentialMatrixCache::from_tables(e1, z, z, z, z, z, z, 1.0, kDt);
  const auto plan = make_plan(su.grid, su.model, kDt, 1, false);
  const auto psi0 = initial_wavepacket(su.grid, 4.425, 0.265, 1);
  auto psi = psi0;
  FourierTransformer fft(su.grid.n_r);
  const std::size_t n_steps = 30000;
  std::vector<double> acorr(n_steps);
  for (std::size_t k = 0; k < n_steps; ++k) {
    step_once(psi, plan, cache, fft, 0.0);
    cplx a{};
    for (std::size_t j = 0; j < su.grid.n_r; ++j)
      a += std::conj(psi0.channels[0][j]) * psi.channels[0][j];
    acorr[k] = std::abs(a) * su.grid.dr;
  }
  double mean = 0.0;
  for (const double v : acorr) mean += v;
  mean /= static_cast<double>(n_steps);
  std::vector<double> ups;
  for (std::size_t i = 1; i < n_steps; ++i)
    if (acorr[i - 1] < mean && acorr[i] >= mean) {
      const double frac = (mean - acorr[i - 1]) / (acorr[i] - acorr[i - 1]);
      ups.push_back((static_cast<double>(i - 1) + frac + 1.0) * kDt);
    }
  double omega = 0.0;
  if (ups.size() >= 2)
    omega = 2.0 * std::numbers::pi * static_cast<double>(ups.size() - 1) /
            (ups.back() - ups.front());
  const double omega_e = su.model.morse.omega_e;
  const double rel = std::abs(omega - omega_e) / omega_e;
  const double fundamental = omega_e * (1.0 - omega_e / (2.0 * su.model.morse.d_e));
  report(6, rel <= 0.02,
         fmt("Morse frequency: measured %.6e vs omega_e %.6e (off by %.2f%%; anharmonic "
             "fundamental omega_e(1 - omega_e/(2 D_e)) = %.6e matches to %.2f%%)",
             omega, omega_e, 100.0 * rel, fundamental,
             100.0 * std::abs(omega - fundamental) / fundamental));
}

// ---- criterion 7: absorber calibration against a longer reference grid ----
void criterion_absorber(const Setup& su) {
  const auto g2 = build_grid(0.9, 4.6875e-2, 880);
  const std::size_t n_steps = 32000;
  auto gaussian = [&](const SpatialGrid& g) {
    auto s = WavepacketState::zero(g.n_r);
    double nn = 0.0;
    for (std::size_t j = 0; j < g.n_r; ++j) {
      const double d = g.points[j] - 5.0;
      const double amp = std::exp(-d * d / (2.0 * 0.8 * 0.8));
      s.channels[0][j] = std::polar(amp, 5.0 * g.points[j]);
      nn += amp * amp;
    }
    const double sc = 1.0 / std::sqrt(nn * g.dr);
    for (auto& zz : s.channels[0]) zz *= sc;
    return s;
  };
  auto residual = [&](const SpatialGrid& g, bool absorber_on) {
    std::vector<double> z(g.n_r, 0.0);
    const auto cache = PotentialMatrixCache::from_tables(z, z, z, z, z, z, z, 1.0, kDt);
    const auto plan = make_plan(g, su.model, kDt, n_steps, absorber_on);
    auto s = gaussian(g);
    FourierTransformer fft(g.n_r);
    for (std::size_t k = 0; k < n_steps; ++k) step_once(s, plan, cache, fft, 0.0);
    double acc = 0.0;
    for (std::size_t j = 0; j < g.n_r && g.points[j] <= su.model.absorber.onset; ++j)
      acc += std::norm(s.channels[0][j]);
    return acc * g.dr;
  };
  const double res_abs = residual(su.grid, true);
  const double res_ref = residual(g2, false);
  const double reflected = std::abs(res_abs - res_ref);
  report(7, reflected < 1e-3,
         fmt("absorber: reflected norm %.3e vs doubled-grid reference (interaction-region "
             "residuals %.3e / %.3e)",
             reflected, res_abs, res_ref));
}

// ---- criteria 8-10 and 11d: seeded optimization runs through the CLI ----
struct CliRuns {
  fs::path dir;
  bool ok = false;
  std::string record_n30;
  RunRecord rec_n30;
  double best_ratio_n30 = 0.0;
  double best_ratio_n60 = 0.0;
};

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) return {};
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const char* cli = std::getenv("QOCT_CLI");
  if (cli == nullptr) return -1;
  const std::string cmd = std::string(cli) + " " + args + " > /dev/null 2>&1";
  return WEXITSTATUS(std::system(cmd.c_str()));
}

void criterion_ga(CliRuns& runs) {
  Timer timer;
  runs.dir = fs::temp_directory_path() / "qoct_acceptance_ga";
  fs::remove_all(runs.dir);
  fs::create_directories(runs.dir);

  auto cfg = RunConfig::defaults();
  cfg.ga.n_lcp = 30;
  cfg.ga.pop_size = 32;
  cfg.ga.n_generations = 20;
  cfg.ga.seed = 1;
  std::ofstream(runs.dir / "cfg30.json") << cfg.to_json().dump(2);

  const fs::path d1 = runs.dir / "w1";
  const fs::path d2 = runs.dir / "rerun";
  const fs::path d3 = runs.dir / "w8";
  const std::string base = "optimize --config " + (runs.dir / "cfg30.json").string();
  const bool r1 = run_cli(base + " --workers 1 --out " + d1.string()) == 0;
  const bool r2 = run_cli(base + " --workers 1 --out " + d2.string()) == 0;
  const bool r3 = run_cli(base + " --workers 8 --out " + d3.string()) == 0;

  runs.record_n30 = slurp(d1 / "record.jsonl");
  const bool rerun_identical = !runs.record_n30.empty() && runs.record_n30 == slurp(d2 / "record.jsonl");
  const bool workers_identical =
      !runs.record_n30.empty() && runs.record_n30 == slurp(d3 / "record.jsonl");

  bool monotone = true, bounded = true;
  if (r1) {
    std::istringstream is(runs.record_n30);
    runs.rec_n30 = record_from_jsonl(is);
    double prev = -1e300;
    const LcpBox box;
    for (const auto& g : runs.rec_n30.generations) {
      if (g.best_fitness_so_far < prev) monotone = false;
      prev = g.best_fitness_so_far;
      for (const auto& s : g.survivors)
        if (!in_bounds(s.genes, box)) bounded = false;
    }
    const auto summary = slurp(d1 / "summary.json");
    const auto sj = nlohmann::json::parse(summary);
    const double j2 = sj.at("best_observables").at("j2").get<double>();
    const double j3 = sj.at("best_observables").at("j3").get<double>();
    runs.best_ratio_n30 = j2 / j3;
  }
  runs.ok = r1 && r2 && r3;
  const double secs = timer.seconds();
  report(8, runs.ok && monotone && bounded && rerun_identical && workers_identical,
         fmt("GA run (pop 32, 20 gens, 30 LCPs, seed %llu): monotone=%s bounds=%s rerun-bit-"
             "identical=%s workers-1-vs-8-identical=%s (%.0f s total)",
             static_cast<unsigned long long>(cfg.ga.seed), monotone ? "yes" : "NO",
             bounded ? "yes" : "NO", rerun_identical ? "yes" : "NO",
             workers_identical ? "yes" : "NO", secs));
}

void criterion_efficacy(CliRuns& runs) {
  Timer timer;
  auto cfg = RunConfig::defaults();
  cfg.ga.n_lcp = 60;
  cfg.ga.pop_size = 32;
  cfg.ga.n_generations = 20;
  cfg.ga.seed = 1;
  std::ofstream(runs.dir / "cfg60.json") << cfg.to_json().dump(2);
  const fs::path d60 = runs.dir / "n60";
  const bool r60 = run_cli("optimize --config " + (runs.dir / "cfg60.json").string() +
                           " --workers 1 --out " + d60.string()) == 0;
  if (r60) {
    const auto sj = nlohmann::json::parse(slurp(d60 / "summary.json"));
    const double j2 = sj.at("best_observables").at("j2").get<double>();
    const double j3 = sj.at("best_observables").at("j3").get<double>();
    runs.best_ratio_n60 = j2 / j3;
  }
  const double gate = 3.0 * g_baseline_ratio;
  const bool hard_gate = runs.ok && runs.best_ratio_n30 >= gate;
  const bool trend = runs.best_ratio_n60 >= runs.best_ratio_n30;
  report(9, hard_gate && r60,
         fmt("efficacy: best J2/J3 = %.3f (N=30) vs 3x free baseline %.3f [hard gate]; N=60 "
             "ratio %.3f %s N=30 ratio [trend%s] (%.0f s)",
             runs.best_ratio_n30, gate, runs.best_ratio_n60, trend ? ">=" : "<",
             trend ? "" : " VIOLATED - reported, not gated", timer.seconds()));
}

void criterion_spectrum(const CliRuns& runs) {
  const auto csv = slurp(runs.dir / "w1" / "best_spectrum.csv");
  double best_omega = -1.0, best_power = -1.0;
  std::istringstream is(csv);
  std::string line;
  std::getline(is, line);  // header
  while (std::getline(is, line)) {
    const auto comma = line.find(',');
    if (comma == std::string::npos) continue;
    const double omega = std::strtod(line.c_str(), nullptr);
    const double power = std::strtod(line.c_str() + comma + 1, nullptr);
    if (power > best_power) {
      best_power = power;
      best_omega = omega;
    }
  }
  report(10, runs.ok && best_omega >= 0.14 && best_omega <= 0.16,
         fmt("spectrum: optimized-pulse peak at omega = %.4f, required in [0.14, 0.16]",
             best_omega));
}

// ---- criterion 11: PCA checks ----
void criterion_pca(const CliRuns& runs) {
  bool orthonormal = true, oracle_match = true, rank1_ok = true, report_ok = false;
  double worst_ortho = 0.0, worst_oracle = 0.0;

  std::mt19937_64 gen(4096);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    TmiChain chain;
    const std::size_t n = 60 + 20 * static_cast<std::size_t>(trial);
    for (std::size_t i = 0; i < n; ++i) {
      chain.rows.push_back({u(gen), u(gen), u(gen)});
      chain.provenance.emplace_back(0, i);
    }
    const auto res = pca(chain);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double d = 0.0;
        for (int k = 0; k < 3; ++k) d += res.components[i][k] * res.components[j][k];
        if (i == j) d -= 1.0;
        worst_ortho = std::max(worst_ortho, std::abs(d));
      }
    double mean[3] = {};
    for (const auto& r : chain.rows)
      for (int k = 0; k < 3; ++k) mean[k] += r[k];
    for (double& m : mean) m /= static_cast<double>(n);
    double cov[3][3] = {};
    for (const auto& r : chain.rows)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) cov[i][j] += (r[i] - mean[i]) * (r[j] - mean[j]);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) cov[i][j] /= static_cast<double>(n - 1);
    std::array<double, 3> eig;
    std::array<std::array<double, 3>, 3> vecs;
    oracle::jacobi_eigen3(cov, eig, vecs);
    for (int k = 0; k < 3; ++k)
      worst_oracle = std::max(
          worst_oracle, std::abs(res.singular_values[k] - std::sqrt(std::max(eig[k], 0.0))));
  }
  orthonormal = worst_ortho < 1e-10;
  oracle_match = worst_oracle < 1e-8;

  {
    TmiChain chain;
    for (int x = 1; x <= 50; ++x) {
      chain.rows.push_back({0.3 * x, 0.1 * x, 0.7 * x});
      chain.provenance.emplace_back(0, static_cast<std::size_t>(x));
    }
    const auto res = pca(chain);
    rank1_ok = std::abs(res.explained_fraction[0] - 1.0) < 1e-10;
  }

  std::string table;
  if (runs.ok) {
    const auto chain = assemble_chain(runs.rec_n30);
    const auto res = pca(chain);
    const auto entries = report_processes(res, 2);
    table = format_process_table(entries);
    report_ok = entries.size() == 2 && table.find("P1->2") != std::string::npos &&
                entries[0].singular_value >= entries[1].singular_value;
  }
  report(11, orthonormal && oracle_match && rank1_ok && report_ok,
         fmt("PCA: orthonormality %.1e, covariance-oracle gap %.1e, rank-1 explained "
             "fraction exact, top-2 process table from the seeded run:",
             worst_ortho, worst_oracle));
  if (!table.empty()) std::printf("%s", table.c_str());
}

// ---- criterion 12: fitness arithmetic ----
void criterion_fitness() {
  RunObservables o;
  o.j_flux = {0.0, 0.5, 0.1};
  const FitnessConfig cfg;
  const double plain = fitness(o, cfg);
  o.j_flux[2] = 0.0;
  const double floored = fitness(o, cfg);
  report(12, plain == 10.5 && std::isfinite(floored),
         fmt("fitness: J(0.5, 0.1, alpha=0) = %.17g (want exactly 10.5), J3=0 gives finite %.6g",
             plain, floored));
}

}  // namespace

int main() {
  std::printf("acceptance suite\n================\n");
  Setup su;
  criterion_unitarity(su);
  criterion_trotter(su);
  criterion_expm(su);
  criterion_rabi(su);
  criterion_free_run(su);
  criterion_morse(su);
  criterion_absorber(su);
  CliRuns runs;
  criterion_ga(runs);
  criterion_efficacy(runs);
  criterion_spectrum(runs);
  criterion_pca(runs);
  criterion_fitness();
  std::printf("================\n%d criterion(s) failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
