#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qoct/errors.hpp"
#include "qoct/observables.hpp"
#include "qoct/propagator.hpp"
#include "qoct/pulse.hpp"
#include "qoct/rng.hpp"

namespace qoct {

/// Per-gene search box, gene order (e0, tau0, chirp, width, omega0).
struct LcpBox {
  std::array<double, 5> lo{0.01, 120.0, -5e-7, 20.0, 0.14};
  std::array<double, 5> hi{0.2, 900.0, 5e-7, 60.0, 0.16};
};

/// N concatenated (e0, tau0, chirp, width, omega0) blocks.
using Chromosome = std::vector<double>;

inline PulseEnsemble to_ensemble(const Chromosome& c) {
  if (c.empty() || c.size() % 5 != 0)
    throw std::invalid_argument("to_ensemble: chromosome length must be a positive multiple of 5");
  PulseEnsemble ens;
  ens.pulses.reserve(c.size() / 5);
  for (std::size_t k = 0; k < c.size(); k += 5)
    ens.pulses.push_back({c[k], c[k + 1], c[k + 2], c[k + 3], c[k + 4]});
  return ens;
}

inline bool in_bounds(const Chromosome& c, const LcpBox& box) {
  for (std::size_t g = 0; g < c.size(); ++g) {
    const std::size_t f = g % 5;
    if (c[g] < box.lo[f] || c[g] > box.hi[f]) return false;
  }
  return true;
}

struct GaConfig {
  std::size_t n_lcp = 30;
  std::size_t pop_size = 64;
  std::size_t n_generations = 100;
  double pi_m = 0.1;
  double pi_x = 0.8;
  std::uint64_t seed = 1;
  bool elitism = true;  ///< top-2 survivors pass to the next generation unmutated
  LcpBox bounds;

  void validate() const {
    if (n_lcp == 0) throw ConfigError("ga.n_lcp must be at least 1");
    if (pop_size < 4) throw ConfigError("ga.pop_size must be at least 4");
    if (n_generations == 0) throw ConfigError("ga.n_generations must be at least 1");
    if (!(pi_m >= 0.0 && pi_m <= 1.0)) throw ConfigError("ga.pi_m must lie in [0, 1]");
    if (!(pi_x >= 0.0 && pi_x <= 1.0)) throw ConfigError("ga.pi_x must lie in [0, 1]");
    for (std::size_t f = 0; f < 5; ++f)
      if (!(bounds.lo[f] <= bounds.hi[f]))
        throw ConfigError("ga.bounds: every interval needs lo <= hi");
  }
};

struct EvaluatedIndividual {
  RunObservables obs;
  double fitness = -std::numeric_limits<double>::infinity();
  bool flagged = false;  ///< propagation diverged; never silently dropped
};

/// Everything needed to score one chromosome. The cache, plan and initial
/// state are immutable and shared across concurrent evaluations.
struct EvaluationContext {
  const PotentialMatrixCache* cache = nullptr;
  const PropagatorPlan* plan = nullptr;
  WavepacketState initial;
  ProbeSet probes;
  FitnessConfig fitness_cfg;
};

inline EvaluatedIndividual evaluate_chromosome(const Chromosome& c, const EvaluationContext& ctx) {
  EvaluatedIndividual out;
  try {
    const auto field = sample_field(to_ensemble(c), ctx.plan->dt_full, ctx.plan->n_steps);
    out.obs = propagate(ctx.initial, *ctx.cache, *ctx.plan, field, ctx.probes);
    out.fitness = fitness(out.obs, ctx.fitness_cfg);
    if (!std::isfinite(out.fitness)) {
      out.flagged = true;
      out.fitness = -std::numeric_limits<double>::infinity();
    }
  } catch (const PropagationError&) {
    out.flagged = true;
    out.fitness = -std::numeric_limits<double>::infinity();
  }
  return out;
}

using EvaluationMemo = std::map<Chromosome, EvaluatedIndividual>;

/// Score a population. Identical chromosomes are propagated once and share the
/// result bit-for-bit; the outcome does not depend on `workers`.
inline std::vector<EvaluatedIndividual> evaluate_population(const std::vector<Chromosome>& pop,
                                                            const EvaluationContext& ctx,
                                                            std::size_t workers = 1,
                                                            EvaluationMemo* memo = nullptr) {
  std::vector<EvaluatedIndividual> out(pop.size());
  std::map<Chromosome, std::vector<std::size_t>> groups;
  for (std::size_t slot = 0; slot < pop.size(); ++slot) {
    if (memo != nullptr) {
      if (auto hit = memo->find(pop[slot]); hit != memo->end()) {
        out[slot] = hit->second;
        continue;
      }
    }
    groups[pop[slot]].push_back(slot);
  }

  std::vector<const Chromosome*> work;
  std::vector<const std::vector<std::size_t>*> targets;
  work.reserve(groups.size());
  for (const auto& [chrom, slots] : groups) {
    work.push_back(&chrom);
    targets.push_back(&slots);
  }
  std::vector<EvaluatedIndividual> results(work.size());

  auto run_range = [&](std::atomic<std::size_t>& cursor) {
    for (;;) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= work.size()) return;
      results[i] = evaluate_chromosome(*work[i], ctx);
    }
  };
  std::atomic<std::size_t> cursor{0};
  const std::size_t n_threads = std::min(workers, work.size());
  if (n_threads <= 1) {
    run_range(cursor);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back([&] { run_range(cursor); });
    for (auto& t : pool) t.join();
  }

  for (std::size_t i = 0; i < work.size(); ++i) {
    for (const std::size_t slot : *targets[i]) out[slot] = results[i];
    if (memo != nullptr) memo->emplace(*work[i], results[i]);
  }
  return out;
}

struct SelectionResult {
  std::vector<std::size_t> survivors;  ///< indices into the scored population, rank order
  std::size_t n_discarded = 0;
  double mean_fitness = 0.0;  ///< mean over finite scores, the selection threshold
};

/// Sort descending by fitness (ties broken by lower index), keep everyone at
/// or above the population mean fitness, and always retain the top 2. Flagged
/// individuals survive only through the top-2 floor.
inline SelectionResult select(const std::vector<EvaluatedIndividual>& scored) {
  const std::size_t n = scored.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    if (scored[i].fitness != scored[j].fitness) return scored[i].fitness > scored[j].fitness;
    return i < j;
  });

  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& s : scored) {
    if (std::isfinite(s.fitness)) {
      sum += s.fitness;
      ++count;
    }
  }
  SelectionResult res;
  res.mean_fitness =
      count > 0 ? sum / static_cast<double>(count) : -std::numeric_limits<double>::infinity();

  for (const std::size_t idx : order) {
    const bool keep = res.survivors.size() < 2 ||
                      (!scored[idx].flagged && scored[idx].fitness >= res.mean_fitness);
    if (keep) res.survivors.push_back(idx);
  }
  res.n_discarded = n - res.survivors.size();
  return res;
}

/// Fitness-weighted per-gene mean of the parents. Weights are shifted by the
/// population minimum so they stay positive for negative fitness; the child is
/// clamped into the parents' per-gene interval, hence stays in bounds.
inline Chromosome crossover(const Chromosome& a, const Chromosome& b, double fitness_a,
                            double fitness_b, double population_min_fitness) {
  if (a.size() != b.size()) throw std::invalid_argument("crossover: parent length mismatch");
  constexpr double kWeightEps = 1e-12;
  const double wa = fitness_a - population_min_fitness + kWeightEps;
  const double wb = fitness_b - population_min_fitness + kWeightEps;
  const double denom = wa + wb;
  Chromosome child(a.size());
  for (std::size_t g = 0; g < a.size(); ++g) {
    if (a[g] == b[g]) {
      child[g] = a[g];
      continue;
    }
    const double lo = std::min(a[g], b[g]);
    const double hi = std::max(a[g], b[g]);
    child[g] = std::clamp((wa * a[g] + wb * b[g]) / denom, lo, hi);
  }
  return child;
}

/// Each gene is independently resampled uniformly inside its box with
/// probability pi_m.
inline Chromosome mutate(Chromosome c, const GaConfig& cfg, Xoshiro256pp& rng) {
  for (std::size_t g = 0; g < c.size(); ++g) {
    if (rng.uniform() < cfg.pi_m) {
      const std::size_t f = g % 5;
      c[g] = rng.uniform(cfg.bounds.lo[f], cfg.bounds.hi[f]);
    }
  }
  return c;
}

inline std::vector<Chromosome> init_population(const GaConfig& cfg) {
  std::vector<Chromosome> pop(cfg.pop_size);
  for (std::size_t slot = 0; slot < cfg.pop_size; ++slot) {
    auto rng = make_stream(cfg.seed, StreamTag::population_init, 0, slot);
    Chromosome c(cfg.n_lcp * 5);
    for (std::size_t g = 0; g < c.size(); ++g) {
      const std::size_t f = g % 5;
      c[g] = rng.uniform(cfg.bounds.lo[f], cfg.bounds.hi[f]);
    }
    pop[slot] = std::move(c);
  }
  return pop;
}

struct SurvivorRecord {
  std::size_t rank = 0;
  std::size_t slot = 0;
  double fitness = 0.0;
  bool flagged = false;
  double j1 = 0.0, j2 = 0.0, j3 = 0.0;
  double fluence = 0.0;
  double p12 = 0.0, p23 = 0.0, p31 = 0.0;
  Chromosome genes;
};

struct GenerationRecord {
  std::size_t generation = 0;
  std::size_t n_discarded = 0;
  double mean_fitness = 0.0;
  double best_fitness = 0.0;
  double best_fitness_so_far = 0.0;
  std::vector<SurvivorRecord> survivors;
};

struct RunRecord {
  GaConfig config;
  std::vector<GenerationRecord> generations;
  Chromosome best_genes;
  double best_fitness = -std::numeric_limits<double>::infinity();
  RunObservables best_obs;
};

/// The generation loop: evaluate, sort, keep the above-mean individuals,
/// refill by fitness-weighted crossover of random survivor pairs (cloning a
/// survivor when the crossover coin fails), then run the mutation pass over
/// the new list with the top-2 exempt under elitism.
inline RunRecord evolve(const GaConfig& cfg, const EvaluationContext& ctx,
                        std::size_t workers = 1) {
  cfg.validate();
  RunRecord rec;
  rec.config = cfg;

  std::vector<Chromosome> pop = init_population(cfg);
  EvaluationMemo memo;

  for (std::size_t gen = 0; gen < cfg.n_generations; ++gen) {
    const auto scored = evaluate_population(pop, ctx, workers, &memo);
    const SelectionResult sel = select(scored);

    GenerationRecord gr;
    gr.generation = gen;
    gr.n_discarded = sel.n_discarded;
    gr.mean_fitness = sel.mean_fitness;
    gr.best_fitness = scored[sel.survivors.front()].fitness;
    for (std::size_t rank = 0; rank < sel.survivors.size(); ++rank) {
      const std::size_t slot = sel.survivors[rank];
      const auto& s = scored[slot];
      SurvivorRecord sr;
      sr.rank = rank;
      sr.slot = slot;
      sr.fitness = s.fitness;
      sr.flagged = s.flagged;
      sr.j1 = s.obs.j_flux[0];
      sr.j2 = s.obs.j_flux[1];
      sr.j3 = s.obs.j_flux[2];
      sr.fluence = s.obs.fluence;
      sr.p12 = s.obs.p12;
      sr.p23 = s.obs.p23;
      sr.p31 = s.obs.p31;
      sr.genes = pop[slot];
      gr.survivors.push_back(std::move(sr));
    }
    if (gr.best_fitness > rec.best_fitness) {
      rec.best_fitness = gr.best_fitness;
      rec.best_genes = pop[sel.survivors.front()];
      rec.best_obs = scored[sel.survivors.front()].obs;
    }
    gr.best_fitness_so_far = rec.best_fitness;
    rec.generations.push_back(std::move(gr));

    if (gen + 1 == cfg.n_generations) break;

    double min_fitness = std::numeric_limits<double>::infinity();
    for (const auto& s : scored)
      if (std::isfinite(s.fitness)) min_fitness = std::min(min_fitness, s.fitness);
    if (!std::isfinite(min_fitness)) min_fitness = 0.0;

    std::vector<Chromosome> next;
    next.reserve(cfg.pop_size);
    for (const std::size_t idx : sel.survivors) next.push_back(pop[idx]);

    const std::size_t n_surv = sel.survivors.size();
    auto pair_rng = make_stream(cfg.seed, StreamTag::pairing, gen, 0);
    while (next.size() < cfg.pop_size) {
      if (n_surv >= 2 && pair_rng.uniform() < cfg.pi_x) {
        const std::size_t i = pair_rng.index(n_surv);
        std::size_t j = pair_rng.index(n_surv - 1);
        if (j >= i) ++j;
        const std::size_t pi = sel.survivors[i];
        const std::size_t pj = sel.survivors[j];
        next.push_back(
            crossover(pop[pi], pop[pj], scored[pi].fitness, scored[pj].fitness, min_fitness));
      } else {
        next.push_back(pop[sel.survivors[pair_rng.index(n_surv)]]);
      }
    }

    const std::size_t first_mutable = cfg.elitism ? std::min<std::size_t>(2, next.size()) : 0;
    for (std::size_t slot = first_mutable; slot < next.size(); ++slot) {
      auto mut_rng = make_stream(cfg.seed, StreamTag::mutation, gen, slot);
      next[slot] = mutate(std::move(next[slot]), cfg, mut_rng);
    }
    pop = std::move(next);
  }
  return rec;
}

// Persistence: one generation per JSON line; the config echo and the best
// individual go to the separate summary document.

inline nlohmann::ordered_json generation_to_json(const GenerationRecord& gr) {
  nlohmann::ordered_json survivors = nlohmann::ordered_json::array();
  for (const auto& s : gr.survivors) {
    survivors.push_back({{"rank", s.rank},
                         {"slot", s.slot},
                         {"fitness", s.fitness},
                         {"flagged", s.flagged},
                         {"j1", s.j1},
                         {"j2", s.j2},
                         {"j3", s.j3},
                         {"fluence", s.fluence},
                         {"p12", s.p12},
                         {"p23", s.p23},
                         {"p31", s.p31},
                         {"genes", s.genes}});
  }
  return {{"generation", gr.generation},
          {"n_discarded", gr.n_discarded},
          {"mean_fitness", gr.mean_fitness},
          {"best_fitness", gr.best_fitness},
          {"best_fitness_so_far", gr.best_fitness_so_far},
          {"survivors", std::move(survivors)}};
}

inline void record_to_jsonl(const RunRecord& rec, std::ostream& os) {
  for (const auto& gr : rec.generations) os << generation_to_json(gr).dump() << '\n';
}

inline RunRecord record_from_jsonl(std::istream& is) {
  RunRecord rec;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("record line " + std::to_string(line_no) + ": " + e.what());
    }
    // non-finite scores serialize as JSON null
    const auto as_double = [](const nlohmann::json& v) {
      return v.is_number() ? v.get<double>() : -std::numeric_limits<double>::infinity();
    };
    GenerationRecord gr;
    gr.generation = j.at("generation").get<std::size_t>();
    gr.n_discarded = j.at("n_discarded").get<std::size_t>();
    gr.mean_fitness = as_double(j.at("mean_fitness"));
    gr.best_fitness = as_double(j.at("best_fitness"));
    gr.best_fitness_so_far = as_double(j.at("best_fitness_so_far"));
    for (const auto& js : j.at("survivors")) {
      SurvivorRecord s;
      s.rank = js.at("rank").get<std::size_t>();
      s.slot = js.at("slot").get<std::size_t>();
      s.fitness = as_double(js.at("fitness"));
      s.flagged = js.at("flagged").get<bool>();
      s.j1 = js.at("j1").get<double>();
      s.j2 = js.at("j2").get<double>();
      s.j3 = js.at("j3").get<double>();
      s.fluence = js.at("fluence").get<double>();
      s.p12 = js.at("p12").get<double>();
      s.p23 = js.at("p23").get<double>();
      s.p31 = js.at("p31").get<double>();
      s.genes = js.at("genes").get<std::vector<double>>();
      gr.survivors.push_back(std::move(s));
    }
    if (!gr.survivors.empty() && gr.survivors.front().fitness > rec.best_fitness) {
      rec.best_fitness = gr.survivors.front().fitness;
      rec.best_genes = gr.survivors.front().genes;
    }
    rec.generations.push_back(std::move(gr));
  }
  return rec;
}

}  // namespace qoct
