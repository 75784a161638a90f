#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qoct/evolver.hpp"

namespace qoct {

/// Ordered rows of (P 1->2, P 2->3, P 3->1) per surviving individual per
/// generation, with (generation, slot) provenance.
struct TmiChain {
  std::vector<std::array<double, 3>> rows;
  std::vector<std::pair<std::size_t, std::size_t>> provenance;
};

inline TmiChain assemble_chain(const RunRecord& rec) {
  if (rec.generations.empty()) throw std::invalid_argument("assemble_chain: empty run record");
  TmiChain chain;
  for (const auto& gr : rec.generations) {
    for (const auto& s : gr.survivors) {
      chain.rows.push_back({s.p12, s.p23, s.p31});
      chain.provenance.emplace_back(gr.generation, s.slot);
    }
  }
  return chain;
}

struct PcaOptions {
  bool center_columns = true;
  bool scale_by_sqrt_nm1 = true;
};

struct PcaResult {
  std::array<double, 3> singular_values{};  ///< descending
  std::array<std::array<double, 3>, 3> components{};  ///< components[k]: loadings on (P12, P23, P31)
  std::array<double, 3> explained_fraction{};
  std::array<double, 3> column_means{};
  PcaOptions options;
};

/// SVD of the (optionally centered) n x 3 chain by one-sided Jacobi column
/// orthogonalization. Signs are fixed so each component's largest-magnitude
/// loading is positive.
inline PcaResult pca(const TmiChain& chain, const PcaOptions& options = {}) {
  const std::size_t n = chain.rows.size();
  if (n < 2) throw std::invalid_argument("pca: need at least 2 rows");

  std::array<std::vector<double>, 3> col;
  for (auto& c : col) c.resize(n);
  PcaResult res;
  res.options = options;
  for (int k = 0; k < 3; ++k) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += chain.rows[i][static_cast<std::size_t>(k)];
    mean /= static_cast<double>(n);
    res.column_means[static_cast<std::size_t>(k)] = mean;
    const double shift = options.center_columns ? mean : 0.0;
    for (std::size_t i = 0; i < n; ++i)
      col[static_cast<std::size_t>(k)][i] = chain.rows[i][static_cast<std::size_t>(k)] - shift;
  }

  double v[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  constexpr int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  for (int sweep = 0; sweep < 64; ++sweep) {
    bool rotated = false;
    for (const auto& pq : pairs) {
      const int p = pq[0];
      const int q = pq[1];
      double app = 0.0, aqq = 0.0, apq = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        app += col[p][i] * col[p][i];
        aqq += col[q][i] * col[q][i];
        apq += col[p][i] * col[q][i];
      }
      if (apq == 0.0 || std::abs(apq) <= 1e-15 * std::sqrt(app * aqq)) continue;
      rotated = true;
      const double tau = (aqq - app) / (2.0 * apq);
      const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
      const double c = 1.0 / std::sqrt(1.0 + t * t);
      const double s = c * t;
      for (std::size_t i = 0; i < n; ++i) {
        const double xp = col[p][i];
        const double xq = col[q][i];
        col[p][i] = c * xp - s * xq;
        col[q][i] = s * xp + c * xq;
      }
      for (int i = 0; i < 3; ++i) {
        const double vp = v[i][p];
        const double vq = v[i][q];
        v[i][p] = c * vp - s * vq;
        v[i][q] = s * vp + c * vq;
      }
    }
    if (!rotated) break;
  }

  std::array<double, 3> sigma{};
  for (int k = 0; k < 3; ++k) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += col[k][i] * col[k][i];
    sigma[static_cast<std::size_t>(k)] = std::sqrt(sum);
    if (options.scale_by_sqrt_nm1)
      sigma[static_cast<std::size_t>(k)] /= std::sqrt(static_cast<double>(n - 1));
  }

  std::array<int, 3> idx{0, 1, 2};
  std::sort(idx.begin(), idx.end(), [&](int i, int j) { return sigma[i] > sigma[j]; });
  double total = 0.0;
  for (const double s : sigma) total += s * s;
  for (int k = 0; k < 3; ++k) {
    const int src = idx[static_cast<std::size_t>(k)];
    res.singular_values[static_cast<std::size_t>(k)] = sigma[static_cast<std::size_t>(src)];
    std::array<double, 3> comp{v[0][src], v[1][src], v[2][src]};
    int arg = 0;
    for (int i = 1; i < 3; ++i)
      if (std::abs(comp[static_cast<std::size_t>(i)]) > std::abs(comp[static_cast<std::size_t>(arg)]))
        arg = i;
    if (comp[static_cast<std::size_t>(arg)] < 0.0)
      for (auto& x : comp) x = -x;
    res.components[static_cast<std::size_t>(k)] = comp;
    res.explained_fraction[static_cast<std::size_t>(k)] =
        total > 0.0 ? sigma[static_cast<std::size_t>(src)] * sigma[static_cast<std::size_t>(src)] / total : 0.0;
  }
  return res;
}

inline const std::array<std::string, 3>& transition_labels() {
  static const std::array<std::string, 3> labels{"P1->2", "P2->3", "P3->1"};
  return labels;
}

struct ProcessEntry {
  double singular_value = 0.0;
  std::array<double, 3> loadings{};
  double explained_fraction = 0.0;
  std::vector<std::string> dominant;  ///< transitions with |loading| >= threshold
};

inline std::vector<ProcessEntry> report_processes(const PcaResult& res, std::size_t top_k,
                                                  double threshold = 0.3) {
  if (top_k > 3) throw std::invalid_argument("report_processes: top_k must be at most 3");
  std::vector<ProcessEntry> out;
  for (std::size_t k = 0; k < top_k; ++k) {
    ProcessEntry e;
    e.singular_value = res.singular_values[k];
    e.loadings = res.components[k];
    e.explained_fraction = res.explained_fraction[k];
    for (std::size_t i = 0; i < 3; ++i)
      if (std::abs(e.loadings[i]) >= threshold) e.dominant.push_back(transition_labels()[i]);
    out.push_back(std::move(e));
  }
  return out;
}

/// Plain-text process table, one column per retained component.
inline std::string format_process_table(const std::vector<ProcessEntry>& entries) {
  std::ostringstream os;
  os << "          ";
  for (std::size_t k = 0; k < entries.size(); ++k) os << "   Process " << (k + 1);
  os << '\n';
  for (std::size_t i = 0; i < 3; ++i) {
    os << transition_labels()[i] << "     ";
    for (const auto& e : entries) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%12.3f", e.loadings[i]);
      os << buf;
    }
    os << '\n';
  }
  os << "W         ";
  for (const auto& e : entries) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%12.4f", e.singular_value);
    os << buf;
  }
  os << '\n';
  os << "dominant  ";
  for (const auto& e : entries) {
    std::string joined;
    for (std::size_t i = 0; i < e.dominant.size(); ++i)
      joined += (i != 0 ? "," : "") + e.dominant[i];
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%12s", joined.c_str());
    os << buf;
  }
  os << '\n';
  return os.str();
}

}  // namespace qoct
