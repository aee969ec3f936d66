#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spca/linalg.hpp"

namespace spca {

// Statistics of S − Σ and the matching deviation bounds with the absolute
// constant set to 1.

enum class DeviationKind { linf, l1_quad, l0_quad };

std::string to_string(DeviationKind k);
DeviationKind deviation_kind_from_string(const std::string& s);

struct DeviationReport {
  DeviationKind kind = DeviationKind::linf;
  double value = 0;
  double bound = 0;
  double ratio = 0;  ///< value / bound
};

/// max_{ij} |S_ij − Σ_ij|.
double linf_stat(const SymMatrix& S, const SymMatrix& sigma);

/// max over unit b with at most d nonzeros of |bᵀMb|, computed exactly as the
/// larger of the best d-support top eigenvalues of M and −M.
/// Requires 1 ≤ d < p/2; throws BudgetExceeded when C(p, d) > max_supports.
double l0_quad_stat(const SymMatrix& M, Index d, double max_supports = 1e6);

/// Lower bound on sup |bᵀMb| over the unit sphere ∩ B_1(R1): best of
/// projected ascent on M and −M (with restarts) and the signed basis vectors.
double l1_quad_stat(const SymMatrix& M, double R1, int restarts = 4, std::uint64_t seed = 0);

struct LemmaBound {
  double value = 0;
  bool in_regime = true;
  double x = 0;  ///< the rate argument before max{√x, x}
};

/// K²λ1·max{√x, x} with x = log p / n (linf), R1² log(p/R1²)/n (l1_quad),
/// or (d/n) log(p/d) (l0_quad). `param` is R1 or d; ignored for linf.
/// Out-of-regime parameters (R1² ∉ [1, p/e], d ∉ [1, p/2)) return a zero
/// value with in_regime = false.
LemmaBound lemma_bound(DeviationKind kind, double p, double n, double param, double lambda1, double K);

/// ‖u‖₁ ≤ √2·√Rsq·‖u‖₂·t^{−q/2} + 2·Rsq·t^{1−q}. Requires t > 0,
/// q ∈ (0,1) and Σ|u_i|^q ≤ 2·Rsq; throws PreconditionError otherwise.
bool truncation_check(const Eigen::VectorXd& u, double q, double t, double Rsq);

/// Monte Carlo sweep of one statistic over an (n, p) grid under Gaussian
/// spiked models with θ1 = first-k-equal.
struct DeviationSweep {
  DeviationKind kind = DeviationKind::linf;
  std::vector<Index> ns{100, 316, 1000, 3162, 10000};
  std::vector<Index> ps{16, 32, 64, 128, 256};
  int replicates = 20;
  double lambda1 = 2;
  double lambda2 = 1;
  Index spike_support = 4;  ///< θ1 has this many equal nonzeros (capped at p)
  double param = 2;         ///< d for l0_quad, R1 for l1_quad
  int restarts = 4;         ///< l1_quad only
  std::uint64_t seed = 0;
  int threads = 1;
};

struct DeviationRow {
  Index p = 0;
  Index n = 0;
  double param = 0;
  DeviationReport report;  ///< value is the replicate mean
  std::uint64_t seed = 0;  ///< grid-point seed; replicate r uses seed ⊕ r
};

/// Rows in grid order (p outer, n inner), independent of the thread count.
std::vector<DeviationRow> run_deviation_sweep(const DeviationSweep& sweep);

struct RatioSummary {
  double min_ratio = 0;
  double max_ratio = 0;
  double spread = 0;  ///< max / min
};

RatioSummary summarize_ratios(const std::vector<DeviationRow>& rows);

}  // namespace spca
