#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spca/linalg.hpp"

namespace spca {

enum class Method { plain_pca, l0_exact, l0_truncated_power, lq_projected };
enum class InitKind { diag_thresh, random, warm };

std::string to_string(Method m);
Method method_from_string(const std::string& s);
std::string to_string(InitKind k);
InitKind init_kind_from_string(const std::string& s);

inline constexpr double kDefaultSupportBudget = 1e6;

/// Settings for maximize bᵀSb over the unit sphere intersected with B_q^p(ρ_q).
struct EstimatorConfig {
  Method method = Method::l0_exact;
  double rho_q = 1.0;  ///< ρ_q ≥ 1; the ℓ0 methods use ⌊ρ_q⌋ as the support size
  double q = 0.0;
  int max_iter = 500;
  double tol = 1e-8;
  int restarts = 1;
  InitKind init = InitKind::diag_thresh;
  std::optional<Eigen::VectorXd> warm;
  std::uint64_t seed = 0;
  double max_supports = kDefaultSupportBudget;

  void validate() const;
};

struct EstimateResult {
  UnitVector theta_hat;
  double objective = 0;
  int iterations = 0;
  bool converged = true;
  /// Nonzero coordinates of theta_hat, ascending.
  std::vector<Index> support;
  /// false when the maximizer is not unique (degenerate top eigenvalue).
  bool unique = true;
  /// Objective after each iteration of the winning restart (power methods).
  std::vector<double> objective_trace;
};

/// Top eigenvector of S.
EstimateResult plain_pca(const SymMatrix& S);

/// Global maximizer over unit vectors with at most r0 nonzeros: the best
/// top eigenpair of S[I,I] over supports |I| = min(r0, p). Branch-and-bound
/// over supports in lexicographic order with a valid upper bound, so the
/// result equals exhaustive enumeration. Ties resolve to the
/// lexicographically smallest support. Throws BudgetExceeded when
/// C(p, r0) > max_supports.
EstimateResult l0_exact(const SymMatrix& S, Index r0, double max_supports = kDefaultSupportBudget);

/// Truncated power iteration b ← normalize(top_r0(S·b)) with restarts.
EstimateResult l0_truncated_power(const SymMatrix& S, Index r0, const EstimatorConfig& cfg);

/// Projected power iteration b ← Π(S·b) onto sphere ∩ B_q(ρ) via
/// soft-threshold-then-normalize with a bisected threshold. Exact linear
/// maximization for q = 1, approximate for q < 1.
EstimateResult lq_projected(const SymMatrix& S, double q, double rho, const EstimatorConfig& cfg);

/// Dispatches on cfg.method.
EstimateResult estimate(const SymMatrix& S, const EstimatorConfig& cfg);

/// Soft-thresholds u at the smallest level whose normalized result has
/// ℓq sum ≤ rho (level 0 when u/‖u‖ is already feasible). Throws
/// DegenerateInput for u = 0.
Eigen::VectorXd project_sphere_lq(const Eigen::VectorXd& u, double q, double rho);

/// Keeps the r largest-magnitude entries (lower index wins ties) and
/// normalizes.
Eigen::VectorXd project_sphere_l0(const Eigen::VectorXd& u, Index r);

/// log C(n, k).
double log_binomial(double n, double k);

}  // namespace spca
