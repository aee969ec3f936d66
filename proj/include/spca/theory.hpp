#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spca/linalg.hpp"

namespace spca {

// Closed-form rates, Assumption-1 checks, KL divergence, Varshamov-Gilbert
// codes, local packing sets and the Fano pipeline. All rates drop the
// unspecified absolute constants.

struct ConditionReport {
  bool holds = false;
  bool cond_a = false;
  bool cond_b = false;
  double slack_a = 0;       ///< rhs − lhs of condition (a)
  double slack_b_lower = 0; ///< R̄ − 1
  double slack_b_upper = 0; ///< e⁻¹(p−1)^{1−q/2} − R̄
};

/// Radius conditions on R̄_q. For q = 0 only (b) is checked (α = 1 makes (a)
/// vacuous). κ is caller-supplied; its unspecified upper bound is not checked.
ConditionReport check_assumption1(double q, double p, double rbar, double sigma2, double n, double alpha,
                                  double kappa);

/// Rate-formula arguments. `radius` is R_q; the lower bound uses R̄_q = R_q − 1.
struct RateQuery {
  double q = 0;
  double p = 2;
  double n = 1;
  double radius = 2;
  double sigma2 = 1;
  double sigma_tilde = 1;

  double rbar() const { return radius - 1.0; }
};

struct RateValue {
  double value = 0;
  bool in_regime = true;
  bool clamped = false;  ///< the min{1, ·} branch was taken
  std::string branch;
};

/// min{1, R̄^{1/2} [(σ²/n) log((p−1)/R̄^{2/(2−q)})]^{1/2 − q/4}}.
RateValue lower_bound_rate(const RateQuery& rq);

/// Three branches: q ∈ (0,1) bounds E ε², q = 1 bounds E ε², q = 0 bounds [E ε]².
RateValue upper_bound_rate(const RateQuery& rq);

/// KL(P1 ‖ P2) between n-fold products of N(0, (λ1−λ2)x_i x_iᵀ + λ2 I):
/// (n / 4σ²)‖x1x1ᵀ − x2x2ᵀ‖²_F, i.e. (n/2)·tr(Σ2⁻¹Σ1 − I) evaluated in
/// closed form. +∞ when λ2 = 0.
double kl_spiked(const UnitVector& x1, const UnitVector& x2, double lambda1, double lambda2, double n);

/// Constant-weight binary code in {0,1}^length. Codewords are stored as
/// sorted lists of their one-positions.
struct BinaryCode {
  Index length = 0;
  Index weight = 0;
  std::vector<std::vector<Index>> words;
  double log_card() const { return std::log(double(words.size())); }
  Index min_distance() const;
};

struct VgOptions {
  std::uint64_t seed = 0;
  std::size_t max_card = 1024;  ///< raised automatically if the target needs more
  int retries = 8;
};

/// Ω_d ⊂ {0,1}^{p−1}: weight d, pairwise Hamming distance > d/2,
/// log|Ω_d| ≥ 0.233·d·log((p−1)/d). Greedy over a shuffled enumeration
/// (full when C(p−1, d) ≤ 1e5, sampled otherwise); all three properties are
/// certified before returning. Throws CertificationError if the cardinality
/// target is missed after all retries.
BinaryCode vg_set(Index p_minus_1, Index d, const VgOptions& opts = {});

inline constexpr double kVgConstant = 0.233;
inline constexpr double kPackingConstant = 0.109;

struct PackingSet {
  double epsilon = 0;
  Index d = 0;
  double q = 0;
  double radius = 0;
  std::vector<UnitVector> vectors;
  double log_card = 0;
  double min_sep = 0;      ///< min pairwise ‖v − w‖₂
  double max_sep = 0;      ///< max pairwise ‖v − w‖₂
  double max_lq_norm = 0;
  double a = 0;            ///< (R̄/ε^q)^{2/(2−q)}
  double card_bound = 0;   ///< 0.109·a·log((p−1)/a)
};

/// Vectors ((1−ε²)^{1/2}, ε ω d^{−1/2}) for ω ∈ Ω_d with
/// d = ⌊min{(p−1)/4, (R̄/ε^q)^{2/(2−q)}}⌋. Every invariant (unit norm,
/// ε/√2 < ‖v−w‖ ≤ √2ε, ℓq feasibility, log-cardinality) is certified by a
/// direct pairwise check.
PackingSet packing_set(Index p, double q, double radius, double epsilon, const VgOptions& opts = {});

struct FanoInput {
  double alpha_n = 0;
  double beta_n = 0;
  double n_card = 2;
};

/// max{0, (α/2)(1 − (β + log 2)/log N)}.
double fano_bound(const FanoInput& f);

struct EpsilonStar {
  double epsilon = 0;
  bool in_regime = true;
  bool clamped = false;
};

/// ε² = min{1, C^{2−q} R̄ [(σ²/n) log((p−1)/R̄^{2/(2−q)})]^{1−q/2}}.
EpsilonStar epsilon_star(double q, double p, double rbar, double sigma2, double n, double C);

struct LowerBoundCertificate {
  double bound = 0;
  bool vacuous = false;  ///< β_N + log 2 ≥ log N: Fano gives nothing
  EpsilonStar epsilon;
  PackingSet packing;
  FanoInput fano;
  double kl_max = 0;
  double kl_cap = 0;          ///< 2nε²/σ²
  double min_loss = 0;        ///< min pairwise projection loss
  ConditionReport assumption;
};

struct LowerBoundOptions {
  double alpha = 1.0;
  double kappa = -1.0;  ///< defaults to C
  VgOptions vg;
};

/// ε* → packing set → max pairwise KL → Fano bound with α_N = ε/√2.
LowerBoundCertificate assemble_lower_bound(double q, Index p, double n, double radius, double lambda1,
                                           double lambda2, double C, const LowerBoundOptions& opts = {});

struct CoveringBound {
  double exact = 0;    ///< log C(p,d) + d log(1 + 2/δ)
  double relaxed = 0;  ///< d + d log(p/d) + d log(1 + 2/δ)
};

CoveringBound sparse_covering_log_bound(double p, double d, double delta);

}  // namespace spca
