#pragma once

#include <vector>

#include "spca/linalg.hpp"

namespace spca {

struct SupportMaximum {
  double value = 0;
  std::vector<Index> support;  ///< ascending
  int ties = 0;                ///< other supports within tie tolerance of the best
  long long leaves = 0;        ///< supports whose eigenvalue was computed exactly
};

/// max over |I| = k of λ_max(a[I,I]) for symmetric a (indefinite allowed).
///
/// Depth-first over supports in lexicographic order. A node with partial
/// support P and r slots left is pruned when
///   λ_max [[λ_max(a_PP), ‖a_PQ‖_F], [‖a_PQ‖_F, λ̄_Q]] < best,
/// where ‖a_PQ‖_F is bounded by the r largest column norms of a[P, ·] among
/// the remaining candidates and λ̄_Q by Gershgorin over the candidates. The
/// bound is valid for every completion, so the search is exact. Values
/// within 1e-12 (relative) are ties and resolve to the lexicographically
/// smallest support.
SupportMaximum max_support_eigenvalue(const Eigen::MatrixXd& a, Index k);

}  // namespace spca
