#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>

#include "spca/linalg.hpp"
#include "spca/rng.hpp"

namespace spca {

/// ℓq "norm": for q = 0 the number of entries with |v_j| > 1e-12, otherwise
/// Σ |v_j|^q.
template <typename Derived>
double lq_norm(const Eigen::MatrixBase<Derived>& v, double q) {
  if (!(q >= 0.0)) throw PreconditionError("lq_norm: q must be >= 0");
  double sum = 0.0;
  if (q == 0.0) {
    for (Index i = 0; i < v.size(); ++i) sum += std::abs(double(v(i))) > 1e-12 ? 1.0 : 0.0;
    return sum;
  }
  for (Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(double(v(i)));
    if (a > 0.0) sum += q == 1.0 ? a : std::pow(a, q);
  }
  return sum;
}

/// σ² = λ1λ2/(λ1−λ2)² and σ̃ = λ1/(λ1−λ2).
struct NoiseScales {
  double sigma2 = 0;
  double sigma_tilde = 0;
};

NoiseScales noise_scales(double lambda1, double lambda2);

/// Σ = λ1 θ1θ1ᵀ + λ2 Σ0 with λ1 > λ2 ≥ 0, Σ0 PSD, Σ0θ1 = 0, ‖Σ0‖₂ = 1.
/// An empty sigma0 stands for the canonical bulk I − θ1θ1ᵀ.
struct SpikedModel {
  Index p = 0;
  double lambda1 = 0;
  double lambda2 = 0;
  UnitVector theta1;
  std::optional<SymMatrix> sigma0;

  SymMatrix covariance() const;
  NoiseScales noise() const { return noise_scales(lambda1, lambda2); }
};

SpikedModel make_spiked(Index p, double lambda1, double lambda2, const UnitVector& theta1,
                        std::optional<SymMatrix> sigma0 = std::nullopt);

/// Parameter space B_q^p(Rq) with Assumption-1 constants α, κ.
struct SparsityClass {
  double q = 0;
  double Rq = 2;
  double alpha = 1;
  double kappa = 0.1;

  double rbar() const { return Rq - 1.0; }
  void validate() const;
};

struct FirstKEqual {};
struct GeometricDecay {
  double rate = 0.5;
};
/// θ_1 ∝ 1 and θ_j ∝ head·j^(−exponent) for j ≥ 2 on the first `support`
/// coordinates (all p when support is 0).
struct PowerDecay {
  double exponent = 1.0;
  double head = 1.0;
  Index support = 0;
};
/// ((1−ε²)^{1/2}, ε d^{−1/2}, …, ε d^{−1/2}, 0, …) at the scale
/// ε² = min{1, C^{2−q} R̄ [(σ²/n) log((p−1)/R̄^{2/(2−q)})]^{1−q/2}} with
/// d = min{p−1, ⌊(R̄/ε^q)^{2/(2−q)}⌋}: the hardest member of B_q^p(Rq) at
/// sample size n. ModelSpec fills in n and σ² per grid point.
struct LeastFavorable {
  double C = 1.0;
  Index n = 0;
  double sigma2 = 0;
};
using VectorPattern = std::variant<FirstKEqual, GeometricDecay, PowerDecay, LeastFavorable>;

struct SparseVector {
  UnitVector vector;
  double lq = 0;
};

/// Unit vector with the requested shape, checked to lie in B_q^p(Rq).
/// Throws InfeasiblePattern if it does not fit.
SparseVector sparse_unit_vector(Index p, double q, double Rq, const VectorPattern& pattern);

enum class SamplerKind { gaussian, rademacher };

struct SamplerSpec {
  SamplerKind kind = SamplerKind::gaussian;
  /// Sub-Gaussian constant of ⟨Z, x⟩. The Gaussian value √(8/3) is also
  /// reported for Rademacher coordinates as a conservative bound.
  double K = std::sqrt(8.0 / 3.0);
  std::uint64_t seed = 0;
  std::optional<Eigen::VectorXd> mu;

  static SamplerSpec gaussian(std::uint64_t seed) { return {SamplerKind::gaussian, std::sqrt(8.0 / 3.0), seed, {}}; }
  static SamplerSpec rademacher(std::uint64_t seed) {
    return {SamplerKind::rademacher, std::sqrt(8.0 / 3.0), seed, {}};
  }
};

/// Draws rows X_i = μ + Σ^{1/2} Z_i. Owns its RNG; one instance per replicate.
class Sampler {
 public:
  Sampler(const SpikedModel& model, const SamplerSpec& spec);
  /// Shares a precomputed Σ^{1/2} across samplers of the same model.
  Sampler(std::shared_ptr<const Eigen::MatrixXd> root, const SamplerSpec& spec);

  Eigen::MatrixXd draw(Index n);
  const Eigen::MatrixXd& root() const { return *root_; }

 private:
  std::shared_ptr<const Eigen::MatrixXd> root_;
  SamplerSpec spec_;
  CounterRng rng_;
};

/// Symmetric PSD square root via the eigendecomposition; eigenvalues below
/// 1e-12·λ_max are treated as zero so rank-deficient Σ is handled exactly.
Eigen::MatrixXd psd_sqrt(const SymMatrix& m);

Eigen::MatrixXd sample_data(const SpikedModel& model, Index n, const SamplerSpec& sampler);

/// S = (1/n) Σ (X_i − X̄)(X_i − X̄)ᵀ.
SymMatrix sample_covariance(const Eigen::MatrixXd& data);

std::string to_string(SamplerKind kind);
SamplerKind sampler_kind_from_string(const std::string& s);

/// JSON block {p, lambda1, lambda2, theta1_pattern, q, Rq, sampler, seed}.
struct ModelSpec {
  Index p = 32;
  double lambda1 = 2;
  double lambda2 = 1;
  VectorPattern theta1_pattern = FirstKEqual{};
  double q = 0;
  double Rq = 4;
  SamplerKind sampler = SamplerKind::gaussian;
  std::uint64_t seed = 0;

  SpikedModel build() const { return build(p); }
  /// Same spec realized at a different dimension (and sample size, which
  /// only the least-favorable pattern uses).
  SpikedModel build(Index dim, Index n = 0) const;
  SamplerSpec sampler_spec(std::uint64_t seed_override) const;
};

}  // namespace spca
