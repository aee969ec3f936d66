#include "spca/model.hpp"

#include <random>

namespace spca {

NoiseScales noise_scales(double lambda1, double lambda2) {
  if (!(lambda1 > lambda2) || !(lambda2 >= 0.0)) {
    throw PreconditionError("noise_scales: need lambda1 > lambda2 >= 0");
  }
  const double gap = lambda1 - lambda2;
  return {lambda1 * lambda2 / (gap * gap), lambda1 / gap};
}

SymMatrix SpikedModel::covariance() const {
  const Eigen::VectorXd& t = theta1.coords();
  Eigen::MatrixXd sigma = lambda1 * t * t.transpose();
  if (sigma0) {
    sigma += lambda2 * sigma0->matrix();
  } else {
    sigma += lambda2 * (Eigen::MatrixXd::Identity(p, p) - t * t.transpose());
  }
  return SymMatrix(sigma);
}

SpikedModel make_spiked(Index p, double lambda1, double lambda2, const UnitVector& theta1,
                        std::optional<SymMatrix> sigma0) {
  if (!(lambda1 > lambda2) || !(lambda2 >= 0.0)) {
    throw PreconditionError("make_spiked: need lambda1 > lambda2 >= 0");
  }
  if (theta1.dim() != p) throw DimensionMismatch("make_spiked: theta1 has the wrong dimension");
  if (sigma0) {
    if (sigma0->dim() != p) throw DimensionMismatch("make_spiked: sigma0 has the wrong dimension");
    if ((sigma0->matrix() * theta1.coords()).norm() > 1e-10) {
      throw PreconditionError("make_spiked: sigma0 * theta1 != 0");
    }
    const auto eig = sym_eig(*sigma0);
    if (eig.values(p - 1) < -1e-10) throw PreconditionError("make_spiked: sigma0 is not PSD");
    if (std::abs(eig.values(0) - 1.0) > 1e-8) {
      throw PreconditionError("make_spiked: sigma0 spectral norm is not 1");
    }
  }
  return SpikedModel{p, lambda1, lambda2, theta1, std::move(sigma0)};
}

void SparsityClass::validate() const {
  if (!(q >= 0.0 && q <= 1.0)) throw PreconditionError("SparsityClass: q must lie in [0,1]");
  if (!(Rq >= 1.0 + 1e-12)) throw PreconditionError("SparsityClass: Rq must exceed 1");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw PreconditionError("SparsityClass: alpha must lie in (0,1]");
  if (!(kappa > 0.0)) throw PreconditionError("SparsityClass: kappa must be positive");
}

namespace {

Index first_k_equal_count(Index p, double q, double Rq) {
  // k equal entries 1/√k have ℓq sum k^{1−q/2}.
  const double k = q == 0.0 ? std::floor(Rq + 1e-9) : std::floor(std::pow(Rq, 2.0 / (2.0 - q)) + 1e-9);
  return static_cast<Index>(std::min<double>(k, double(p)));
}

}  // namespace

SparseVector sparse_unit_vector(Index p, double q, double Rq, const VectorPattern& pattern) {
  if (p < 1) throw PreconditionError("sparse_unit_vector: p must be >= 1");
  if (!(q >= 0.0 && q <= 1.0)) throw PreconditionError("sparse_unit_vector: q must lie in [0,1]");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(p);
  std::visit(
      [&](const auto& pat) {
        using T = std::decay_t<decltype(pat)>;
        if constexpr (std::is_same_v<T, FirstKEqual>) {
          const Index k = first_k_equal_count(p, q, Rq);
          if (k < 1) throw InfeasiblePattern("sparse_unit_vector: radius admits no nonzero entry");
          v.head(k).setConstant(1.0 / std::sqrt(double(k)));
        } else if constexpr (std::is_same_v<T, GeometricDecay>) {
          if (!(pat.rate > 0.0 && pat.rate < 1.0)) {
            throw PreconditionError("sparse_unit_vector: geometric rate must lie in (0,1)");
          }
          double w = 1.0;
          for (Index j = 0; j < p; ++j, w *= pat.rate) v(j) = w;
        } else if constexpr (std::is_same_v<T, LeastFavorable>) {
          const double rbar = Rq - 1.0;
          if (p < 2 || !(rbar > 0.0) || pat.n < 1 || !(pat.sigma2 > 0.0) || !(pat.C > 0.0)) {
            throw PreconditionError("sparse_unit_vector: least-favorable pattern needs p >= 2, Rq > 1, n, sigma2");
          }
          const double lg = std::log((p - 1.0) / std::pow(rbar, 2.0 / (2.0 - q)));
          if (!(lg > 0.0)) throw InfeasiblePattern("sparse_unit_vector: least-favorable scale out of regime");
          const double eps2 = std::min(
              1.0, std::pow(pat.C, 2.0 - q) * rbar * std::pow(pat.sigma2 / double(pat.n) * lg, 1.0 - q / 2.0));
          const double eps = std::sqrt(eps2);
          const double a = std::pow(rbar / std::pow(eps, q), 2.0 / (2.0 - q));
          const Index d = std::max<Index>(1, std::min<Index>(p - 1, static_cast<Index>(std::floor(a + 1e-9))));
          v(0) = std::sqrt(1.0 - eps2);
          v.segment(1, d).setConstant(eps / std::sqrt(double(d)));
        } else {
          if (!(pat.exponent > 0.0) || !(pat.head > 0.0)) {
            throw PreconditionError("sparse_unit_vector: power decay needs positive exponent and head");
          }
          const Index s = pat.support > 0 ? std::min(pat.support, p) : p;
          v(0) = 1.0;
          for (Index j = 1; j < s; ++j) v(j) = pat.head * std::pow(double(j + 1), -pat.exponent);
        }
      },
      pattern);
  auto unit = UnitVector::normalized(v);
  const double lq = lq_norm(unit.coords(), q);
  if (lq > Rq + 1e-9) {
    throw InfeasiblePattern("sparse_unit_vector: pattern has lq norm " + std::to_string(lq) +
                            " > Rq = " + std::to_string(Rq));
  }
  return {std::move(unit), lq};
}

Eigen::MatrixXd psd_sqrt(const SymMatrix& m) {
  const auto eig = sym_eig(m);
  const double top = std::max(eig.values(0), 0.0);
  Eigen::VectorXd roots(m.dim());
  for (Index i = 0; i < m.dim(); ++i) {
    const double lam = eig.values(i);
    roots(i) = lam > 1e-12 * top ? std::sqrt(lam) : 0.0;
  }
  Eigen::MatrixXd root = eig.vectors * roots.asDiagonal() * eig.vectors.transpose();
  return SymMatrix(root).matrix();
}

Sampler::Sampler(const SpikedModel& model, const SamplerSpec& spec)
    : Sampler(std::make_shared<const Eigen::MatrixXd>(psd_sqrt(model.covariance())), spec) {}

Sampler::Sampler(std::shared_ptr<const Eigen::MatrixXd> root, const SamplerSpec& spec)
    : root_(std::move(root)), spec_(spec), rng_(spec.seed) {
  if (spec_.mu && spec_.mu->size() != root_->rows()) {
    throw DimensionMismatch("Sampler: mu has the wrong dimension");
  }
}

Eigen::MatrixXd Sampler::draw(Index n) {
  if (n < 1) throw PreconditionError("sample_data: n must be >= 1");
  const Index p = root_->rows();
  // Row-major fill order is part of the determinism contract.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> z(n, p);
  if (spec_.kind == SamplerKind::gaussian) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < p; ++j) z(i, j) = normal(rng_);
  } else {
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < p; ++j) z(i, j) = (rng_() >> 63) ? 1.0 : -1.0;
  }
  Eigen::MatrixXd x = z * (*root_);
  if (spec_.mu) x.rowwise() += spec_.mu->transpose();
  return x;
}

Eigen::MatrixXd sample_data(const SpikedModel& model, Index n, const SamplerSpec& sampler) {
  Sampler s(model, sampler);
  return s.draw(n);
}

SymMatrix sample_covariance(const Eigen::MatrixXd& data) {
  const Index n = data.rows();
  const Index p = data.cols();
  if (n < 1) throw PreconditionError("sample_covariance: need at least one row");
  const Eigen::RowVectorXd mean = data.colwise().mean();
  const Eigen::MatrixXd centered = data.rowwise() - mean;
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(p, p);
  s.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose(), 1.0 / double(n));
  s.triangularView<Eigen::StrictlyUpper>() = s.transpose();
  return SymMatrix(s);
}

std::string to_string(SamplerKind kind) { return kind == SamplerKind::gaussian ? "gaussian" : "rademacher"; }

SamplerKind sampler_kind_from_string(const std::string& s) {
  if (s == "gaussian") return SamplerKind::gaussian;
  if (s == "rademacher") return SamplerKind::rademacher;
  throw PreconditionError("unknown sampler kind '" + s + "'");
}

SpikedModel ModelSpec::build(Index dim, Index n) const {
  VectorPattern pattern = theta1_pattern;
  if (auto* lf = std::get_if<LeastFavorable>(&pattern)) {
    lf->n = n;
    lf->sigma2 = noise_scales(lambda1, lambda2).sigma2;
  }
  auto theta = sparse_unit_vector(dim, q, Rq, pattern);
  return make_spiked(dim, lambda1, lambda2, theta.vector);
}

SamplerSpec ModelSpec::sampler_spec(std::uint64_t seed_override) const {
  return sampler == SamplerKind::gaussian ? SamplerSpec::gaussian(seed_override)
                                          : SamplerSpec::rademacher(seed_override);
}

}  // namespace spca
