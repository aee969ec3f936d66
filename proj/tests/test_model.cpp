#include "doctest.h"

#include <cstring>

#include "spca/error.hpp"
#include "spca/model.hpp"
#include "support.hpp"

using namespace spca;
using namespace testing_support;

TEST_CASE("make_spiked builds the stated covariance") {
  const SpikedModel m = make_spiked(4, 2.0, 1.0, UnitVector::basis(4, 0));
  CHECK((m.covariance().matrix() - Eigen::Vector4d(2, 1, 1, 1).asDiagonal().toDenseMatrix()).norm() <= 1e-15);

  const SpikedModel r1 = make_spiked(4, 2.0, 0.0, UnitVector::basis(4, 0));
  Eigen::Matrix4d expect = Eigen::Matrix4d::Zero();
  expect(0, 0) = 2;
  CHECK((r1.covariance().matrix() - expect).norm() <= 1e-15);

  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const UnitVector t = random_unit(rng, 8);
    const SpikedModel m8 = make_spiked(8, 2.0, 1.0, t);
    const auto e = sym_eig(m8.covariance());
    CHECK(e.values(0) == doctest::Approx(2.0).epsilon(1e-12));
    for (Index j = 1; j < 8; ++j) CHECK(std::abs(e.values(j) - 1.0) <= 1e-9);
    CHECK(sin_theta(UnitVector::normalized(e.vectors.col(0)), t) <= 1e-9);
  }
}

TEST_CASE("make_spiked validates its arguments") {
  const UnitVector e1 = UnitVector::basis(3, 0);
  CHECK_THROWS_AS(make_spiked(3, 1.0, 1.0, e1), PreconditionError);
  CHECK_THROWS_AS(make_spiked(3, 2.0, -0.5, e1), PreconditionError);
  // Σ0 not orthogonal to θ1.
  CHECK_THROWS_AS(make_spiked(3, 2.0, 1.0, e1, SymMatrix::identity(3)), PreconditionError);
  // Σ0 with spectral norm 2.
  CHECK_THROWS_AS(make_spiked(3, 2.0, 1.0, e1, SymMatrix::diagonal(Eigen::Vector3d(0, 2, 1))), PreconditionError);
  const SpikedModel ok = make_spiked(3, 2.0, 1.0, e1, SymMatrix::diagonal(Eigen::Vector3d(0, 1, 0.5)));
  CHECK(ok.covariance()(2, 2) == doctest::Approx(0.5));
}

TEST_CASE("noise scales") {
  const NoiseScales ns = noise_scales(2.0, 1.0);
  CHECK(ns.sigma2 == doctest::Approx(2.0));
  CHECK(ns.sigma_tilde == doctest::Approx(2.0));
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int i = 0; i < 1000; ++i) {
    const double l2 = u(rng), l1 = l2 + 0.01 + u(rng);
    const NoiseScales s = noise_scales(l1, l2);
    CHECK(std::abs(s.sigma2 - s.sigma_tilde * s.sigma_tilde * l2 / l1) <= 1e-12 * std::max(1.0, s.sigma2));
  }
}

TEST_CASE("lq_norm") {
  CHECK(lq_norm(Eigen::VectorXd::Zero(5), 0.0) == 0.0);
  CHECK(lq_norm(Eigen::VectorXd::Zero(5), 0.5) == 0.0);
  for (double q : {0.0, 0.3, 0.5, 1.0}) CHECK(lq_norm(Eigen::VectorXd::Unit(4, 0), q) == doctest::Approx(1.0));
  CHECK(lq_norm(Eigen::Vector4d(0.5, 0.5, 0.5, 0.5), 0.5) == doctest::Approx(2.8284271).epsilon(1e-7));
}

TEST_CASE("sparse_unit_vector patterns") {
  const auto e = sparse_unit_vector(7, 0.0, 1.0, FirstKEqual{});
  CHECK(e.vector(0) == doctest::Approx(1.0));
  CHECK(e.lq == 1.0);

  const auto four = sparse_unit_vector(32, 0.0, 4.0, FirstKEqual{});
  for (Index j = 0; j < 4; ++j) CHECK(four.vector(j) == doctest::Approx(0.5));
  CHECK(four.lq == 4.0);

  const auto geo = sparse_unit_vector(16, 1.0, 2.0, GeometricDecay{0.5});
  double l1 = 0.0;
  for (Index j = 0; j < 16; ++j) l1 += std::abs(geo.vector(j));
  CHECK(l1 <= 2.0);
  CHECK(geo.lq == doctest::Approx(l1));

  CHECK_THROWS_AS(sparse_unit_vector(16, 0.0, 4.0, GeometricDecay{0.5}), InfeasiblePattern);
  CHECK_THROWS_AS(sparse_unit_vector(16, 1.0, 1.5, PowerDecay{0.5, 1.0, 0}), InfeasiblePattern);
}

TEST_CASE("sample_data: rank-one model, determinism, concentration") {
  const UnitVector t = UnitVector::normalized(Eigen::Vector3d(1, 2, 2));
  const SpikedModel rank1 = make_spiked(3, 2.0, 0.0, t);
  const Eigen::MatrixXd row = sample_data(rank1, 1, SamplerSpec::gaussian(3));
  CHECK(sin_theta(UnitVector::normalized(row.row(0).transpose()), t) <= 1e-12);

  const SpikedModel m = make_spiked(4, 2.0, 1.0, UnitVector::normalized(Eigen::Vector4d(1, 1, 0, 0)));
  for (auto spec : {SamplerSpec::gaussian(9), SamplerSpec::rademacher(9)}) {
    const Eigen::MatrixXd a = sample_data(m, 50, spec), b = sample_data(m, 50, spec);
    CHECK(std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0);
  }

  const Index n = 200000;
  const SymMatrix sigma = m.covariance();
  for (auto spec : {SamplerSpec::gaussian(10), SamplerSpec::rademacher(10)}) {
    const SymMatrix s = sample_covariance(sample_data(m, n, spec));
    for (Index i = 0; i < 4; ++i) {
      for (Index j = 0; j < 4; ++j) {
        // Gaussian entry variance (Σ_ii Σ_jj + Σ_ij²)/n; the Rademacher one is no larger.
        const double se = std::sqrt((sigma(i, i) * sigma(j, j) + sigma(i, j) * sigma(i, j)) / double(n));
        CHECK(std::abs(s(i, j) - sigma(i, j)) <= 5.0 * se);
      }
    }
  }
}

TEST_CASE("sample_covariance") {
  CHECK(sample_covariance(Eigen::RowVector3d(1, 2, 3)).matrix().norm() == 0.0);

  Eigen::MatrixXd pm(2, 3);
  pm << 1, 0, 0, -1, 0, 0;
  Eigen::Matrix3d e11 = Eigen::Matrix3d::Zero();
  e11(0, 0) = 1;
  CHECK((sample_covariance(pm).matrix() - e11).norm() <= 1e-15);

  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 20; ++trial) {
    const Index p = 2 + trial % 6, n = 3 + trial;
    Eigen::MatrixXd x(n, p);
    for (Index i = 0; i < n; ++i) x.row(i) = gaussian_vector(rng, p).transpose();
    const SymMatrix s = sample_covariance(x);
    CHECK(s.matrix() == s.matrix().transpose());
    for (int k = 0; k < 10; ++k) {
      const Eigen::VectorXd b = gaussian_vector(rng, p);
      CHECK(b.dot(s.matrix() * b) >= -1e-12);
    }
    const Eigen::RowVectorXd shift = 100.0 * gaussian_vector(rng, p).transpose();
    const SymMatrix shifted = sample_covariance(x.rowwise() + shift);
    CHECK((shifted.matrix() - s.matrix()).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("nonzero mean does not change the sample covariance") {
  const SpikedModel m = make_spiked(3, 2.0, 1.0, UnitVector::basis(3, 1));
  SamplerSpec plain = SamplerSpec::gaussian(4);
  SamplerSpec shifted = plain;
  shifted.mu = Eigen::Vector3d(5, -3, 1);
  const SymMatrix a = sample_covariance(sample_data(m, 100, plain));
  const SymMatrix b = sample_covariance(sample_data(m, 100, shifted));
  CHECK((a.matrix() - b.matrix()).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("sampler constants") {
  CHECK(SamplerSpec::gaussian(0).K * SamplerSpec::gaussian(0).K == doctest::Approx(8.0 / 3.0));
  CHECK(sampler_kind_from_string(to_string(SamplerKind::rademacher)) == SamplerKind::rademacher);
  CHECK_THROWS(sampler_kind_from_string("cauchy"));
}

TEST_CASE("sparsity class validation") {
  SparsityClass c;
  c.q = 0.5;
  c.Rq = 2;
  CHECK_NOTHROW(c.validate());
  c.Rq = 1.0;
  CHECK_THROWS_AS(c.validate(), PreconditionError);
  c.Rq = 2;
  c.q = 1.5;
  CHECK_THROWS_AS(c.validate(), PreconditionError);
}
