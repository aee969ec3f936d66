#include "doctest.h"

#include "oracles.hpp"
#include "spca/error.hpp"
#include "spca/estimators.hpp"
#include "spca/model.hpp"
#include "spca/support_search.hpp"
#include "support.hpp"

using namespace spca;
using namespace testing_support;

namespace {

void check_feasible(const EstimateResult& r, double q, double rho) {
  CHECK(std::abs(r.theta_hat.coords().norm() - 1.0) <= 1e-10);
  CHECK(lq_norm(r.theta_hat.coords(), q) <= rho + 1e-8);
}

Eigen::VectorXd random_l1_feasible(std::mt19937_64& rng, Index p, double rho) {
  // Random sparse direction, then shrink toward a basis vector until feasible.
  Eigen::VectorXd v = gaussian_vector(rng, p);
  v.normalize();
  return project_sphere_lq(v, 1.0, rho);
}

}  // namespace

TEST_CASE("plain_pca") {
  const auto r = plain_pca(SymMatrix::diagonal(Eigen::Vector3d(3, 1, 1)));
  CHECK(r.objective == doctest::Approx(3.0));
  CHECK(r.theta_hat(0) == doctest::Approx(1.0));
  CHECK(r.unique);

  const auto id = plain_pca(SymMatrix::identity(3));
  CHECK(id.objective == doctest::Approx(1.0));
  CHECK_FALSE(id.unique);

  std::mt19937_64 rng(41);
  const SymMatrix s = random_sym(rng, 8);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(s.matrix());
  CHECK(std::abs(plain_pca(s).objective - ref.eigenvalues().maxCoeff()) <= 1e-10);
}

TEST_CASE("l0_exact examples") {
  const auto r = l0_exact(SymMatrix::diagonal(Eigen::Vector4d(3, 2, 1, 0)), 1);
  CHECK(r.objective == doctest::Approx(3.0));
  CHECK(r.theta_hat(0) == doctest::Approx(1.0));
  CHECK(r.support == std::vector<Index>{0});

  const auto theta = sparse_unit_vector(20, 0.0, 3.0, FirstKEqual{}).vector;
  Eigen::VectorXd shuffled = Eigen::VectorXd::Zero(20);
  shuffled(2) = theta(0);
  shuffled(9) = -theta(1);
  shuffled(17) = theta(2);
  const UnitVector t(shuffled);
  const SpikedModel m = make_spiked(20, 2.0, 1.0, t);
  const auto est = l0_exact(m.covariance(), 3);
  CHECK(projection_loss(est.theta_hat, t) <= 1e-9);
  CHECK(est.support == std::vector<Index>{2, 9, 17});
}

TEST_CASE("l0_exact matches brute force over supports") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 60; ++trial) {
    const Index p = 6 + trial % 3;
    const SymMatrix s = trial % 2 ? random_psd(rng, p) : random_sym(rng, p);
    for (Index k = 1; k <= 3; ++k) {
      const auto r = l0_exact(s, k);
      CHECK(std::abs(r.objective - brute_force_support_max(s.matrix(), int(k))) <= 1e-10);
      check_feasible(r, 0.0, double(k));
    }
  }
}

TEST_CASE("l0_exact dominates random feasible vectors") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 5; ++trial) {
    const SymMatrix s = random_psd(rng, 10);
    const auto r = l0_exact(s, 3);
    for (int k = 0; k < 10000; ++k) {
      const Eigen::VectorXd b = project_sphere_l0(gaussian_vector(rng, 10), 3);
      REQUIRE(b.dot(s.matrix() * b) <= r.objective + 1e-12);
    }
  }
}

TEST_CASE("l0_exact tie-breaking and budget") {
  const auto r = l0_exact(SymMatrix::identity(6), 2);
  CHECK(r.support == std::vector<Index>{0, 1});
  CHECK_THROWS_AS(l0_exact(SymMatrix::identity(40), 6, 1e6), BudgetExceeded);
  try {
    l0_exact(SymMatrix::identity(40), 6, 1e6);
  } catch (const BudgetExceeded& e) {
    CHECK(e.required() > 1e6);
  }
}

TEST_CASE("max_support_eigenvalue against brute force on indefinite matrices") {
  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 40; ++trial) {
    const SymMatrix s = random_sym(rng, 9);
    for (int k : {1, 2, 4, 8, 9}) {
      const auto r = max_support_eigenvalue(s.matrix(), k);
      CHECK(std::abs(r.value - brute_force_support_max(s.matrix(), k)) <= 1e-10);
      CHECK(static_cast<int>(r.support.size()) == k);
    }
  }
}

TEST_CASE("l0_truncated_power") {
  EstimatorConfig cfg;
  cfg.method = Method::l0_truncated_power;
  const auto d = l0_truncated_power(SymMatrix::diagonal(Eigen::Vector4d(1, 4, 2, 3)), 1, cfg);
  CHECK(d.theta_hat(1) == doctest::Approx(1.0));

  std::mt19937_64 rng(45);
  for (int trial = 0; trial < 20; ++trial) {
    const SymMatrix s = random_psd(rng, 8);
    const auto exact = l0_exact(s, 3);
    EstimatorConfig warm = cfg;
    warm.init = InitKind::warm;
    warm.warm = exact.theta_hat.coords();
    const auto w = l0_truncated_power(s, 3, warm);
    CHECK(w.iterations <= 1);
    CHECK(w.objective == doctest::Approx(exact.objective).epsilon(1e-12));

    EstimatorConfig rs = cfg;
    rs.restarts = 4;
    rs.init = InitKind::random;
    rs.seed = 7;
    const auto r = l0_truncated_power(s, 3, rs);
    check_feasible(r, 0.0, 3.0);
    for (std::size_t i = 1; i < r.objective_trace.size(); ++i)
      CHECK(r.objective_trace[i] >= r.objective_trace[i - 1] - 1e-12);
  }
}

TEST_CASE("lq_projected") {
  EstimatorConfig cfg;
  cfg.method = Method::lq_projected;
  cfg.q = 1.0;

  std::mt19937_64 rng(46);
  const SymMatrix s8 = random_psd(rng, 8);
  CHECK(lq_projected(s8, 1.0, std::sqrt(8.0), cfg).objective == doctest::Approx(plain_pca(s8).objective).epsilon(1e-8));

  const auto basis = lq_projected(SymMatrix::diagonal(Eigen::Vector4d(3, 1, 1, 1)), 1.0, 1.0, cfg);
  CHECK(std::abs(basis.theta_hat(0)) == doctest::Approx(1.0));

  for (int trial = 0; trial < 3; ++trial) {
    const SymMatrix s = random_psd(rng, 6);
    EstimatorConfig c = cfg;
    c.restarts = 8;
    c.seed = 100 + trial;
    const auto r = lq_projected(s, 1.0, 1.5, c);
    check_feasible(r, 1.0, 1.5);
    double probe_best = -1e300;
    for (int k = 0; k < 100000; ++k) {
      const Eigen::VectorXd b = random_l1_feasible(rng, 6, 1.5);
      probe_best = std::max(probe_best, b.dot(s.matrix() * b));
    }
    CHECK(r.objective >= probe_best - 1e-12);
    for (std::size_t i = 1; i < r.objective_trace.size(); ++i)
      CHECK(r.objective_trace[i] >= r.objective_trace[i - 1] - 1e-12);
  }

  for (double q : {0.3, 0.5, 0.8}) {
    const SymMatrix s = random_psd(rng, 10);
    EstimatorConfig c = cfg;
    c.q = q;
    const auto r = lq_projected(s, q, 2.0, c);
    check_feasible(r, q, 2.0);
  }
  CHECK_THROWS_AS(project_sphere_lq(Eigen::VectorXd::Zero(4), 1.0, 1.5), DegenerateInput);
}

TEST_CASE("noiseless recovery for every method") {
  const UnitVector t = sparse_unit_vector(16, 0.0, 4.0, FirstKEqual{}).vector;
  const SymMatrix sigma = make_spiked(16, 2.0, 1.0, t).covariance();
  for (Method m : {Method::plain_pca, Method::l0_exact, Method::l0_truncated_power, Method::lq_projected}) {
    EstimatorConfig cfg;
    cfg.method = m;
    cfg.rho_q = 4.0;
    cfg.q = m == Method::lq_projected ? 1.0 : 0.0;
    const auto r = estimate(sigma, cfg);
    const double tol = (m == Method::l0_exact || m == Method::plain_pca) ? 1e-9 : 1e-6;
    CHECK(projection_loss(r.theta_hat, t) <= tol);
    CHECK(r.theta_hat(0) >= 0.0);
  }
}

TEST_CASE("config validation and names") {
  EstimatorConfig cfg;
  cfg.rho_q = 0.5;
  CHECK_THROWS_AS(cfg.validate(), PreconditionError);
  cfg.rho_q = 2;
  cfg.init = InitKind::warm;
  CHECK_THROWS_AS(cfg.validate(), PreconditionError);
  for (Method m : {Method::plain_pca, Method::l0_exact, Method::l0_truncated_power, Method::lq_projected})
    CHECK(method_from_string(to_string(m)) == m);
  CHECK_THROWS(method_from_string("sdp"));
  CHECK(log_binomial(32, 4) == doctest::Approx(std::log(35960.0)));
}
