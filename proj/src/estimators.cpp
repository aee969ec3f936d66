#include "spca/estimators.hpp"

#include <Eigen/Cholesky>

#include <limits>
#include <random>

#include "spca/model.hpp"
#include "spca/rng.hpp"
#include "spca/support_search.hpp"

namespace spca {

std::string to_string(Method m) {
  switch (m) {
    case Method::plain_pca: return "plain_pca";
    case Method::l0_exact: return "l0_exact";
    case Method::l0_truncated_power: return "l0_truncated_power";
    case Method::lq_projected: return "lq_projected";
  }
  return "unknown";
}

Method method_from_string(const std::string& s) {
  if (s == "plain_pca") return Method::plain_pca;
  if (s == "l0_exact") return Method::l0_exact;
  if (s == "l0_truncated_power") return Method::l0_truncated_power;
  if (s == "lq_projected") return Method::lq_projected;
  throw PreconditionError("unknown estimator method '" + s + "'");
}

std::string to_string(InitKind k) {
  switch (k) {
    case InitKind::diag_thresh: return "diag_thresh";
    case InitKind::random: return "random";
    case InitKind::warm: return "warm";
  }
  return "unknown";
}

InitKind init_kind_from_string(const std::string& s) {
  if (s == "diag_thresh") return InitKind::diag_thresh;
  if (s == "random") return InitKind::random;
  if (s == "warm") return InitKind::warm;
  throw PreconditionError("unknown init kind '" + s + "'");
}

void EstimatorConfig::validate() const {
  if (!(rho_q >= 1.0)) throw PreconditionError("EstimatorConfig: rho_q must be >= 1");
  if (!(q >= 0.0 && q <= 1.0)) throw PreconditionError("EstimatorConfig: q must lie in [0,1]");
  if (max_iter < 1) throw PreconditionError("EstimatorConfig: max_iter must be >= 1");
  if (!(tol > 0.0)) throw PreconditionError("EstimatorConfig: tol must be positive");
  if (restarts < 1) throw PreconditionError("EstimatorConfig: restarts must be >= 1");
  if (init == InitKind::warm && !warm) throw PreconditionError("EstimatorConfig: warm init needs a vector");
}

double log_binomial(double n, double k) {
  if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
  return std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1);
}

namespace {

std::vector<Index> nonzero_support(const Eigen::VectorXd& v) {
  std::vector<Index> s;
  for (Index i = 0; i < v.size(); ++i)
    if (std::abs(v(i)) > 1e-12) s.push_back(i);
  return s;
}

EstimateResult finish(Eigen::VectorXd v, const SymMatrix& S) {
  canonicalize_sign(v);
  EstimateResult r;
  r.theta_hat = UnitVector::normalized(v);
  r.objective = r.theta_hat.coords().dot(S.matrix() * r.theta_hat.coords());
  r.support = nonzero_support(r.theta_hat.coords());
  return r;
}

/// Smallest c ≥ 0 with S + cI PSD-safe for power iteration: 0 when S is
/// PSD, otherwise the Gershgorin deficit.
double ascent_shift(const Eigen::MatrixXd& s) {
  const Index p = s.rows();
  const double scale = std::max(1.0, s.diagonal().cwiseAbs().maxCoeff());
  Eigen::LLT<Eigen::MatrixXd> llt(s + 1e-12 * scale * Eigen::MatrixXd::Identity(p, p));
  if (llt.info() == Eigen::Success) return 0.0;
  double deficit = 0.0;
  for (Index i = 0; i < p; ++i) {
    const double radius = s.row(i).cwiseAbs().sum() - std::abs(s(i, i));
    deficit = std::max(deficit, radius - s(i, i));
  }
  return deficit;
}

struct PowerRun {
  Eigen::VectorXd b;
  double objective = -std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;
};

/// Sine of the angle between unit a and b, well conditioned near 0.
double step_size(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::VectorXd r = a - a.dot(b) * b;
  return std::sqrt(2.0 * std::clamp(r.squaredNorm(), 0.0, 1.0));
}

template <typename Project>
PowerRun power_iterate(const Eigen::MatrixXd& s, double shift, Eigen::VectorXd b, const Project& project,
                       const EstimatorConfig& cfg) {
  PowerRun run;
  run.b = std::move(b);
  run.objective = run.b.dot(s * run.b);
  run.trace.push_back(run.objective);
  const double scale = std::max(1.0, std::abs(run.objective));
  for (int it = 1; it <= cfg.max_iter; ++it) {
    Eigen::VectorXd u = s * run.b + shift * run.b;
    if (u.squaredNorm() == 0.0) {
      run.iterations = it;
      run.converged = true;
      break;
    }
    Eigen::VectorXd next = project(u);
    const double obj = next.dot(s * next);
    run.iterations = it;
    if (obj < run.objective - 1e-12 * scale) {
      // Only reachable with the approximate q < 1 projection; keep the
      // better iterate so the ascent stays monotone.
      run.converged = true;
      break;
    }
    const double delta = step_size(next, run.b);
    run.b = std::move(next);
    run.objective = obj;
    run.trace.push_back(obj);
    if (delta < cfg.tol) {
      run.converged = true;
      break;
    }
  }
  return run;
}

Eigen::VectorXd diag_thresh_init(const Eigen::MatrixXd& s, Index k) {
  const Index p = s.rows();
  k = std::clamp<Index>(k, 1, p);
  std::vector<Index> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), Index(0));
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return s(a, a) > s(b, b); });
  Eigen::VectorXd v = Eigen::VectorXd::Zero(p);
  for (Index i = 0; i < k; ++i) v(order[i]) = 1.0 / std::sqrt(double(k));
  return v;
}

Eigen::VectorXd initial_vector(const Eigen::MatrixXd& s, const EstimatorConfig& cfg, int restart, Index k) {
  const Index p = s.rows();
  if (restart == 0 && cfg.init == InitKind::warm) {
    if (cfg.warm->size() != p) throw DimensionMismatch("warm start has the wrong dimension");
    return *cfg.warm;
  }
  if (restart == 0 && cfg.init == InitKind::diag_thresh) return diag_thresh_init(s, k);
  CounterRng rng(stream_seed(cfg.seed, std::uint64_t(restart)));
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(p);
  for (Index i = 0; i < p; ++i) v(i) = normal(rng);
  return v;
}

bool lexicographically_less(const std::vector<Index>& a, const std::vector<Index>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

template <typename Project>
EstimateResult run_restarts(const SymMatrix& S, const EstimatorConfig& cfg, Index init_k, const Project& project) {
  const Eigen::MatrixXd& s = S.matrix();
  const double shift = ascent_shift(s);
  std::optional<EstimateResult> best;
  for (int r = 0; r < cfg.restarts; ++r) {
    Eigen::VectorXd start = initial_vector(s, cfg, r, init_k);
    if (start.squaredNorm() == 0.0) start = diag_thresh_init(s, init_k);
    PowerRun run = power_iterate(s, shift, project(start), project, cfg);
    EstimateResult cand = finish(run.b, S);
    cand.iterations = run.iterations;
    cand.converged = run.converged;
    cand.objective_trace = std::move(run.trace);
    if (!best) {
      best = std::move(cand);
      continue;
    }
    const double tie = 1e-12 * std::max(1.0, std::abs(best->objective));
    if (cand.objective > best->objective + tie ||
        (std::abs(cand.objective - best->objective) <= tie && lexicographically_less(cand.support, best->support))) {
      best = std::move(cand);
    }
  }
  return std::move(*best);
}

}  // namespace

Eigen::VectorXd project_sphere_l0(const Eigen::VectorXd& u, Index r) {
  const Index p = u.size();
  r = std::clamp<Index>(r, 1, p);
  std::vector<Index> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), Index(0));
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return std::abs(u(a)) > std::abs(u(b)); });
  Eigen::VectorXd v = Eigen::VectorXd::Zero(p);
  for (Index i = 0; i < r; ++i) v(order[i]) = u(order[i]);
  const double norm = v.norm();
  if (norm == 0.0) throw DegenerateInput("project_sphere_l0: zero input vector");
  return v / norm;
}

Eigen::VectorXd project_sphere_lq(const Eigen::VectorXd& u, double q, double rho) {
  const double top = u.cwiseAbs().maxCoeff();
  if (!(top > 0.0)) throw DegenerateInput("project_sphere_lq: zero input vector, threshold cannot be bracketed");
  if (!(rho >= 1.0)) throw PreconditionError("project_sphere_lq: rho must be >= 1");
  const Eigen::VectorXd x0 = u / u.norm();
  if (lq_norm(x0, q) <= rho) return x0;

  auto shrink = [&](double tau) -> Eigen::VectorXd {
    Eigen::VectorXd v = u.unaryExpr([tau](double a) {
      const double m = std::abs(a) - tau;
      return m > 0.0 ? std::copysign(m, a) : 0.0;
    });
    const double norm = v.norm();
    return norm > 0.0 ? Eigen::VectorXd(v / norm) : v;
  };
  double lo = 0.0;  // infeasible
  double hi = top;  // empty
  for (int i = 0; i < 200 && hi - lo > 1e-15 * top; ++i) {
    const double mid = 0.5 * (lo + hi);
    const Eigen::VectorXd v = shrink(mid);
    if (v.squaredNorm() > 0.0 && lq_norm(v, q) <= rho) {
      hi = mid;
    } else if (v.squaredNorm() == 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  Eigen::VectorXd v = shrink(hi);
  if (v.squaredNorm() == 0.0 || lq_norm(v, q) > rho) {
    // Tied top magnitudes: fall back to the single largest coordinate,
    // which always lies in the ball since rho >= 1.
    return project_sphere_l0(u, 1);
  }
  return v;
}

EstimateResult plain_pca(const SymMatrix& S) {
  const auto top = top_eigenpair(S);
  EstimateResult r = finish(top.vector.coords(), S);
  r.objective = top.value;
  r.unique = top.unique;
  r.objective_trace = {top.value};
  return r;
}

EstimateResult l0_exact(const SymMatrix& S, Index r0, double max_supports) {
  if (r0 < 1) throw PreconditionError("l0_exact: R0 must be >= 1");
  const Index p = S.dim();
  const Index k = std::min(r0, p);
  const double log_count = log_binomial(double(p), double(k));
  if (log_count > std::log(max_supports) + 1e-9) {
    throw BudgetExceeded("l0_exact: C(" + std::to_string(p) + ", " + std::to_string(k) +
                             ") supports exceed the enumeration budget; use l0_truncated_power",
                         std::exp(log_count), max_supports);
  }
  if (k == p) return plain_pca(S);

  SupportMaximum best = max_support_eigenvalue(S.matrix(), k);
  const Eigen::MatrixXd block = S.matrix()(best.support, best.support);
  const auto top = top_eigenpair(SymMatrix(block));
  Eigen::VectorXd v = Eigen::VectorXd::Zero(p);
  for (std::size_t i = 0; i < best.support.size(); ++i) v(best.support[i]) = top.vector(Index(i));
  EstimateResult r = finish(v, S);
  r.objective = best.value;
  r.support = best.support;
  r.unique = top.unique && best.ties == 0;
  r.objective_trace = {best.value};
  return r;
}

EstimateResult l0_truncated_power(const SymMatrix& S, Index r0, const EstimatorConfig& cfg) {
  if (r0 < 1) throw PreconditionError("l0_truncated_power: R0 must be >= 1");
  cfg.validate();
  if (r0 >= S.dim()) return plain_pca(S);
  return run_restarts(S, cfg, r0, [r0](const Eigen::VectorXd& u) { return project_sphere_l0(u, r0); });
}

EstimateResult lq_projected(const SymMatrix& S, double q, double rho, const EstimatorConfig& cfg) {
  if (!(q > 0.0 && q <= 1.0)) throw PreconditionError("lq_projected: q must lie in (0,1]");
  if (!(rho >= 1.0)) throw PreconditionError("lq_projected: rho must be >= 1");
  cfg.validate();
  // Every unit vector has ℓq sum at most p^{1−q/2}; beyond that the
  // constraint is inactive.
  if (rho >= std::pow(double(S.dim()), 1.0 - q / 2.0)) return plain_pca(S);
  const Index init_k = static_cast<Index>(std::ceil(rho));
  EstimateResult r = run_restarts(
      S, cfg, init_k, [q, rho](const Eigen::VectorXd& u) { return project_sphere_lq(u, q, rho); });
  if (lq_norm(r.theta_hat.coords(), q) > rho + 1e-8) {
    throw Error("lq_projected: returned iterate violates the lq constraint");
  }
  return r;
}

EstimateResult estimate(const SymMatrix& S, const EstimatorConfig& cfg) {
  cfg.validate();
  const auto r0 = static_cast<Index>(std::floor(cfg.rho_q + 1e-9));
  switch (cfg.method) {
    case Method::plain_pca: return plain_pca(S);
    case Method::l0_exact: return l0_exact(S, r0, cfg.max_supports);
    case Method::l0_truncated_power: return l0_truncated_power(S, r0, cfg);
    case Method::lq_projected: return lq_projected(S, cfg.q, cfg.rho_q, cfg);
  }
  throw PreconditionError("estimate: unknown method");
}

}  // namespace spca
