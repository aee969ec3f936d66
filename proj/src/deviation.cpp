#include "spca/deviation.hpp"

#include <cmath>
#include <limits>
#include <memory>

#include "spca/estimators.hpp"
#include "spca/model.hpp"
#include "spca/parallel.hpp"
#include "spca/rng.hpp"
#include "spca/support_search.hpp"

namespace spca {

std::string to_string(DeviationKind k) {
  switch (k) {
    case DeviationKind::linf: return "linf";
    case DeviationKind::l1_quad: return "l1_quad";
    case DeviationKind::l0_quad: return "l0_quad";
  }
  return "unknown";
}

DeviationKind deviation_kind_from_string(const std::string& s) {
  if (s == "linf") return DeviationKind::linf;
  if (s == "l1_quad" || s == "l1") return DeviationKind::l1_quad;
  if (s == "l0_quad" || s == "l0") return DeviationKind::l0_quad;
  throw PreconditionError("unknown deviation statistic '" + s + "'");
}

double linf_stat(const SymMatrix& S, const SymMatrix& sigma) {
  if (S.dim() != sigma.dim()) throw DimensionMismatch("linf_stat: dimension mismatch");
  return (S.matrix() - sigma.matrix()).cwiseAbs().maxCoeff();
}

double l0_quad_stat(const SymMatrix& M, Index d, double max_supports) {
  const Index p = M.dim();
  if (d < 1 || 2 * d >= p) throw PreconditionError("l0_quad_stat: need 1 <= d < p/2");
  const double log_count = log_binomial(double(p), double(d));
  if (log_count > std::log(max_supports)) {
    throw BudgetExceeded("l0_quad_stat: support count exceeds budget", std::exp(log_count), max_supports);
  }
  const double up = max_support_eigenvalue(M.matrix(), d).value;
  const double down = max_support_eigenvalue(-M.matrix(), d).value;
  return std::max({up, down, 0.0});
}

double l1_quad_stat(const SymMatrix& M, double R1, int restarts, std::uint64_t seed) {
  if (!(R1 >= 1.0)) throw PreconditionError("l1_quad_stat: need R1 >= 1");
  const Eigen::MatrixXd& m = M.matrix();
  double best = m.diagonal().cwiseAbs().maxCoeff();
  EstimatorConfig cfg;
  cfg.method = Method::lq_projected;
  cfg.q = 1.0;
  cfg.rho_q = R1;
  cfg.restarts = std::max(1, restarts);
  cfg.seed = seed;
  for (double sign : {1.0, -1.0}) {
    const SymMatrix signed_m(sign * m);
    const EstimateResult r = lq_projected(signed_m, 1.0, R1, cfg);
    const Eigen::VectorXd& b = r.theta_hat.coords();
    best = std::max(best, std::abs(b.dot(m * b)));
  }
  return best;
}

LemmaBound lemma_bound(DeviationKind kind, double p, double n, double param, double lambda1, double K) {
  if (!(p >= 2.0 && n >= 1.0)) throw PreconditionError("lemma_bound: need p >= 2 and n >= 1");
  LemmaBound out;
  switch (kind) {
    case DeviationKind::linf:
      out.x = std::log(p) / n;
      break;
    case DeviationKind::l1_quad: {
      const double r2 = param * param;
      if (r2 < 1.0 || r2 > p / std::exp(1.0)) {
        out.in_regime = false;
        return out;
      }
      out.x = r2 * std::log(p / r2) / n;
      break;
    }
    case DeviationKind::l0_quad:
      if (param < 1.0 || param >= p / 2.0) {
        out.in_regime = false;
        return out;
      }
      out.x = param / n * std::log(p / param);
      break;
  }
  out.value = K * K * lambda1 * std::max(std::sqrt(out.x), out.x);
  return out;
}

bool truncation_check(const Eigen::VectorXd& u, double q, double t, double Rsq) {
  if (!(t > 0.0)) throw PreconditionError("truncation_check: need t > 0");
  if (!(q > 0.0 && q < 1.0)) throw PreconditionError("truncation_check: q must lie in (0,1)");
  if (lq_norm(u, q) > 2.0 * Rsq * (1.0 + 1e-12)) {
    throw PreconditionError("truncation_check: u violates the lq budget 2*Rsq");
  }
  const double lhs = u.lpNorm<1>();
  const double rhs = std::sqrt(2.0 * Rsq) * u.norm() * std::pow(t, -q / 2.0) + 2.0 * Rsq * std::pow(t, 1.0 - q);
  return lhs <= rhs * (1.0 + 1e-12);
}

std::vector<DeviationRow> run_deviation_sweep(const DeviationSweep& sw) {
  if (sw.ns.empty() || sw.ps.empty()) throw PreconditionError("deviation sweep: empty grid");
  if (sw.replicates < 1) throw PreconditionError("deviation sweep: replicates must be >= 1");
  struct Point {
    Index p, n;
    SymMatrix sigma;
    std::shared_ptr<const Eigen::MatrixXd> root;
    std::uint64_t seed;
  };
  std::vector<Point> grid;
  std::uint64_t g = 0;
  for (Index p : sw.ps) {
    const Index k = std::min(sw.spike_support, p);
    const UnitVector theta = sparse_unit_vector(p, 0.0, double(k), FirstKEqual{}).vector;
    const SpikedModel model = make_spiked(p, sw.lambda1, sw.lambda2, theta);
    const SymMatrix sigma = model.covariance();
    auto root = std::make_shared<const Eigen::MatrixXd>(psd_sqrt(sigma));
    for (Index n : sw.ns) grid.push_back({p, n, sigma, root, replicate_seed(sw.seed, g++, 0)});
  }

  const auto reps = static_cast<std::size_t>(sw.replicates);
  std::vector<double> values(grid.size() * reps, 0.0);
  parallel_for(values.size(), sw.threads, [&](std::size_t task) {
    const Point& pt = grid[task / reps];
    const std::uint64_t seed = stream_seed(pt.seed, task % reps);
    Sampler sampler(pt.root, SamplerSpec::gaussian(seed));
    const SymMatrix S = sample_covariance(sampler.draw(pt.n));
    switch (sw.kind) {
      case DeviationKind::linf:
        values[task] = linf_stat(S, pt.sigma);
        break;
      case DeviationKind::l0_quad:
        values[task] = l0_quad_stat(SymMatrix(S.matrix() - pt.sigma.matrix()), static_cast<Index>(sw.param));
        break;
      case DeviationKind::l1_quad:
        values[task] = l1_quad_stat(SymMatrix(S.matrix() - pt.sigma.matrix()), sw.param, sw.restarts, seed);
        break;
    }
  });

  const double K = std::sqrt(8.0 / 3.0);
  std::vector<DeviationRow> rows;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double sum = 0.0;
    for (std::size_t r = 0; r < reps; ++r) sum += values[i * reps + r];
    DeviationRow row;
    row.p = grid[i].p;
    row.n = grid[i].n;
    row.param = sw.kind == DeviationKind::linf ? 0.0 : sw.param;
    row.seed = grid[i].seed;
    row.report.kind = sw.kind;
    row.report.value = sum / double(reps);
    const LemmaBound b = lemma_bound(sw.kind, double(row.p), double(row.n), sw.param, sw.lambda1, K);
    row.report.bound = b.value;
    row.report.ratio = b.in_regime && b.value > 0.0 ? row.report.value / b.value : 0.0;
    rows.push_back(row);
  }
  return rows;
}

RatioSummary summarize_ratios(const std::vector<DeviationRow>& rows) {
  RatioSummary s;
  if (rows.empty()) return s;
  s.min_ratio = s.max_ratio = rows.front().report.ratio;
  for (const auto& r : rows) {
    s.min_ratio = std::min(s.min_ratio, r.report.ratio);
    s.max_ratio = std::max(s.max_ratio, r.report.ratio);
  }
  s.spread = s.min_ratio > 0.0 ? s.max_ratio / s.min_ratio : std::numeric_limits<double>::infinity();
  return s;
}

}  // namespace spca
