#include "spca/theory.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "spca/estimators.hpp"
#include "spca/model.hpp"
#include "spca/rng.hpp"

namespace spca {

namespace {

constexpr double kTiny = 1e-12;

/// log((p−1)/R̄^{2/(2−q)}), the argument shared by Assumption 1, the lower
/// bound rate and ε*.
double packing_log(double q, double p, double rbar) {
  const double arg = (p - 1.0) / std::pow(rbar, 2.0 / (2.0 - q));
  return arg > 0.0 ? std::log(arg) : -std::numeric_limits<double>::infinity();
}

void require(bool ok, const std::string& what) {
  if (!ok) throw PreconditionError(what);
}

}  // namespace

ConditionReport check_assumption1(double q, double p, double rbar, double sigma2, double n, double alpha,
                                  double kappa) {
  require(q >= 0.0 && q <= 1.0, "check_assumption1: q must lie in [0,1]");
  ConditionReport r;
  r.slack_b_lower = rbar - 1.0;
  r.slack_b_upper = std::exp(-1.0) * std::pow(p - 1.0, 1.0 - q / 2.0) - rbar;
  r.cond_b = r.slack_b_lower >= -kTiny && r.slack_b_upper >= -kTiny;

  if (q == 0.0) {
    r.cond_a = true;
    r.slack_a = 0.0;
  } else {
    const double lg = packing_log(q, p, rbar);
    if (!(lg > 0.0) || !(rbar > 0.0)) {
      r.cond_a = false;
      r.slack_a = -std::numeric_limits<double>::infinity();
    } else {
      const double rhs = std::pow(kappa, q) * std::pow(p - 1.0, 1.0 - alpha) *
                         std::pow(rbar, 2.0 * alpha / (2.0 - q)) * std::pow(sigma2 / n * lg, q / 2.0);
      r.slack_a = rhs - rbar;
      r.cond_a = rbar <= rhs;
    }
  }
  r.holds = r.cond_a && r.cond_b;
  return r;
}

RateValue lower_bound_rate(const RateQuery& rq) {
  const double rbar = rq.rbar();
  require(rbar >= 1.0 - kTiny, "lower_bound_rate: need Rbar_q >= 1");
  require(rq.p >= 2.0, "lower_bound_rate: need p >= 2");
  require(rq.n >= 1.0, "lower_bound_rate: need n >= 1");
  require(rq.q >= 0.0 && rq.q <= 1.0, "lower_bound_rate: q must lie in [0,1]");
  RateValue out;
  out.branch = "E_eps";
  const double lg = packing_log(rq.q, rq.p, rbar);
  if (!(lg > 0.0)) {
    out.in_regime = false;
    return out;
  }
  const double raw = std::sqrt(rbar) * std::pow(rq.sigma2 / rq.n * lg, 0.5 - rq.q / 4.0);
  out.clamped = raw >= 1.0;
  out.value = std::min(1.0, raw);
  return out;
}

RateValue upper_bound_rate(const RateQuery& rq) {
  require(rq.q >= 0.0 && rq.q <= 1.0, "upper_bound_rate: q must lie in [0,1]");
  require(rq.p >= 2.0 && rq.n >= 1.0, "upper_bound_rate: need p >= 2 and n >= 1");
  require(rq.radius >= 1.0 - kTiny, "upper_bound_rate: need R_q >= 1");
  const double s2n = rq.sigma_tilde * rq.sigma_tilde / rq.n;
  const double R = rq.radius;
  RateValue out;
  double raw = 0.0;
  if (rq.q == 0.0) {
    out.branch = "sq_E_eps";
    if (R >= rq.p) {
      out.in_regime = false;
      return out;
    }
    raw = R * s2n * std::log(rq.p / R);
  } else if (rq.q == 1.0) {
    out.branch = "E_eps2";
    if (R * R > rq.p / std::exp(1.0) * (1.0 + kTiny)) {
      out.in_regime = false;
      return out;
    }
    raw = R * std::sqrt(s2n * std::log(rq.p / (R * R)));
  } else {
    out.branch = "E_eps2";
    raw = R * R * std::pow(s2n * std::log(rq.p), 1.0 - rq.q / 2.0);
  }
  out.clamped = raw >= 1.0;
  out.value = std::min(1.0, raw);
  return out;
}

double kl_spiked(const UnitVector& x1, const UnitVector& x2, double lambda1, double lambda2, double n) {
  require(lambda1 > lambda2 && lambda2 >= 0.0, "kl_spiked: need lambda1 > lambda2 >= 0");
  if (lambda2 == 0.0) return std::numeric_limits<double>::infinity();
  const double sigma2 = noise_scales(lambda1, lambda2).sigma2;
  const double loss = projection_loss(x1, x2);
  return n / (4.0 * sigma2) * loss * loss;
}

// ---------------------------------------------------------------------------
// Varshamov-Gilbert codes

namespace {

using Bits = std::vector<std::uint64_t>;

Bits to_bits(const std::vector<Index>& word, Index length) {
  Bits b(static_cast<std::size_t>((length + 63) / 64), 0);
  for (Index i : word) b[static_cast<std::size_t>(i / 64)] |= std::uint64_t(1) << (i % 64);
  return b;
}

int overlap(const Bits& a, const Bits& b) {
  int c = 0;
  for (std::size_t i = 0; i < a.size(); ++i) c += std::popcount(a[i] & b[i]);
  return c;
}

// Next combination of {0..n−1} in lexicographic order.
bool next_combination(std::vector<Index>& c, Index n) {
  const auto k = static_cast<Index>(c.size());
  for (Index i = k - 1; i >= 0; --i) {
    if (c[i] < n - k + i) {
      ++c[i];
      for (Index j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
      return true;
    }
  }
  return false;
}

class GreedyCode {
 public:
  GreedyCode(Index length, Index weight, std::size_t cap)
      : length_(length), weight_(weight), cap_(cap),
        // Hamming distance 2(d − overlap) > d/2  ⇔  4·overlap < 3d.
        max_overlap_((3 * weight - 1) / 4) {}

  bool full() const { return code_.words.size() >= cap_; }

  bool offer(const std::vector<Index>& word) {
    Bits b = to_bits(word, length_);
    for (const Bits& w : bits_)
      if (overlap(w, b) > max_overlap_) return false;
    bits_.push_back(std::move(b));
    code_.words.push_back(word);
    return true;
  }

  BinaryCode take() {
    code_.length = length_;
    code_.weight = weight_;
    return std::move(code_);
  }

 private:
  Index length_;
  Index weight_;
  std::size_t cap_;
  Index max_overlap_;
  std::vector<Bits> bits_;
  BinaryCode code_;
};

BinaryCode build_code(Index m, Index d, std::size_t cap, std::uint64_t seed) {
  GreedyCode greedy(m, d, cap);
  CounterRng rng(seed);
  if (log_binomial(double(m), double(d)) <= std::log(1e5)) {
    std::vector<std::vector<Index>> all;
    std::vector<Index> c(static_cast<std::size_t>(d));
    std::iota(c.begin(), c.end(), Index(0));
    do {
      all.push_back(c);
    } while (next_combination(c, m));
    std::shuffle(all.begin(), all.end(), rng);
    for (const auto& w : all) {
      if (greedy.full()) break;
      greedy.offer(w);
    }
  } else {
    std::vector<Index> pool(static_cast<std::size_t>(m));
    std::iota(pool.begin(), pool.end(), Index(0));
    const std::size_t max_attempts = 64 * cap + 10000;
    std::size_t misses = 0;
    for (std::size_t attempt = 0; attempt < max_attempts && !greedy.full() && misses < 20000; ++attempt) {
      // Partial Fisher-Yates draws a uniform d-subset.
      for (Index i = 0; i < d; ++i) {
        std::uniform_int_distribution<Index> pick(i, m - 1);
        std::swap(pool[i], pool[pick(rng)]);
      }
      std::vector<Index> w(pool.begin(), pool.begin() + d);
      std::sort(w.begin(), w.end());
      misses = greedy.offer(w) ? 0 : misses + 1;
    }
  }
  return greedy.take();
}

}  // namespace

Index BinaryCode::min_distance() const {
  Index best = std::numeric_limits<Index>::max();
  for (std::size_t i = 0; i < words.size(); ++i) {
    const Bits a = to_bits(words[i], length);
    for (std::size_t j = i + 1; j < words.size(); ++j) {
      const Bits b = to_bits(words[j], length);
      Index dist = 0;
      for (std::size_t k = 0; k < a.size(); ++k) dist += std::popcount(a[k] ^ b[k]);
      best = std::min(best, dist);
    }
  }
  return best;
}

BinaryCode vg_set(Index p_minus_1, Index d, const VgOptions& opts) {
  const Index m = p_minus_1;
  require(d >= 1 && 4 * d <= m, "vg_set: need 1 <= d <= (p-1)/4");
  const double target = kVgConstant * double(d) * std::log(double(m) / double(d));
  const double needed = std::ceil(std::exp(target) - 1e-9);
  if (needed > double(1 << 20)) {
    throw CertificationError("vg_set: cardinality target exp(" + std::to_string(target) +
                             ") is beyond the greedy construction");
  }
  const std::size_t cap = std::max(opts.max_card, static_cast<std::size_t>(needed) + 1);

  for (int attempt = 0; attempt < opts.retries; ++attempt) {
    BinaryCode code = build_code(m, d, cap, stream_seed(opts.seed, std::uint64_t(attempt)));
    // Certify (i)-(iii) directly on the returned words.
    bool ok = code.words.size() >= 1 && code.log_card() >= target - kTiny;
    for (const auto& w : code.words) ok = ok && static_cast<Index>(w.size()) == d;
    if (ok && code.words.size() > 1) ok = 2 * code.min_distance() > d;
    if (ok) return code;
  }
  throw CertificationError("vg_set: failed to reach log-cardinality " + std::to_string(target) + " after " +
                           std::to_string(opts.retries) + " attempts");
}

PackingSet packing_set(Index p, double q, double radius, double epsilon, const VgOptions& opts) {
  require(p >= 5, "packing_set: need p >= 5");
  require(epsilon > 0.0 && epsilon <= 1.0, "packing_set: epsilon must lie in (0,1]");
  require(q >= 0.0 && q <= 1.0, "packing_set: q must lie in [0,1]");
  const double rbar = radius - 1.0;
  require(rbar >= 1.0 - kTiny, "packing_set: need Rbar_q = R_q - 1 >= 1");

  PackingSet out;
  out.epsilon = epsilon;
  out.q = q;
  out.radius = radius;
  out.a = std::pow(rbar / std::pow(epsilon, q), 2.0 / (2.0 - q));
  auto d = static_cast<Index>(std::floor(std::min(double(p - 1) / 4.0, out.a) + 1e-9));
  // Guard the floor against rounding: ε^q d^{(2−q)/2} must not exceed R̄.
  while (d > 1 && std::pow(epsilon, q) * std::pow(double(d), (2.0 - q) / 2.0) > rbar * (1.0 + 1e-12)) --d;
  require(d >= 1, "packing_set: no admissible weight d");
  out.d = d;

  VgOptions vg = opts;
  const BinaryCode code = vg_set(p - 1, d, vg);
  const double head = std::sqrt(std::max(0.0, 1.0 - epsilon * epsilon));
  const double tail = epsilon / std::sqrt(double(d));
  out.vectors.reserve(code.words.size());
  for (const auto& w : code.words) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(p);
    v(0) = head;
    for (Index i : w) v(i + 1) = tail;
    out.vectors.emplace_back(v);  // UnitVector checks the norm
  }

  out.log_card = std::log(double(out.vectors.size()));
  out.card_bound = kPackingConstant * out.a * std::log(double(p - 1) / out.a);
  out.min_sep = std::numeric_limits<double>::infinity();
  out.max_sep = 0.0;
  out.max_lq_norm = 0.0;
  for (std::size_t i = 0; i < out.vectors.size(); ++i) {
    out.max_lq_norm = std::max(out.max_lq_norm, lq_norm(out.vectors[i].coords(), q));
    for (std::size_t j = i + 1; j < out.vectors.size(); ++j) {
      const double dist = (out.vectors[i].coords() - out.vectors[j].coords()).norm();
      out.min_sep = std::min(out.min_sep, dist);
      out.max_sep = std::max(out.max_sep, dist);
    }
  }
  if (out.vectors.size() < 2) out.min_sep = out.max_sep = 0.0;

  if (out.vectors.size() >= 2 &&
      !(out.min_sep > epsilon / std::sqrt(2.0) && out.max_sep <= std::sqrt(2.0) * epsilon * (1.0 + 1e-12))) {
    throw CertificationError("packing_set: separation certificate failed");
  }
  if (out.max_lq_norm > radius + 1e-9) throw CertificationError("packing_set: lq feasibility certificate failed");
  if (out.log_card < out.card_bound - kTiny) throw CertificationError("packing_set: cardinality certificate failed");
  return out;
}

double fano_bound(const FanoInput& f) {
  require(f.n_card >= 2.0, "fano_bound: need N >= 2");
  return std::max(0.0, f.alpha_n / 2.0 * (1.0 - (f.beta_n + std::log(2.0)) / std::log(f.n_card)));
}

EpsilonStar epsilon_star(double q, double p, double rbar, double sigma2, double n, double C) {
  require(C > 0.0 && C < 1.0, "epsilon_star: C must lie in (0,1)");
  require(q >= 0.0 && q <= 1.0, "epsilon_star: q must lie in [0,1]");
  EpsilonStar out;
  const double lg = packing_log(q, p, rbar);
  if (!(lg > 0.0)) {
    out.in_regime = false;
    return out;
  }
  const double eps2 = std::pow(C, 2.0 - q) * rbar * std::pow(sigma2 / n * lg, 1.0 - q / 2.0);
  out.clamped = eps2 >= 1.0;
  out.epsilon = std::sqrt(std::min(1.0, eps2));
  return out;
}

LowerBoundCertificate assemble_lower_bound(double q, Index p, double n, double radius, double lambda1,
                                           double lambda2, double C, const LowerBoundOptions& opts) {
  require(lambda2 > 0.0 && lambda1 > lambda2, "assemble_lower_bound: need lambda1 > lambda2 > 0");
  const double sigma2 = noise_scales(lambda1, lambda2).sigma2;
  const double rbar = radius - 1.0;
  LowerBoundCertificate cert;
  const double kappa = opts.kappa > 0.0 ? opts.kappa : C;
  cert.assumption = check_assumption1(q, double(p), rbar, sigma2, n, opts.alpha, kappa);
  if (!cert.assumption.holds) {
    throw PreconditionError("assemble_lower_bound: Assumption 1 does not hold at this point");
  }
  cert.epsilon = epsilon_star(q, double(p), rbar, sigma2, n, C);
  if (!cert.epsilon.in_regime) throw PreconditionError("assemble_lower_bound: epsilon* out of regime");
  const double eps = cert.epsilon.epsilon;
  cert.packing = packing_set(p, q, radius, eps, opts.vg);

  const auto& vs = cert.packing.vectors;
  cert.kl_cap = 2.0 * n * eps * eps / sigma2;
  cert.min_loss = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < vs.size(); ++i) {
    for (std::size_t j = i + 1; j < vs.size(); ++j) {
      cert.kl_max = std::max(cert.kl_max, kl_spiked(vs[i], vs[j], lambda1, lambda2, n));
      cert.min_loss = std::min(cert.min_loss, projection_loss(vs[i], vs[j]));
    }
  }
  if (cert.kl_max > cert.kl_cap + 1e-9) throw CertificationError("assemble_lower_bound: KL certificate failed");
  if (cert.min_loss < eps / std::sqrt(2.0) - kTiny) {
    throw CertificationError("assemble_lower_bound: loss separation certificate failed");
  }
  cert.fano = {eps / std::sqrt(2.0), cert.kl_max, double(vs.size())};
  cert.bound = fano_bound(cert.fano);
  cert.vacuous = cert.bound == 0.0;
  return cert;
}

CoveringBound sparse_covering_log_bound(double p, double d, double delta) {
  require(d >= 1.0 && d < p / 2.0, "sparse_covering_log_bound: need 1 <= d < p/2");
  require(delta > 0.0 && delta < 1.0, "sparse_covering_log_bound: delta must lie in (0,1)");
  const double net = d * std::log(1.0 + 2.0 / delta);
  return {log_binomial(p, d) + net, d + d * std::log(p / d) + net};
}

}  // namespace spca
