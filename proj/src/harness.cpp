#include "spca/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include "json.hpp"
#include "spca/parallel.hpp"
#include "spca/rng.hpp"

namespace spca {

using json = nlohmann::json;

namespace {

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

VectorPattern pattern_from_json(const json& j) {
  const std::string kind = j.is_string() ? j.get<std::string>() : j.at("kind").get<std::string>();
  if (kind == "first_k_equal") return FirstKEqual{};
  if (kind == "geometric") {
    GeometricDecay g;
    if (j.is_object()) read_opt(j, "rate", g.rate);
    return g;
  }
  if (kind == "power_decay") {
    PowerDecay d;
    if (j.is_object()) {
      read_opt(j, "exponent", d.exponent);
      read_opt(j, "head", d.head);
      read_opt(j, "support", d.support);
    }
    return d;
  }
  if (kind == "least_favorable") {
    LeastFavorable lf;
    if (j.is_object()) read_opt(j, "C", lf.C);
    return lf;
  }
  throw PreconditionError("unknown theta1_pattern '" + kind + "'");
}

json pattern_to_json(const VectorPattern& v) {
  if (std::holds_alternative<FirstKEqual>(v)) return {{"kind", "first_k_equal"}};
  if (const auto* g = std::get_if<GeometricDecay>(&v)) return {{"kind", "geometric"}, {"rate", g->rate}};
  if (const auto* lf = std::get_if<LeastFavorable>(&v)) return {{"kind", "least_favorable"}, {"C", lf->C}};
  const auto& d = std::get<PowerDecay>(v);
  return {{"kind", "power_decay"}, {"exponent", d.exponent}, {"head", d.head}, {"support", d.support}};
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (grid.empty()) throw PreconditionError("config: grid must be non-empty");
  if (replicates < 1) throw PreconditionError("config: replicates must be >= 1");
  if (threads < 0) throw PreconditionError("config: threads must be >= 0");
  if (!(model.lambda1 > model.lambda2 && model.lambda2 >= 0.0)) {
    throw PreconditionError("config: need lambda1 > lambda2 >= 0");
  }
  sparsity.validate();
  estimator.validate();
  for (const auto& g : grid) {
    if (g.n < 2 || g.p < 1) throw PreconditionError("config: grid points need n >= 2 and p >= 1");
  }
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  try {
    const json j = json::parse(text);
    if (j.contains("sparsity")) {
      const json& s = j.at("sparsity");
      read_opt(s, "q", cfg.sparsity.q);
      read_opt(s, "Rq", cfg.sparsity.Rq);
      read_opt(s, "alpha", cfg.sparsity.alpha);
      read_opt(s, "kappa", cfg.sparsity.kappa);
    }
    cfg.model.q = cfg.sparsity.q;
    cfg.model.Rq = cfg.sparsity.Rq;
    if (j.contains("model")) {
      const json& m = j.at("model");
      read_opt(m, "p", cfg.model.p);
      read_opt(m, "lambda1", cfg.model.lambda1);
      read_opt(m, "lambda2", cfg.model.lambda2);
      read_opt(m, "q", cfg.model.q);
      read_opt(m, "Rq", cfg.model.Rq);
      read_opt(m, "seed", cfg.model.seed);
      if (m.contains("theta1_pattern")) cfg.model.theta1_pattern = pattern_from_json(m.at("theta1_pattern"));
      if (m.contains("sampler")) cfg.model.sampler = sampler_kind_from_string(m.at("sampler").get<std::string>());
    }
    cfg.estimator.rho_q = cfg.sparsity.Rq;
    cfg.estimator.q = cfg.sparsity.q;
    if (j.contains("estimator")) {
      const json& e = j.at("estimator");
      if (e.contains("method")) cfg.estimator.method = method_from_string(e.at("method").get<std::string>());
      read_opt(e, "rho_q", cfg.estimator.rho_q);
      read_opt(e, "q", cfg.estimator.q);
      read_opt(e, "max_iter", cfg.estimator.max_iter);
      read_opt(e, "tol", cfg.estimator.tol);
      read_opt(e, "restarts", cfg.estimator.restarts);
      read_opt(e, "seed", cfg.estimator.seed);
      read_opt(e, "max_supports", cfg.estimator.max_supports);
      if (e.contains("init")) cfg.estimator.init = init_kind_from_string(e.at("init").get<std::string>());
    }
    for (const json& g : j.at("grid")) cfg.grid.push_back({g.at("n").get<Index>(), g.at("p").get<Index>()});
    read_opt(j, "replicates", cfg.replicates);
    read_opt(j, "base_seed", cfg.base_seed);
    read_opt(j, "output_path", cfg.output_path);
    read_opt(j, "threads", cfg.threads);
    read_opt(j, "timing", cfg.timing);
  } catch (const json::exception& e) {
    throw PreconditionError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_json(const ExperimentConfig& cfg) {
  json grid = json::array();
  for (const auto& g : cfg.grid) grid.push_back({{"n", g.n}, {"p", g.p}});
  const json j = {
      {"model",
       {{"p", cfg.model.p},
        {"lambda1", cfg.model.lambda1},
        {"lambda2", cfg.model.lambda2},
        {"theta1_pattern", pattern_to_json(cfg.model.theta1_pattern)},
        {"q", cfg.model.q},
        {"Rq", cfg.model.Rq},
        {"sampler", to_string(cfg.model.sampler)},
        {"seed", cfg.model.seed}}},
      {"sparsity",
       {{"q", cfg.sparsity.q}, {"Rq", cfg.sparsity.Rq}, {"alpha", cfg.sparsity.alpha}, {"kappa", cfg.sparsity.kappa}}},
      {"estimator",
       {{"method", to_string(cfg.estimator.method)},
        {"rho_q", cfg.estimator.rho_q},
        {"q", cfg.estimator.q},
        {"max_iter", cfg.estimator.max_iter},
        {"tol", cfg.estimator.tol},
        {"restarts", cfg.estimator.restarts},
        {"init", to_string(cfg.estimator.init)},
        {"seed", cfg.estimator.seed},
        {"max_supports", cfg.estimator.max_supports}}},
      {"grid", grid},
      {"replicates", cfg.replicates},
      {"base_seed", cfg.base_seed},
      {"output_path", cfg.output_path},
      {"threads", cfg.threads},
      {"timing", cfg.timing}};
  return j.dump(2);
}

std::string to_csv_row(const ExperimentRecord& r) {
  std::ostringstream os;
  os << r.n << ',' << r.p << ',' << fmt(r.q) << ',' << fmt(r.Rq) << ',' << to_string(r.method) << ','
     << r.replicate << ',' << r.seed << ',' << fmt(r.loss) << ',' << fmt(r.loss_sq) << ',' << fmt(r.objective)
     << ',' << fmt(r.wall_time_ms) << ',' << r.status;
  return os.str();
}

namespace {

std::string status_of(const std::exception& e) {
  if (dynamic_cast<const BudgetExceeded*>(&e)) return "budget_exceeded";
  if (dynamic_cast<const ConvergenceError*>(&e)) return "convergence_error";
  if (dynamic_cast<const PreconditionError*>(&e)) return "precondition_error";
  return "error";
}

}  // namespace

std::vector<ExperimentRecord> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const int threads = resolve_threads(cfg.threads);
  std::unique_ptr<std::ofstream> out;
  if (!cfg.output_path.empty()) {
    out = std::make_unique<std::ofstream>(cfg.output_path, std::ios::trunc);
    if (!*out) throw Error("cannot open output '" + cfg.output_path + "'");
    *out << kCsvHeader << '\n';
    out->flush();
  }

  std::vector<ExperimentRecord> all;
  const auto reps = static_cast<std::size_t>(cfg.replicates);
  for (std::size_t g = 0; g < cfg.grid.size(); ++g) {
    const GridPoint gp = cfg.grid[g];
    const SpikedModel model = cfg.model.build(gp.p, gp.n);
    auto root = std::make_shared<const Eigen::MatrixXd>(psd_sqrt(model.covariance()));

    std::vector<ExperimentRecord> batch(reps);
    parallel_for(reps, threads, [&](std::size_t r) {
      ExperimentRecord& rec = batch[r];
      rec.n = gp.n;
      rec.p = gp.p;
      rec.q = cfg.sparsity.q;
      rec.Rq = cfg.sparsity.Rq;
      rec.method = cfg.estimator.method;
      rec.replicate = static_cast<int>(r);
      rec.seed = replicate_seed(cfg.base_seed, g, r);
      const auto start = std::chrono::steady_clock::now();
      try {
        Sampler sampler(root, cfg.model.sampler_spec(rec.seed));
        const SymMatrix S = sample_covariance(sampler.draw(gp.n));
        EstimatorConfig ec = cfg.estimator;
        ec.seed = stream_seed(cfg.estimator.seed, rec.seed);
        const EstimateResult est = estimate(S, ec);
        rec.loss = projection_loss(est.theta_hat, model.theta1);
        rec.loss_sq = rec.loss * rec.loss;
        rec.objective = est.objective;
      } catch (const Error& e) {
        rec.status = status_of(e);
        rec.loss = rec.loss_sq = rec.objective = std::nan("");
      }
      if (cfg.timing) {
        rec.wall_time_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      }
    });

    if (out) {
      std::string chunk;
      for (const auto& rec : batch) chunk += to_csv_row(rec) + '\n';
      *out << chunk;
      out->flush();
    }
    all.insert(all.end(), batch.begin(), batch.end());
  }
  return all;
}

RateFit fit_loglog(const std::vector<double>& xs, const std::vector<double>& ys, double target, double tol) {
  if (xs.size() != ys.size()) throw DimensionMismatch("fit_loglog: size mismatch");
  if (xs.size() < 3) throw PreconditionError("fit_loglog: need at least 3 points");
  const auto k = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0 && ys[i] > 0.0)) throw PreconditionError("fit_loglog: values must be positive");
    mx += std::log(xs[i]);
    my += std::log(ys[i]);
  }
  mx /= k;
  my /= k;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = std::log(xs[i]) - mx, dy = std::log(ys[i]) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw PreconditionError("fit_loglog: x values must be distinct");
  RateFit f;
  f.xs = xs;
  f.moments = ys;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  const double sse = std::max(0.0, syy - f.slope * sxy);
  f.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  f.stderr_slope = std::sqrt(sse / (k - 2.0) / sxx);
  f.target_exponent = target;
  f.tolerance = tol;
  f.pass = std::abs(f.slope - target) <= tol;
  return f;
}

RateFit fit_rate(const std::vector<ExperimentRecord>& records, RateAxis axis, RateMoment moment, double target,
                 double tol, int min_replicates) {
  std::map<double, std::pair<double, int>> groups;
  for (const auto& r : records) {
    if (!r.ok()) continue;
    const double x = axis == RateAxis::n ? double(r.n) : double(r.p);
    auto& [sum, count] = groups[x];
    sum += moment == RateMoment::mean_loss ? r.loss : r.loss_sq;
    ++count;
  }
  if (groups.size() < 4) throw PreconditionError("fit_rate: need at least 4 distinct x values");
  std::vector<double> xs, ys;
  for (const auto& [x, sc] : groups) {
    if (sc.second < min_replicates) {
      throw PreconditionError("fit_rate: fewer than " + std::to_string(min_replicates) + " replicates at x = " +
                              fmt(x));
    }
    xs.push_back(x);
    ys.push_back(sc.first / sc.second);
  }
  return fit_loglog(xs, ys, target, tol);
}

}  // namespace spca
