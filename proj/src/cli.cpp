#include "spca/cli.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "spca/deviation.hpp"
#include "spca/harness.hpp"
#include "spca/theory.hpp"

namespace spca {

using json = nlohmann::json;

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "csv";
};

// Writes to --out when given, else to the console stream.
void emit(const Globals& g, std::ostream& console, const std::string& text) {
  if (g.out.empty()) {
    console << text;
    return;
  }
  std::ofstream f(g.out, std::ios::trunc);
  if (!f) throw Error("cannot open output '" + g.out + "'");
  f << text;
}

std::string num(double x) {
  std::ostringstream os;
  os << std::setprecision(6) << x;
  return os.str();
}

struct RatesArgs {
  double q = 0;
  double p = 0;
  double n = 0;
  std::optional<double> rbar;
  std::optional<double> radius;
  std::optional<double> sigma2;
  std::optional<double> sigma_tilde;
  std::optional<double> lambda1;
  std::optional<double> lambda2;
  double C = 0.1;
};

std::string run_rates(const RatesArgs& a, const Globals& g) {
  if (a.rbar.has_value() == a.radius.has_value()) throw PreconditionError("rates: give exactly one of --rbar, --R");
  RateQuery rq;
  rq.q = a.q;
  rq.p = a.p;
  rq.n = a.n;
  rq.radius = a.radius ? *a.radius : *a.rbar + 1.0;
  const bool have_lambdas = a.lambda1 && a.lambda2;
  if (have_lambdas) {
    const NoiseScales ns = noise_scales(*a.lambda1, *a.lambda2);
    rq.sigma2 = ns.sigma2;
    rq.sigma_tilde = ns.sigma_tilde;
  }
  if (a.sigma2) rq.sigma2 = *a.sigma2;
  if (a.sigma_tilde) rq.sigma_tilde = *a.sigma_tilde;
  if (!a.sigma2 && !have_lambdas) throw PreconditionError("rates: need --sigma2 or --lambda1/--lambda2");

  struct Row {
    std::string name;
    double value;
    std::string flag;
  };
  std::vector<Row> rows;
  auto flag_of = [](const RateValue& v) {
    return !v.in_regime ? std::string("out_of_regime") : v.clamped ? std::string("clamped") : std::string("ok");
  };
  const RateValue lb = lower_bound_rate(rq);
  rows.push_back({"lower_bound_rate", lb.value, flag_of(lb)});
  if (a.sigma_tilde || have_lambdas) {
    const RateValue ub = upper_bound_rate(rq);
    rows.push_back({"upper_bound_rate", ub.value, flag_of(ub) + ":" + ub.branch});
  }
  const EpsilonStar es = epsilon_star(rq.q, rq.p, rq.rbar(), rq.sigma2, rq.n, a.C);
  rows.push_back({"epsilon_star", es.epsilon,
                  !es.in_regime ? "out_of_regime" : es.clamped ? "clamped" : "ok"});
  if (have_lambdas) {
    LowerBoundOptions opts;
    if (g.seed) opts.vg.seed = *g.seed;
    const auto cert = assemble_lower_bound(rq.q, static_cast<Index>(rq.p), rq.n, rq.radius, *a.lambda1,
                                           *a.lambda2, a.C, opts);
    rows.push_back({"fano_bound", cert.bound, cert.vacuous ? "vacuous" : "ok"});
    rows.push_back({"packing_log_card", cert.packing.log_card, "ok"});
    rows.push_back({"kl_max", cert.kl_max, "ok"});
  }

  std::ostringstream os;
  if (g.format == "json") {
    json j = json::object();
    for (const auto& r : rows) j[r.name] = {{"value", r.value}, {"flag", r.flag}};
    os << j.dump(2) << '\n';
  } else {
    os << "quantity,value,flag\n";
    for (const auto& r : rows) os << r.name << ',' << num(r.value) << ',' << r.flag << '\n';
  }
  return os.str();
}

std::string run_pack(Index p, double q, double R, double eps, const Globals& g) {
  VgOptions vg;
  if (g.seed) vg.seed = *g.seed;
  const PackingSet ps = packing_set(p, q, R, eps, vg);
  const json j = {{"epsilon", ps.epsilon},     {"d", ps.d},
                  {"card", ps.vectors.size()}, {"log_card", ps.log_card},
                  {"card_bound", ps.card_bound}, {"min_sep", ps.min_sep},
                  {"max_sep", ps.max_sep},     {"max_lq_norm", ps.max_lq_norm}};
  return j.dump(2) + "\n";
}

std::string run_verify(DeviationSweep sw, const Globals& g) {
  if (g.seed) sw.seed = *g.seed;
  const auto rows = run_deviation_sweep(sw);
  std::ostringstream os;
  if (g.format == "json") {
    json arr = json::array();
    for (const auto& r : rows) {
      arr.push_back({{"kind", to_string(r.report.kind)}, {"p", r.p}, {"n", r.n}, {"param", r.param},
                     {"value", r.report.value}, {"bound", r.report.bound}, {"ratio", r.report.ratio},
                     {"seed", r.seed}});
    }
    os << arr.dump(2) << '\n';
  } else {
    os << std::setprecision(17) << "kind,p,n,param,value,bound,ratio,seed\n";
    for (const auto& r : rows) {
      os << to_string(r.report.kind) << ',' << r.p << ',' << r.n << ',' << r.param << ',' << r.report.value << ','
         << r.report.bound << ',' << r.report.ratio << ',' << r.seed << '\n';
    }
  }
  return os.str();
}

std::string run_simulate(ExperimentConfig cfg, std::optional<int> threads, const Globals& g, std::ostream& out) {
  if (g.seed) cfg.base_seed = *g.seed;
  if (threads) cfg.threads = *threads;
  const bool json_out = g.format == "json";
  if (!g.out.empty() && !json_out) cfg.output_path = g.out;
  if (json_out) cfg.output_path.clear();
  const auto records = run_experiment(cfg);
  if (json_out) {
    json arr = json::array();
    for (const auto& r : records) {
      arr.push_back({{"n", r.n}, {"p", r.p}, {"q", r.q}, {"Rq", r.Rq}, {"method", to_string(r.method)},
                     {"replicate", r.replicate}, {"seed", r.seed}, {"loss", r.loss}, {"loss_sq", r.loss_sq},
                     {"objective", r.objective}, {"wall_time_ms", r.wall_time_ms}, {"status", r.status}});
    }
    emit(g, out, arr.dump(2) + "\n");
  } else if (cfg.output_path.empty()) {
    std::string text = std::string(kCsvHeader) + "\n";
    for (const auto& r : records) text += to_csv_row(r) + "\n";
    out << text;
  }
  return {};
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sparse PCA estimators, minimax rate tools and Monte Carlo harness", "spca"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "Base seed");
  app.add_option("--out", g.out, "Output file (default: stdout)");
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"csv", "json"}));

  auto* sim = app.add_subcommand("simulate", "Run a Monte Carlo experiment from a JSON config");
  std::string config_path;
  std::optional<int> threads;
  sim->add_option("config", config_path, "Experiment config file")->required();
  sim->add_option("--threads", threads, "Worker threads (0 = all hardware threads)");

  auto* rates = app.add_subcommand("rates", "Evaluate rate formulas and the Fano pipeline");
  RatesArgs ra;
  rates->add_option("--q", ra.q)->required();
  rates->add_option("--p", ra.p)->required();
  rates->add_option("--n", ra.n)->required();
  rates->add_option("--rbar", ra.rbar, "Rbar_q = R_q - 1");
  rates->add_option("--R", ra.radius, "R_q");
  rates->add_option("--sigma2", ra.sigma2);
  rates->add_option("--sigma-tilde", ra.sigma_tilde);
  rates->add_option("--lambda1", ra.lambda1);
  rates->add_option("--lambda2", ra.lambda2);
  rates->add_option("--C", ra.C, "Packing radius constant in (0,1)");

  auto* verify = app.add_subcommand("verify", "Deviation-statistic ratio sweeps");
  std::string kind;
  DeviationSweep sw;
  verify->add_option("kind", kind, "linf | l0_quad | l1_quad")->required();
  verify->add_option("--n", sw.ns, "Sample sizes")->delimiter(',');
  verify->add_option("--p", sw.ps, "Dimensions")->delimiter(',');
  verify->add_option("--reps", sw.replicates);
  verify->add_option("--param", sw.param, "d for l0_quad, R1 for l1_quad");
  verify->add_option("--lambda1", sw.lambda1);
  verify->add_option("--lambda2", sw.lambda2);
  verify->add_option("--restarts", sw.restarts);
  verify->add_option("--threads", sw.threads);

  auto* pack = app.add_subcommand("pack", "Build and certify a local packing set");
  Index pp = 0;
  double pq = 0, pR = 0, peps = 0;
  pack->add_option("--p", pp)->required();
  pack->add_option("--q", pq)->required();
  pack->add_option("--R", pR, "R_q")->required();
  pack->add_option("--eps", peps)->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }
  if (*seed_opt) g.seed = seed_value;

  try {
    if (*sim) {
      run_simulate(load_config(config_path), threads, g, out);
    } else if (*rates) {
      emit(g, out, run_rates(ra, g));
    } else if (*verify) {
      sw.kind = deviation_kind_from_string(kind);
      emit(g, out, run_verify(sw, g));
    } else if (*pack) {
      emit(g, out, run_pack(pp, pq, pR, peps, g));
    }
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace spca
