#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "spca/error.hpp"
#include "spca/harness.hpp"

using namespace spca;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<ExperimentRecord> synthetic(const std::vector<double>& ns, int reps, auto&& loss_sq) {
  std::vector<ExperimentRecord> out;
  for (double n : ns) {
    for (int r = 0; r < reps; ++r) {
      ExperimentRecord rec;
      rec.n = static_cast<Index>(n);
      rec.p = 32;
      rec.loss_sq = loss_sq(n, r);
      rec.loss = std::sqrt(rec.loss_sq);
      rec.replicate = r;
      out.push_back(rec);
    }
  }
  return out;
}

const char* kSmallConfig = R"({
  "model": {"p": 8, "lambda1": 2, "lambda2": 1, "theta1_pattern": "first_k_equal", "sampler": "gaussian"},
  "sparsity": {"q": 0, "Rq": 2, "alpha": 1, "kappa": 0.1},
  "estimator": {"method": "plain_pca"},
  "grid": [{"n": 50, "p": 8}],
  "replicates": 1,
  "base_seed": 99
})";

}  // namespace

TEST_CASE("parse_config") {
  const ExperimentConfig cfg = parse_config(kSmallConfig);
  CHECK(cfg.model.p == 8);
  CHECK(cfg.estimator.method == Method::plain_pca);
  CHECK(cfg.estimator.rho_q == 2.0);
  CHECK(cfg.base_seed == 99);
  CHECK(cfg.grid.size() == 1);
  const ExperimentConfig again = parse_config(to_json(cfg));
  CHECK(to_json(again) == to_json(cfg));

  CHECK_THROWS_AS(parse_config("{"), PreconditionError);
  CHECK_THROWS_AS(parse_config(R"({"grid": []})"), PreconditionError);
  CHECK_THROWS_AS(parse_config(R"({"grid": [{"n": 10, "p": 4}], "replicates": 0})"), PreconditionError);
  CHECK_THROWS_AS(parse_config(R"({"grid": [{"n": 10, "p": 4}], "estimator": {"method": "sdp"}})"),
                  PreconditionError);
}

TEST_CASE("run_experiment: single record, determinism, conservation") {
  ExperimentConfig cfg = parse_config(kSmallConfig);
  const auto recs = run_experiment(cfg);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].ok());
  CHECK(recs[0].loss >= 0.0);
  CHECK(recs[0].loss <= std::sqrt(2.0));
  CHECK(std::abs(recs[0].loss_sq - recs[0].loss * recs[0].loss) <= 1e-12);

  const auto dir = std::filesystem::temp_directory_path();
  cfg.grid = {{40, 8}, {80, 8}, {80, 12}};
  cfg.replicates = 5;
  cfg.estimator.method = Method::l0_exact;
  cfg.output_path = (dir / "spca_harness_a.csv").string();
  cfg.threads = 1;
  const auto a = run_experiment(cfg);
  const std::string csv_a = slurp(cfg.output_path);
  cfg.output_path = (dir / "spca_harness_b.csv").string();
  cfg.threads = 4;
  run_experiment(cfg);
  const std::string csv_b = slurp(cfg.output_path);
  CHECK(a.size() == 15);
  CHECK(csv_a == csv_b);
  CHECK(csv_a.rfind(std::string(kCsvHeader) + "\n", 0) == 0);
  CHECK(std::count(csv_a.begin(), csv_a.end(), '\n') == 16);
}

TEST_CASE("run_experiment: noiseless spike and failure rows") {
  ExperimentConfig cfg = parse_config(kSmallConfig);
  cfg.model.lambda2 = 0;
  cfg.replicates = 4;
  for (Method m : {Method::plain_pca, Method::l0_exact, Method::l0_truncated_power, Method::lq_projected}) {
    cfg.estimator.method = m;
    cfg.estimator.q = m == Method::lq_projected ? 1.0 : 0.0;
    for (const auto& r : run_experiment(cfg)) CHECK(r.loss <= 1e-6);
  }

  cfg.model.lambda2 = 1;
  cfg.estimator.method = Method::l0_exact;
  cfg.estimator.max_supports = 10;
  cfg.replicates = 3;
  const auto recs = run_experiment(cfg);
  REQUIRE(recs.size() == 3);
  for (const auto& r : recs) CHECK(r.status == "budget_exceeded");
}

TEST_CASE("fit_rate on synthetic power laws") {
  const std::vector<double> ns{200, 400, 800, 1600, 3200, 6400};
  const auto exact = synthetic(ns, 30, [](double n, int) { return 4.0 / n; });
  const RateFit f = fit_rate(exact, RateAxis::n, RateMoment::mean_loss_sq, -1.0, 0.02);
  CHECK(f.slope == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  CHECK(f.pass);
  CHECK(f.r2 == doctest::Approx(1.0));

  std::mt19937_64 rng(71);
  std::normal_distribution<double> z(0.0, 0.01);
  const auto noisy = synthetic(ns, 30, [&](double n, int) { return 3.0 * std::pow(n, -0.5) * (1.0 + z(rng)); });
  const RateFit g = fit_rate(noisy, RateAxis::n, RateMoment::mean_loss_sq, -0.5, 0.02);
  CHECK(g.pass);
  CHECK(std::abs(g.slope + 0.5) <= 0.02);

  const auto flat = synthetic(ns, 30, [](double, int) { return 0.3; });
  CHECK(fit_rate(flat, RateAxis::n, RateMoment::mean_loss, 0.0, 0.01).pass);
  CHECK_FALSE(fit_rate(flat, RateAxis::n, RateMoment::mean_loss, -0.5, 0.01).pass);

  CHECK_THROWS_AS(fit_rate(synthetic({1, 2, 3}, 30, [](double, int) { return 1.0; }), RateAxis::n,
                           RateMoment::mean_loss, 0, 1),
                  PreconditionError);
  CHECK_THROWS_AS(fit_rate(synthetic(ns, 10, [](double, int) { return 1.0; }), RateAxis::n, RateMoment::mean_loss,
                           0, 1),
                  PreconditionError);
}
