#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "spca/estimators.hpp"
#include "spca/model.hpp"

namespace spca {

struct GridPoint {
  Index n = 0;
  Index p = 0;
};

struct ExperimentConfig {
  ModelSpec model;
  SparsityClass sparsity;
  EstimatorConfig estimator;
  std::vector<GridPoint> grid;
  int replicates = 1;
  std::uint64_t base_seed = 0;
  std::string output_path;
  int threads = 1;      ///< 0 uses every hardware thread
  bool timing = false;  ///< false writes wall_time_ms = 0 so reruns are byte-identical

  void validate() const;
};

/// Parses the JSON document {model, sparsity, estimator, grid, replicates,
/// base_seed, output_path, threads, timing}. Missing estimator.rho_q and
/// estimator.q default to the sparsity block; missing model.q and model.Rq
/// likewise. Throws PreconditionError on malformed input.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
std::string to_json(const ExperimentConfig& cfg);

struct ExperimentRecord {
  Index n = 0;
  Index p = 0;
  double q = 0;
  double Rq = 0;
  Method method = Method::plain_pca;
  int replicate = 0;
  std::uint64_t seed = 0;
  double loss = 0;
  double loss_sq = 0;
  double objective = 0;
  double wall_time_ms = 0;
  std::string status = "ok";

  bool ok() const { return status == "ok"; }
};

inline constexpr const char* kCsvHeader =
    "n,p,q,Rq,method,replicate,seed,loss,loss_sq,objective,wall_time_ms,status";

/// One CSV line without the trailing newline. Reals use 17 significant digits.
std::string to_csv_row(const ExperimentRecord& r);

/// Runs replicates × grid records. Replicate r at grid index g uses seed
/// base_seed ⊕ mix64(g·2³² + r) for both sampling and estimator restarts.
/// Replicates of a grid point run in parallel; each finished grid point is
/// appended to output_path (header first, file truncated at start) in one
/// write. Estimator failures become rows with status ≠ ok.
std::vector<ExperimentRecord> run_experiment(const ExperimentConfig& cfg);

enum class RateAxis { n, p };
enum class RateMoment { mean_loss, mean_loss_sq };

struct RateFit {
  double slope = 0;
  double intercept = 0;
  double stderr_slope = 0;
  double r2 = 0;
  double target_exponent = 0;
  double tolerance = 0;
  bool pass = false;
  std::vector<double> xs;       ///< distinct x values, ascending
  std::vector<double> moments;  ///< moment at each x
};

/// OLS of log(moment) on log(x) over status-ok records. Requires at least 4
/// distinct x values with at least `min_replicates` records each.
RateFit fit_rate(const std::vector<ExperimentRecord>& records, RateAxis axis, RateMoment moment,
                 double target_exponent, double tolerance, int min_replicates = 30);

/// The same regression on explicit points.
RateFit fit_loglog(const std::vector<double>& xs, const std::vector<double>& ys, double target_exponent,
                   double tolerance);

}  // namespace spca
