#pragma once

#include "qcde/conditional_density.hpp"
#include "qcde/numerics.hpp"
#include "qcde/simulation.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qcde {

struct EvalPoint
{
  double x;
  double y;
};

//! One estimator of the comparison: method plus its tuning.
struct EstimatorConfig
{
  std::string label; // file-name suffix; defaults to the method name
  Method method = Method::quantile_copula;
  QuantileCopulaOptions qc;
  RatioOptions ratio;
};

ConditionalDensityEstimator fit_estimator(const EstimatorConfig& cfg,
                                          const PairedSample& sample);

struct GridSpec
{
  double xmin = -5.0;
  double xmax = 5.0;
  std::size_t nx = 101;
  double ymin = -3.0;
  double ymax = 3.0;
  std::size_t ny = 61;
};

struct ExperimentConfig
{
  double theta = 100.0;
  std::vector<EstimatorConfig> estimators;
  GridSpec grid;
  std::vector<std::size_t> ns{ 100 };
  std::size_t reps = 1;
  std::uint64_t base_seed = 1;
  std::vector<EvalPoint> points{ { 0.0, 0.0 } };
  std::vector<double> a_values; // bias scaling only
  double slice_x = 2.0;

  //! Throws std::invalid_argument on an inconsistent configuration.
  void validate() const;
};

class ConfigError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

//! The three estimators of the paper-style comparison: quantile-copula with
//! beta copula kernel and Scott's rules, unclipped double kernel, and local
//! linear clipped at 1e-5 with the marginal KDE as fallback.
std::vector<EstimatorConfig> default_estimators();

//! Parses the JSON experiment schema (model{theta, marginal}, estimators[],
//! grid{...}, ns[], reps, base_seed, plus optional points[], a_values[],
//! slice_x). Throws ConfigError with a one-line message.
ExperimentConfig parse_experiment_config(std::string_view json_text);

using PointEstimator = std::function<Estimate(double x, double y)>;
using Fitter = std::function<PointEstimator(const PairedSample&)>;

Fitter make_fitter(const EstimatorConfig& cfg);

//! Seed of replicate r; identical for every sample size.
inline std::uint64_t replicate_seed(std::uint64_t base_seed, std::size_t rep)
{
  return base_seed + rep;
}

struct ReplicateRecord
{
  std::size_t n;
  std::size_t rep;
  std::size_t point_id;
  Estimate estimate;
  double truth;
};

//! Raw per-replicate evaluations, ordered by (n, rep, point_id).
std::vector<ReplicateRecord> run_replicates(const ExperimentConfig& cfg,
                                            const Fitter& fitter,
                                            unsigned threads = 1);

struct ConvergenceRow
{
  std::size_t n;
  std::size_t point_id;
  double median_abs_err;
  double rmse;
  double bias;
  double variance;
  std::size_t undefined_count;
};

struct PointSlope
{
  std::size_t point_id;
  std::optional<LinearFit> rmse_fit;   // log rmse on log n
  std::optional<LinearFit> median_fit; // log median |err| on log n
};

struct ConvergenceReport
{
  std::vector<ConvergenceRow> rows;
  std::vector<PointSlope> slopes;
};

//! Pure function of the dump: undefined estimates are counted and left out
//! of the error statistics.
std::vector<ConvergenceRow> aggregate(std::span<const ReplicateRecord> records);

//! Log-log fits per point. A fit is absent (degenerate) when fewer than two
//! sample sizes are present or an error level is zero or non-finite.
std::vector<PointSlope> fit_rate_slopes(std::span<const ConvergenceRow> rows);

ConvergenceReport run_convergence(const ExperimentConfig& cfg,
                                  const Fitter& fitter,
                                  unsigned threads = 1);

//! Constants of the asymptotic variance g(y) f(y|x) ||K||^2 / (n a_n^2).
struct VarianceScaling
{
  //! Copula bandwidth as a function of n.
  std::function<double(std::size_t)> a_of_n;
  //! ||K_1||^2 ||K_2||^2 of the product kernel.
  double kernel_l2_sq;
};

//! Requires a quantile-copula config with a product copula kernel and a
//! power or fixed copula bandwidth rule.
VarianceScaling variance_scaling_for(const EstimatorConfig& cfg);

struct VarianceRow
{
  std::size_t n;
  std::size_t point_id;
  double a;
  double empirical_variance;
  double scaled_variance; // empirical_variance * n * a^2
  double theoretical;     // g(y) f(y|x) ||K||^2
  double ratio;           // scaled_variance / theoretical
  std::size_t undefined_count;
};

std::vector<VarianceRow> run_variance_check(const ExperimentConfig& cfg,
                                            const Fitter& fitter,
                                            const VarianceScaling& scaling,
                                            unsigned threads = 1);

//! Builds a fitter whose copula bandwidth is fixed to a.
using FitterFamily = std::function<Fitter(double a)>;
FitterFamily bias_family(const EstimatorConfig& cfg);

struct BiasRow
{
  std::size_t n;
  double a;
  std::size_t point_id;
  double mean_estimate;
  double truth;
  double bias;
  double bias_stderr;
  std::size_t undefined_count;
};

struct BiasSlope
{
  std::size_t n;
  std::size_t point_id;
  std::optional<LinearFit> fit; // log |bias| on log a
  double copula_laplacian;      // c_uu + c_vv at (F(x), G(y))
  bool sign_matches;            // sign of bias at the smallest a
};

struct BiasReport
{
  std::vector<BiasRow> rows;
  std::vector<BiasSlope> slopes;
};

//! Each replicate draws one sample per n and refits it for every a in
//! cfg.a_values, so the a-comparison uses common random numbers.
BiasReport run_bias_scaling(const ExperimentConfig& cfg,
                            const FitterFamily& family,
                            unsigned threads = 1);

//! c_uu + c_vv by centered second differences of the copula density.
double copula_laplacian(const FrankCopula& cop,
                        double u,
                        double v,
                        double delta = 1e-4);

struct ComparisonEntry
{
  std::string label;
  EstimateGrid grid;
  std::size_t undefined_count;
  double ise; // over cells where every estimator is defined
};

struct ComparisonReport
{
  std::size_t n;
  std::uint64_t seed;
  std::vector<double> xs;
  std::vector<double> ys;
  std::vector<double> truth; // row-major like EstimateGrid
  std::vector<ComparisonEntry> entries;
  double slice_x;
  std::vector<double> slice_truth;
  std::vector<std::vector<Estimate>> slice_estimates; // per entry
  std::size_t common_cells;
};

ComparisonReport run_comparison(const ExperimentConfig& cfg,
                                unsigned threads = 1);

// Serialization, 17 significant digits throughout.
std::string grid_csv(std::span<const double> xs,
                     std::span<const double> ys,
                     std::span<const Estimate> values,
                     std::string_view value_column);
std::string slice_csv(const ComparisonReport& report);
std::string comparison_summary_json(const ComparisonReport& report);

std::string convergence_csv(const ConvergenceReport& report);
std::string convergence_summary_json(
  const std::vector<std::pair<std::string, ConvergenceReport>>& reports,
  const ExperimentConfig& cfg);

std::string replicate_dump_csv(std::span<const ReplicateRecord> records,
                               std::span<const EvalPoint> points);
std::vector<ReplicateRecord> parse_replicate_dump(std::string_view csv_text);

std::string variance_csv(std::span<const VarianceRow> rows);
std::string bias_csv(const BiasReport& report);
std::string bias_summary_json(const BiasReport& report);

} // namespace qcde
