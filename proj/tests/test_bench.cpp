#include "qcde/bench.hpp"
#include "qcde/csv.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <stdexcept>

using namespace qcde;

namespace {

Fitter stub(std::function<Estimate(const SimulationModel&, double, double)> f,
            double theta = 100.0)
{
  return [f, theta](const PairedSample&) -> PointEstimator {
    const SimulationModel model(theta);
    return [f, model](double x, double y) { return f(model, x, y); };
  };
}

EstimatorConfig product_qc(BandwidthRule h, BandwidthRule a)
{
  EstimatorConfig e;
  e.label = "qc";
  e.method = Method::quantile_copula;
  e.qc.h = h;
  e.qc.a = a;
  e.qc.copula_mode = ProductKernelMode{ KernelSpec(KernelFamily::epanechnikov) };
  return e;
}

} // namespace

TEST_CASE("config parsing")
{
  const auto cfg = parse_experiment_config(R"({
    "model": {"theta": 50, "marginal": "normal"},
    "estimators": [
      "qc",
      {"label": "qc_prod", "method": "qc", "copula_kernel": "epanechnikov",
       "h": {"rule": "power", "c": 1, "alpha": 0.2}, "a": 0.3},
      {"method": "dk", "h1": 0.5, "h2": "scott1d",
       "clipping": {"threshold": 0.001, "fallback": "zero"}},
      {"label": "ll0", "method": "ll", "degree": 0, "clipping": "none",
       "x_kernel": "gaussian"}
    ],
    "grid": {"xmin": -2, "xmax": 2, "nx": 5, "ymin": -1, "ymax": 1, "ny": 3},
    "ns": [100, 200],
    "reps": 4,
    "base_seed": 17,
    "points": [[0, 0], [1, -0.5]],
    "a_values": [0.3, 0.2],
    "slice_x": 1.5
  })");
  CHECK(cfg.theta == 50.0);
  REQUIRE(cfg.estimators.size() == 4);
  CHECK(cfg.estimators[0].label == "qc");
  CHECK(std::holds_alternative<BetaKernelMode>(cfg.estimators[0].qc.copula_mode));
  CHECK(cfg.estimators[1].label == "qc_prod");
  CHECK(cfg.estimators[1].qc.h == BandwidthRule(PowerRule{ 1.0, 0.2 }));
  CHECK(cfg.estimators[1].qc.a == BandwidthRule(FixedBandwidth{ 0.3 }));
  CHECK(std::holds_alternative<ProductKernelMode>(
    cfg.estimators[1].qc.copula_mode));
  CHECK(cfg.estimators[2].label == "dk");
  CHECK(cfg.estimators[2].ratio.h1 == BandwidthRule(FixedBandwidth{ 0.5 }));
  CHECK(cfg.estimators[2].ratio.clipping.threshold_value() == 0.001);
  CHECK(cfg.estimators[2].ratio.clipping.fallback() == ClipFallback::zero);
  CHECK(cfg.estimators[3].ratio.degree == 0);
  CHECK_FALSE(cfg.estimators[3].ratio.clipping.enabled());
  CHECK(cfg.estimators[3].ratio.x_kernel ==
        KernelSpec(KernelFamily::gaussian));
  CHECK(cfg.grid.nx == 5);
  CHECK(cfg.grid.ymax == 1.0);
  CHECK(cfg.ns == std::vector<std::size_t>{ 100, 200 });
  CHECK(cfg.reps == 4);
  CHECK(cfg.base_seed == 17);
  REQUIRE(cfg.points.size() == 2);
  CHECK(cfg.points[1].y == -0.5);
  CHECK(cfg.a_values == std::vector<double>{ 0.3, 0.2 });
  CHECK(cfg.slice_x == 1.5);
}

TEST_CASE("config defaults")
{
  const auto cfg = parse_experiment_config("{}");
  CHECK(cfg.theta == 100.0);
  REQUIRE(cfg.estimators.size() == 3);
  CHECK(cfg.estimators[0].label == "qc");
  CHECK(cfg.estimators[1].label == "dk");
  CHECK(cfg.estimators[2].label == "ll");
  CHECK_FALSE(cfg.estimators[1].ratio.clipping.enabled());
  CHECK(cfg.estimators[2].ratio.clipping.threshold_value() == 1e-5);
  CHECK(cfg.estimators[2].ratio.clipping.fallback() ==
        ClipFallback::marginal_kde);
  CHECK(cfg.grid.nx == 101);
  CHECK(cfg.grid.ny == 61);
  CHECK(cfg.ns == std::vector<std::size_t>{ 100 });
}

TEST_CASE("config errors")
{
  for (const char* bad : {
         "not json",
         "[]",
         R"({"bogus": 1})",
         R"({"model": {"theta": 100, "marginal": "t3"}})",
         R"({"model": {"theta": 1}})",
         R"({"ns": [200, 100]})",
         R"({"ns": []})",
         R"({"reps": 0})",
         R"({"estimators": ["kernel"]})",
         R"({"estimators": [{"method": "qc", "h": "silverman"}]})",
         R"({"estimators": [{"method": "ll", "degree": 2}]})",
         R"({"estimators": [{"method": "dk", "clipping": {"fallback": "x"}}]})",
         R"({"estimators": [{"method": "dk", "colour": 1}]})",
         R"({"estimators": ["qc", "qc"]})",
         R"({"grid": {"nx": 0}})",
         R"({"points": [[1, 2, 3]]})",
         R"({"a_values": [0.1, -0.2]})" }) {
    CAPTURE(bad);
    CHECK_THROWS_AS(parse_experiment_config(bad), ConfigError);
  }
}

TEST_CASE("single replicate aggregation")
{
  ExperimentConfig cfg;
  cfg.ns = { 50 };
  cfg.reps = 1;
  cfg.points = { { 0.0, 0.0 } };
  const auto report = run_convergence(
    cfg, stub([](const SimulationModel& m, double x, double y) -> Estimate {
      return m.conditional_density(x, y) + 0.125;
    }));
  REQUIRE(report.rows.size() == 1);
  CHECK(report.rows[0].median_abs_err == doctest::Approx(0.125));
  CHECK(report.rows[0].rmse == doctest::Approx(0.125));
  CHECK(report.rows[0].bias == doctest::Approx(0.125));
  CHECK(report.rows[0].variance == 0.0);
  CHECK(report.rows[0].undefined_count == 0);
  REQUIRE(report.slopes.size() == 1);
  CHECK_FALSE(report.slopes[0].rmse_fit.has_value());
}

TEST_CASE("perfect and undefined stubs")
{
  ExperimentConfig cfg;
  cfg.ns = { 100, 200, 400 };
  cfg.reps = 3;
  cfg.points = { { 0.0, 0.0 }, { 1.0, -1.0 } };
  const auto perfect = run_convergence(
    cfg, stub([](const SimulationModel& m, double x, double y) -> Estimate {
      return m.conditional_density(x, y);
    }));
  CHECK(perfect.rows.size() == 6);
  for (const auto& r : perfect.rows) {
    CHECK(r.rmse == 0.0);
    CHECK(r.median_abs_err == 0.0);
  }
  for (const auto& s : perfect.slopes) {
    CHECK_FALSE(s.rmse_fit.has_value());
    CHECK_FALSE(s.median_fit.has_value());
  }

  const auto undefined = run_convergence(
    cfg, stub([](const SimulationModel&, double, double) -> Estimate {
      return std::nullopt;
    }));
  for (const auto& r : undefined.rows) {
    CHECK(r.undefined_count == 3);
    CHECK(std::isnan(r.rmse));
  }
  const auto csv = parse_csv(convergence_csv(undefined));
  CHECK(csv.header == std::vector<std::string>{ "n",
                                                "point_id",
                                                "median_abs_err",
                                                "rmse",
                                                "bias",
                                                "variance",
                                                "undefined_count" });
  CHECK_FALSE(csv.rows[0][csv.column("rmse")].has_value());
}

TEST_CASE("replicate dump re-aggregates to the same report")
{
  ExperimentConfig cfg;
  cfg.ns = { 60, 120 };
  cfg.reps = 3;
  cfg.points = { { 0.0, 0.0 }, { -0.5, 0.7 }, { 4.5, 0.0 } };
  EstimatorConfig dk;
  dk.label = "dk";
  dk.method = Method::double_kernel;
  const auto records = run_replicates(cfg, make_fitter(dk));
  REQUIRE(records.size() == 18);
  const auto dump = replicate_dump_csv(records, cfg.points);
  const auto back = parse_replicate_dump(dump);
  REQUIRE(back.size() == records.size());
  const auto a = aggregate(records);
  const auto b = aggregate(back);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].undefined_count == b[i].undefined_count);
    if (std::isfinite(a[i].rmse)) {
      CHECK(a[i].rmse == b[i].rmse);
      CHECK(a[i].median_abs_err == b[i].median_abs_err);
      CHECK(a[i].variance == b[i].variance);
    }
  }

  // brute-force recomputation for (n = 60, point 0)
  std::vector<double> errs;
  for (const auto& r : records) {
    if (r.n == 60 && r.point_id == 0 && r.estimate) {
      errs.push_back(*r.estimate - r.truth);
    }
  }
  REQUIRE(errs.size() == 3);
  double sq = 0.0;
  for (double e : errs) {
    sq += e * e;
  }
  CHECK(a[0].rmse == doctest::Approx(std::sqrt(sq / 3.0)));
  CHECK(a[0].bias == doctest::Approx((errs[0] + errs[1] + errs[2]) / 3.0));
  CHECK(a[2].undefined_count == 3); // x = 4.5 has an empty window
}

TEST_CASE("reports do not depend on the thread count")
{
  ExperimentConfig cfg;
  cfg.ns = { 100, 200 };
  cfg.reps = 6;
  cfg.points = { { 0.0, 0.0 }, { 1.0, 1.0 } };
  const auto fitter = make_fitter(default_estimators()[0]);
  const auto one = convergence_csv(run_convergence(cfg, fitter, 1));
  const auto four = convergence_csv(run_convergence(cfg, fitter, 4));
  CHECK(one == four);
}

TEST_CASE("variance check scaling")
{
  ExperimentConfig cfg;
  cfg.points = { { 0.0, 0.0 } };
  cfg.ns = { 500, 1000 };
  cfg.reps = 2;
  const auto zero = run_variance_check(
    cfg,
    stub([](const SimulationModel&, double, double) -> Estimate { return 0.3; }),
    variance_scaling_for(product_qc(ScottUnivariate{}, FixedBandwidth{ 0.2 })));
  for (const auto& r : zero) {
    CHECK(r.ratio == 0.0);
    CHECK(r.a == 0.2);
    CHECK(r.theoretical ==
          doctest::Approx(normal_pdf(0.0) * normal_pdf(0.0) *
                          1.40713533460747236 * 0.36));
  }

  cfg.reps = 200;
  const auto e = product_qc(FixedBandwidth{ 0.3 }, FixedBandwidth{ 0.2 });
  const auto rows =
    run_variance_check(cfg, make_fitter(e), variance_scaling_for(e));
  REQUIRE(rows.size() == 2);
  const double halving = rows[0].empirical_variance / rows[1].empirical_variance;
  CAPTURE(halving);
  CHECK(halving > 1.4);
  CHECK(halving < 2.8);

  CHECK_THROWS_AS(variance_scaling_for(default_estimators()[0]),
                  std::invalid_argument);
  CHECK_THROWS_AS(
    variance_scaling_for(product_qc(ScottUnivariate{}, ScottBivariate{})),
    std::invalid_argument);
  CHECK_THROWS_AS(variance_scaling_for(default_estimators()[1]),
                  std::invalid_argument);
  const auto power = variance_scaling_for(
    product_qc(ScottUnivariate{}, PowerRule{ 1.0, 1.0 / 6.0 }));
  CHECK(power.a_of_n(64) == doctest::Approx(0.5));
  CHECK(power.kernel_l2_sq == doctest::Approx(0.36));
}

TEST_CASE("bias scaling")
{
  ExperimentConfig cfg;
  cfg.ns = { 300 };
  cfg.reps = 4;
  cfg.a_values = { 0.3, 0.2, 0.1 };
  cfg.points = { { 0.0, 0.0 } };
  const FitterFamily unbiased = [](double) {
    return stub([](const SimulationModel& m, double x, double y) -> Estimate {
      return m.conditional_density(x, y);
    });
  };
  const auto flat = run_bias_scaling(cfg, unbiased);
  REQUIRE(flat.rows.size() == 3);
  for (const auto& r : flat.rows) {
    CHECK(r.bias == 0.0);
  }
  REQUIRE(flat.slopes.size() == 1);
  CHECK_FALSE(flat.slopes[0].fit.has_value());
  CHECK_FALSE(flat.slopes[0].sign_matches);

  // scaled-down sign check: bias at the smallest a follows the copula
  // Laplacian at most interior points
  cfg.ns = { 4000 };
  cfg.reps = 60;
  cfg.a_values = { 0.35, 0.25, 0.18 };
  cfg.points = { { 0.0, 0.0 }, { -1.0, 1.0 }, { 1.0, -1.0 },
                 { 0.5, 0.5 }, { -0.5, -0.5 } };
  const auto e = product_qc(PowerRule{ 1.0, 0.2 }, FixedBandwidth{ 0.2 });
  const auto report = run_bias_scaling(cfg, bias_family(e));
  int matches = 0;
  for (const auto& s : report.slopes) {
    CAPTURE(s.point_id);
    CAPTURE(s.copula_laplacian);
    matches += s.sign_matches ? 1 : 0;
  }
  CHECK(matches >= 4);

  CHECK_THROWS_AS(bias_family(default_estimators()[1]), std::invalid_argument);
  cfg.a_values.clear();
  CHECK_THROWS_AS(run_bias_scaling(cfg, unbiased), std::invalid_argument);
}

TEST_CASE("copula laplacian")
{
  // the independence copula has a flat density
  CHECK(std::abs(copula_laplacian(FrankCopula(1.0 + 1e-8), 0.4, 0.6)) < 1e-6);
  const FrankCopula cop(100.0);
  CHECK(copula_laplacian(cop, 0.5, 0.5) ==
        doctest::Approx(copula_laplacian(cop, 0.5, 0.5, 1e-3)).epsilon(1e-4));
}

TEST_CASE("comparison report")
{
  auto cfg = parse_experiment_config("{}");
  const auto report = run_comparison(cfg);
  CHECK(report.n == 100);
  CHECK(report.xs.size() == 101);
  CHECK(report.ys.size() == 61);
  REQUIRE(report.entries.size() == 3);
  CHECK(report.entries[0].undefined_count == 0);

  const auto sample = sample_xy(SimulationModel(100.0), 100, cfg.base_seed);
  double max_abs_x = 0.0;
  for (double x : sample.xs()) {
    max_abs_x = std::max(max_abs_x, std::abs(x));
  }
  const double h1 = fit_estimator(cfg.estimators[1], sample).primary_bandwidth();
  std::size_t expected = 0;
  const auto& dk = report.entries[1].grid;
  for (std::size_t i = 0; i < report.xs.size(); ++i) {
    if (std::abs(report.xs[i]) > max_abs_x + h1) {
      for (std::size_t j = 0; j < report.ys.size(); ++j) {
        CHECK_FALSE(dk.at(i, j).has_value());
      }
      expected += report.ys.size();
    }
  }
  CHECK(expected > 0);
  CHECK(report.entries[1].undefined_count >= expected);
  std::size_t common = 0;
  for (std::size_t c = 0; c < report.truth.size(); ++c) {
    bool all = true;
    for (const auto& e : report.entries) {
      all = all && e.grid.values[c].has_value();
    }
    common += all ? 1 : 0;
  }
  CHECK(report.common_cells == common);
  for (const auto& e : report.entries) {
    CHECK(std::isfinite(e.ise));
    CHECK(e.ise >= 0.0);
  }

  const auto slice = parse_csv(slice_csv(report));
  CHECK(slice.header ==
        std::vector<std::string>{ "y", "truth", "qc", "dk", "ll" });
  CHECK(slice.rows.size() == 61);

  const auto j = nlohmann::json::parse(comparison_summary_json(report));
  CHECK(j["n"] == 100);
  CHECK(j["estimators"].size() == 3);
  CHECK(j["estimators"][0]["undefined_count"] == 0);

  const auto g = parse_csv(
    grid_csv(report.xs, report.ys, report.entries[0].grid.values, "estimate"));
  CHECK(g.rows.size() == 101 * 61);
  CHECK(g.header == std::vector<std::string>{ "x", "y", "estimate" });
}
