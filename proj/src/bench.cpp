#include "qcde/bench.hpp"
#include "json_out.hpp"
#include "qcde/csv.hpp"
#include "qcde/parallel.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <stdexcept>

namespace qcde {

using nlohmann::ordered_json;

ConditionalDensityEstimator fit_estimator(const EstimatorConfig& cfg,
                                          const PairedSample& sample)
{
  switch (cfg.method) {
    case Method::quantile_copula:
      return fit_quantile_copula(sample, cfg.qc);
    case Method::double_kernel:
      return fit_double_kernel(sample, cfg.ratio);
    case Method::local_polynomial:
      return fit_local_polynomial(sample, cfg.ratio);
  }
  throw std::logic_error("fit_estimator: unknown method");
}

std::vector<EstimatorConfig> default_estimators()
{
  EstimatorConfig qc;
  qc.label = "qc";
  qc.method = Method::quantile_copula;

  EstimatorConfig dk;
  dk.label = "dk";
  dk.method = Method::double_kernel;

  EstimatorConfig ll;
  ll.label = "ll";
  ll.method = Method::local_polynomial;
  ll.ratio.clipping =
    ClippingPolicy::threshold(1e-5, ClipFallback::marginal_kde);
  return { qc, dk, ll };
}

void ExperimentConfig::validate() const
{
  FrankCopula check(theta);
  if (ns.empty()) {
    throw std::invalid_argument("config: ns must not be empty");
  }
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (ns[i] < 2) {
      throw std::invalid_argument("config: every n must be at least 2");
    }
    if (i > 0 && ns[i] <= ns[i - 1]) {
      throw std::invalid_argument("config: ns must be strictly increasing");
    }
  }
  if (reps < 1) {
    throw std::invalid_argument("config: reps must be at least 1");
  }
  if (grid.nx < 1 || grid.ny < 1 || !(grid.xmin <= grid.xmax) ||
      !(grid.ymin <= grid.ymax)) {
    throw std::invalid_argument("config: malformed grid");
  }
  for (double a : a_values) {
    if (!(a > 0.0)) {
      throw std::invalid_argument("config: a_values must be positive");
    }
  }
  std::vector<std::string> labels;
  for (const auto& e : estimators) {
    if (e.label.empty() ||
        std::find(labels.begin(), labels.end(), e.label) != labels.end()) {
      throw std::invalid_argument("config: estimator labels must be unique");
    }
    labels.push_back(e.label);
  }
}

namespace {

void check_keys(const nlohmann::json& obj,
                std::initializer_list<std::string_view> allowed,
                std::string_view where)
{
  if (!obj.is_object()) {
    throw ConfigError(fmt::format("config: {} must be an object", where));
  }
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
      throw ConfigError(
        fmt::format("config: unknown key '{}' in {}", it.key(), where));
    }
  }
}

BandwidthRule parse_rule(const nlohmann::json& j, std::string_view where)
{
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "scott1d") {
      return ScottUnivariate{};
    }
    if (s == "scott2d") {
      return ScottBivariate{};
    }
    throw ConfigError(
      fmt::format("config: {}: unknown bandwidth rule '{}'", where, s));
  }
  if (j.is_number()) {
    return FixedBandwidth{ j.get<double>() };
  }
  check_keys(j, { "rule", "h", "c", "alpha" }, where);
  const auto rule = j.at("rule").get<std::string>();
  if (rule == "fixed") {
    return FixedBandwidth{ j.at("h").get<double>() };
  }
  if (rule == "power") {
    return PowerRule{ j.value("c", 1.0), j.at("alpha").get<double>() };
  }
  return parse_rule(nlohmann::json(rule), where);
}

ClippingPolicy parse_clipping(const nlohmann::json& j)
{
  if (j.is_string() && j.get<std::string>() == "none") {
    return ClippingPolicy::none();
  }
  check_keys(j, { "threshold", "fallback" }, "clipping");
  const auto fb = j.value("fallback", std::string("marginal"));
  ClipFallback fallback = ClipFallback::marginal_kde;
  if (fb == "zero") {
    fallback = ClipFallback::zero;
  } else if (fb != "marginal") {
    throw ConfigError("config: clipping fallback must be 'zero' or 'marginal'");
  }
  return ClippingPolicy::threshold(j.value("threshold", 1e-5), fallback);
}

EstimatorConfig parse_estimator(const nlohmann::json& j)
{
  if (j.is_string()) {
    const auto m = method_from_name(j.get<std::string>());
    for (auto& e : default_estimators()) {
      if (e.method == m) {
        return e;
      }
    }
  }
  check_keys(j,
             { "label",
               "method",
               "h",
               "a",
               "marginal_kernel",
               "copula_kernel",
               "h1",
               "h2",
               "x_kernel",
               "y_kernel",
               "clipping",
               "degree" },
             "estimator");
  EstimatorConfig e;
  e.method = method_from_name(j.at("method").get<std::string>());
  for (auto& d : default_estimators()) {
    if (d.method == e.method) {
      e = d;
    }
  }
  e.label = j.value("label", method_name(e.method));
  if (j.contains("h")) {
    e.qc.h = parse_rule(j["h"], "h");
  }
  if (j.contains("a")) {
    e.qc.a = parse_rule(j["a"], "a");
  }
  if (j.contains("marginal_kernel")) {
    e.qc.marginal_kernel =
      kernel_from_name(j["marginal_kernel"].get<std::string>());
  }
  if (j.contains("copula_kernel")) {
    e.qc.copula_mode =
      copula_mode_from_name(j["copula_kernel"].get<std::string>());
  }
  if (j.contains("h1")) {
    e.ratio.h1 = parse_rule(j["h1"], "h1");
  }
  if (j.contains("h2")) {
    e.ratio.h2 = parse_rule(j["h2"], "h2");
  }
  if (j.contains("x_kernel")) {
    e.ratio.x_kernel = kernel_from_name(j["x_kernel"].get<std::string>());
  }
  if (j.contains("y_kernel")) {
    e.ratio.y_kernel = kernel_from_name(j["y_kernel"].get<std::string>());
  }
  if (j.contains("clipping")) {
    e.ratio.clipping = parse_clipping(j["clipping"]);
  }
  if (j.contains("degree")) {
    e.ratio.degree = j["degree"].get<int>();
    if (e.ratio.degree != 0 && e.ratio.degree != 1) {
      throw ConfigError("config: degree must be 0 or 1");
    }
  }
  return e;
}

} // namespace

ExperimentConfig parse_experiment_config(std::string_view json_text)
{
  try {
    const auto j = nlohmann::json::parse(json_text);
    check_keys(j,
               { "model",
                 "estimators",
                 "grid",
                 "ns",
                 "reps",
                 "base_seed",
                 "points",
                 "a_values",
                 "slice_x" },
               "top level");
    ExperimentConfig cfg;
    if (j.contains("model")) {
      const auto& m = j["model"];
      check_keys(m, { "theta", "marginal" }, "model");
      cfg.theta = m.value("theta", 100.0);
      if (m.value("marginal", std::string("normal")) != "normal") {
        throw ConfigError("config: only the 'normal' marginal is supported");
      }
    }
    if (j.contains("estimators")) {
      for (const auto& e : j["estimators"]) {
        cfg.estimators.push_back(parse_estimator(e));
      }
    } else {
      cfg.estimators = default_estimators();
    }
    if (j.contains("grid")) {
      const auto& g = j["grid"];
      check_keys(g, { "xmin", "xmax", "nx", "ymin", "ymax", "ny" }, "grid");
      cfg.grid.xmin = g.value("xmin", cfg.grid.xmin);
      cfg.grid.xmax = g.value("xmax", cfg.grid.xmax);
      cfg.grid.nx = g.value("nx", cfg.grid.nx);
      cfg.grid.ymin = g.value("ymin", cfg.grid.ymin);
      cfg.grid.ymax = g.value("ymax", cfg.grid.ymax);
      cfg.grid.ny = g.value("ny", cfg.grid.ny);
    }
    if (j.contains("ns")) {
      cfg.ns = j["ns"].get<std::vector<std::size_t>>();
    }
    cfg.reps = j.value("reps", cfg.reps);
    cfg.base_seed = j.value("base_seed", cfg.base_seed);
    if (j.contains("points")) {
      cfg.points.clear();
      for (const auto& p : j["points"]) {
        if (!p.is_array() || p.size() != 2) {
          throw ConfigError("config: each point must be [x, y]");
        }
        cfg.points.push_back({ p[0].get<double>(), p[1].get<double>() });
      }
    }
    if (j.contains("a_values")) {
      cfg.a_values = j["a_values"].get<std::vector<double>>();
    }
    cfg.slice_x = j.value("slice_x", cfg.slice_x);
    cfg.validate();
    return cfg;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

Fitter make_fitter(const EstimatorConfig& cfg)
{
  return [cfg](const PairedSample& sample) -> PointEstimator {
    auto est =
      std::make_shared<ConditionalDensityEstimator>(fit_estimator(cfg, sample));
    return [est](double x, double y) { return (*est)(x, y); };
  };
}

std::vector<ReplicateRecord> run_replicates(const ExperimentConfig& cfg,
                                            const Fitter& fitter,
                                            unsigned threads)
{
  cfg.validate();
  const SimulationModel model(cfg.theta);
  const std::size_t np = cfg.points.size();
  std::vector<double> truth(np);
  for (std::size_t p = 0; p < np; ++p) {
    truth[p] = model.conditional_density(cfg.points[p].x, cfg.points[p].y);
  }
  const std::size_t jobs = cfg.ns.size() * cfg.reps;
  std::vector<ReplicateRecord> records(jobs * np);
  parallel_for(jobs, threads, [&](std::size_t job) {
    const std::size_t n = cfg.ns[job / cfg.reps];
    const std::size_t rep = job % cfg.reps;
    const auto sample = sample_xy(model, n, replicate_seed(cfg.base_seed, rep));
    const auto est = fitter(sample);
    for (std::size_t p = 0; p < np; ++p) {
      records[job * np + p] = { n,
                                rep,
                                p,
                                est(cfg.points[p].x, cfg.points[p].y),
                                truth[p] };
    }
  });
  return records;
}

std::vector<ConvergenceRow> aggregate(std::span<const ReplicateRecord> records)
{
  struct Acc
  {
    std::vector<double> estimates;
    std::vector<double> errors;
    std::size_t undefined = 0;
  };
  std::map<std::pair<std::size_t, std::size_t>, Acc> groups;
  for (const auto& r : records) {
    auto& g = groups[{ r.n, r.point_id }];
    if (r.estimate) {
      g.estimates.push_back(*r.estimate);
      g.errors.push_back(*r.estimate - r.truth);
    } else {
      ++g.undefined;
    }
  }
  std::vector<ConvergenceRow> rows;
  rows.reserve(groups.size());
  for (const auto& [key, g] : groups) {
    ConvergenceRow row{ key.first, key.second, NAN, NAN, NAN, NAN, g.undefined };
    if (!g.errors.empty()) {
      std::vector<double> abs_err(g.errors.size());
      double sq = 0.0;
      for (std::size_t i = 0; i < g.errors.size(); ++i) {
        abs_err[i] = std::abs(g.errors[i]);
        sq += g.errors[i] * g.errors[i];
      }
      row.median_abs_err = median(abs_err);
      row.rmse = std::sqrt(sq / static_cast<double>(g.errors.size()));
      row.bias = mean(g.errors);
      row.variance = sample_variance(g.estimates);
    }
    rows.push_back(row);
  }
  return rows;
}

namespace {

std::optional<LinearFit> log_log_fit(const std::vector<double>& x,
                                     const std::vector<double>& y)
{
  if (x.size() < 2) {
    return std::nullopt;
  }
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(y[i] > 0.0) || !std::isfinite(y[i]) || !(x[i] > 0.0)) {
      return std::nullopt;
    }
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return least_squares_line(lx, ly);
}

} // namespace

std::vector<PointSlope> fit_rate_slopes(std::span<const ConvergenceRow> rows)
{
  std::map<std::size_t, std::vector<const ConvergenceRow*>> by_point;
  for (const auto& r : rows) {
    by_point[r.point_id].push_back(&r);
  }
  std::vector<PointSlope> out;
  for (auto& [pid, rs] : by_point) {
    std::sort(rs.begin(), rs.end(), [](auto* l, auto* r) { return l->n < r->n; });
    std::vector<double> ns;
    std::vector<double> rmse;
    std::vector<double> med;
    for (const auto* r : rs) {
      ns.push_back(static_cast<double>(r->n));
      rmse.push_back(r->rmse);
      med.push_back(r->median_abs_err);
    }
    out.push_back({ pid, log_log_fit(ns, rmse), log_log_fit(ns, med) });
  }
  return out;
}

ConvergenceReport run_convergence(const ExperimentConfig& cfg,
                                  const Fitter& fitter,
                                  unsigned threads)
{
  const auto records = run_replicates(cfg, fitter, threads);
  ConvergenceReport report;
  report.rows = aggregate(records);
  report.slopes = fit_rate_slopes(report.rows);
  return report;
}

VarianceScaling variance_scaling_for(const EstimatorConfig& cfg)
{
  if (cfg.method != Method::quantile_copula) {
    throw std::invalid_argument(
      "variance check applies to the quantile-copula estimator");
  }
  const auto* mode = std::get_if<ProductKernelMode>(&cfg.qc.copula_mode);
  if (mode == nullptr) {
    throw std::invalid_argument(
      "variance check needs a product copula kernel, not the beta kernel");
  }
  const BandwidthRule rule = cfg.qc.a;
  std::function<double(std::size_t)> a_of_n;
  if (const auto* p = std::get_if<PowerRule>(&rule)) {
    a_of_n = [p = *p](std::size_t n) {
      return p.constant * std::pow(static_cast<double>(n), -p.exponent);
    };
  } else if (const auto* f = std::get_if<FixedBandwidth>(&rule)) {
    a_of_n = [h = f->h](std::size_t) { return h; };
  } else {
    throw std::invalid_argument(
      "variance check needs a power or fixed copula bandwidth");
  }
  const double l2 = kernel_l2(mode->kernel);
  return { a_of_n, l2 * l2 };
}

std::vector<VarianceRow> run_variance_check(const ExperimentConfig& cfg,
                                            const Fitter& fitter,
                                            const VarianceScaling& scaling,
                                            unsigned threads)
{
  const SimulationModel model(cfg.theta);
  const auto records = run_replicates(cfg, fitter, threads);
  std::map<std::pair<std::size_t, std::size_t>, std::vector<double>> values;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> undefined;
  for (const auto& r : records) {
    auto key = std::pair{ r.n, r.point_id };
    values[key];
    if (r.estimate) {
      values[key].push_back(*r.estimate);
    } else {
      ++undefined[key];
    }
  }
  std::vector<VarianceRow> rows;
  for (const auto& [key, v] : values) {
    const auto [n, pid] = key;
    const auto& pt = cfg.points[pid];
    const double a = scaling.a_of_n(n);
    const double var = sample_variance(v);
    const double scaled = var * static_cast<double>(n) * a * a;
    const double theory = model.y_pdf(pt.y) *
                          model.conditional_density(pt.x, pt.y) *
                          scaling.kernel_l2_sq;
    rows.push_back(
      { n, pid, a, var, scaled, theory, scaled / theory, undefined[key] });
  }
  return rows;
}

FitterFamily bias_family(const EstimatorConfig& cfg)
{
  if (cfg.method != Method::quantile_copula) {
    throw std::invalid_argument(
      "bias scaling applies to the quantile-copula estimator");
  }
  return [cfg](double a) {
    EstimatorConfig c = cfg;
    c.qc.a = FixedBandwidth{ a };
    return make_fitter(c);
  };
}

double copula_laplacian(const FrankCopula& cop, double u, double v, double delta)
{
  const double c0 = cop.density(u, v);
  const double cuu =
    (cop.density(u + delta, v) - 2.0 * c0 + cop.density(u - delta, v)) /
    (delta * delta);
  const double cvv =
    (cop.density(u, v + delta) - 2.0 * c0 + cop.density(u, v - delta)) /
    (delta * delta);
  return cuu + cvv;
}

BiasReport run_bias_scaling(const ExperimentConfig& cfg,
                            const FitterFamily& family,
                            unsigned threads)
{
  cfg.validate();
  if (cfg.a_values.empty()) {
    throw std::invalid_argument("bias scaling: a_values must not be empty");
  }
  const SimulationModel model(cfg.theta);
  const std::size_t na = cfg.a_values.size();
  const std::size_t np = cfg.points.size();
  std::vector<Fitter> fitters;
  for (double a : cfg.a_values) {
    fitters.push_back(family(a));
  }
  const std::size_t jobs = cfg.ns.size() * cfg.reps;
  // [job][a][point]
  std::vector<Estimate> est(jobs * na * np);
  parallel_for(jobs, threads, [&](std::size_t job) {
    const std::size_t n = cfg.ns[job / cfg.reps];
    const std::size_t rep = job % cfg.reps;
    const auto sample = sample_xy(model, n, replicate_seed(cfg.base_seed, rep));
    for (std::size_t k = 0; k < na; ++k) {
      const auto f = fitters[k](sample);
      for (std::size_t p = 0; p < np; ++p) {
        est[(job * na + k) * np + p] = f(cfg.points[p].x, cfg.points[p].y);
      }
    }
  });

  BiasReport report;
  for (std::size_t ni = 0; ni < cfg.ns.size(); ++ni) {
    for (std::size_t k = 0; k < na; ++k) {
      for (std::size_t p = 0; p < np; ++p) {
        std::vector<double> v;
        std::size_t undefined = 0;
        for (std::size_t rep = 0; rep < cfg.reps; ++rep) {
          const auto& e = est[((ni * cfg.reps + rep) * na + k) * np + p];
          if (e) {
            v.push_back(*e);
          } else {
            ++undefined;
          }
        }
        const double truth =
          model.conditional_density(cfg.points[p].x, cfg.points[p].y);
        BiasRow row{ cfg.ns[ni], cfg.a_values[k], p, NAN, truth, NAN, NAN,
                     undefined };
        if (!v.empty()) {
          row.mean_estimate = mean(v);
          row.bias = row.mean_estimate - truth;
          row.bias_stderr =
            std::sqrt(sample_variance(v) / static_cast<double>(v.size()));
        }
        report.rows.push_back(row);
      }
    }
  }

  const std::size_t smallest = static_cast<std::size_t>(
    std::min_element(cfg.a_values.begin(), cfg.a_values.end()) -
    cfg.a_values.begin());
  for (std::size_t ni = 0; ni < cfg.ns.size(); ++ni) {
    for (std::size_t p = 0; p < np; ++p) {
      std::vector<double> as;
      std::vector<double> abs_bias;
      double bias_small = NAN;
      for (std::size_t k = 0; k < na; ++k) {
        const auto& row = report.rows[(ni * na + k) * np + p];
        as.push_back(row.a);
        abs_bias.push_back(std::abs(row.bias));
        if (k == smallest) {
          bias_small = row.bias;
        }
      }
      const auto& pt = cfg.points[p];
      const double lap = copula_laplacian(
        model.copula(), model.x_cdf(pt.x), model.y_cdf(pt.y));
      report.slopes.push_back({ cfg.ns[ni],
                                p,
                                log_log_fit(as, abs_bias),
                                lap,
                                std::signbit(bias_small) == std::signbit(lap) &&
                                  bias_small != 0.0 });
    }
  }
  return report;
}

ComparisonReport run_comparison(const ExperimentConfig& cfg, unsigned threads)
{
  cfg.validate();
  const SimulationModel model(cfg.theta);
  ComparisonReport report;
  report.n = cfg.ns.front();
  report.seed = cfg.base_seed;
  report.xs = linspace(cfg.grid.xmin, cfg.grid.xmax, cfg.grid.nx);
  report.ys = linspace(cfg.grid.ymin, cfg.grid.ymax, cfg.grid.ny);
  report.slice_x = cfg.slice_x;
  const std::size_t nx = report.xs.size();
  const std::size_t ny = report.ys.size();

  report.truth.resize(nx * ny);
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) {
      report.truth[i * ny + j] =
        model.conditional_density(report.xs[i], report.ys[j]);
    }
  }
  for (double y : report.ys) {
    report.slice_truth.push_back(model.conditional_density(cfg.slice_x, y));
  }

  const auto sample = sample_xy(model, report.n, cfg.base_seed);
  std::vector<bool> common(nx * ny, true);
  for (const auto& ec : cfg.estimators) {
    const auto est = fit_estimator(ec, sample);
    ComparisonEntry entry{ ec.label,
                           eval_grid(est, report.xs, report.ys, threads),
                           0,
                           0.0 };
    for (std::size_t c = 0; c < entry.grid.values.size(); ++c) {
      if (!entry.grid.values[c]) {
        ++entry.undefined_count;
        common[c] = false;
      }
    }
    std::vector<Estimate> slice;
    for (double y : report.ys) {
      slice.push_back(est(cfg.slice_x, y));
    }
    report.slice_estimates.push_back(std::move(slice));
    report.entries.push_back(std::move(entry));
  }

  const double dx = nx > 1 ? (cfg.grid.xmax - cfg.grid.xmin) /
                               static_cast<double>(nx - 1)
                           : 1.0;
  const double dy = ny > 1 ? (cfg.grid.ymax - cfg.grid.ymin) /
                               static_cast<double>(ny - 1)
                           : 1.0;
  report.common_cells =
    static_cast<std::size_t>(std::count(common.begin(), common.end(), true));
  for (auto& entry : report.entries) {
    double ise = 0.0;
    for (std::size_t c = 0; c < common.size(); ++c) {
      if (common[c]) {
        const double d = *entry.grid.values[c] - report.truth[c];
        ise += d * d;
      }
    }
    entry.ise = ise * dx * dy;
  }
  return report;
}

std::string grid_csv(std::span<const double> xs,
                     std::span<const double> ys,
                     std::span<const Estimate> values,
                     std::string_view value_column)
{
  std::string out = fmt::format("x,y,{}\n", value_column);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = 0; j < ys.size(); ++j) {
      out += fmt::format("{},{},{}\n",
                         format_number(xs[i]),
                         format_number(ys[j]),
                         format_cell(values[i * ys.size() + j]));
    }
  }
  return out;
}

std::string slice_csv(const ComparisonReport& report)
{
  std::string out = "y,truth";
  for (const auto& e : report.entries) {
    out += "," + e.label;
  }
  out += "\n";
  for (std::size_t j = 0; j < report.ys.size(); ++j) {
    out += format_number(report.ys[j]) + "," +
           format_number(report.slice_truth[j]);
    for (const auto& s : report.slice_estimates) {
      out += "," + format_cell(s[j]);
    }
    out += "\n";
  }
  return out;
}

std::string comparison_summary_json(const ComparisonReport& report)
{
  ordered_json j;
  j["n"] = report.n;
  j["seed"] = report.seed;
  j["grid"] = { { "nx", report.xs.size() },
                { "ny", report.ys.size() },
                { "xmin", report.xs.front() },
                { "xmax", report.xs.back() },
                { "ymin", report.ys.front() },
                { "ymax", report.ys.back() } };
  j["slice_x"] = report.slice_x;
  j["common_cells"] = report.common_cells;
  ordered_json est = ordered_json::array();
  for (const auto& e : report.entries) {
    est.push_back({ { "label", e.label },
                    { "undefined_count", e.undefined_count },
                    { "ise", e.ise } });
  }
  j["estimators"] = est;
  return detail::dump_json(j);
}

std::string convergence_csv(const ConvergenceReport& report)
{
  std::string out =
    "n,point_id,median_abs_err,rmse,bias,variance,undefined_count\n";
  auto num = [](double v) {
    return std::isfinite(v) ? format_number(v) : std::string();
  };
  for (const auto& r : report.rows) {
    out += fmt::format("{},{},{},{},{},{},{}\n",
                       r.n,
                       r.point_id,
                       num(r.median_abs_err),
                       num(r.rmse),
                       num(r.bias),
                       num(r.variance),
                       r.undefined_count);
  }
  return out;
}

namespace {

ordered_json fit_json(const std::optional<LinearFit>& f)
{
  if (!f) {
    return nullptr;
  }
  return { { "slope", f->slope },
           { "stderr", f->slope_stderr },
           { "intercept", f->intercept } };
}

} // namespace

std::string convergence_summary_json(
  const std::vector<std::pair<std::string, ConvergenceReport>>& reports,
  const ExperimentConfig& cfg)
{
  ordered_json j;
  j["theta"] = cfg.theta;
  j["ns"] = cfg.ns;
  j["reps"] = cfg.reps;
  j["base_seed"] = cfg.base_seed;
  ordered_json pts = ordered_json::array();
  for (const auto& p : cfg.points) {
    pts.push_back({ p.x, p.y });
  }
  j["points"] = pts;
  ordered_json ests = ordered_json::array();
  for (const auto& [label, rep] : reports) {
    ordered_json slopes = ordered_json::array();
    for (const auto& s : rep.slopes) {
      slopes.push_back({ { "point_id", s.point_id },
                         { "rmse", fit_json(s.rmse_fit) },
                         { "median_abs_err", fit_json(s.median_fit) } });
    }
    ests.push_back({ { "label", label }, { "slopes", slopes } });
  }
  j["estimators"] = ests;
  return detail::dump_json(j);
}

std::string replicate_dump_csv(std::span<const ReplicateRecord> records,
                               std::span<const EvalPoint> points)
{
  std::string out = "n,rep,point_id,x,y,estimate,truth\n";
  for (const auto& r : records) {
    out += fmt::format("{},{},{},{},{},{},{}\n",
                       r.n,
                       r.rep,
                       r.point_id,
                       format_number(points[r.point_id].x),
                       format_number(points[r.point_id].y),
                       format_cell(r.estimate),
                       format_number(r.truth));
  }
  return out;
}

std::vector<ReplicateRecord> parse_replicate_dump(std::string_view csv_text)
{
  const auto table = parse_csv(csv_text);
  const auto cn = table.column("n");
  const auto cr = table.column("rep");
  const auto cp = table.column("point_id");
  const auto ce = table.column("estimate");
  const auto ct = table.column("truth");
  std::vector<ReplicateRecord> out;
  for (const auto& row : table.rows) {
    if (!row[cn] || !row[cr] || !row[cp] || !row[ct]) {
      throw std::runtime_error("replicate dump: missing key cell");
    }
    out.push_back({ static_cast<std::size_t>(*row[cn]),
                    static_cast<std::size_t>(*row[cr]),
                    static_cast<std::size_t>(*row[cp]),
                    row[ce],
                    *row[ct] });
  }
  return out;
}

std::string variance_csv(std::span<const VarianceRow> rows)
{
  std::string out = "n,point_id,a,empirical_variance,scaled_variance,"
                    "theoretical,ratio,undefined_count\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{},{}\n",
                       r.n,
                       r.point_id,
                       format_number(r.a),
                       format_number(r.empirical_variance),
                       format_number(r.scaled_variance),
                       format_number(r.theoretical),
                       format_number(r.ratio),
                       r.undefined_count);
  }
  return out;
}

std::string bias_csv(const BiasReport& report)
{
  std::string out =
    "n,a,point_id,mean_estimate,truth,bias,bias_stderr,undefined_count\n";
  auto num = [](double v) {
    return std::isfinite(v) ? format_number(v) : std::string();
  };
  for (const auto& r : report.rows) {
    out += fmt::format("{},{},{},{},{},{},{},{}\n",
                       r.n,
                       format_number(r.a),
                       r.point_id,
                       num(r.mean_estimate),
                       format_number(r.truth),
                       num(r.bias),
                       num(r.bias_stderr),
                       r.undefined_count);
  }
  return out;
}

std::string bias_summary_json(const BiasReport& report)
{
  ordered_json arr = ordered_json::array();
  for (const auto& s : report.slopes) {
    arr.push_back({ { "n", s.n },
                    { "point_id", s.point_id },
                    { "log_abs_bias_vs_log_a", fit_json(s.fit) },
                    { "copula_laplacian", s.copula_laplacian },
                    { "sign_matches", s.sign_matches } });
  }
  ordered_json j;
  j["slopes"] = arr;
  return detail::dump_json(j);
}

} // namespace qcde
