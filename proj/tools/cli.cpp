#include "cli.hpp"

#include "qcde/bench.hpp"
#include "qcde/csv.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

namespace qcde::cli {

namespace fs = std::filesystem;

namespace {

constexpr int exit_usage = 2;
constexpr int exit_runtime = 1;

struct UsageError : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

// "scott1d" | "scott2d" | "<h>" | "power:<c>:<alpha>"
BandwidthRule parse_rule_flag(const std::string& text, const std::string& flag)
{
  if (text == "scott1d") {
    return ScottUnivariate{};
  }
  if (text == "scott2d") {
    return ScottBivariate{};
  }
  try {
    if (text.rfind("power:", 0) == 0) {
      const auto rest = text.substr(6);
      const auto colon = rest.find(':');
      if (colon == std::string::npos) {
        throw UsageError("");
      }
      return PowerRule{ std::stod(rest.substr(0, colon)),
                        std::stod(rest.substr(colon + 1)) };
    }
    std::size_t used = 0;
    const double h = std::stod(text, &used);
    if (used != text.size()) {
      throw UsageError("");
    }
    return FixedBandwidth{ h };
  } catch (const std::exception&) {
    throw UsageError(fmt::format(
      "{}: expected scott1d, scott2d, a number or power:<c>:<alpha>, got '{}'",
      flag,
      text));
  }
}

struct EstimatorFlags
{
  std::string method = "qc";
  std::string h = "scott1d";
  std::string a = "scott2d";
  std::string marginal_kernel = "epanechnikov";
  std::string copula_kernel = "beta";
  std::string h1 = "scott1d";
  std::string h2 = "scott1d";
  std::string x_kernel = "epanechnikov";
  std::string y_kernel = "epanechnikov";
  std::string clip = "1e-5";
  std::string fallback = "marginal";
  int degree = 1;

  void attach(CLI::App* app)
  {
    app->add_option("--method", method, "Estimator: qc, dk or ll")
      ->check(CLI::IsMember({ "qc", "dk", "ll" }))
      ->capture_default_str();
    app
      ->add_option("--h",
                   h,
                   "qc: bandwidth of the marginal KDE of Y (scott1d, scott2d, "
                   "<h>, power:<c>:<alpha>)")
      ->capture_default_str();
    app->add_option("--a", a, "qc: copula bandwidth rule")
      ->capture_default_str();
    app
      ->add_option("--marginal-kernel",
                   marginal_kernel,
                   "qc: kernel of the marginal KDE (epanechnikov, gaussian, "
                   "uniform)")
      ->capture_default_str();
    app
      ->add_option("--copula-kernel",
                   copula_kernel,
                   "qc: copula kernel (beta, epanechnikov, gaussian, uniform)")
      ->capture_default_str();
    app->add_option("--h1", h1, "dk/ll: x bandwidth rule")
      ->capture_default_str();
    app->add_option("--h2", h2, "dk/ll: y bandwidth rule")
      ->capture_default_str();
    app->add_option("--x-kernel", x_kernel, "dk/ll: x kernel")
      ->capture_default_str();
    app->add_option("--y-kernel", y_kernel, "dk/ll: y kernel")
      ->capture_default_str();
    app
      ->add_option("--clip",
                   clip,
                   "dk/ll: clipping threshold on the x density estimate, or "
                   "'none'")
      ->capture_default_str();
    app->add_option("--fallback", fallback, "dk/ll: clipped value, marginal or zero")
      ->check(CLI::IsMember({ "marginal", "zero" }))
      ->capture_default_str();
    app->add_option("--degree", degree, "ll: local polynomial degree (0 or 1)")
      ->check(CLI::IsMember({ 0, 1 }))
      ->capture_default_str();
  }

  EstimatorConfig build() const
  {
    EstimatorConfig cfg;
    cfg.method = method_from_name(method);
    cfg.label = method;
    try {
      cfg.qc.marginal_kernel = kernel_from_name(marginal_kernel);
      cfg.qc.copula_mode = copula_mode_from_name(copula_kernel);
      cfg.ratio.x_kernel = kernel_from_name(x_kernel);
      cfg.ratio.y_kernel = kernel_from_name(y_kernel);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    cfg.qc.h = parse_rule_flag(h, "--h");
    cfg.qc.a = parse_rule_flag(a, "--a");
    cfg.ratio.h1 = parse_rule_flag(h1, "--h1");
    cfg.ratio.h2 = parse_rule_flag(h2, "--h2");
    cfg.ratio.degree = degree;
    if (clip == "none") {
      cfg.ratio.clipping = ClippingPolicy::none();
    } else {
      double c = 0.0;
      try {
        c = std::stod(clip);
      } catch (const std::exception&) {
        throw UsageError("--clip: expected a positive number or 'none'");
      }
      if (!(c > 0.0)) {
        throw UsageError("--clip: expected a positive number or 'none'");
      }
      cfg.ratio.clipping = ClippingPolicy::threshold(
        c,
        fallback == "zero" ? ClipFallback::zero : ClipFallback::marginal_kde);
    }
    return cfg;
  }
};

PairedSample read_sample(const std::string& path)
{
  const auto table = read_csv(path);
  return PairedSample(table.numeric_column("x"), table.numeric_column("y"));
}

void emit(const std::optional<std::string>& path,
          const std::string& content,
          std::ostream& out)
{
  if (path) {
    write_file_atomic(*path, content);
  } else {
    out << content;
  }
}

ExperimentConfig load_config(const std::optional<std::string>& path)
{
  if (!path) {
    ExperimentConfig cfg;
    cfg.estimators = default_estimators();
    return cfg;
  }
  return parse_experiment_config(read_file(*path));
}

void ensure_dir(const std::string& dir)
{
  fs::create_directories(dir);
}

} // namespace

int dispatch(const std::vector<std::string>& args,
             std::ostream& out,
             std::ostream& err)
{
  CLI::App app{ "Conditional density estimation by the quantile-copula "
                "method, with competitors and a simulation harness" };
  app.require_subcommand(1);
  app.fallthrough();
  // -h stays free for the --h bandwidth option
  app.set_help_flag("--help", "Print this help message and exit");
  app.name(args.empty() ? "qcde" : fs::path(args[0]).filename().string());

  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  app.add_option("--seed", seed, "Random seed (overrides config base_seed)");
  app.add_option("--threads", threads, "Worker threads")
    ->check(CLI::Range(1u, 1024u))
    ->capture_default_str();

  // simulate
  auto* sim = app.add_subcommand("simulate", "Draw (x, y) from the Frank model");
  std::size_t sim_n = 100;
  double sim_theta = 100.0;
  std::optional<std::string> sim_out;
  sim->add_option("--n", sim_n, "Sample size")
    ->check(CLI::PositiveNumber)
    ->capture_default_str();
  sim->add_option("--theta", sim_theta, "Frank copula parameter (base-theta form)")
    ->capture_default_str();
  sim->add_option("--out", sim_out, "Output CSV (stdout if omitted)");

  // fit-eval
  auto* fe = app.add_subcommand("fit-eval", "Fit on a CSV sample, evaluate at points");
  std::string fe_in;
  std::vector<double> fe_x;
  std::vector<double> fe_y;
  std::optional<std::string> fe_out;
  EstimatorFlags fe_flags;
  fe->add_option("--in", fe_in, "Input CSV with columns x,y")->required();
  fe->add_option("--x", fe_x, "Query x values")->required();
  fe->add_option("--y", fe_y, "Query y values (same count as --x)")->required();
  fe->add_option("--out", fe_out, "Output CSV (stdout if omitted)");
  fe_flags.attach(fe);

  // grid
  auto* gr = app.add_subcommand("grid", "Fit on a CSV sample, evaluate on a grid");
  std::string gr_in;
  GridSpec gr_grid;
  std::optional<std::string> gr_out;
  EstimatorFlags gr_flags;
  gr->add_option("--in", gr_in, "Input CSV with columns x,y")->required();
  gr->add_option("--xmin", gr_grid.xmin, "Grid x lower end")->capture_default_str();
  gr->add_option("--xmax", gr_grid.xmax, "Grid x upper end")->capture_default_str();
  gr->add_option("--nx", gr_grid.nx, "Grid x points")
    ->check(CLI::PositiveNumber)
    ->capture_default_str();
  gr->add_option("--ymin", gr_grid.ymin, "Grid y lower end")->capture_default_str();
  gr->add_option("--ymax", gr_grid.ymax, "Grid y upper end")->capture_default_str();
  gr->add_option("--ny", gr_grid.ny, "Grid y points")
    ->check(CLI::PositiveNumber)
    ->capture_default_str();
  gr->add_option("--out", gr_out, "Output CSV (stdout if omitted)");
  gr_flags.attach(gr);

  // experiment commands
  std::optional<std::string> cmp_config;
  std::string cmp_dir;
  auto* cmp = app.add_subcommand(
    "compare", "Estimator comparison on one simulated sample, grid and slice");
  cmp->add_option("--config", cmp_config, "Experiment JSON (built-in defaults if omitted)");
  cmp->add_option("--out-dir", cmp_dir, "Output directory")->required();

  std::string conv_config;
  std::string conv_dir;
  bool conv_dump = false;
  auto* conv = app.add_subcommand("convergence", "Monte Carlo convergence rates");
  conv->add_option("--config", conv_config, "Experiment JSON")->required();
  conv->add_option("--out-dir", conv_dir, "Output directory")->required();
  conv->add_flag("--dump", conv_dump, "Also write per-replicate raw values");

  std::string var_config;
  std::string var_dir;
  auto* var = app.add_subcommand(
    "variance-check", "Empirical vs asymptotic variance of the qc estimator");
  var->add_option("--config", var_config, "Experiment JSON")->required();
  var->add_option("--out-dir", var_dir, "Output directory")->required();

  std::string bias_config;
  std::string bias_dir;
  auto* bias = app.add_subcommand(
    "bias-scaling", "Bias of the qc estimator against the copula bandwidth");
  bias->add_option("--config", bias_config, "Experiment JSON (needs a_values)")
    ->required();
  bias->add_option("--out-dir", bias_dir, "Output directory")->required();

  std::vector<const char*> argv;
  for (const auto& a : args) {
    argv.push_back(a.c_str());
  }
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    // CLI11 raises help from the subcommand as CallForHelp too; anything
    // else is a usage error
    err << app.get_name() << ": " << e.what() << "\n";
    return exit_usage;
  }

  try {
    if (*sim) {
      const SimulationModel model(sim_theta);
      const auto sample = sample_xy(model, sim_n, seed.value_or(1));
      std::string csv = "x,y\n";
      for (std::size_t i = 0; i < sample.size(); ++i) {
        csv += format_number(sample.xs()[i]) + "," +
               format_number(sample.ys()[i]) + "\n";
      }
      emit(sim_out, csv, out);
    } else if (*fe) {
      if (fe_x.size() != fe_y.size()) {
        throw UsageError("--x and --y must have the same number of values");
      }
      const auto cfg = fe_flags.build();
      const auto est = fit_estimator(cfg, read_sample(fe_in));
      std::string csv = "x,y,estimate\n";
      for (std::size_t i = 0; i < fe_x.size(); ++i) {
        csv += format_number(fe_x[i]) + "," + format_number(fe_y[i]) + "," +
               format_cell(est(fe_x[i], fe_y[i])) + "\n";
      }
      emit(fe_out, csv, out);
    } else if (*gr) {
      if (!(gr_grid.xmin <= gr_grid.xmax) || !(gr_grid.ymin <= gr_grid.ymax)) {
        throw UsageError("grid bounds must satisfy min <= max");
      }
      const auto cfg = gr_flags.build();
      const auto est = fit_estimator(cfg, read_sample(gr_in));
      const auto xs = linspace(gr_grid.xmin, gr_grid.xmax, gr_grid.nx);
      const auto ys = linspace(gr_grid.ymin, gr_grid.ymax, gr_grid.ny);
      const auto grid = eval_grid(est, xs, ys, threads);
      emit(gr_out, grid_csv(xs, ys, grid.values, "estimate"), out);
    } else if (*cmp) {
      auto cfg = load_config(cmp_config);
      if (seed) {
        cfg.base_seed = *seed;
      }
      const auto report = run_comparison(cfg, threads);
      ensure_dir(cmp_dir);
      const fs::path dir(cmp_dir);
      std::vector<Estimate> truth(report.truth.begin(), report.truth.end());
      write_file_atomic(dir / "grid_truth.csv",
                        grid_csv(report.xs, report.ys, truth, "truth"));
      for (const auto& e : report.entries) {
        write_file_atomic(
          dir / ("grid_" + e.label + ".csv"),
          grid_csv(report.xs, report.ys, e.grid.values, "estimate"));
      }
      write_file_atomic(dir / "slice_x2.csv", slice_csv(report));
      write_file_atomic(dir / "summary.json", comparison_summary_json(report));
    } else if (*conv) {
      auto cfg = parse_experiment_config(read_file(conv_config));
      if (seed) {
        cfg.base_seed = *seed;
      }
      ensure_dir(conv_dir);
      const fs::path dir(conv_dir);
      std::vector<std::pair<std::string, ConvergenceReport>> reports;
      for (const auto& e : cfg.estimators) {
        const auto records = run_replicates(cfg, make_fitter(e), threads);
        ConvergenceReport rep;
        rep.rows = aggregate(records);
        rep.slopes = fit_rate_slopes(rep.rows);
        if (conv_dump) {
          write_file_atomic(dir / ("replicates_" + e.label + ".csv"),
                            replicate_dump_csv(records, cfg.points));
        }
        write_file_atomic(dir / ("convergence_" + e.label + ".csv"),
                          convergence_csv(rep));
        reports.emplace_back(e.label, std::move(rep));
      }
      write_file_atomic(dir / "summary.json",
                        convergence_summary_json(reports, cfg));
    } else if (*var) {
      auto cfg = parse_experiment_config(read_file(var_config));
      if (seed) {
        cfg.base_seed = *seed;
      }
      ensure_dir(var_dir);
      for (const auto& e : cfg.estimators) {
        const auto rows = run_variance_check(
          cfg, make_fitter(e), variance_scaling_for(e), threads);
        write_file_atomic(fs::path(var_dir) / ("variance_" + e.label + ".csv"),
                          variance_csv(rows));
      }
    } else if (*bias) {
      auto cfg = parse_experiment_config(read_file(bias_config));
      if (seed) {
        cfg.base_seed = *seed;
      }
      ensure_dir(bias_dir);
      for (const auto& e : cfg.estimators) {
        const auto report = run_bias_scaling(cfg, bias_family(e), threads);
        write_file_atomic(fs::path(bias_dir) / ("bias_" + e.label + ".csv"),
                          bias_csv(report));
        write_file_atomic(
          fs::path(bias_dir) / ("bias_summary_" + e.label + ".json"),
          bias_summary_json(report));
      }
    }
  } catch (const UsageError& e) {
    err << app.get_name() << ": " << e.what() << "\n";
    return exit_usage;
  } catch (const std::exception& e) {
    err << app.get_name() << ": " << e.what() << "\n";
    return exit_runtime;
  }
  return 0;
}

} // namespace qcde::cli
