#include "qcde/conditional_density.hpp"
#include "qcde/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qcde {

namespace {

// Relative floor on det(X'WX) / prod(diag X'WX) below which the local
// polynomial system is treated as singular. For degree 1 the product is
// S0 * S2.
constexpr double singular_tolerance = 1e-12;

constexpr std::size_t max_terms = 2;

// Solves the m x m system a * theta = b by Gaussian elimination with
// partial pivoting and returns theta[0]; nullopt when det(a) is negligible
// relative to the product of its diagonal.
std::optional<double> solve_intercept(
  std::array<std::array<double, max_terms>, max_terms> a,
  std::array<double, max_terms> b,
  std::size_t m)
{
  double scale = 1.0;
  for (std::size_t i = 0; i < m; ++i) {
    scale *= a[i][i];
  }
  double det = 1.0;
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < m; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) {
        piv = r;
      }
    }
    if (piv != col) {
      std::swap(a[piv], a[col]);
      std::swap(b[piv], b[col]);
      det = -det;
    }
    det *= a[col][col];
    if (a[col][col] == 0.0) {
      return std::nullopt;
    }
    for (std::size_t r = col + 1; r < m; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t k = col; k < m; ++k) {
        a[r][k] -= f * a[col][k];
      }
      b[r] -= f * b[col];
    }
  }
  if (!(std::abs(det) > singular_tolerance * std::abs(scale))) {
    return std::nullopt;
  }
  std::array<double, max_terms> theta{};
  for (std::size_t i = m; i-- > 0;) {
    double acc = b[i];
    for (std::size_t k = i + 1; k < m; ++k) {
      acc -= a[i][k] * theta[k];
    }
    theta[i] = acc / a[i][i];
  }
  return theta[0];
}

} // namespace

Method method_from_name(const std::string& name)
{
  if (name == "qc") {
    return Method::quantile_copula;
  }
  if (name == "dk") {
    return Method::double_kernel;
  }
  if (name == "ll") {
    return Method::local_polynomial;
  }
  throw std::invalid_argument("unknown method '" + name +
                              "' (expected qc, dk or ll)");
}

std::string method_name(Method m)
{
  switch (m) {
    case Method::quantile_copula:
      return "qc";
    case Method::double_kernel:
      return "dk";
    case Method::local_polynomial:
      return "ll";
  }
  return "unknown";
}

ClippingPolicy ClippingPolicy::threshold(double c, ClipFallback fallback)
{
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw std::invalid_argument("clipping threshold must be positive");
  }
  ClippingPolicy p;
  p.threshold_ = c;
  p.fallback_ = fallback;
  return p;
}

ConditionalDensityEstimator::ConditionalDensityEstimator(QuantileCopulaState s)
  : method_(Method::quantile_copula)
  , state_(std::move(s))
{}

ConditionalDensityEstimator::ConditionalDensityEstimator(Method m, RatioState s)
  : method_(m)
  , state_(std::move(s))
{}

ConditionalDensityEstimator fit_quantile_copula(
  const PairedSample& sample,
  const QuantileCopulaOptions& options)
{
  if (sample.size() < 2) {
    throw std::invalid_argument("quantile-copula fit needs n >= 2");
  }
  const auto pseudo = pseudo_observations(sample, true);
  std::vector<double> us(pseudo.size());
  std::transform(pseudo.begin(), pseudo.end(), us.begin(), [](const auto& p) {
    return p.u;
  });
  const double h = bandwidth(options.h, sample.ys());
  const double a = bandwidth(options.a, us);
  return ConditionalDensityEstimator(
    ConditionalDensityEstimator::QuantileCopulaState{
      UnivariateKde(sample.ys(), h, options.marginal_kernel),
      CopulaDensityEstimate(pseudo, a, options.copula_mode),
      Ecdf(sample.xs(), true),
      Ecdf(sample.ys(), true) });
}

namespace {

template<class State>
State make_ratio_state(const PairedSample& sample, const RatioOptions& options)
{
  std::vector<std::size_t> order(sample.size());
  std::iota(order.begin(), order.end(), std::size_t{ 0 });
  std::stable_sort(order.begin(), order.end(), [&](auto l, auto r) {
    return sample.xs()[l] < sample.xs()[r];
  });
  std::vector<double> xs;
  std::vector<double> ys;
  xs.reserve(order.size());
  ys.reserve(order.size());
  for (auto i : order) {
    xs.push_back(sample.xs()[i]);
    ys.push_back(sample.ys()[i]);
  }
  const double h1 = bandwidth(options.h1, sample.xs());
  const double h2 = bandwidth(options.h2, sample.ys());
  UnivariateKde g(sample.ys(), h2, options.y_kernel);
  return State{ std::move(xs), std::move(ys), h1, h2, options, std::move(g) };
}

} // namespace

ConditionalDensityEstimator fit_double_kernel(const PairedSample& sample,
                                              const RatioOptions& options)
{
  return ConditionalDensityEstimator(
    Method::double_kernel,
    make_ratio_state<ConditionalDensityEstimator::RatioState>(sample, options));
}

ConditionalDensityEstimator fit_local_polynomial(const PairedSample& sample,
                                                 const RatioOptions& options)
{
  if (options.degree != 0 && options.degree != 1) {
    throw std::invalid_argument("local polynomial degree must be 0 or 1");
  }
  return ConditionalDensityEstimator(
    Method::local_polynomial,
    make_ratio_state<ConditionalDensityEstimator::RatioState>(sample, options));
}

Estimate ConditionalDensityEstimator::operator()(double x, double y) const
{
  if (const auto* qc = std::get_if<QuantileCopulaState>(&state_)) {
    return qc->g(y) * qc->c(qc->fx(x), qc->gy(y));
  }
  return eval_ratio(std::get<RatioState>(state_), x, y);
}

Estimate ConditionalDensityEstimator::eval_ratio(const RatioState& s,
                                                 double x,
                                                 double y) const
{
  const KernelSpec& kx = s.options.x_kernel;
  const KernelSpec& ky = s.options.y_kernel;
  std::size_t first = 0;
  std::size_t last = s.xs.size();
  if (kx.compact()) {
    const double r = kx.support_radius() * s.h1;
    first = static_cast<std::size_t>(
      std::lower_bound(s.xs.begin(), s.xs.end(), x - r) - s.xs.begin());
    last = static_cast<std::size_t>(
      std::upper_bound(s.xs.begin() + static_cast<std::ptrdiff_t>(first),
                       s.xs.end(),
                       x + r) -
      s.xs.begin());
  }
  const bool polynomial = method_ == Method::local_polynomial;
  const std::size_t m =
    polynomial ? static_cast<std::size_t>(s.options.degree) + 1 : 1;
  // moments[j] = sum w d^j, rhs[j] = sum w d^j z
  std::array<double, 2 * max_terms - 1> moments{};
  std::array<double, max_terms> rhs{};
  for (std::size_t i = first; i < last; ++i) {
    const double d = (s.xs[i] - x) / s.h1;
    const double w = kx(d);
    if (w == 0.0) {
      continue;
    }
    const double z = ky((s.ys[i] - y) / s.h2) / s.h2;
    double p = w;
    for (std::size_t j = 0; j < 2 * m - 1; ++j) {
      moments[j] += p;
      if (j < m) {
        rhs[j] += p * z;
      }
      p *= d;
    }
  }
  const double s0 = moments[0];

  const auto& clip = s.options.clipping;
  if (clip.enabled()) {
    const double fx = s0 / (static_cast<double>(s.xs.size()) * s.h1);
    if (fx <= clip.threshold_value()) {
      return clip.fallback() == ClipFallback::zero ? 0.0 : s.g(y);
    }
  }
  if (!(s0 > 0.0)) {
    return std::nullopt;
  }
  if (!polynomial) {
    return rhs[0] / s0;
  }
  std::array<std::array<double, max_terms>, max_terms> normal{};
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t k = 0; k < m; ++k) {
      normal[j][k] = moments[j + k];
    }
  }
  return solve_intercept(normal, rhs, m);
}

double ConditionalDensityEstimator::primary_bandwidth() const
{
  if (const auto* qc = std::get_if<QuantileCopulaState>(&state_)) {
    return qc->g.bandwidth();
  }
  return std::get<RatioState>(state_).h1;
}

double ConditionalDensityEstimator::secondary_bandwidth() const
{
  if (const auto* qc = std::get_if<QuantileCopulaState>(&state_)) {
    return qc->c.bandwidth();
  }
  return std::get<RatioState>(state_).h2;
}

const UnivariateKde* ConditionalDensityEstimator::marginal() const
{
  if (const auto* qc = std::get_if<QuantileCopulaState>(&state_)) {
    return &qc->g;
  }
  return nullptr;
}

const CopulaDensityEstimate* ConditionalDensityEstimator::copula() const
{
  if (const auto* qc = std::get_if<QuantileCopulaState>(&state_)) {
    return &qc->c;
  }
  return nullptr;
}

std::optional<std::pair<double, double>> ConditionalDensityEstimator::ranks(
  double x,
  double y) const
{
  if (const auto* qc = std::get_if<QuantileCopulaState>(&state_)) {
    return std::pair{ qc->fx(x), qc->gy(y) };
  }
  return std::nullopt;
}

Estimate eval(const ConditionalDensityEstimator& est, double x, double y)
{
  return est(x, y);
}

EstimateGrid eval_grid(const ConditionalDensityEstimator& est,
                       std::span<const double> xs,
                       std::span<const double> ys,
                       unsigned threads)
{
  EstimateGrid grid{ { xs.begin(), xs.end() },
                     { ys.begin(), ys.end() },
                     std::vector<Estimate>(xs.size() * ys.size()) };
  parallel_for(xs.size(), threads, [&](std::size_t i) {
    for (std::size_t j = 0; j < ys.size(); ++j) {
      grid.values[i * ys.size() + j] = est(xs[i], ys[j]);
    }
  });
  return grid;
}

std::vector<double> linspace(double lo, double hi, std::size_t n)
{
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = lo + step * static_cast<double>(i);
  }
  if (n > 1) {
    out.back() = hi;
  }
  return out;
}

} // namespace qcde
