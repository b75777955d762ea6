#include "qcde/simulation.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace qcde {

namespace {

constexpr double independence_band = 1e-6;

// log(e^x - 1) for x > 0 without overflow or cancellation.
double log_expm1(double x)
{
  return x > 30.0 ? x + std::log1p(-std::exp(-x)) : std::log(std::expm1(x));
}

double log_add_exp(double a, double b)
{
  if (a == -INFINITY) {
    return b;
  }
  if (b == -INFINITY) {
    return a;
  }
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

// Uniform on (0, 1) from the top 53 bits; never returns 0 or 1.
double open_uniform(std::mt19937_64& rng)
{
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

double clamp_unit(double t)
{
  return std::clamp(t, 0.0, 1.0);
}

} // namespace

double normal_pdf(double x)
{
  return std::exp(-0.5 * x * x) * (0.5 * std::numbers::inv_sqrtpi *
                                   std::numbers::sqrt2);
}

double normal_cdf(double x)
{
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double normal_quantile(double p)
{
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) {
      return -INFINITY;
    }
    if (p == 1.0) {
      return INFINITY;
    }
    throw std::domain_error("normal_quantile: p outside [0, 1]");
  }
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

FrankCopula::FrankCopula(double theta)
  : theta_(theta)
  , log_theta_(0.0)
  , independent_(false)
{
  if (!(theta > 0.0) || theta == 1.0 || !std::isfinite(theta)) {
    throw std::invalid_argument(
      "Frank copula: theta must be positive, finite and different from 1");
  }
  log_theta_ = std::log(theta);
  independent_ = std::abs(theta - 1.0) < independence_band;
}

double FrankCopula::log_ratio_above_one(double u, double v) const
{
  const double l = log_theta_;
  const double lu = u > 0.0 ? log_expm1(u * l) : -INFINITY;
  const double lv = v > 0.0 ? log_expm1(v * l) : -INFINITY;
  const double lt = log_expm1(l);
  // theta + theta^(u+v) - theta^u - theta^v = (theta - 1) + (A - 1)(B - 1)
  return log_add_exp(lt, lu + lv) - lt;
}

double FrankCopula::cdf(double u, double v) const
{
  u = clamp_unit(u);
  v = clamp_unit(v);
  if (independent_) {
    return u * v;
  }
  if (log_theta_ > 0.0) {
    return log_ratio_above_one(u, v) / log_theta_;
  }
  // theta < 1: the ratio is 1 - (1 - A)(1 - B) / (1 - theta), all in [0, 1]
  const double l = log_theta_;
  return std::log1p(std::expm1(u * l) * std::expm1(v * l) / std::expm1(l)) / l;
}

double FrankCopula::density(double u, double v) const
{
  if (independent_) {
    return 1.0;
  }
  const double l = log_theta_;
  if (l > 0.0) {
    // c = ln(theta) (theta - 1) A B / N^2, N = (theta - 1) * ratio
    const double log_n = log_ratio_above_one(u, v) + log_expm1(l);
    return std::exp(std::log(l) + log_expm1(l) + (u + v) * l - 2.0 * log_n);
  }
  const double d =
    1.0 + std::expm1(u * l) * std::expm1(v * l) / std::expm1(l);
  return l / std::expm1(l) * std::exp((u + v) * l) / (d * d);
}

double FrankCopula::conditional_cdf(double u, double v) const
{
  if (independent_) {
    return clamp_unit(v);
  }
  u = clamp_unit(u);
  v = clamp_unit(v);
  // A (B - 1) / N with N = (theta - 1) + (A - 1)(B - 1)
  const double l = log_theta_;
  const double am1 = std::expm1(u * l);
  const double bm1 = std::expm1(v * l);
  const double n = std::expm1(l) + am1 * bm1;
  return (1.0 + am1) * bm1 / n;
}

double FrankCopula::conditional_quantile(double u, double w) const
{
  if (independent_) {
    return clamp_unit(w);
  }
  // B - 1 = w (theta - 1) / (w + A (1 - w))
  const double l = log_theta_;
  const double a = std::exp(u * l);
  const double bm1 = w * std::expm1(l) / (w + a * (1.0 - w));
  return clamp_unit(std::log1p(bm1) / l);
}

double frank_cdf(const FrankCopula& cop, double u, double v)
{
  if (!(u >= 0.0 && u <= 1.0 && v >= 0.0 && v <= 1.0)) {
    throw std::domain_error("frank_cdf: argument outside [0,1]^2");
  }
  return cop.cdf(u, v);
}

double frank_density(const FrankCopula& cop, double u, double v)
{
  if (!(u >= 0.0 && u <= 1.0 && v >= 0.0 && v <= 1.0)) {
    throw std::domain_error("frank_density: argument outside [0,1]^2");
  }
  return cop.density(u, v);
}

std::vector<UnitPoint> frank_sample(const FrankCopula& cop,
                                    std::size_t n,
                                    std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::vector<UnitPoint> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = open_uniform(rng);
    const double w = open_uniform(rng);
    // keep v in the open interval so Phi^-1(v) stays finite
    const double v =
      std::clamp(cop.conditional_quantile(u, w), 0x1.0p-60, 1.0 - 0x1.0p-53);
    out.push_back({ u, v });
  }
  return out;
}

double SimulationModel::joint_cdf(double x, double y) const
{
  return copula_.cdf(x_cdf(x), y_cdf(y));
}

double SimulationModel::conditional_density(double x, double y) const
{
  return y_pdf(y) * copula_.density(x_cdf(x), y_cdf(y));
}

PairedSample sample_xy(const SimulationModel& model,
                       std::size_t n,
                       std::uint64_t seed)
{
  const auto uv = frank_sample(model.copula(), n, seed);
  std::vector<double> xs(n);
  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = normal_quantile(uv[i].u);
    ys[i] = normal_quantile(uv[i].v);
  }
  return PairedSample(std::move(xs), std::move(ys));
}

double true_conditional_density(const SimulationModel& model,
                                double x,
                                double y)
{
  return model.conditional_density(x, y);
}

} // namespace qcde
