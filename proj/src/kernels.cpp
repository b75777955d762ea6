#include "qcde/kernels.hpp"
#include "qcde/numerics.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace qcde {

namespace {

constexpr double gaussian_cutoff = 8.0;

} // namespace

double KernelSpec::support_radius() const
{
  return compact() ? 1.0 : std::numeric_limits<double>::infinity();
}

double KernelSpec::operator()(double u) const
{
  switch (family_) {
    case KernelFamily::epanechnikov:
      return std::abs(u) <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
    case KernelFamily::uniform:
      return std::abs(u) <= 1.0 ? 0.5 : 0.0;
    case KernelFamily::gaussian:
      return std::exp(-0.5 * u * u) * (0.5 * std::numbers::inv_sqrtpi *
                                       std::numbers::sqrt2);
  }
  return 0.0;
}

std::string KernelSpec::name() const
{
  switch (family_) {
    case KernelFamily::epanechnikov:
      return "epanechnikov";
    case KernelFamily::gaussian:
      return "gaussian";
    case KernelFamily::uniform:
      return "uniform";
  }
  return "unknown";
}

KernelSpec kernel_from_name(std::string_view name)
{
  if (name == "epanechnikov") {
    return KernelSpec(KernelFamily::epanechnikov);
  }
  if (name == "gaussian") {
    return KernelSpec(KernelFamily::gaussian);
  }
  if (name == "uniform") {
    return KernelSpec(KernelFamily::uniform);
  }
  throw std::invalid_argument("unknown kernel '" + std::string(name) + "'");
}

double eval_kernel(const KernelSpec& spec, double u)
{
  return spec(u);
}

double kernel_moment(const KernelSpec& spec, int i)
{
  if (i < 0 || i > 2) {
    throw std::invalid_argument("kernel_moment: order must be 0, 1 or 2");
  }
  const double r = spec.compact() ? spec.support_radius() : gaussian_cutoff;
  return integrate(
    [&](double u) { return std::pow(u, i) * spec(u); }, -r, r, 1e-12);
}

double kernel_l2(const KernelSpec& spec)
{
  const double r = spec.compact() ? spec.support_radius() : gaussian_cutoff;
  return integrate(
    [&](double u) {
      const double k = spec(u);
      return k * k;
    },
    -r,
    r,
    1e-12);
}

double log_beta_function(double a, double b)
{
  return boost::math::lgamma(a) + boost::math::lgamma(b) -
         boost::math::lgamma(a + b);
}

BetaKernelSpec::BetaKernelSpec(double location, double bandwidth)
  : location_(location)
  , bandwidth_(bandwidth)
  , log_norm_(0.0)
{
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw std::invalid_argument("beta kernel: bandwidth must be positive");
  }
  if (!(location >= 0.0 && location <= 1.0)) {
    throw std::invalid_argument("beta kernel: location must lie in [0, 1]");
  }
  log_norm_ = log_beta_function(alpha(), beta());
}

double BetaKernelSpec::operator()(double t) const
{
  if (t < 0.0 || t > 1.0) {
    return 0.0;
  }
  const double p = location_ / bandwidth_;
  const double q = (1.0 - location_) / bandwidth_;
  // 0 * log(0) terms are exactly zero (alpha or beta equal to one).
  const double lt = p == 0.0 ? 0.0 : p * std::log(t);
  const double l1t = q == 0.0 ? 0.0 : q * std::log1p(-t);
  return std::exp(lt + l1t - log_norm_);
}

double eval_beta_kernel(const BetaKernelSpec& spec, double t)
{
  return spec(t);
}

} // namespace qcde
