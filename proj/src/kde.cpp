#include "qcde/kde.hpp"
#include "qcde/numerics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qcde {

UnivariateKde::UnivariateKde(std::span<const double> data,
                             double h,
                             KernelSpec kernel)
  : data_(data.begin(), data.end())
  , h_(h)
  , kernel_(kernel)
{
  if (data_.empty()) {
    throw std::invalid_argument("kde: empty data");
  }
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw std::invalid_argument("kde: bandwidth must be positive");
  }
  std::sort(data_.begin(), data_.end());
}

double UnivariateKde::operator()(double y) const
{
  auto first = data_.begin();
  auto last = data_.end();
  if (kernel_.compact()) {
    const double r = kernel_.support_radius() * h_;
    first = std::lower_bound(data_.begin(), data_.end(), y - r);
    last = std::upper_bound(first, data_.end(), y + r);
  }
  double sum = 0.0;
  for (auto it = first; it != last; ++it) {
    sum += kernel_((y - *it) / h_);
  }
  return sum / (static_cast<double>(data_.size()) * h_);
}

UnivariateKde kde_fit(std::span<const double> data, double h, KernelSpec kernel)
{
  return UnivariateKde(data, h, kernel);
}

double kde_eval(const UnivariateKde& est, double y)
{
  return est(y);
}

double bandwidth(const BandwidthRule& rule, std::span<const double> data)
{
  const double n = static_cast<double>(data.size());
  auto scott = [&](double dim) {
    if (data.size() < 2) {
      throw std::invalid_argument("Scott's rule needs at least two points");
    }
    return std::sqrt(sample_variance(data)) * std::pow(n, -1.0 / (dim + 4.0));
  };
  double h = 0.0;
  if (std::holds_alternative<ScottUnivariate>(rule)) {
    h = scott(1.0);
  } else if (std::holds_alternative<ScottBivariate>(rule)) {
    h = scott(2.0);
  } else if (const auto* p = std::get_if<PowerRule>(&rule)) {
    if (data.empty()) {
      throw std::invalid_argument("power bandwidth rule: empty data");
    }
    h = p->constant * std::pow(n, -p->exponent);
  } else {
    h = std::get<FixedBandwidth>(rule).h;
  }
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw std::invalid_argument(
      fmt::format("bandwidth rule {} produced non-positive bandwidth {}",
                  describe(rule),
                  h));
  }
  return h;
}

std::string describe(const BandwidthRule& rule)
{
  if (std::holds_alternative<ScottUnivariate>(rule)) {
    return "scott1d";
  }
  if (std::holds_alternative<ScottBivariate>(rule)) {
    return "scott2d";
  }
  if (const auto* p = std::get_if<PowerRule>(&rule)) {
    return fmt::format("power(c={}, alpha={})", p->constant, p->exponent);
  }
  return fmt::format("fixed({})", std::get<FixedBandwidth>(rule).h);
}

} // namespace qcde
