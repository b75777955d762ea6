#include "qcde/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qcde {

PairedSample::PairedSample(std::vector<double> xs, std::vector<double> ys)
  : xs_(std::move(xs))
  , ys_(std::move(ys))
{
  if (xs_.empty()) {
    throw std::invalid_argument("paired sample: no observations");
  }
  if (xs_.size() != ys_.size()) {
    throw std::invalid_argument("paired sample: xs and ys differ in length");
  }
  auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(xs_.begin(), xs_.end(), finite) ||
      !std::all_of(ys_.begin(), ys_.end(), finite)) {
    throw std::invalid_argument("paired sample: non-finite observation");
  }
}

Ecdf::Ecdf(std::span<const double> data, bool rescale)
  : sorted_(data.begin(), data.end())
  , rescale_(rescale)
  , denom_(static_cast<double>(data.size()) + (rescale ? 1.0 : 0.0))
{
  if (sorted_.empty()) {
    throw std::invalid_argument("ecdf: empty data");
  }
  std::stable_sort(sorted_.begin(), sorted_.end());
}

double Ecdf::operator()(double x) const
{
  const auto count = std::upper_bound(sorted_.begin(), sorted_.end(), x) -
                     sorted_.begin();
  return static_cast<double>(count) / denom_;
}

Ecdf ecdf_fit(std::span<const double> data, bool rescale)
{
  return Ecdf(data, rescale);
}

std::vector<UnitPoint> pseudo_observations(const PairedSample& sample,
                                           bool rescale)
{
  const Ecdf fx(sample.xs(), rescale);
  const Ecdf gy(sample.ys(), rescale);
  std::vector<UnitPoint> out;
  out.reserve(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i) {
    out.push_back({ fx(sample.xs()[i]), gy(sample.ys()[i]) });
  }
  return out;
}

double ks_statistic(std::span<const double> data,
                    const std::function<double(double)>& cdf)
{
  if (data.empty()) {
    throw std::invalid_argument("ks_statistic: empty data");
  }
  std::vector<double> s(data.begin(), data.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t j = i;
    while (j < s.size() && s[j] == s[i]) {
      ++j;
    }
    // F_n jumps from i/n (left limit) to j/n at s[i].
    const double f = cdf(s[i]);
    d = std::max({ d,
                   std::abs(static_cast<double>(j) / n - f),
                   std::abs(static_cast<double>(i) / n - f) });
    i = j;
  }
  return d;
}

} // namespace qcde
