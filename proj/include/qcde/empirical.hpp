#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace qcde {

//! n paired real observations (X_i, Y_i).
class PairedSample
{
public:
  PairedSample(std::vector<double> xs, std::vector<double> ys);

  std::size_t size() const { return xs_.size(); }
  std::span<const double> xs() const { return xs_; }
  std::span<const double> ys() const { return ys_; }

private:
  std::vector<double> xs_;
  std::vector<double> ys_;
};

//! Empirical distribution function. With rescale on, values are multiplied
//! by n / (n + 1) so that the largest observation maps strictly below 1.
class Ecdf
{
public:
  Ecdf(std::span<const double> data, bool rescale);

  double operator()(double x) const;

  std::size_t size() const { return sorted_.size(); }
  bool rescaled() const { return rescale_; }
  std::span<const double> sorted_values() const { return sorted_; }

private:
  std::vector<double> sorted_;
  bool rescale_;
  double denom_;
};

Ecdf ecdf_fit(std::span<const double> data, bool rescale);

struct UnitPoint
{
  double u;
  double v;

  bool operator==(const UnitPoint&) const = default;
};

//! (F_n(X_i), G_n(Y_i)). Tied inputs share a coordinate value.
std::vector<UnitPoint> pseudo_observations(const PairedSample& sample,
                                           bool rescale);

//! Kolmogorov-Smirnov distance sup |F_n - F|, evaluated exactly at the jumps.
double ks_statistic(std::span<const double> data,
                    const std::function<double(double)>& cdf);

} // namespace qcde
