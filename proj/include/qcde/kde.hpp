#pragma once

#include "qcde/kernels.hpp"

#include <span>
#include <string>
#include <variant>
#include <vector>

namespace qcde {

//! Parzen-Rosenblatt estimator (1 / nh) sum_i K((y - Y_i) / h).
class UnivariateKde
{
public:
  UnivariateKde(std::span<const double> data, double h, KernelSpec kernel);

  double operator()(double y) const;

  double bandwidth() const { return h_; }
  const KernelSpec& kernel() const { return kernel_; }
  std::size_t size() const { return data_.size(); }

private:
  std::vector<double> data_; // sorted
  double h_;
  KernelSpec kernel_;
};

UnivariateKde kde_fit(std::span<const double> data, double h, KernelSpec kernel);
double kde_eval(const UnivariateKde& est, double y);

// Bandwidth rules. Scott's rule is sd * n^(-1 / (d + 4)) with no extra
// constant; sd uses the n - 1 denominator.
struct ScottUnivariate
{
  bool operator==(const ScottUnivariate&) const = default;
};
struct ScottBivariate
{
  bool operator==(const ScottBivariate&) const = default;
};
struct PowerRule
{
  double constant;
  double exponent;
  bool operator==(const PowerRule&) const = default;
};
struct FixedBandwidth
{
  double h;
  bool operator==(const FixedBandwidth&) const = default;
};

using BandwidthRule =
  std::variant<ScottUnivariate, ScottBivariate, PowerRule, FixedBandwidth>;

//! Throws std::invalid_argument when a Scott rule gets fewer than two points
//! or the result is not strictly positive.
double bandwidth(const BandwidthRule& rule, std::span<const double> data);

std::string describe(const BandwidthRule& rule);

} // namespace qcde
