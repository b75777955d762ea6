#pragma once

#include "qcde/copula_density.hpp"
#include "qcde/empirical.hpp"
#include "qcde/kde.hpp"

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace qcde {

enum class Method
{
  quantile_copula,
  double_kernel,
  local_polynomial
};

//! "qc" | "dk" | "ll"
Method method_from_name(const std::string& name);
std::string method_name(Method m);

enum class ClipFallback
{
  zero,
  marginal_kde
};

//! What a ratio-type estimator does when the kernel estimate of f_X(x) is
//! at or below the threshold c.
class ClippingPolicy
{
public:
  static ClippingPolicy none() { return ClippingPolicy(); }
  //! Throws std::invalid_argument unless c > 0.
  static ClippingPolicy threshold(double c, ClipFallback fallback);

  bool enabled() const { return threshold_.has_value(); }
  double threshold_value() const { return threshold_.value_or(0.0); }
  ClipFallback fallback() const { return fallback_; }

private:
  std::optional<double> threshold_;
  ClipFallback fallback_{ ClipFallback::zero };
};

//! Value of an estimate at one point; nullopt is the Undefined outcome
//! (empty kernel window without clipping, singular local fit).
using Estimate = std::optional<double>;

struct QuantileCopulaOptions
{
  BandwidthRule h = ScottUnivariate{};
  BandwidthRule a = ScottBivariate{};
  KernelSpec marginal_kernel{ KernelFamily::epanechnikov };
  CopulaMode copula_mode = BetaKernelMode{};
};

struct RatioOptions
{
  BandwidthRule h1 = ScottUnivariate{}; // x direction
  BandwidthRule h2 = ScottUnivariate{}; // y direction
  KernelSpec x_kernel{ KernelFamily::epanechnikov };
  KernelSpec y_kernel{ KernelFamily::epanechnikov };
  ClippingPolicy clipping = ClippingPolicy::none();
  //! Local polynomial degree, 0 or 1. Ignored by the double kernel.
  int degree = 1;
};

class ConditionalDensityEstimator
{
public:
  Method method() const { return method_; }

  //! Quantile-copula: always a finite nonnegative value.
  //! Double kernel: nullopt when the x-window is empty and clipping is off.
  //! Local polynomial: may be negative; nullopt when the weighted design is
  //! singular.
  Estimate operator()(double x, double y) const;

  //! h for the marginal of Y (qc) or h1 (dk, ll).
  double primary_bandwidth() const;
  //! a for the copula density (qc) or h2 (dk, ll).
  double secondary_bandwidth() const;

  // quantile-copula components, empty for the other methods
  const UnivariateKde* marginal() const;
  const CopulaDensityEstimate* copula() const;
  std::optional<std::pair<double, double>> ranks(double x, double y) const;

private:
  struct QuantileCopulaState
  {
    UnivariateKde g;
    CopulaDensityEstimate c;
    Ecdf fx;
    Ecdf gy;
  };
  struct RatioState
  {
    std::vector<double> xs; // sorted by x
    std::vector<double> ys; // same permutation
    double h1;
    double h2;
    RatioOptions options;
    UnivariateKde g;
  };

  explicit ConditionalDensityEstimator(QuantileCopulaState s);
  ConditionalDensityEstimator(Method m, RatioState s);

  Estimate eval_ratio(const RatioState& s, double x, double y) const;

  Method method_;
  std::variant<QuantileCopulaState, RatioState> state_;

  friend ConditionalDensityEstimator fit_quantile_copula(
    const PairedSample&,
    const QuantileCopulaOptions&);
  friend ConditionalDensityEstimator fit_double_kernel(const PairedSample&,
                                                       const RatioOptions&);
  friend ConditionalDensityEstimator fit_local_polynomial(const PairedSample&,
                                                          const RatioOptions&);
};

//! g_n(y) * c_n(F_n(x), G_n(y)) with n/(n+1)-rescaled empirical margins.
//! The bandwidth h is chosen on the ys, a on the pseudo u-coordinates.
ConditionalDensityEstimator fit_quantile_copula(
  const PairedSample& sample,
  const QuantileCopulaOptions& options = {});

//! Nadaraya-Watson type ratio sum K'_h1(X_i - x) K_h2(Y_i - y) /
//! sum K'_h1(X_i - x).
ConditionalDensityEstimator fit_double_kernel(const PairedSample& sample,
                                              const RatioOptions& options = {});

//! Intercept of the weighted least-squares fit of K_h2(Y_i - y) on
//! (X_i - x)^j, j <= degree, with weights K'_h1(X_i - x).
ConditionalDensityEstimator fit_local_polynomial(
  const PairedSample& sample,
  const RatioOptions& options = {});

Estimate eval(const ConditionalDensityEstimator& est, double x, double y);

//! Row-major grid of estimates, entry (i, j) = est(xs[i], ys[j]).
struct EstimateGrid
{
  std::vector<double> xs;
  std::vector<double> ys;
  std::vector<Estimate> values;

  const Estimate& at(std::size_t i, std::size_t j) const
  {
    return values[i * ys.size() + j];
  }
};

EstimateGrid eval_grid(const ConditionalDensityEstimator& est,
                       std::span<const double> xs,
                       std::span<const double> ys,
                       unsigned threads = 1);

//! n points evenly spaced over [lo, hi] (n = 1 gives lo).
std::vector<double> linspace(double lo, double hi, std::size_t n);

} // namespace qcde
