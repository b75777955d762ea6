#pragma once

#include "qcde/empirical.hpp"
#include "qcde/kernels.hpp"

#include <span>
#include <string>
#include <variant>
#include <vector>

namespace qcde {

//! Product kernel K(s) K(t) with a common bandwidth in both coordinates.
struct ProductKernelMode
{
  KernelSpec kernel;
  bool operator==(const ProductKernelMode&) const = default;
};

//! Chen beta kernels K_{u,a}(U_i) K_{v,a}(V_i); no boundary bias on [0,1]^2.
struct BetaKernelMode
{
  bool operator==(const BetaKernelMode&) const = default;
};

using CopulaMode = std::variant<ProductKernelMode, BetaKernelMode>;

//! "beta" or a kernel family name.
CopulaMode copula_mode_from_name(const std::string& name);
std::string copula_mode_name(const CopulaMode& mode);

//! Kernel estimate of a copula density from points in [0,1]^2.
//!
//! Fitted on pseudo-observations (F_n(X_i), G_n(Y_i)) this is the genuine
//! estimator; fitted on (F(X_i), G(Y_i)) with known margins it is the
//! oracle pseudo-estimator used in simulations.
class CopulaDensityEstimate
{
public:
  CopulaDensityEstimate(std::span<const UnitPoint> points,
                        double a,
                        CopulaMode mode);

  //! Throws std::domain_error if (u, v) is outside the unit square.
  double operator()(double u, double v) const;

  double bandwidth() const { return a_; }
  const CopulaMode& mode() const { return mode_; }
  std::size_t size() const { return points_.size(); }

private:
  double eval_product(const KernelSpec& k, double u, double v) const;
  double eval_beta(double u, double v) const;

  std::vector<UnitPoint> points_; // sorted by u
  // log t and log(1 - t) per coordinate, used by the beta mode
  std::vector<double> log_u_, log1m_u_, log_v_, log1m_v_;
  double a_;
  CopulaMode mode_;
};

CopulaDensityEstimate copula_fit(std::span<const UnitPoint> points,
                                 double a,
                                 CopulaMode mode);

double copula_eval(const CopulaDensityEstimate& est, double u, double v);

} // namespace qcde
