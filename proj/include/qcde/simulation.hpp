#pragma once

#include "qcde/empirical.hpp"

#include <cstdint>
#include <vector>

namespace qcde {

double normal_pdf(double x);
double normal_cdf(double x);
double normal_quantile(double p);

//! Frank copula in the base-theta form
//!   C(u, v) = ln[(theta + theta^(u+v) - theta^u - theta^v) / (theta - 1)]
//!             / ln theta.
//! This is the usual Frank family with alpha = -ln theta, so theta > 1
//! gives negative dependence and theta < 1 positive dependence. Within
//! 1e-6 of theta = 1 the independence copula uv is used.
class FrankCopula
{
public:
  //! Throws std::invalid_argument unless theta > 0 and theta != 1.
  explicit FrankCopula(double theta);

  double theta() const { return theta_; }
  bool independent() const { return independent_; }

  double cdf(double u, double v) const;
  double density(double u, double v) const;
  //! Conditional cdf dC/du (u, v), the law of V given U = u.
  double conditional_cdf(double u, double v) const;
  //! Solves conditional_cdf(u, v) = w for v in closed form.
  double conditional_quantile(double u, double w) const;

private:
  // log(theta + theta^(u+v) - theta^u - theta^v) - log(theta - 1), which is
  // ln theta * C(u, v), for theta > 1
  double log_ratio_above_one(double u, double v) const;

  double theta_;
  double log_theta_;
  bool independent_;
};

double frank_cdf(const FrankCopula& cop, double u, double v);
double frank_density(const FrankCopula& cop, double u, double v);

//! n draws from the copula by conditional inversion. Deterministic in seed:
//! each draw consumes two 64-bit outputs of mt19937_64 (u, then w).
std::vector<UnitPoint> frank_sample(const FrankCopula& cop,
                                    std::size_t n,
                                    std::uint64_t seed);

//! Standard normal margins linked by a Frank copula.
class SimulationModel
{
public:
  explicit SimulationModel(double theta = 100.0)
    : copula_(theta)
  {}

  const FrankCopula& copula() const { return copula_; }

  double x_pdf(double x) const { return normal_pdf(x); }
  double y_pdf(double y) const { return normal_pdf(y); }
  double x_cdf(double x) const { return normal_cdf(x); }
  double y_cdf(double y) const { return normal_cdf(y); }

  //! F_XY(x, y) = C(F(x), G(y)).
  double joint_cdf(double x, double y) const;
  //! f(y | x) = g(y) c(F(x), G(y)).
  double conditional_density(double x, double y) const;

private:
  FrankCopula copula_;
};

//! (Phi^-1(u_i), Phi^-1(v_i)) for the copula draws of frank_sample.
PairedSample sample_xy(const SimulationModel& model,
                       std::size_t n,
                       std::uint64_t seed);

double true_conditional_density(const SimulationModel& model,
                                double x,
                                double y);

} // namespace qcde
