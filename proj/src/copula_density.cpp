#include "qcde/copula_density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qcde {

CopulaMode copula_mode_from_name(const std::string& name)
{
  if (name == "beta") {
    return BetaKernelMode{};
  }
  return ProductKernelMode{ kernel_from_name(name) };
}

std::string copula_mode_name(const CopulaMode& mode)
{
  if (const auto* p = std::get_if<ProductKernelMode>(&mode)) {
    return p->kernel.name();
  }
  return "beta";
}

CopulaDensityEstimate::CopulaDensityEstimate(std::span<const UnitPoint> points,
                                             double a,
                                             CopulaMode mode)
  : points_(points.begin(), points.end())
  , a_(a)
  , mode_(mode)
{
  if (points_.empty()) {
    throw std::invalid_argument("copula density: no points");
  }
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw std::invalid_argument("copula density: bandwidth must be positive");
  }
  for (const auto& p : points_) {
    if (!(p.u >= 0.0 && p.u <= 1.0 && p.v >= 0.0 && p.v <= 1.0)) {
      throw std::invalid_argument("copula density: point outside [0,1]^2");
    }
  }
  std::stable_sort(points_.begin(),
                   points_.end(),
                   [](const UnitPoint& l, const UnitPoint& r) {
                     return l.u < r.u;
                   });
  if (std::holds_alternative<BetaKernelMode>(mode_)) {
    const std::size_t n = points_.size();
    log_u_.resize(n);
    log1m_u_.resize(n);
    log_v_.resize(n);
    log1m_v_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      log_u_[i] = std::log(points_[i].u);
      log1m_u_[i] = std::log1p(-points_[i].u);
      log_v_[i] = std::log(points_[i].v);
      log1m_v_[i] = std::log1p(-points_[i].v);
    }
  }
}

double CopulaDensityEstimate::operator()(double u, double v) const
{
  if (!(u >= 0.0 && u <= 1.0 && v >= 0.0 && v <= 1.0)) {
    throw std::domain_error("copula density: query outside [0,1]^2");
  }
  if (const auto* p = std::get_if<ProductKernelMode>(&mode_)) {
    return eval_product(p->kernel, u, v);
  }
  return eval_beta(u, v);
}

double CopulaDensityEstimate::eval_product(const KernelSpec& k,
                                           double u,
                                           double v) const
{
  auto first = points_.begin();
  auto last = points_.end();
  if (k.compact()) {
    const double r = k.support_radius() * a_;
    first = std::lower_bound(
      points_.begin(), points_.end(), u - r, [](const UnitPoint& p, double x) {
        return p.u < x;
      });
    last = std::upper_bound(
      first, points_.end(), u + r, [](double x, const UnitPoint& p) {
        return x < p.u;
      });
  }
  double sum = 0.0;
  for (auto it = first; it != last; ++it) {
    const double kv = k((v - it->v) / a_);
    if (kv != 0.0) {
      sum += k((u - it->u) / a_) * kv;
    }
  }
  return sum / (static_cast<double>(points_.size()) * a_ * a_);
}

double CopulaDensityEstimate::eval_beta(double u, double v) const
{
  const BetaKernelSpec ku(u, a_);
  const BetaKernelSpec kv(v, a_);
  const double pu = u / a_;
  const double qu = (1.0 - u) / a_;
  const double pv = v / a_;
  const double qv = (1.0 - v) / a_;
  const double log_norm = ku.log_normalizer() + kv.log_normalizer();
  // c * log t with the convention 0 * log 0 = 0
  auto term = [](double c, double lt) { return c == 0.0 ? 0.0 : c * lt; };
  double sum = 0.0;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const double e = term(pu, log_u_[i]) + term(qu, log1m_u_[i]) +
                     term(pv, log_v_[i]) + term(qv, log1m_v_[i]) - log_norm;
    sum += std::exp(e);
  }
  return sum / static_cast<double>(points_.size());
}

CopulaDensityEstimate copula_fit(std::span<const UnitPoint> points,
                                 double a,
                                 CopulaMode mode)
{
  return CopulaDensityEstimate(points, a, mode);
}

double copula_eval(const CopulaDensityEstimate& est, double u, double v)
{
  return est(u, v);
}

} // namespace qcde
