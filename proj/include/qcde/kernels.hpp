#pragma once

#include <string>
#include <string_view>

namespace qcde {

enum class KernelFamily
{
  epanechnikov,
  gaussian,
  uniform
};

//! Symmetric, nonnegative, first-order univariate kernel. Evaluation is
//! unscaled; callers apply K_h(u) = K(u / h) / h themselves.
class KernelSpec
{
public:
  constexpr KernelSpec() = default;
  constexpr explicit KernelSpec(KernelFamily family)
    : family_(family)
  {}

  KernelFamily family() const { return family_; }

  //! Half-width of the support; infinity for the Gaussian kernel.
  double support_radius() const;
  bool compact() const { return family_ != KernelFamily::gaussian; }

  double operator()(double u) const;

  std::string name() const;

  bool operator==(const KernelSpec&) const = default;

private:
  KernelFamily family_{ KernelFamily::epanechnikov };
};

//! Parses "epanechnikov" | "gaussian" | "uniform"; throws
//! std::invalid_argument on anything else.
KernelSpec kernel_from_name(std::string_view name);

double eval_kernel(const KernelSpec& spec, double u);

//! m_i(K) = int u^i K(u) du by adaptive quadrature, i in {0, 1, 2}.
double kernel_moment(const KernelSpec& spec, int i);

//! Squared L2 norm int K(u)^2 du, the constant entering variance formulas.
double kernel_l2(const KernelSpec& spec);

//! Chen's boundary-corrected beta kernel K_{x,b}(t), the Beta(x/b + 1,
//! (1 - x)/b + 1) density in t. Zero outside [0, 1].
class BetaKernelSpec
{
public:
  BetaKernelSpec(double location, double bandwidth);

  double location() const { return location_; }
  double bandwidth() const { return bandwidth_; }
  double alpha() const { return location_ / bandwidth_ + 1.0; }
  double beta() const { return (1.0 - location_) / bandwidth_ + 1.0; }
  //! log B(alpha, beta), computed through log-gamma.
  double log_normalizer() const { return log_norm_; }

  double operator()(double t) const;

private:
  double location_;
  double bandwidth_;
  double log_norm_;
};

double eval_beta_kernel(const BetaKernelSpec& spec, double t);

//! log of the Beta function via log-gamma, safe for large arguments.
double log_beta_function(double a, double b);

} // namespace qcde
