#pragma once

#include <functional>
#include <span>
#include <utility>

namespace qcde {

//! Adaptive 15-point Gauss-Kronrod quadrature of f over [lo, hi].
//! Stops when the Kronrod error estimate drops below abs_tol.
double integrate(const std::function<double(double)>& f,
                 double lo,
                 double hi,
                 double abs_tol = 1e-10);

//! Iterated adaptive quadrature over the rectangle [xlo, xhi] x [ylo, yhi].
double integrate2d(const std::function<double(double, double)>& f,
                   double xlo,
                   double xhi,
                   double ylo,
                   double yhi,
                   double abs_tol = 1e-10);

struct LinearFit
{
  double intercept;
  double slope;
  double slope_stderr;
};

//! Ordinary least squares y = intercept + slope * x. Needs at least two
//! distinct abscissae; throws std::invalid_argument otherwise.
LinearFit least_squares_line(std::span<const double> x,
                             std::span<const double> y);

double median(std::span<const double> values);

//! Sample variance with denominator n - 1 (0 when fewer than two values).
double sample_variance(std::span<const double> values);

double mean(std::span<const double> values);

} // namespace qcde
