#include "qcde/numerics.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <vector>

namespace qcde {

namespace {

constexpr std::size_t max_panels = 4000;

struct Panel
{
  double lo;
  double hi;
  double value;
  double err;
  double l1;
  bool operator<(const Panel& o) const { return err < o.err; }
};

Panel gk15(const std::function<double(double)>& f, double lo, double hi)
{
  Panel p{ lo, hi, 0.0, 0.0, 0.0 };
  p.value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
    f, lo, hi, 0, 0.0, &p.err, &p.l1);
  return p;
}

} // namespace

double integrate(const std::function<double(double)>& f,
                 double lo,
                 double hi,
                 double abs_tol)
{
  if (!(hi > lo)) {
    return 0.0;
  }
  // global adaptive: keep splitting the panel with the largest error
  std::priority_queue<Panel> heap;
  Panel first = gk15(f, lo, hi);
  double total_err = first.err;
  double total_l1 = first.l1;
  heap.push(first);
  while (heap.size() < max_panels && total_err > abs_tol &&
         total_err > 1e-14 * total_l1) {
    const Panel worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi)) {
      heap.push(worst);
      break;
    }
    const Panel left = gk15(f, worst.lo, mid);
    const Panel right = gk15(f, mid, worst.hi);
    total_err += left.err + right.err - worst.err;
    total_l1 += left.l1 + right.l1 - worst.l1;
    heap.push(left);
    heap.push(right);
  }
  double total = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    heap.pop();
  }
  return total;
}

double integrate2d(const std::function<double(double, double)>& f,
                   double xlo,
                   double xhi,
                   double ylo,
                   double yhi,
                   double abs_tol)
{
  const double inner_tol = abs_tol / std::max(1.0, yhi - ylo);
  auto outer = [&](double x) {
    return integrate([&](double y) { return f(x, y); }, ylo, yhi, inner_tol);
  };
  return integrate(outer, xlo, xhi, abs_tol);
}

LinearFit least_squares_line(std::span<const double> x,
                             std::span<const double> y)
{
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument(
      "least_squares_line: need at least two paired points");
  }
  const double n = static_cast<double>(x.size());
  const double mx = mean(x);
  const double my = mean(y);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) {
    throw std::invalid_argument("least_squares_line: abscissae all equal");
  }
  LinearFit fit{};
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    rss += r * r;
  }
  fit.slope_stderr = x.size() > 2 ? std::sqrt(rss / (n - 2.0) / sxx) : 0.0;
  return fit;
}

double median(std::span<const double> values)
{
  if (values.empty()) {
    throw std::invalid_argument("median: empty input");
  }
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double mean(std::span<const double> values)
{
  if (values.empty()) {
    throw std::invalid_argument("mean: empty input");
  }
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

double sample_variance(std::span<const double> values)
{
  if (values.size() < 2) {
    return 0.0;
  }
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) {
    ss += (v - m) * (v - m);
  }
  return ss / static_cast<double>(values.size() - 1);
}

} // namespace qcde
