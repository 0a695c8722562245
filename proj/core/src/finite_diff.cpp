#include "stlgail/ad/finite_diff.hpp"

#include <algorithm>
#include <cmath>

#include "stlgail/error.hpp"

namespace stlgail::ad {
namespace {

double checked(const ScalarFunction& f, std::span<const double> x) {
  const double v = f(x);
  if (!std::isfinite(v)) throw NonFiniteValue("function returned a non-finite value");
  return v;
}

}  // namespace

FiniteDiffReport finite_diff_check(const ScalarFunction& f,
                                   std::span<const double> theta,
                                   std::span<const double> analytic, double h,
                                   double kink_tolerance) {
  if (analytic.size() != theta.size()) {
    throw DimensionMismatch("finite_diff_check: gradient size mismatch");
  }
  FiniteDiffReport report;
  report.central.resize(theta.size(), 0.0);
  std::vector<double> x(theta.begin(), theta.end());
  const double f0 = checked(f, x);
  for (std::size_t i = 0; i < theta.size(); ++i) {
    x[i] = theta[i] + h;
    const double fp = checked(f, x);
    x[i] = theta[i] - h;
    const double fm = checked(f, x);
    x[i] = theta[i];
    const double forward = (fp - f0) / h;
    const double backward = (f0 - fm) / h;
    const double central = (fp - fm) / (2.0 * h);
    report.central[i] = central;
    const double slope_gap =
        std::abs(forward - backward) / std::max(1.0, std::abs(central));
    if (slope_gap > kink_tolerance) {
      report.skipped.push_back(i);
      continue;
    }
    const double err = std::abs(analytic[i] - central) / std::max(1.0, std::abs(central));
    report.max_relative_error = std::max(report.max_relative_error, err);
  }
  return report;
}

}  // namespace stlgail::ad
