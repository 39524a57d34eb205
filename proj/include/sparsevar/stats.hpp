#pragma once

#include <span>

namespace sparsevar::stats {

double normal_cdf(double x);

/// Inverse standard-normal CDF. Rational approximation refined by one
/// Halley step; absolute error below 1e-12 on (1e-300, 1 - 1e-16).
double normal_quantile(double p);

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// One-sample Kolmogorov-Smirnov test against N(0, 1).
KsResult ks_test_normal(std::span<const double> sample);

}  // namespace sparsevar::stats
