#pragma once

namespace biomark {

// Standard normal CDF.
double normal_cdf(double x);

// Inverse standard normal CDF (Acklam's rational approximation, refined by
// one Halley step; |rel err| < 1e-13). p in (0, 1).
double normal_quantile(double p);

// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

// Two-sided p-value for a t statistic with df degrees of freedom.
double t_two_sided_p(double t, double df);

// Two-sided p-value from a standard normal statistic.
double normal_two_sided_p(double z);

}  // namespace biomark
