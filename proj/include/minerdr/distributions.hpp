#pragma once

namespace minerdr::dist {

/// Standard normal CDF via the complementary error function.
[[nodiscard]] double normal_cdf(double x);
/// Upper tail 1 - Phi(x), accurate far into the tail.
[[nodiscard]] double normal_sf(double x);
/// Inverse standard normal CDF for p in (0, 1). Acklam's rational
/// approximation refined by one Halley step (absolute error well below 1e-9).
/// normal_quantile(0.5) is exactly 0.
[[nodiscard]] double normal_quantile(double p);

/// Regularized lower incomplete gamma P(a, x).
[[nodiscard]] double gamma_p(double a, double x);
/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
[[nodiscard]] double gamma_q(double a, double x);
/// Regularized incomplete beta I_x(a, b).
[[nodiscard]] double beta_inc(double a, double b, double x);

/// Chi-square upper tail probability with `df` degrees of freedom.
[[nodiscard]] double chi2_sf(double x, double df);
/// Student-t upper tail P(T > t).
[[nodiscard]] double student_t_sf(double t, double df);
/// Two-sided Student-t p-value P(|T| > |t|).
[[nodiscard]] double student_t_two_sided(double t, double df);

}  // namespace minerdr::dist
