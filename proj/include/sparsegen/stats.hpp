#pragma once

#include <cstddef>

namespace sparsegen::stats {

// Regularized incomplete beta I_x(a, b), evaluated with the Lentz continued
// fraction. Relative error around 1e-12 across the far tails, which the
// correlation p-values need.
double regularized_incomplete_beta(double x, double a, double b);

// CDF of Student's t with `dof` degrees of freedom.
double student_t_cdf(double t, double dof);

// Two-sided p-value for a t statistic: I_{v/(v+t^2)}(v/2, 1/2).
double student_t_two_sided_p(double t, double dof);

}  // namespace sparsegen::stats
