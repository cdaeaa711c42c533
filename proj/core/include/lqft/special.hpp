#ifndef LQFT_SPECIAL_HPP
#define LQFT_SPECIAL_HPP

namespace lqft {

// Lanczos approximation (g = 671/128, 14 terms), reflection below 1/2.
double gamma_fn(double x);

// Central differences of gamma_fn with Richardson extrapolation in the step.
double gamma_derivative(double x);

double normal_cdf(double x);

// Regularized lower incomplete gamma: CDF of Gamma(shape, rate) at y.
double gamma_cdf(double y, double shape, double rate);

}  // namespace lqft

#endif
