#include "lqft/special.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/gamma.hpp>

#include "lqft/errors.hpp"

namespace lqft {

namespace {

// Lanczos series with g = 671/128 and 14 terms (Numerical Recipes, 3rd ed.).
constexpr double kLanczosG = 671.0 / 128.0;
constexpr double kLanczosHead = 0.999999999999997092;
constexpr std::array<double, 14> kLanczosCoeff = {
    57.1562356658629235,     -59.5979603554754912,    14.1360979747417471,     -0.491913816097620199,
    .339946499848118887e-4,  .465236289270485756e-4,  -.983744753048795646e-4, .158088703224912494e-3,
    -.210264441724104883e-3, .217439618115212643e-3,  -.164318106536763890e-3, .844182239838527433e-4,
    -.261908384015814087e-4, .368991826595316234e-5};

}  // namespace

double gamma_fn(double x) {
  if (!std::isfinite(x)) throw DomainError("gamma_fn: non-finite argument");
  if (x <= 0.0 && x == std::floor(x)) throw DomainError("gamma_fn: pole at non-positive integer");
  if (x < 0.5) {
    return std::numbers::pi / (std::sin(std::numbers::pi * x) * gamma_fn(1.0 - x));
  }
  double series = kLanczosHead;
  double y = x;
  for (double c : kLanczosCoeff) series += c / ++y;
  const double t = x + kLanczosG;
  return std::sqrt(2.0 * std::numbers::pi) * series / x * std::exp((x + 0.5) * std::log(t) - t);
}

double gamma_derivative(double x) {
  double h = 0.125;
  if (x > 0.0) h = std::min(h, 0.25 * x);
  constexpr int kLevels = 6;
  std::array<std::array<double, kLevels>, kLevels> r{};
  double best = 0.0;
  double best_change = INFINITY;
  for (int i = 0; i < kLevels; ++i) {
    r[i][0] = (gamma_fn(x + h) - gamma_fn(x - h)) / (2.0 * h);
    double factor = 4.0;
    for (int j = 1; j <= i; ++j) {
      r[i][j] = r[i][j - 1] + (r[i][j - 1] - r[i - 1][j - 1]) / (factor - 1.0);
      factor *= 4.0;
    }
    if (i > 0) {
      const double change = std::abs(r[i][i] - r[i - 1][i - 1]);
      if (change < best_change) {
        best_change = change;
        best = r[i][i];
      }
    }
    h *= 0.5;
  }
  return best;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double gamma_cdf(double y, double shape, double rate) {
  if (y <= 0.0) return 0.0;
  return boost::math::gamma_p(shape, rate * y);
}

}  // namespace lqft
