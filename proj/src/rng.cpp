#include "augpipe/rng.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "augpipe/errors.hpp"

namespace augpipe {

std::uint64_t Rng::uniform_below(std::uint64_t n) {
  if (n == 0) throw InvalidParameterError("uniform_below requires n > 0");
  // Reject the low 2^64 mod n words so every residue is equally likely.
  const std::uint64_t cutoff = (0 - n) % n;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x < cutoff);
  return x % n;
}

int Rng::uniform_int(int lo, int hi) {
  if (lo > hi) throw InvalidParameterError("uniform_int requires lo <= hi");
  const std::uint64_t span = static_cast<std::uint64_t>(static_cast<std::int64_t>(hi) -
                                                        static_cast<std::int64_t>(lo)) + 1;
  return static_cast<int>(lo + static_cast<std::int64_t>(uniform_below(span)));
}

double Rng::normal() {
  // Box-Muller. u1 is nudged away from zero so the log stays finite.
  const double u1 = uniform01();
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1 > 0.0 ? u1 : 0x1.0p-53));
  return r * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::gamma(double alpha) {
  if (!(alpha > 0.0)) {
    throw InvalidParameterError("gamma shape must be positive, got " + std::to_string(alpha));
  }
  if (alpha < 1.0) {
    // Boost: Gamma(a) = Gamma(a+1) * U^(1/a), with U drawn away from zero.
    const double g = gamma(alpha + 1.0);
    double u = uniform01();
    if (u <= 0.0) u = 0x1.0p-53;
    return g * std::pow(u, 1.0 / alpha);
  }
  // Marsaglia-Tsang (2000) squeeze method.
  const double d = alpha - 1.0 / 3.0;
  const double c = 1.0 / (3.0 * std::sqrt(d));
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform01();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

std::vector<double> dirichlet_symmetric(double alpha, int k, Rng& rng) {
  if (k <= 0) throw InvalidParameterError("dirichlet dimension must be positive");
  if (!(alpha > 0.0)) {
    throw InvalidParameterError("dirichlet concentration must be positive, got " +
                                std::to_string(alpha));
  }
  std::vector<double> w(static_cast<std::size_t>(k));
  double sum = 0.0;
  for (double& wi : w) {
    wi = rng.gamma(alpha);
    sum += wi;
  }
  if (sum <= 0.0) {
    // All draws underflowed to zero (tiny alpha); fall back to the uniform
    // barycenter, the distribution's mean.
    for (double& wi : w) wi = 1.0 / k;
    return w;
  }
  for (double& wi : w) wi /= sum;
  return w;
}

}  // namespace augpipe
