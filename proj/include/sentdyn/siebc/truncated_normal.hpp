#pragma once

#include "sentdyn/rng.hpp"

namespace sentdyn::siebc {

// Normal(mu, sigma) conditioned on [-1, 1].

// Below this scale the law is treated as a point mass at clamp(mu, -1, 1).
inline constexpr double kDegenerateSigma = 1e-9;

double truncated_normal_sample(double mu, double sigma, Rng& rng);

// Log density at x in [-1, 1], including the truncation normaliser; -inf
// outside the support.
double truncated_normal_log_density(double x, double mu, double sigma);

// log(Phi(b) - Phi(a)) for a < b, accurate in both tails.
double log_normal_mass(double a, double b);

double truncated_normal_mean(double mu, double sigma);

// Inverse CDF: maps v in (0, 1) to the point with P(X <= x) = v.
double truncated_normal_quantile(double v, double mu, double sigma);
double truncated_normal_cdf(double x, double mu, double sigma);

} // namespace sentdyn::siebc
