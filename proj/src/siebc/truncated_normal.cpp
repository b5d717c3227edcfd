#include "sentdyn/siebc/truncated_normal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

namespace sentdyn::siebc {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double normal_cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }
double normal_upper(double z) { return 0.5 * std::erfc(z * kInvSqrt2); }

// log(1 - Phi(x)); asymptotic series once erfc underflows.
double log_upper_tail(double x) {
    if (x < 30.0) return std::log(normal_upper(x));
    const double r = 1.0 / (x * x);
    const double series = 1.0 - r * (1.0 - r * (3.0 - r * (15.0 - r * 105.0)));
    return -0.5 * x * x - std::log(x) - kLogSqrt2Pi + std::log(series);
}

double normal_quantile(double p) { return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p); }

} // namespace

double log_normal_mass(double a, double b) {
    if (b <= 0.0) return log_normal_mass(-b, -a);
    if (a >= 0.0) {
        const double la = log_upper_tail(a);
        const double lb = log_upper_tail(b);
        return la + std::log1p(-std::exp(lb - la));
    }
    return std::log1p(-normal_upper(-a) - normal_upper(b));
}

double truncated_normal_log_density(double x, double mu, double sigma) {
    if (!(x >= -1.0 && x <= 1.0)) return -std::numeric_limits<double>::infinity();
    const double z = (x - mu) / sigma;
    return -0.5 * z * z - kLogSqrt2Pi - std::log(sigma) - log_normal_mass((-1.0 - mu) / sigma, (1.0 - mu) / sigma);
}

double truncated_normal_mean(double mu, double sigma) {
    if (sigma < kDegenerateSigma) return std::clamp(mu, -1.0, 1.0);
    const double a = (-1.0 - mu) / sigma;
    const double b = (1.0 - mu) / sigma;
    const double log_z = log_normal_mass(a, b);
    const double pa = std::exp(-0.5 * a * a - kLogSqrt2Pi - log_z);
    const double pb = std::exp(-0.5 * b * b - kLogSqrt2Pi - log_z);
    return std::clamp(mu + sigma * (pa - pb), -1.0, 1.0);
}

namespace {

// Standard normal restricted to [a, b] with a >= 0 (Robert, 1995).
double sample_upper(double a, double b, Rng& rng) {
    const double root = std::sqrt(a * a + 4.0);
    const double lambda = (a + root) / 2.0;
    const double uniform_limit = a + 2.0 * std::sqrt(std::numbers::e) / (a + root) * std::exp((a * a - a * root) / 4.0);
    if (b <= uniform_limit) {
        while (true) {
            const double z = rng.uniform(a, b);
            if (rng.uniform() < std::exp((a * a - z * z) / 2.0)) return z;
        }
    }
    while (true) {
        const double z = a + rng.exponential(lambda);
        if (z > b) continue;
        if (rng.uniform() < std::exp(-(z - lambda) * (z - lambda) / 2.0)) return z;
    }
}

double sample_standard(double a, double b, Rng& rng) {
    if (a >= 0.0) return sample_upper(a, b, rng);
    if (b <= 0.0) return -sample_upper(-b, -a, rng);
    if (b - a >= std::sqrt(2.0 * std::numbers::pi)) {
        while (true) {
            const double z = rng.normal();
            if (z >= a && z <= b) return z;
        }
    }
    while (true) {
        const double z = rng.uniform(a, b);
        if (rng.uniform() < std::exp(-z * z / 2.0)) return z;
    }
}

} // namespace

double truncated_normal_sample(double mu, double sigma, Rng& rng) {
    if (sigma < kDegenerateSigma) return std::clamp(mu, -1.0, 1.0);
    const double z = sample_standard((-1.0 - mu) / sigma, (1.0 - mu) / sigma, rng);
    return std::clamp(mu + sigma * z, -1.0, 1.0);
}

double truncated_normal_cdf(double x, double mu, double sigma) {
    if (x <= -1.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double a = (-1.0 - mu) / sigma;
    const double b = (1.0 - mu) / sigma;
    const double z = (x - mu) / sigma;
    if (z <= a) return 0.0;
    return std::min(1.0, std::exp(log_normal_mass(a, z) - log_normal_mass(a, b)));
}

double truncated_normal_quantile(double v, double mu, double sigma) {
    if (sigma < kDegenerateSigma) return std::clamp(mu, -1.0, 1.0);
    v = std::clamp(v, 0.0, 1.0);
    const double a = (-1.0 - mu) / sigma;
    const double b = (1.0 - mu) / sigma;
    double z = 0.0;
    if (a >= 0.0) {
        // Upper tail: invert the survival function to keep precision.
        const double qa = normal_upper(a);
        const double qb = normal_upper(b);
        const double q = qa - v * (qa - qb);
        z = q > 0.0 ? -normal_quantile(q) : a;
    } else {
        const double pa = normal_cdf(a);
        const double pb = normal_cdf(b);
        const double p = pa + v * (pb - pa);
        z = p > 0.0 ? normal_quantile(p) : b;
    }
    return std::clamp(mu + sigma * z, -1.0, 1.0);
}

} // namespace sentdyn::siebc
