#pragma once

#include <cmath>
#include <string_view>

namespace sentdyn::siebc {

inline constexpr double kDefaultGamma = 50.0;

// Smooth bounded-confidence update of focal sentiment s1 towards s2. The gate
// 1 / (1 + exp(gamma * (d^2 - eps^2))) is 1/2 exactly at |d| = eps.
inline double bc_kernel(double s1, double s2, double alpha, double epsilon, double gamma = kDefaultGamma) {
    const double d = s2 - s1;
    const double x = gamma * (d * d - epsilon * epsilon);
    // exp overflows past ~709; the update is then exactly zero in double.
    if (x > 700.0) return s1;
    return s1 + alpha * d / (1.0 + std::exp(x));
}

inline double linear_kernel(double s1, double s2, double alpha) { return s1 + alpha * (s2 - s1); }

enum class KernelType { bounded, linear };

std::string_view to_string(KernelType k);
KernelType parse_kernel(std::string_view name);

struct ModelConfig {
    double gamma = kDefaultGamma;
    KernelType kernel = KernelType::bounded;
};

inline double apply_kernel(const ModelConfig& m, double s1, double s2, double alpha, double epsilon) {
    return m.kernel == KernelType::bounded ? bc_kernel(s1, s2, alpha, epsilon, m.gamma) : linear_kernel(s1, s2, alpha);
}

} // namespace sentdyn::siebc
