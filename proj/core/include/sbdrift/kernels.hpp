#pragma once

#include <span>

namespace sbdrift::kernels {

/// Product Epanechnikov kernel on R^d, d in {1, 2}.
struct KernelSpec {
  int dim = 1;
};

struct KernelConstants {
  double l2_norm_sq;      // R(K) = int K^2
  double sup_norm;        // mu_inf(K)
  double support_radius;  // R_K
};

/// One-dimensional Epanechnikov factor (3/4)(1 - u^2) on |u| <= 1.
inline double epanechnikov(double u) {
  const double v = 1.0 - u * u;
  return v > 0.0 ? 0.75 * v : 0.0;
}

double eval_kernel(const KernelSpec& spec, std::span<const double> z);

/// K_h(z) = h^{-d} K(z / h).
double eval_scaled(const KernelSpec& spec, std::span<const double> z, double h);

KernelConstants kernel_constants(const KernelSpec& spec);

}  // namespace sbdrift::kernels
