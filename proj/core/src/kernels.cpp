#include "sbdrift/kernels.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sbdrift::kernels {

namespace {

void check_dim(const KernelSpec& spec, std::span<const double> z) {
  if (spec.dim < 1) throw std::invalid_argument("kernel dimension must be positive");
  if (static_cast<int>(z.size()) != spec.dim) {
    throw std::invalid_argument("kernel argument has dimension " + std::to_string(z.size()) +
                                ", expected " + std::to_string(spec.dim));
  }
}

}  // namespace

double eval_kernel(const KernelSpec& spec, std::span<const double> z) {
  check_dim(spec, z);
  double value = 1.0;
  for (double zi : z) value *= epanechnikov(zi);
  return value;
}

double eval_scaled(const KernelSpec& spec, std::span<const double> z, double h) {
  check_dim(spec, z);
  if (!(h > 0.0)) throw std::invalid_argument("bandwidth must be positive");
  double value = 1.0;
  for (double zi : z) value *= epanechnikov(zi / h) / h;
  return value;
}

KernelConstants kernel_constants(const KernelSpec& spec) {
  if (spec.dim < 1) throw std::invalid_argument("kernel dimension must be positive");
  return {std::pow(0.6, spec.dim), std::pow(0.75, spec.dim), 1.0};
}

}  // namespace sbdrift::kernels
