#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace npglm {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t x);

// Seed for work unit `index` under `master`. Stable across runs and platforms.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

// Uniform on the open interval (0, 1).
double uniform_open(Rng& rng);
double standard_normal(Rng& rng);

double normal_cdf(double x);
// Upper tail 1 - Phi(x), accurate for large x.
double normal_ccdf(double x);
double normal_quantile(double p);
// Inverse of the upper tail: x with 1 - Phi(x) = q.
double normal_cquantile(double q);

double two_sided_normal_p(double z);
double two_sided_t_p(double t, double dof);

// Linear-interpolation sample quantile (R type 7).
double quantile(std::span<const double> sorted, double prob);
double quantile_unsorted(std::vector<double> values, double prob);

double mean(std::span<const double> v);
// Sample variance with n - 1 denominator.
double sample_variance(std::span<const double> v);

}  // namespace npglm
