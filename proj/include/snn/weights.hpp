#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "snn/core.hpp"

namespace snn {

struct SnnParams {
  double lambda;  // stability trade-off, > 0
  int n;
  int d;

  SnnParams(double lambda_, int n_, int d_) : lambda(lambda_), n(n_), d(d_) {
    if (!(lambda > 0.0)) throw std::invalid_argument("SnnParams: lambda must be > 0");
    if (n < 1) throw std::invalid_argument("SnnParams: n must be >= 1");
    if (d < 1) throw std::invalid_argument("SnnParams: d must be >= 1");
  }
};

struct BnnParams {
  double q;  // resampling ratio, in (0, 1]
  int n;

  BnnParams(double q_, int n_) : q(q_), n(n_) {
    if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("BnnParams: q must be in (0,1]");
    if (n < 1) throw std::invalid_argument("BnnParams: n must be >= 1");
  }
};

// alpha_i = i^{1+2/d} - (i-1)^{1+2/d}
inline double alpha_coeff(long i, int d) {
  if (i < 1) throw std::invalid_argument("alpha_coeff: i must be >= 1");
  if (d < 1) throw std::invalid_argument("alpha_coeff: d must be >= 1");
  double e = 1.0 + 2.0 / static_cast<double>(d);
  return std::pow(static_cast<double>(i), e) - std::pow(static_cast<double>(i - 1), e);
}

inline double snn_k_star_real(double lambda, int n, int d) {
  double dd = static_cast<double>(d);
  double expo = dd / (dd + 4.0);
  double coef = std::pow(dd * (dd + 4.0) / (2.0 * (dd + 2.0)), expo);
  return coef * std::pow(lambda, expo) * std::pow(static_cast<double>(n), 4.0 / (dd + 4.0));
}

// k* = floor of the closed form, clamped to [1, n]. The asymptotic formula can
// fall below 1 (tiny lambda) or exceed n (huge lambda) at finite n.
inline int snn_k_star(const SnnParams& p) {
  double v = snn_k_star_real(p.lambda, p.n, p.d);
  if (!(v >= 1.0)) return 1;
  double f = std::floor(v);
  if (f >= static_cast<double>(p.n)) return p.n;
  return static_cast<int>(f);
}

// w_i = (1/k*)(1 + d/2 - d*alpha_i / (2 k*^{2/d})) for i <= k*, else 0.
// Entries are mathematically nonnegative; the clamp only absorbs floating
// point dust at the support edge. Renormalized so the sum invariant holds.
inline WeightVector snn_weights(const SnnParams& p) {
  int k = snn_k_star(p);
  std::vector<double> w(static_cast<std::size_t>(p.n), 0.0);
  double dd = static_cast<double>(p.d);
  double kk = static_cast<double>(k);
  double k2d = std::pow(kk, 2.0 / dd);
  for (int i = 1; i <= k; ++i) {
    double v = (1.0 + dd / 2.0 - dd * alpha_coeff(i, p.d) / (2.0 * k2d)) / kk;
    w[static_cast<std::size_t>(i) - 1] = std::max(v, 0.0);
  }
  double s = neumaier_sum(w.data(), static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) w[static_cast<std::size_t>(i)] /= s;
  return WeightVector(std::move(w));
}

inline WeightVector knn_weights(int k, int n) {
  if (k < 1 || k > n) throw std::invalid_argument("knn_weights: k must be in [1, n]");
  std::vector<double> w(static_cast<std::size_t>(n), 0.0);
  std::fill(w.begin(), w.begin() + k, 1.0 / static_cast<double>(k));
  return WeightVector(std::move(w));
}

// Geometric bagging weights q(1-q)^{i-1}, renormalized over the n realized
// ranks. The tail is cut once factors underflow; those ranks carry no mass
// representable in double precision anyway.
inline WeightVector bnn_weights(const BnnParams& p) {
  std::vector<double> w(static_cast<std::size_t>(p.n), 0.0);
  if (p.q == 1.0) {
    w[0] = 1.0;
    return WeightVector(std::move(w));
  }
  double t = p.q;
  for (int i = 0; i < p.n; ++i) {
    if (t < 1e-300) break;
    w[static_cast<std::size_t>(i)] = t;
    t *= (1.0 - p.q);
  }
  double s = neumaier_sum(w);
  for (double& v : w) v /= s;
  return WeightVector(std::move(w));
}

// OWNN is the lambda = B1/B2 member of the SNN family.
inline WeightVector ownn_weights(int n, int d, double b1, double b2) {
  if (!(b1 > 0.0)) throw std::invalid_argument("ownn_weights: B1 must be > 0");
  if (!(b2 > 0.0)) {
    if (b2 == 0.0) throw std::invalid_argument("OWNN undefined: B2 = 0");
    throw std::invalid_argument("ownn_weights: B2 must be > 0");
  }
  return snn_weights(SnnParams(b1 / b2, n, d));
}

// Stationary point of B1/k + B2 (k/n)^{4/d} over k, floored and clamped.
inline int knn_k_opt(int n, int d, double b1, double b2) {
  if (!(b1 > 0.0) || !(b2 > 0.0))
    throw std::invalid_argument("knn_k_opt: B1 and B2 must be > 0");
  double dd = static_cast<double>(d);
  double v = std::pow(dd * b1 / (4.0 * b2), dd / (dd + 4.0)) *
             std::pow(static_cast<double>(n), 4.0 / (dd + 4.0));
  if (!(v >= 1.0)) return 1;
  double f = std::floor(v);
  if (f >= static_cast<double>(n)) return n;
  return static_cast<int>(f);
}

}  // namespace snn
