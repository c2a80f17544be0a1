#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "snn/core.hpp"
#include "snn/rng.hpp"

namespace snn {

// Axis-aligned box; only the boundary quadrature and plots consume it,
// sampling is never truncated to it.
struct Region {
  std::vector<double> lo;
  std::vector<double> hi;

  bool contains(const double* x, int d) const {
    for (int j = 0; j < d; ++j)
      if (x[j] < lo[static_cast<std::size_t>(j)] || x[j] > hi[static_cast<std::size_t>(j)]) return false;
    return true;
  }
};

struct GaussianMixture {
  std::vector<double> weights;
  std::vector<std::vector<double>> means;
  std::vector<std::vector<double>> covs;  // row-major d x d
};

namespace detail {

inline std::vector<double> cholesky_lower(const std::vector<double>& a, int d) {
  std::vector<double> L(a.size(), 0.0);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = a[static_cast<std::size_t>(i) * d + j];
      for (int k = 0; k < j; ++k)
        s -= L[static_cast<std::size_t>(i) * d + k] * L[static_cast<std::size_t>(j) * d + k];
      if (i == j) {
        if (!(s > 0.0))
          throw std::invalid_argument("covariance matrix is not positive definite");
        L[static_cast<std::size_t>(i) * d + i] = std::sqrt(s);
      } else {
        L[static_cast<std::size_t>(i) * d + j] = s / L[static_cast<std::size_t>(j) * d + j];
      }
    }
  }
  return L;
}

// One mixture component with its Cholesky factor and the log normalizing
// constant, precomputed at problem construction.
struct PreparedComponent {
  double logw = 0.0;
  std::vector<double> mean;
  std::vector<double> chol;
  double log_coef = 0.0;
};

inline double log_component_density(const PreparedComponent& c, const double* x, int d,
                                    std::vector<double>& y) {
  y.resize(static_cast<std::size_t>(d));
  double quad = 0.0;
  for (int i = 0; i < d; ++i) {
    double s = x[i] - c.mean[static_cast<std::size_t>(i)];
    for (int k = 0; k < i; ++k)
      s -= c.chol[static_cast<std::size_t>(i) * d + k] * y[static_cast<std::size_t>(k)];
    double yi = s / c.chol[static_cast<std::size_t>(i) * d + i];
    y[static_cast<std::size_t>(i)] = yi;
    quad += yi * yi;
  }
  return c.log_coef - 0.5 * quad;
}

inline double log_mixture_density(const std::vector<PreparedComponent>& comps, const double* x,
                                  int d, std::vector<double>& y) {
  double m = -std::numeric_limits<double>::infinity();
  std::vector<double> vals;
  vals.reserve(comps.size());
  for (const auto& c : comps) {
    double v = c.logw + log_component_density(c, x, d, y);
    vals.push_back(v);
    if (v > m) m = v;
  }
  double s = 0.0;
  for (double v : vals) s += std::exp(v - m);
  return m + std::log(s);
}

}  // namespace detail

// A two-class Gaussian-mixture problem: prior, both class mixtures, and an
// optional region of interest.
struct GaussianProblem {
  int d = 0;
  double prior1 = 0.0;
  GaussianMixture class1, class2;
  std::optional<Region> region;
  std::vector<detail::PreparedComponent> comps1, comps2;  // derived caches

  GaussianProblem(int d_, double prior1_, GaussianMixture class1_, GaussianMixture class2_,
                  std::optional<Region> region_ = std::nullopt)
      : d(d_), prior1(prior1_), class1(std::move(class1_)), class2(std::move(class2_)),
        region(std::move(region_)) {
    if (d < 1) throw std::invalid_argument("GaussianProblem: d must be >= 1");
    if (!(prior1 >= 0.0 && prior1 <= 1.0))
      throw std::invalid_argument("GaussianProblem: prior1 must lie in [0, 1]");
    comps1 = prepare(class1);
    comps2 = prepare(class2);
    if (region) {
      if (static_cast<int>(region->lo.size()) != d || static_cast<int>(region->hi.size()) != d)
        throw std::invalid_argument("GaussianProblem: region dimension mismatch");
      for (int j = 0; j < d; ++j)
        if (!(region->lo[static_cast<std::size_t>(j)] < region->hi[static_cast<std::size_t>(j)]))
          throw std::invalid_argument("GaussianProblem: region must have lo < hi");
    }
  }

 private:
  std::vector<detail::PreparedComponent> prepare(const GaussianMixture& mix) const {
    if (mix.weights.empty() || mix.weights.size() != mix.means.size() ||
        mix.weights.size() != mix.covs.size())
      throw std::invalid_argument("GaussianProblem: mixture pieces must align and be nonempty");
    double wsum = neumaier_sum(mix.weights);
    if (std::abs(wsum - 1.0) > 1e-12)
      throw std::invalid_argument("GaussianProblem: mixture weights must sum to 1");
    std::vector<detail::PreparedComponent> out;
    for (std::size_t c = 0; c < mix.weights.size(); ++c) {
      if (!(mix.weights[c] > 0.0))
        throw std::invalid_argument("GaussianProblem: mixture weights must be positive");
      if (static_cast<int>(mix.means[c].size()) != d)
        throw std::invalid_argument("GaussianProblem: mean dimension mismatch");
      const auto& cov = mix.covs[c];
      if (static_cast<int>(cov.size()) != d * d)
        throw std::invalid_argument("GaussianProblem: covariance must be d x d");
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < i; ++j)
          if (std::abs(cov[static_cast<std::size_t>(i) * d + j] -
                       cov[static_cast<std::size_t>(j) * d + i]) > 1e-12)
            throw std::invalid_argument("GaussianProblem: covariance must be symmetric");
      detail::PreparedComponent pc;
      pc.logw = std::log(mix.weights[c]);
      pc.mean = mix.means[c];
      pc.chol = detail::cholesky_lower(cov, d);
      double logdet_half = 0.0;
      for (int i = 0; i < d; ++i)
        logdet_half += std::log(pc.chol[static_cast<std::size_t>(i) * d + i]);
      pc.log_coef = -0.5 * d * std::log(2.0 * std::acos(-1.0)) - logdet_half;
      out.push_back(std::move(pc));
    }
    return out;
  }
};

// pi1 f1 + pi2 f2 at x.
inline double marginal_density(const GaussianProblem& p, const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != p.d)
    throw std::invalid_argument("marginal_density: dimension mismatch");
  std::vector<double> y;
  double f1 = p.prior1 > 0.0 ? std::exp(detail::log_mixture_density(p.comps1, x.data(), p.d, y)) : 0.0;
  double f2 = p.prior1 < 1.0 ? std::exp(detail::log_mixture_density(p.comps2, x.data(), p.d, y)) : 0.0;
  return p.prior1 * f1 + (1.0 - p.prior1) * f2;
}

// P(Y = 1 | X = x), evaluated through log densities.
inline double eta(const GaussianProblem& p, const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != p.d)
    throw std::invalid_argument("eta: dimension mismatch");
  if (p.prior1 == 0.0) return 0.0;
  if (p.prior1 == 1.0) return 1.0;
  std::vector<double> y;
  double l1 = std::log(p.prior1) + detail::log_mixture_density(p.comps1, x.data(), p.d, y);
  double l2 = std::log(1.0 - p.prior1) + detail::log_mixture_density(p.comps2, x.data(), p.d, y);
  return 1.0 / (1.0 + std::exp(l2 - l1));
}

// Ties at 1/2 go to class 1, matching predict().
inline ClassLabel bayes_predict(const GaussianProblem& p, const std::vector<double>& x) {
  return ClassLabel(eta(p, x) < 0.5 ? 2 : 1);
}

namespace detail {

inline void sample_point(const GaussianProblem& p, Rng& rng, std::vector<double>& x, int* label) {
  bool is1 = rng.uniform01() < p.prior1;
  const auto& comps = is1 ? p.comps1 : p.comps2;
  std::size_t c = 0;
  if (comps.size() > 1) {
    double u = rng.uniform01();
    double acc = 0.0;
    for (; c + 1 < comps.size(); ++c) {
      acc += std::exp(comps[c].logw);
      if (u < acc) break;
    }
  }
  const auto& comp = comps[c];
  int d = p.d;
  std::vector<double> z(static_cast<std::size_t>(d));
  for (double& v : z) v = rng.normal();
  x.resize(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    double s = comp.mean[static_cast<std::size_t>(i)];
    for (int k = 0; k <= i; ++k)
      s += comp.chol[static_cast<std::size_t>(i) * d + k] * z[static_cast<std::size_t>(k)];
    x[static_cast<std::size_t>(i)] = s;
  }
  *label = is1 ? 1 : 2;
}

}  // namespace detail

inline Dataset sample(const GaussianProblem& p, int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample: n must be >= 1");
  Rng rng(seed);
  std::vector<LabeledSample> rows;
  rows.reserve(static_cast<std::size_t>(n));
  std::vector<double> x;
  int label = 0;
  for (int i = 0; i < n; ++i) {
    detail::sample_point(p, rng, x, &label);
    rows.push_back({x, ClassLabel(label)});
  }
  return Dataset(std::move(rows));
}

// Rao-Blackwellized Bayes risk: mean of min(eta, 1 - eta) over marginal draws.
inline double bayes_risk_mc(const GaussianProblem& p, int n_mc, std::uint64_t seed) {
  if (n_mc < 1) throw std::invalid_argument("bayes_risk_mc: n_mc must be >= 1");
  Rng rng(seed);
  std::vector<double> x;
  int label = 0;
  double acc = 0.0;
  for (int i = 0; i < n_mc; ++i) {
    detail::sample_point(p, rng, x, &label);
    double e = eta(p, x);
    acc += std::min(e, 1.0 - e);
  }
  return acc / n_mc;
}

namespace detail {

inline GaussianMixture single_gaussian(int d, double mean, double var) {
  GaussianMixture mix;
  mix.weights = {1.0};
  mix.means = {std::vector<double>(static_cast<std::size_t>(d), mean)};
  std::vector<double> cov(static_cast<std::size_t>(d) * d, 0.0);
  for (int i = 0; i < d; ++i) cov[static_cast<std::size_t>(i) * d + i] = var;
  mix.covs = {std::move(cov)};
  return mix;
}

inline GaussianMixture shifted_pair(int d, double m1, double m2, const std::vector<double>& base_cov) {
  GaussianMixture mix;
  mix.weights = {0.5, 0.5};
  mix.means = {std::vector<double>(static_cast<std::size_t>(d), m1),
               std::vector<double>(static_cast<std::size_t>(d), m2)};
  std::vector<double> doubled = base_cov;
  for (double& v : doubled) v *= 2.0;
  mix.covs = {base_cov, std::move(doubled)};
  return mix;
}

inline std::vector<double> identity_cov(int d) {
  std::vector<double> cov(static_cast<std::size_t>(d) * d, 0.0);
  for (int i = 0; i < d; ++i) cov[static_cast<std::size_t>(i) * d + i] = 1.0;
  return cov;
}

inline std::vector<double> toeplitz_cov(int d) {
  std::vector<double> cov(static_cast<std::size_t>(d) * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      cov[static_cast<std::size_t>(i) * d + j] = std::pow(0.6, std::abs(i - j));
  return cov;
}

}  // namespace detail

// The benchmark problems. id "validation" is the bivariate pair with
// region [-2,3]^2; "1" the unit-variance location family at the tabulated
// mean shifts; "2" and "3" the two-component mixtures (prior1 defaults to
// 1/2 there and may be set to 1/3).
inline GaussianProblem make_simulation(const std::string& id, int d = 0, double prior1 = 0.0) {
  auto bad = [&]() {
    throw std::invalid_argument(
        "make_simulation: unknown combination (" + id + ", d=" + std::to_string(d) +
        "); valid: validation (d=2); 1 with d in {1,2,4,8,10}; 2 or 3 with d in {2,5} and "
        "prior1 in {1/2, 1/3}");
  };
  const double third = 1.0 / 3.0;
  auto near = [](double a, double b) { return std::abs(a - b) <= 1e-9; };

  if (id == "validation") {
    if (d != 0 && d != 2) bad();
    if (prior1 != 0.0 && !near(prior1, third)) bad();
    Region r{std::vector<double>(2, -2.0), std::vector<double>(2, 3.0)};
    return GaussianProblem(2, third, detail::single_gaussian(2, 0.0, 1.0),
                           detail::single_gaussian(2, 1.0, 1.0), r);
  }
  if (id == "1") {
    double mu = 0.0;
    if (d == 1) mu = 2.076;
    else if (d == 2) mu = 1.205;
    else if (d == 4) mu = 0.659;
    else if (d == 8) mu = 0.314;
    else if (d == 10) mu = 0.208;
    else bad();
    if (prior1 != 0.0 && !near(prior1, third)) bad();
    Region r{std::vector<double>(static_cast<std::size_t>(d), -2.0),
             std::vector<double>(static_cast<std::size_t>(d), mu + 2.0)};
    return GaussianProblem(d, third, detail::single_gaussian(d, 0.0, 1.0),
                           detail::single_gaussian(d, mu, 1.0), r);
  }
  if (id == "2" || id == "3") {
    if (d != 2 && d != 5) bad();
    double pi1 = prior1 == 0.0 ? 0.5 : prior1;
    if (!near(pi1, 0.5) && !near(pi1, third)) bad();
    std::vector<double> cov = id == "2" ? detail::identity_cov(d) : detail::toeplitz_cov(d);
    return GaussianProblem(d, pi1, detail::shifted_pair(d, 0.0, 3.0, cov),
                           detail::shifted_pair(d, 1.5, 4.5, cov));
  }
  bad();
  return GaussianProblem(1, 0.5, detail::single_gaussian(1, 0.0, 1.0),
                         detail::single_gaussian(1, 0.0, 1.0));  // unreachable
}

}  // namespace snn
