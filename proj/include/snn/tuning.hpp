#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "snn/evaluation.hpp"
#include "snn/weights.hpp"

namespace snn {

// Inverse of the k* closed form: the lambda whose k* formula value is k.
inline double lambda_for_k_target(double k, int n, int d) {
  double dd = static_cast<double>(d);
  return (2.0 * (dd + 2.0) / (dd * (dd + 4.0))) * std::pow(k, (dd + 4.0) / dd) /
         std::pow(static_cast<double>(n), 4.0 / dd);
}

struct TuneGrid {
  std::vector<double> lambdas;
  std::vector<double> k_targets;

  TuneGrid(std::vector<double> lambdas_, std::vector<double> k_targets_)
      : lambdas(std::move(lambdas_)), k_targets(std::move(k_targets_)) {
    if (lambdas.size() < 2) throw std::invalid_argument("TuneGrid: need K >= 2");
    if (lambdas.size() != k_targets.size())
      throw std::invalid_argument("TuneGrid: lambdas and k_targets must align");
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
      if (!(lambdas[i] > 0.0)) throw std::invalid_argument("TuneGrid: lambdas must be > 0");
      if (i > 0 && !(lambdas[i] > lambdas[i - 1]))
        throw std::invalid_argument("TuneGrid: lambdas must be strictly increasing");
    }
  }

  std::size_t size() const { return lambdas.size(); }
};

// K target k values equally spaced in [k_min, k_max], each inverted to its
// lambda. k_max <= 0 means the n/2 default.
inline TuneGrid make_snn_grid(int n, int d, int k_min = 5, int k_max = 0, int K = 100) {
  if (k_max <= 0) k_max = n / 2;
  if (!(1 <= k_min && k_min < k_max && k_max <= n))
    throw std::invalid_argument("make_snn_grid: need 1 <= k_min < k_max <= n");
  if (K < 2) throw std::invalid_argument("make_snn_grid: need K >= 2");
  std::vector<double> ks(static_cast<std::size_t>(K));
  std::vector<double> lams(static_cast<std::size_t>(K));
  for (int i = 0; i < K; ++i) {
    double t = static_cast<double>(i) / (K - 1);
    ks[static_cast<std::size_t>(i)] = k_min + t * (k_max - k_min);
    lams[static_cast<std::size_t>(i)] = lambda_for_k_target(ks[static_cast<std::size_t>(i)], n, d);
  }
  return TuneGrid(std::move(lams), std::move(ks));
}

struct TuneRow {
  double param = 0.0;  // lambda for the snn family, k for the knn baseline
  double risk = 0.0;
  double cis = 0.0;
};

struct SnnTuneResult {
  double lambda_hat = 0.0;
  std::size_t index = 0;
  std::size_t n_top = 0;  // size of the top-accuracy candidate set A
  std::vector<TuneRow> table;
};

namespace detail {

inline WeightFamily snn_family(int d) {
  return [d](double lambda, int m) { return snn_weights(SnnParams(lambda, m, d)); };
}

// A = { risk < nearest-rank top_fraction percentile }; an empty A (heavy
// ties) falls back to the risk argmin set.
inline std::vector<std::size_t> top_accuracy_set(const std::vector<TuneRow>& table,
                                                 double top_fraction) {
  std::vector<double> risks;
  risks.reserve(table.size());
  for (const auto& r : table) risks.push_back(r.risk);
  std::vector<double> sorted = risks;
  std::sort(sorted.begin(), sorted.end());
  std::size_t rank = static_cast<std::size_t>(
      std::ceil(top_fraction * static_cast<double>(sorted.size())));
  if (rank == 0) rank = 1;
  double thr = sorted[rank - 1];
  std::vector<std::size_t> a;
  for (std::size_t i = 0; i < risks.size(); ++i)
    if (risks[i] < thr) a.push_back(i);
  if (a.empty()) {
    double mn = *std::min_element(risks.begin(), risks.end());
    for (std::size_t i = 0; i < risks.size(); ++i)
      if (risks[i] == mn) a.push_back(i);
  }
  return a;
}

}  // namespace detail

// Two-stage selection: keep the top-accuracy decile, then take the most
// stable member. Ties go to the smaller lambda.
inline SnnTuneResult tune_snn(const CvCache& cache, const TuneGrid& grid,
                              double top_fraction = 0.10) {
  std::vector<CvPoint> pts = cv_eval_grid(cache, detail::snn_family(cache.d), grid.lambdas);
  SnnTuneResult res;
  res.table.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    res.table[i] = {grid.lambdas[i], pts[i].risk, pts[i].cis};
  std::vector<std::size_t> a = detail::top_accuracy_set(res.table, top_fraction);
  std::size_t best = a[0];
  for (std::size_t idx : a)
    if (res.table[idx].cis < res.table[best].cis) best = idx;
  res.index = best;
  res.lambda_hat = grid.lambdas[best];
  res.n_top = a.size();
  return res;
}

inline SnnTuneResult tune_snn(const Dataset& ds, const TuneGrid& grid, std::uint64_t seed,
                              double top_fraction = 0.10) {
  return tune_snn(make_cv_cache(ds, seed), grid, top_fraction);
}

// Risk-only variant (argmin of estimated risk, ties to the smaller lambda);
// the surrogate used where no oracle constants exist.
inline SnnTuneResult tune_snn_risk_only(const CvCache& cache, const TuneGrid& grid) {
  std::vector<CvPoint> pts = cv_eval_grid(cache, detail::snn_family(cache.d), grid.lambdas);
  SnnTuneResult res;
  res.table.resize(grid.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    res.table[i] = {grid.lambdas[i], pts[i].risk, pts[i].cis};
    if (pts[i].risk < pts[best].risk) best = i;
  }
  res.index = best;
  res.lambda_hat = grid.lambdas[best];
  res.n_top = 1;
  return res;
}

struct KnnTuneResult {
  int k_hat = 0;
  std::vector<TuneRow> table;
};

// 100 equally spaced k targets in [5, n/2], rounded to integers and
// deduplicated; risk-only objective, ties to the smaller k. Candidate k is
// clamped to the fold training size during evaluation.
inline KnnTuneResult tune_knn(const CvCache& cache, int K = 100) {
  int n = cache.n;
  int lo = std::min(5, std::max(1, n / 2));
  int hi = std::max(lo, n / 2);
  std::vector<int> ks;
  for (int i = 0; i < K; ++i) {
    double t = K > 1 ? static_cast<double>(i) / (K - 1) : 0.0;
    int k = static_cast<int>(std::lround(lo + t * (hi - lo)));
    if (ks.empty() || k != ks.back()) ks.push_back(k);
  }
  std::vector<double> params(ks.begin(), ks.end());
  WeightFamily fam = [](double k, int m) {
    return knn_weights(std::min(static_cast<int>(k), m), m);
  };
  std::vector<CvPoint> pts = cv_eval_grid(cache, fam, params);
  KnnTuneResult res;
  res.table.resize(ks.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    res.table[i] = {static_cast<double>(ks[i]), pts[i].risk, pts[i].cis};
    if (pts[i].risk < pts[best].risk) best = i;
  }
  res.k_hat = ks[best];
  return res;
}

inline KnnTuneResult tune_knn(const Dataset& ds, std::uint64_t seed) {
  return tune_knn(make_cv_cache(ds, seed));
}

}  // namespace snn
