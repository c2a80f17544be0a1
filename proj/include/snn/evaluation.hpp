#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "snn/classifier.hpp"
#include "snn/core.hpp"
#include "snn/rng.hpp"

namespace snn {

inline double empirical_risk(const std::vector<ClassLabel>& preds,
                             const std::vector<ClassLabel>& truth) {
  if (preds.empty()) throw std::invalid_argument("empirical_risk: empty prediction list");
  if (preds.size() != truth.size())
    throw std::invalid_argument("empirical_risk: length mismatch");
  long bad = 0;
  for (std::size_t i = 0; i < preds.size(); ++i)
    if (preds[i] != truth[i]) ++bad;
  return static_cast<double>(bad) / static_cast<double>(preds.size());
}

inline double empirical_cis(const std::vector<ClassLabel>& preds1,
                            const std::vector<ClassLabel>& preds2) {
  if (preds1.empty()) throw std::invalid_argument("empirical_cis: empty prediction list");
  if (preds1.size() != preds2.size())
    throw std::invalid_argument("empirical_cis: length mismatch");
  long diff = 0;
  for (std::size_t i = 0; i < preds1.size(); ++i)
    if (preds1[i] != preds2[i]) ++diff;
  return static_cast<double>(diff) / static_cast<double>(preds1.size());
}

// A weight rule maps a training-set size to the weight vector to use there.
using WeightRule = std::function<WeightVector(int)>;

// A one-parameter family of weight rules, indexed by the tuning parameter.
using WeightFamily = std::function<WeightVector(double, int)>;

// Disagreement of two classifiers fitted on a random disjoint half split of
// ds, evaluated on test_xs. Odd n puts the extra point in the first half.
inline double paired_cis_estimate(const WeightRule& rule, const Dataset& ds,
                                  const std::vector<std::vector<double>>& test_xs,
                                  std::uint64_t seed) {
  if (ds.size() < 2) throw std::invalid_argument("paired_cis_estimate: need at least 2 samples");
  if (test_xs.empty()) throw std::invalid_argument("paired_cis_estimate: empty test set");
  Rng rng(seed);
  std::vector<int> perm = rng.permutation(ds.size());
  int h = (ds.size() + 1) / 2;
  std::vector<int> ia(perm.begin(), perm.begin() + h);
  std::vector<int> ib(perm.begin() + h, perm.end());
  Packed pa = pack_subset(ds, ia);
  Packed pb = pack_subset(ds, ib);
  WeightVector wa = rule(pa.n);
  WeightVector wb = rule(pb.n);
  if (wa.n() != pa.n || wb.n() != pb.n)
    throw std::invalid_argument("paired_cis_estimate: rule returned wrong-length weights");

  std::vector<std::pair<double, int>> buf;
  std::vector<std::uint8_t> ind(static_cast<std::size_t>(std::max(wa.k_support, wb.k_support)));
  long diff = 0;
  for (const auto& x : test_xs) {
    if (static_cast<int>(x.size()) != ds.d)
      throw std::invalid_argument("paired_cis_estimate: query dimension mismatch");
    detail::ordered_indicators(pa, x.data(), wa.k_support, buf, ind.data());
    bool one_a = detail::vote_from(ind.data(), wa) >= 0.5;
    detail::ordered_indicators(pb, x.data(), wb.k_support, buf, ind.data());
    bool one_b = detail::vote_from(ind.data(), wb) >= 0.5;
    if (one_a != one_b) ++diff;
  }
  return static_cast<double>(diff) / static_cast<double>(test_xs.size());
}

// Five-fold machinery behind Algorithm 1. The partition and the neighbor
// orderings depend only on (ds, seed), so a whole tuning grid reuses one
// cache and every candidate parameter sees identical folds.
struct CvCache {
  int n = 0;
  int d = 0;
  struct Tab {
    int ma = 0, mb = 0;
    std::vector<std::uint8_t> yq;            // class-1 indicator of the fold's points
    std::vector<std::uint8_t> ind_a, ind_b;  // [query * m + rank] ordered indicators
  };
  std::vector<Tab> tabs;
};

inline CvCache make_cv_cache(const Dataset& ds, std::uint64_t seed) {
  int n = ds.size();
  if (n < 10) throw std::invalid_argument("cv: dataset too small, need n >= 10");
  Rng rng(seed);
  std::vector<int> perm = rng.permutation(n);

  std::vector<std::vector<int>> folds(5);
  int base = n / 5, extra = n % 5;
  int pos = 0;
  for (int f = 0; f < 5; ++f) {
    int sz = base + (f < extra ? 1 : 0);
    folds[static_cast<std::size_t>(f)].assign(perm.begin() + pos, perm.begin() + pos + sz);
    pos += sz;
  }

  CvCache cache;
  cache.n = n;
  cache.d = ds.d;
  cache.tabs.resize(5);
  std::vector<std::pair<double, int>> buf;
  for (int i = 0; i < 5; ++i) {
    std::vector<int> rest;
    for (int j = 0; j < 5; ++j)
      if (j != i) rest.push_back(j);
    std::vector<int> ia, ib;
    for (int j : {rest[0], rest[1]})
      ia.insert(ia.end(), folds[static_cast<std::size_t>(j)].begin(), folds[static_cast<std::size_t>(j)].end());
    for (int j : {rest[2], rest[3]})
      ib.insert(ib.end(), folds[static_cast<std::size_t>(j)].begin(), folds[static_cast<std::size_t>(j)].end());

    Packed pa = pack_subset(ds, ia);
    Packed pb = pack_subset(ds, ib);
    auto& tab = cache.tabs[static_cast<std::size_t>(i)];
    tab.ma = pa.n;
    tab.mb = pb.n;
    const auto& fold = folds[static_cast<std::size_t>(i)];
    int nq = static_cast<int>(fold.size());
    tab.yq.resize(static_cast<std::size_t>(nq));
    tab.ind_a.resize(static_cast<std::size_t>(nq) * pa.n);
    tab.ind_b.resize(static_cast<std::size_t>(nq) * pb.n);
    for (int q = 0; q < nq; ++q) {
      const auto& s = ds.samples[static_cast<std::size_t>(fold[static_cast<std::size_t>(q)])];
      tab.yq[static_cast<std::size_t>(q)] = s.y.value == 1 ? 1 : 0;
      detail::ordered_indicators(pa, s.x.data(), pa.n, buf,
                                 tab.ind_a.data() + static_cast<std::size_t>(q) * pa.n);
      detail::ordered_indicators(pb, s.x.data(), pb.n, buf,
                                 tab.ind_b.data() + static_cast<std::size_t>(q) * pb.n);
    }
  }
  return cache;
}

struct CvPoint {
  double risk = 0.0;
  double cis = 0.0;
};

// Evaluates the family at every parameter on the cached folds. Per fold:
// risk averages the test errors of both two-fold classifiers, CIS is their
// disagreement on the held-out fold; both are then averaged over folds.
inline std::vector<CvPoint> cv_eval_grid(const CvCache& cache, const WeightFamily& family,
                                         const std::vector<double>& params) {
  std::vector<CvPoint> out(params.size());
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    double risk5 = 0.0, cis5 = 0.0;
    for (const auto& tab : cache.tabs) {
      WeightVector wa = family(params[pi], tab.ma);
      WeightVector wb = family(params[pi], tab.mb);
      int nq = static_cast<int>(tab.yq.size());
      long bad = 0, diff = 0;
      for (int q = 0; q < nq; ++q) {
        bool pa = detail::vote_from(tab.ind_a.data() + static_cast<std::size_t>(q) * tab.ma, wa) >= 0.5;
        bool pb = detail::vote_from(tab.ind_b.data() + static_cast<std::size_t>(q) * tab.mb, wb) >= 0.5;
        bool y = tab.yq[static_cast<std::size_t>(q)] != 0;
        bad += (pa != y) + (pb != y);
        diff += pa != pb;
      }
      risk5 += static_cast<double>(bad) / (2.0 * nq);
      cis5 += static_cast<double>(diff) / static_cast<double>(nq);
    }
    out[pi] = {risk5 / 5.0, cis5 / 5.0};
  }
  return out;
}

inline std::pair<double, double> cv_risk_cis(const Dataset& ds, const WeightFamily& family,
                                             double param, std::uint64_t seed) {
  CvCache cache = make_cv_cache(ds, seed);
  CvPoint p = cv_eval_grid(cache, family, {param})[0];
  return {p.risk, p.cis};
}

}  // namespace snn
