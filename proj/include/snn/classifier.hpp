#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "snn/core.hpp"

namespace snn {

// Row-major feature block plus class-1 indicators; the layout every distance
// loop in this library runs on.
struct Packed {
  int n = 0;
  int d = 0;
  std::vector<double> xs;
  std::vector<std::uint8_t> one;
};

inline Packed pack(const Dataset& ds) {
  Packed p;
  p.n = ds.size();
  p.d = ds.d;
  p.xs.reserve(static_cast<std::size_t>(p.n) * p.d);
  p.one.reserve(static_cast<std::size_t>(p.n));
  for (const auto& s : ds.samples) {
    p.xs.insert(p.xs.end(), s.x.begin(), s.x.end());
    p.one.push_back(s.y.value == 1 ? 1 : 0);
  }
  return p;
}

inline Packed pack_subset(const Dataset& ds, const std::vector<int>& idx) {
  Packed p;
  p.n = static_cast<int>(idx.size());
  p.d = ds.d;
  p.xs.reserve(static_cast<std::size_t>(p.n) * p.d);
  p.one.reserve(static_cast<std::size_t>(p.n));
  for (int i : idx) {
    const auto& s = ds.samples[static_cast<std::size_t>(i)];
    p.xs.insert(p.xs.end(), s.x.begin(), s.x.end());
    p.one.push_back(s.y.value == 1 ? 1 : 0);
  }
  return p;
}

namespace detail {

inline double dist_sq(const double* a, const double* b, int d) {
  double s = 0.0;
  for (int j = 0; j < d; ++j) {
    double t = a[j] - b[j];
    s += t * t;
  }
  return s;
}

// Fills out[0..m) with the indices of the m nearest points to q, ordered by
// (squared distance, index). Selecting before sorting gives the same result
// as a full sort because the pair order is total.
inline void order_prefix(const Packed& tr, const double* q, int m,
                         std::vector<std::pair<double, int>>& buf, int* out) {
  buf.clear();
  buf.reserve(static_cast<std::size_t>(tr.n));
  for (int i = 0; i < tr.n; ++i)
    buf.emplace_back(dist_sq(tr.xs.data() + static_cast<std::size_t>(i) * tr.d, q, tr.d), i);
  if (m < tr.n) {
    std::nth_element(buf.begin(), buf.begin() + (m - 1), buf.end());
    std::sort(buf.begin(), buf.begin() + m);
  } else {
    std::sort(buf.begin(), buf.end());
  }
  for (int i = 0; i < m; ++i) out[i] = buf[static_cast<std::size_t>(i)].second;
}

// Class-1 indicators of the m nearest neighbors, in distance order.
inline void ordered_indicators(const Packed& tr, const double* q, int m,
                               std::vector<std::pair<double, int>>& buf,
                               std::uint8_t* out) {
  std::vector<int> idx(static_cast<std::size_t>(m));
  order_prefix(tr, q, m, buf, idx.data());
  for (int i = 0; i < m; ++i) out[i] = tr.one[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
}

// The weighted vote over an indicator prefix: plain ascending accumulation.
inline double vote_from(const std::uint8_t* ind, const WeightVector& w) {
  double s = 0.0;
  for (int i = 0; i < w.k_support; ++i)
    if (ind[i]) s += w.w[static_cast<std::size_t>(i)];
  return s;
}

}  // namespace detail

struct WnnClassifier {
  Dataset train;
  WeightVector weights;

  WnnClassifier(Dataset train_, WeightVector weights_)
      : train(std::move(train_)), weights(std::move(weights_)) {
    if (weights.n() != train.size())
      throw std::invalid_argument("weight vector length must equal training size");
  }
};

// Indices of training points by ascending distance to x; ties break toward
// the lower original index so repeated runs agree.
inline std::vector<int> neighbor_order(const Dataset& train, const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != train.d)
    throw std::invalid_argument("query dimension mismatch");
  Packed p = pack(train);
  std::vector<std::pair<double, int>> buf;
  std::vector<int> out(static_cast<std::size_t>(p.n));
  detail::order_prefix(p, x.data(), p.n, buf, out.data());
  return out;
}

inline double vote_score(const WnnClassifier& c, const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != c.train.d)
    throw std::invalid_argument("query dimension mismatch");
  Packed p = pack(c.train);
  int m = c.weights.k_support;
  std::vector<std::pair<double, int>> buf;
  std::vector<std::uint8_t> ind(static_cast<std::size_t>(m));
  detail::ordered_indicators(p, x.data(), m, buf, ind.data());
  return detail::vote_from(ind.data(), c.weights);
}

// Class 2 iff the class-1 vote falls strictly below 1/2.
inline ClassLabel predict(const WnnClassifier& c, const std::vector<double>& x) {
  return ClassLabel(vote_score(c, x) < 0.5 ? 2 : 1);
}

inline std::vector<ClassLabel> predict_batch(const WnnClassifier& c,
                                             const std::vector<std::vector<double>>& xs) {
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (static_cast<int>(xs[i].size()) != c.train.d)
      throw std::invalid_argument("dimension mismatch at index " + std::to_string(i));
  Packed p = pack(c.train);
  int m = c.weights.k_support;
  std::vector<std::pair<double, int>> buf;
  std::vector<std::uint8_t> ind(static_cast<std::size_t>(m));
  std::vector<ClassLabel> out;
  out.reserve(xs.size());
  for (const auto& x : xs) {
    detail::ordered_indicators(p, x.data(), m, buf, ind.data());
    out.push_back(ClassLabel(detail::vote_from(ind.data(), c.weights) < 0.5 ? 2 : 1));
  }
  return out;
}

}  // namespace snn
