#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace snn {

// Compensated (Neumaier) summation. Weight vectors get long and the 1e-12
// sum invariant below leaves no room for naive accumulation error.
inline double neumaier_sum(const double* v, std::size_t n) {
  double s = 0.0, c = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double x = v[i];
    double t = s + x;
    if (std::abs(s) >= std::abs(x))
      c += (s - t) + x;
    else
      c += (x - t) + s;
    s = t;
  }
  return s + c;
}

inline double neumaier_sum(const std::vector<double>& v) {
  return neumaier_sum(v.data(), v.size());
}

struct ClassLabel {
  int value = 1;

  ClassLabel() = default;
  explicit ClassLabel(int v) : value(v) {
    if (v != 1 && v != 2)
      throw std::invalid_argument("class label must be 1 or 2, got " + std::to_string(v));
  }

  friend bool operator==(ClassLabel a, ClassLabel b) { return a.value == b.value; }
  friend bool operator!=(ClassLabel a, ClassLabel b) { return a.value != b.value; }
};

struct LabeledSample {
  std::vector<double> x;
  ClassLabel y;
};

struct Dataset {
  std::vector<LabeledSample> samples;
  int d = 0;

  explicit Dataset(std::vector<LabeledSample> rows) : samples(std::move(rows)) {
    if (samples.empty()) throw std::invalid_argument("empty dataset");
    d = static_cast<int>(samples.front().x.size());
    if (d < 1) throw std::invalid_argument("dataset dimension must be positive");
    for (const auto& s : samples) {
      if (static_cast<int>(s.x.size()) != d)
        throw std::invalid_argument("mixed dimensions in dataset");
      for (double v : s.x)
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite feature value");
    }
  }

  int size() const { return static_cast<int>(samples.size()); }
};

// Weights on distance-ordered neighbors: w[i] is the mass on the (i+1)-th
// nearest neighbor. k_support is the 1-based rank of the last positive entry.
struct WeightVector {
  std::vector<double> w;
  int k_support = 0;

  explicit WeightVector(std::vector<double> weights) : w(std::move(weights)) {
    if (w.empty()) throw std::invalid_argument("empty weight vector");
    for (double v : w)
      if (!(v >= 0.0)) throw std::invalid_argument("weight vector has a negative entry");
    double s = neumaier_sum(w);
    if (std::abs(s - 1.0) > 1e-12)
      throw std::invalid_argument("weights must sum to 1, got " + std::to_string(s));
    for (int i = static_cast<int>(w.size()); i >= 1; --i) {
      if (w[static_cast<std::size_t>(i) - 1] > 0.0) {
        k_support = i;
        break;
      }
    }
  }

  int n() const { return static_cast<int>(w.size()); }

  double sum_sq() const {
    double s = 0.0, c = 0.0;
    for (int i = 0; i < k_support; ++i) {
      double x = w[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(i)];
      double t = s + x;
      if (std::abs(s) >= std::abs(x))
        c += (s - t) + x;
      else
        c += (x - t) + s;
      s = t;
    }
    return s + c;
  }
};

struct EvalReport {
  double risk = 0.0;
  double cis = 0.0;
  long n_test = 0;
  long n_replications = 0;
  double std_error_risk = 0.0;
  double std_error_cis = 0.0;

  EvalReport() = default;
  EvalReport(double risk_, double cis_, long n_test_, long n_replications_,
             double se_risk, double se_cis)
      : risk(risk_), cis(cis_), n_test(n_test_), n_replications(n_replications_),
        std_error_risk(se_risk), std_error_cis(se_cis) {
    if (!(risk >= 0.0 && risk <= 1.0)) throw std::invalid_argument("risk outside [0,1]");
    if (!(cis >= 0.0 && cis <= 1.0)) throw std::invalid_argument("cis outside [0,1]");
    if (!(std_error_risk >= 0.0) || !(std_error_cis >= 0.0))
      throw std::invalid_argument("negative standard error");
  }
};

// Baseline vote with uniform weights over all n; tie resolves to class 1,
// matching the strict inequality in the weighted vote rule.
inline ClassLabel majority_class(const Dataset& ds) {
  if (ds.samples.empty()) throw std::invalid_argument("empty dataset");
  long c1 = 0;
  for (const auto& s : ds.samples)
    if (s.y.value == 1) ++c1;
  long c2 = static_cast<long>(ds.samples.size()) - c1;
  return ClassLabel(c1 >= c2 ? 1 : 2);
}

}  // namespace snn
