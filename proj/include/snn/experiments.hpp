#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <exception>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"
#include "snn/classifier.hpp"
#include "snn/core.hpp"
#include "snn/evaluation.hpp"
#include "snn/rng.hpp"
#include "snn/simgen.hpp"
#include "snn/theory.hpp"
#include "snn/tuning.hpp"
#include "snn/weights.hpp"

namespace snn {

inline constexpr const char* kToolkitVersion = "1.0.0";

// Published constants of the bivariate benchmark problem. The quadrature
// module reproduces them; the studies consume them directly.
inline TheoryConstants benchmark_constants() { return TheoryConstants(0.1299, 10.68, 2); }

struct MetricRecord {
  std::string problem;
  std::string method;
  std::string metric;
  int replication = 0;
  double value = 0.0;
};

struct SummaryRow {
  std::string problem;
  std::string method;
  std::string metric;
  int n_replications = 0;  // 0 for replication-independent reference rows
  double mean = 0.0;
  double se = 0.0;
};

struct StudyResult {
  std::string study;
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<MetricRecord> records;
  std::vector<SummaryRow> summary;
};

// Weight vector for a subsample of size m: keep the leading entries,
// renormalize, pad with zeros to length m.
inline WeightVector truncate_renormalize(const WeightVector& w, int m) {
  if (m < 1) throw std::invalid_argument("truncate_renormalize: m must be >= 1");
  int k = std::min(w.k_support, m);
  std::vector<double> v(w.w.begin(), w.w.begin() + k);
  double s = neumaier_sum(v);
  for (double& x : v) x /= s;
  v.resize(static_cast<std::size_t>(m), 0.0);
  return WeightVector(std::move(v));
}

namespace detail {

// Runs body(0..n_tasks) across a small worker pool. Task order is arbitrary
// but each task owns its output slot, so results do not depend on the
// worker count.
inline void parallel_for(int n_tasks, int n_threads, const std::function<void(int)>& body) {
  if (n_tasks <= 0) return;
  int workers = std::min(n_threads, n_tasks);
  if (workers <= 1) {
    for (int i = 0; i < n_tasks; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex error_lock;
  std::exception_ptr first_error;
  auto run = [&] {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= n_tasks) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> guard(error_lock);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int t = 0; t < workers; ++t) pool.emplace_back(run);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

inline double mean_of(const std::vector<double>& v) {
  return neumaier_sum(v) / static_cast<double>(v.size());
}

inline double se_of(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  std::vector<double> sq(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - mean) * (v[i] - mean);
  double var = neumaier_sum(sq) / static_cast<double>(v.size() - 1);
  return std::sqrt(var / static_cast<double>(v.size()));
}

inline void emit_series(StudyResult& out, const std::string& problem, const std::string& method,
                        const std::string& metric, const std::vector<double>& values) {
  for (std::size_t r = 0; r < values.size(); ++r)
    out.records.push_back({problem, method, metric, static_cast<int>(r), values[r]});
  double m = mean_of(values);
  out.summary.push_back({problem, method, metric, static_cast<int>(values.size()), m, se_of(values, m)});
}

inline void emit_reference(StudyResult& out, const std::string& problem, const std::string& method,
                           const std::string& metric, double value) {
  out.summary.push_back({problem, method, metric, 0, value, 0.0});
}

struct RepEval {
  std::vector<double> risk;
  std::vector<double> cis;
};

// One replication, several weight vectors sharing a training set: test risk
// from the full sample, CIS from disjoint half-splits with the nominal
// weights truncated to the half size and renormalized. Neighbor order is
// weight-independent, so each query is sorted once per training set.
inline RepEval evaluate_methods(const Dataset& train, const Dataset& test,
                                const std::vector<WeightVector>& weights,
                                std::uint64_t split_seed, int n_splits) {
  int n = train.size();
  int h = n / 2;
  if (h < 1) throw std::invalid_argument("evaluate_methods: training set too small");
  if (n_splits < 1) throw std::invalid_argument("evaluate_methods: n_splits must be >= 1");
  for (const auto& w : weights)
    if (w.n() != n) throw std::invalid_argument("evaluate_methods: weight length must equal n");

  std::size_t n_methods = weights.size();
  std::size_t n_test = test.samples.size();
  RepEval out;
  out.risk.assign(n_methods, 0.0);
  out.cis.assign(n_methods, 0.0);

  std::vector<std::pair<double, int>> buf;
  Packed full = pack(train);
  int m_full = 1;
  for (const auto& w : weights) m_full = std::max(m_full, w.k_support);
  std::vector<std::uint8_t> ind(static_cast<std::size_t>(m_full));
  std::vector<long> wrong(n_methods, 0);
  for (const auto& s : test.samples) {
    ordered_indicators(full, s.x.data(), m_full, buf, ind.data());
    for (std::size_t j = 0; j < n_methods; ++j) {
      int pred = vote_from(ind.data(), weights[j]) < 0.5 ? 2 : 1;
      if (pred != s.y.value) ++wrong[j];
    }
  }
  for (std::size_t j = 0; j < n_methods; ++j)
    out.risk[j] = static_cast<double>(wrong[j]) / static_cast<double>(n_test);

  std::vector<WeightVector> half;
  half.reserve(n_methods);
  for (const auto& w : weights) half.push_back(truncate_renormalize(w, h));
  int m_half = 1;
  for (const auto& w : half) m_half = std::max(m_half, w.k_support);
  std::vector<std::uint8_t> ind2(static_cast<std::size_t>(m_half));

  Rng rng(split_seed);
  std::vector<long> differ(n_methods, 0);
  for (int s = 0; s < n_splits; ++s) {
    std::vector<int> perm = rng.permutation(n);
    std::vector<int> idx1(perm.begin(), perm.begin() + h);
    std::vector<int> idx2(perm.begin() + h, perm.begin() + 2 * h);
    std::sort(idx1.begin(), idx1.end());
    std::sort(idx2.begin(), idx2.end());
    Packed p1 = pack_subset(train, idx1);
    Packed p2 = pack_subset(train, idx2);
    for (const auto& s2 : test.samples) {
      ordered_indicators(p1, s2.x.data(), m_half, buf, ind.data());
      ordered_indicators(p2, s2.x.data(), m_half, buf, ind2.data());
      for (std::size_t j = 0; j < n_methods; ++j) {
        int a = vote_from(ind.data(), half[j]) < 0.5 ? 2 : 1;
        int b = vote_from(ind2.data(), half[j]) < 0.5 ? 2 : 1;
        if (a != b) ++differ[j];
      }
    }
  }
  double denom = static_cast<double>(n_splits) * static_cast<double>(n_test);
  for (std::size_t j = 0; j < n_methods; ++j)
    out.cis[j] = static_cast<double>(differ[j]) / denom;
  return out;
}

inline std::string prior_tag(double prior1) {
  if (prior1 == 0.5) return "pi12";
  if (prior1 == 1.0 / 3.0) return "pi13";
  std::ostringstream os;
  os << "pi" << prior1;
  return os.str();
}

inline std::string prior_text(double prior1) {
  if (prior1 == 0.5) return "1/2";
  if (prior1 == 1.0 / 3.0) return "1/3";
  std::ostringstream os;
  os << prior1;
  return os.str();
}

inline std::string join_ints(const std::vector<int>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ",";
    os << v[i];
  }
  return os.str();
}

}  // namespace detail

// The benchmark study: for each n, the coupled pair protocol. Blocks C, U1,
// U2 of size n/2 are drawn fresh per replication; one classifier trains on
// C+U1, the other on C+U2, both with nominal-n weights. CIS is their
// disagreement on a fresh test set, risk the average of their test errors.
inline StudyResult run_validation(const std::vector<int>& n_list, int n_replications = 100,
                                  std::uint64_t seed = 42, int threads = 1) {
  if (n_list.empty()) throw std::invalid_argument("run_validation: n_list is empty");
  for (int n : n_list)
    if (n < 20) throw std::invalid_argument("run_validation: every n must be >= 20");
  if (n_replications < 1)
    throw std::invalid_argument("run_validation: n_replications must be >= 1");

  const int n_test = 1000;
  GaussianProblem p = make_simulation("validation");
  TheoryConstants tc = benchmark_constants();
  double lambda_snn = (tc.b1 + tc.b3 * tc.b3) / tc.b2;

  StudyResult out;
  out.study = "validation";
  out.metadata = {
      {"study", "validation"},
      {"version", kToolkitVersion},
      {"seed", std::to_string(seed)},
      {"n_replications", std::to_string(n_replications)},
      {"n_list", detail::join_ints(n_list)},
      {"n_test", std::to_string(n_test)},
      {"problem", "two unit-variance Gaussian classes in the plane, prior1 = 1/3"},
      {"constants", "B1 = 0.1299, B2 = 10.68, B3 = 4*B1/sqrt(pi)"},
      {"lambda0", "1"},
      {"cis_protocol", "coupled training pair sharing one half-block; disagreement on a fresh test set"},
      {"risk_protocol", "average test error of the coupled pair"},
  };

  double bayes = bayes_risk_mc(p, 1000000, substream_seed(seed, 0, 0xBA1E5));

  for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
    int n = n_list[ni];
    int h = n / 2;
    int m = 2 * h;
    WeightVector w_snn = snn_weights(SnnParams(lambda_snn, m, p.d));
    WeightVector w_ownn = ownn_weights(m, p.d, tc.b1, tc.b2);
    int m_max = std::max(w_snn.k_support, w_ownn.k_support);

    std::vector<double> risk_snn(static_cast<std::size_t>(n_replications));
    std::vector<double> cis_snn(static_cast<std::size_t>(n_replications));
    std::vector<double> risk_ownn(static_cast<std::size_t>(n_replications));
    std::vector<double> cis_ownn(static_cast<std::size_t>(n_replications));

    detail::parallel_for(n_replications, threads, [&](int r) {
      std::uint64_t purpose = static_cast<std::uint64_t>(ni) * 4;
      Dataset blocks = sample(p, 3 * h, substream_seed(seed, r, purpose));
      Dataset test = sample(p, n_test, substream_seed(seed, r, purpose + 1));

      std::vector<LabeledSample> a(blocks.samples.begin(), blocks.samples.begin() + 2 * h);
      std::vector<LabeledSample> b(blocks.samples.begin(), blocks.samples.begin() + h);
      b.insert(b.end(), blocks.samples.begin() + 2 * h, blocks.samples.end());
      Packed pa = pack(Dataset(std::move(a)));
      Packed pb = pack(Dataset(std::move(b)));

      std::vector<std::pair<double, int>> buf;
      std::vector<std::uint8_t> ia(static_cast<std::size_t>(m_max));
      std::vector<std::uint8_t> ib(static_cast<std::size_t>(m_max));
      long wrong_a_snn = 0, wrong_b_snn = 0, dis_snn = 0;
      long wrong_a_ownn = 0, wrong_b_ownn = 0, dis_ownn = 0;
      for (const auto& s : test.samples) {
        detail::ordered_indicators(pa, s.x.data(), m_max, buf, ia.data());
        detail::ordered_indicators(pb, s.x.data(), m_max, buf, ib.data());
        int a1 = detail::vote_from(ia.data(), w_snn) < 0.5 ? 2 : 1;
        int b1 = detail::vote_from(ib.data(), w_snn) < 0.5 ? 2 : 1;
        int a2 = detail::vote_from(ia.data(), w_ownn) < 0.5 ? 2 : 1;
        int b2 = detail::vote_from(ib.data(), w_ownn) < 0.5 ? 2 : 1;
        wrong_a_snn += a1 != s.y.value;
        wrong_b_snn += b1 != s.y.value;
        dis_snn += a1 != b1;
        wrong_a_ownn += a2 != s.y.value;
        wrong_b_ownn += b2 != s.y.value;
        dis_ownn += a2 != b2;
      }
      double nt = static_cast<double>(n_test);
      std::size_t ur = static_cast<std::size_t>(r);
      risk_snn[ur] = 0.5 * (wrong_a_snn + wrong_b_snn) / nt;
      cis_snn[ur] = dis_snn / nt;
      risk_ownn[ur] = 0.5 * (wrong_a_ownn + wrong_b_ownn) / nt;
      cis_ownn[ur] = dis_ownn / nt;
    });

    std::string problem = "validation-n" + std::to_string(n);
    detail::emit_series(out, problem, "SNN", "risk", risk_snn);
    detail::emit_series(out, problem, "SNN", "cis", cis_snn);
    detail::emit_series(out, problem, "OWNN", "risk", risk_ownn);
    detail::emit_series(out, problem, "OWNN", "cis", cis_ownn);
    ValidationCurve cs = validation_curves(n, ValidationMethod::snn);
    ValidationCurve co = validation_curves(n, ValidationMethod::ownn);
    detail::emit_reference(out, problem, "SNN", "asymptotic_regret", cs.regret);
    detail::emit_reference(out, problem, "SNN", "asymptotic_cis", cs.cis);
    detail::emit_reference(out, problem, "SNN", "k_star", cs.k);
    detail::emit_reference(out, problem, "OWNN", "asymptotic_regret", co.regret);
    detail::emit_reference(out, problem, "OWNN", "asymptotic_cis", co.cis);
    detail::emit_reference(out, problem, "OWNN", "k_star", co.k);
    detail::emit_reference(out, problem, "Bayes", "risk_mc", bayes);
  }
  return out;
}

struct SimulationSettings {
  int d = 2;
  double prior1 = 0.0;  // 0 = study default
  int n_train = 200;
  int n_test = 1000;
};

// One synthetic comparison study: per replication a fresh training and test
// sample, one cross-validation cache shared by every tuner, then risk and
// CIS for kNN, BNN, OWNN and SNN.
inline StudyResult run_simulation(int id, const SimulationSettings& s, int n_replications = 100,
                                  std::uint64_t seed = 42, int threads = 1) {
  if (n_replications < 1)
    throw std::invalid_argument("run_simulation: n_replications must be >= 1");
  if (s.n_train < 20) throw std::invalid_argument("run_simulation: need n_train >= 20");
  if (s.n_test < 1) throw std::invalid_argument("run_simulation: need n_test >= 1");

  GaussianProblem p = make_simulation(std::to_string(id), s.d, s.prior1);
  int n = s.n_train;
  TuneGrid grid = make_snn_grid(n, p.d, 5, n, 100);

  bool oracle_ownn = id == 1;
  std::optional<TheoryConstants> tc;
  std::optional<WeightVector> w_oracle;
  if (oracle_ownn) {
    tc = gaussian_constants_numeric(p);
    w_oracle = ownn_weights(n, p.d, tc->b1, tc->b2);
  }

  std::size_t reps = static_cast<std::size_t>(n_replications);
  std::vector<double> k_hat(reps), q_hat(reps), lambda_snn(reps), lambda_ownn(reps);
  std::array<std::vector<double>, 4> risk, cis;
  for (auto& v : risk) v.assign(reps, 0.0);
  for (auto& v : cis) v.assign(reps, 0.0);

  detail::parallel_for(n_replications, threads, [&](int r) {
    Dataset train = sample(p, n, substream_seed(seed, r, 1));
    Dataset test = sample(p, s.n_test, substream_seed(seed, r, 2));
    CvCache cache = make_cv_cache(train, substream_seed(seed, r, 3));

    KnnTuneResult kt = tune_knn(cache);
    double qh = 2.0 / (kt.k_hat + 1.0);
    SnnTuneResult st = tune_snn(cache, grid);

    std::vector<WeightVector> w;
    w.reserve(4);
    w.push_back(knn_weights(kt.k_hat, n));
    w.push_back(bnn_weights(BnnParams(qh, n)));
    std::size_t ur = static_cast<std::size_t>(r);
    if (oracle_ownn) {
      w.push_back(*w_oracle);
    } else {
      SnnTuneResult so = tune_snn_risk_only(cache, grid);
      w.push_back(snn_weights(SnnParams(so.lambda_hat, n, p.d)));
      lambda_ownn[ur] = so.lambda_hat;
    }
    w.push_back(snn_weights(SnnParams(st.lambda_hat, n, p.d)));

    detail::RepEval ev = detail::evaluate_methods(train, test, w, substream_seed(seed, r, 4), 8);
    k_hat[ur] = kt.k_hat;
    q_hat[ur] = qh;
    lambda_snn[ur] = st.lambda_hat;
    for (std::size_t j = 0; j < 4; ++j) {
      risk[j][ur] = ev.risk[j];
      cis[j][ur] = ev.cis[j];
    }
  });

  StudyResult out;
  out.study = "simulation-" + std::to_string(id);
  out.metadata = {
      {"study", "simulation-" + std::to_string(id)},
      {"version", kToolkitVersion},
      {"seed", std::to_string(seed)},
      {"n_replications", std::to_string(n_replications)},
      {"d", std::to_string(p.d)},
      {"prior1", detail::prior_text(p.prior1)},
      {"n_train", std::to_string(n)},
      {"n_test", std::to_string(s.n_test)},
      {"methods", "kNN,BNN,OWNN,SNN"},
      {"snn_grid", "100 lambda values from k targets equally spaced on [5, n_train]"},
      {"knn_grid", "100 integer k values on [5, n_train/2]"},
      {"bnn_q", "2/(k_hat + 1), matching tuned kNN's weight scale"},
      {"ownn", oracle_ownn ? "oracle weights from quadrature constants"
                           : "risk-only tuned surrogate (no closed-form constants)"},
      {"cis_protocol", "8 disjoint half-splits per replication; nominal-n weights truncated to n/2 and renormalized"},
  };

  std::string problem = "sim" + std::to_string(id) + "-d" + std::to_string(p.d) + "-" +
                        detail::prior_tag(p.prior1);
  const char* names[4] = {"kNN", "BNN", "OWNN", "SNN"};
  for (std::size_t j = 0; j < 4; ++j) {
    detail::emit_series(out, problem, names[j], "risk", risk[j]);
    detail::emit_series(out, problem, names[j], "cis", cis[j]);
  }
  detail::emit_series(out, problem, "kNN", "k_hat", k_hat);
  detail::emit_series(out, problem, "BNN", "q_hat", q_hat);
  detail::emit_series(out, problem, "SNN", "lambda_hat", lambda_snn);
  if (oracle_ownn)
    detail::emit_reference(out, problem, "OWNN", "k_star", w_oracle->k_support);
  else
    detail::emit_series(out, problem, "OWNN", "lambda_hat", lambda_ownn);
  detail::emit_reference(out, problem, "Bayes", "risk_mc",
                         bayes_risk_mc(p, 1000000, substream_seed(seed, 0, 0xBA1E5)));
  return out;
}

struct CsvDataset {
  Dataset data;
  std::string label_name;
  std::vector<std::string> feature_names;
  std::vector<std::string> label_values;  // sorted; position i maps to class i+1
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

inline double parse_number(const std::string& tok, const std::string& column, std::size_t row) {
  double v = 0.0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw std::invalid_argument("load_csv: non-numeric value '" + tok + "' in column '" + column +
                                "' at data row " + std::to_string(row));
  return v;
}

}  // namespace detail

// Header row, comma separation, numeric features, one label column whose
// distinct values (at most two) map to classes {1, 2} in sorted order.
inline CsvDataset load_csv(const std::string& path, const std::string& label_column) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("load_csv: cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("load_csv: empty file " + path);
  std::vector<std::string> header = detail::split_line(line);
  int label_idx = -1;
  std::vector<std::string> feature_names;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == label_column) {
      if (label_idx >= 0)
        throw std::invalid_argument("load_csv: duplicated label column '" + label_column + "'");
      label_idx = static_cast<int>(i);
    } else {
      feature_names.push_back(header[i]);
    }
  }
  if (label_idx < 0)
    throw std::invalid_argument("load_csv: no column named '" + label_column + "'");
  if (feature_names.empty())
    throw std::invalid_argument("load_csv: no feature columns besides '" + label_column + "'");

  std::vector<std::vector<double>> xs;
  std::vector<std::string> raw_labels;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    ++row;
    std::vector<std::string> fields = detail::split_line(line);
    if (fields.size() != header.size())
      throw std::invalid_argument("load_csv: data row " + std::to_string(row) + " has " +
                                  std::to_string(fields.size()) + " fields, expected " +
                                  std::to_string(header.size()));
    std::vector<double> x;
    x.reserve(feature_names.size());
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (static_cast<int>(i) == label_idx) continue;
      x.push_back(detail::parse_number(fields[i], header[i], row));
    }
    xs.push_back(std::move(x));
    raw_labels.push_back(fields[static_cast<std::size_t>(label_idx)]);
  }
  if (xs.empty()) throw std::invalid_argument("load_csv: no data rows in " + path);

  std::vector<std::string> values = raw_labels;
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  if (values.size() > 2)
    throw std::invalid_argument("load_csv: label column '" + label_column + "' has " +
                                std::to_string(values.size()) + " distinct values, need two");

  std::vector<LabeledSample> samples;
  samples.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    samples.push_back({std::move(xs[i]), ClassLabel(raw_labels[i] == values[0] ? 1 : 2)});
  return CsvDataset{Dataset(std::move(samples)), label_column, std::move(feature_names),
                    std::move(values)};
}

// Real-data study: equal-size train/test splits, per-column z-scores from the
// training half, every method tuned on the training half, CIS from disjoint
// halves of the training portion compared on the test portion.
inline StudyResult run_real(const std::string& csv_path, const std::string& label_column,
                            int n_replications = 100, std::uint64_t seed = 42, int threads = 1) {
  if (n_replications < 1) throw std::invalid_argument("run_real: n_replications must be >= 1");
  CsvDataset cd = load_csv(csv_path, label_column);
  int total = cd.data.size();
  if (total < 20)
    throw std::invalid_argument("run_real: need at least 20 rows, got " + std::to_string(total));
  int m = total / 2;
  int d = cd.data.d;
  TuneGrid grid = make_snn_grid(m, d, 5, m, 100);

  std::size_t reps = static_cast<std::size_t>(n_replications);
  std::vector<double> k_hat(reps), q_hat(reps), lambda_snn(reps), lambda_ownn(reps);
  std::array<std::vector<double>, 4> risk, cis;
  for (auto& v : risk) v.assign(reps, 0.0);
  for (auto& v : cis) v.assign(reps, 0.0);

  detail::parallel_for(n_replications, threads, [&](int r) {
    Rng split_rng(substream_seed(seed, r, 1));
    std::vector<int> perm = split_rng.permutation(total);
    std::vector<int> train_idx(perm.begin(), perm.begin() + m);
    std::vector<int> test_idx(perm.begin() + m, perm.end());
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());

    std::vector<double> mu(static_cast<std::size_t>(d), 0.0);
    std::vector<double> scale(static_cast<std::size_t>(d), 1.0);
    for (int j = 0; j < d; ++j) {
      std::vector<double> col(train_idx.size());
      for (std::size_t i = 0; i < train_idx.size(); ++i)
        col[i] = cd.data.samples[static_cast<std::size_t>(train_idx[i])].x[static_cast<std::size_t>(j)];
      double mean = detail::mean_of(col);
      std::vector<double> sq(col.size());
      for (std::size_t i = 0; i < col.size(); ++i) sq[i] = (col[i] - mean) * (col[i] - mean);
      double sd = std::sqrt(neumaier_sum(sq) / static_cast<double>(col.size() - 1));
      mu[static_cast<std::size_t>(j)] = mean;
      if (sd > 0.0) scale[static_cast<std::size_t>(j)] = sd;
    }
    auto standardized = [&](int i) {
      const LabeledSample& s = cd.data.samples[static_cast<std::size_t>(i)];
      std::vector<double> x(s.x);
      for (int j = 0; j < d; ++j) {
        std::size_t uj = static_cast<std::size_t>(j);
        x[uj] = (x[uj] - mu[uj]) / scale[uj];
      }
      return LabeledSample{std::move(x), s.y};
    };
    std::vector<LabeledSample> tr, te;
    tr.reserve(train_idx.size());
    te.reserve(test_idx.size());
    for (int i : train_idx) tr.push_back(standardized(i));
    for (int i : test_idx) te.push_back(standardized(i));
    Dataset train(std::move(tr));
    Dataset test(std::move(te));

    CvCache cache = make_cv_cache(train, substream_seed(seed, r, 2));
    KnnTuneResult kt = tune_knn(cache);
    double qh = 2.0 / (kt.k_hat + 1.0);
    SnnTuneResult st = tune_snn(cache, grid);
    SnnTuneResult so = tune_snn_risk_only(cache, grid);

    std::vector<WeightVector> w;
    w.reserve(4);
    w.push_back(knn_weights(kt.k_hat, m));
    w.push_back(bnn_weights(BnnParams(qh, m)));
    w.push_back(snn_weights(SnnParams(so.lambda_hat, m, d)));
    w.push_back(snn_weights(SnnParams(st.lambda_hat, m, d)));

    detail::RepEval ev = detail::evaluate_methods(train, test, w, substream_seed(seed, r, 3), 8);
    std::size_t ur = static_cast<std::size_t>(r);
    k_hat[ur] = kt.k_hat;
    q_hat[ur] = qh;
    lambda_snn[ur] = st.lambda_hat;
    lambda_ownn[ur] = so.lambda_hat;
    for (std::size_t j = 0; j < 4; ++j) {
      risk[j][ur] = ev.risk[j];
      cis[j][ur] = ev.cis[j];
    }
  });

  std::string mapping = cd.label_values.size() == 2
                            ? cd.label_values[0] + " -> 1, " + cd.label_values[1] + " -> 2"
                            : cd.label_values[0] + " -> 1";
  StudyResult out;
  out.study = "real";
  out.metadata = {
      {"study", "real"},
      {"version", kToolkitVersion},
      {"seed", std::to_string(seed)},
      {"n_replications", std::to_string(n_replications)},
      {"csv", csv_path},
      {"label_column", label_column},
      {"label_map", mapping},
      {"n_rows", std::to_string(total)},
      {"d", std::to_string(d)},
      {"split", "equal-size random train/test per replication"},
      {"standardization", "per-column z-score fit on the training half"},
      {"methods", "kNN,BNN,OWNN,SNN"},
      {"bnn_q", "2/(k_hat + 1), matching tuned kNN's weight scale"},
      {"ownn", "risk-only tuned surrogate (no closed-form constants)"},
      {"cis_protocol", "8 disjoint half-splits of the training portion; nominal weights truncated and renormalized"},
  };

  std::size_t slash = csv_path.find_last_of("/\\");
  std::string base = slash == std::string::npos ? csv_path : csv_path.substr(slash + 1);
  std::size_t dot = base.find_last_of('.');
  if (dot != std::string::npos && dot > 0) base = base.substr(0, dot);
  std::string problem = base.empty() ? "data" : base;

  const char* names[4] = {"kNN", "BNN", "OWNN", "SNN"};
  for (std::size_t j = 0; j < 4; ++j) {
    detail::emit_series(out, problem, names[j], "risk", risk[j]);
    detail::emit_series(out, problem, names[j], "cis", cis[j]);
  }
  detail::emit_series(out, problem, "kNN", "k_hat", k_hat);
  detail::emit_series(out, problem, "BNN", "q_hat", q_hat);
  detail::emit_series(out, problem, "OWNN", "lambda_hat", lambda_ownn);
  detail::emit_series(out, problem, "SNN", "lambda_hat", lambda_snn);
  return out;
}

namespace detail {

inline std::string format_double(double v) {
  std::array<char, 40> buf;
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

}  // namespace detail

// Long-form records with a '#'-prefixed metadata block. Output depends only
// on the study result, never on wall time or worker count.
inline std::string records_csv(const StudyResult& r) {
  std::ostringstream os;
  for (const auto& kv : r.metadata) os << "# " << kv.first << ": " << kv.second << "\n";
  os << "problem,method,metric,replication,value\n";
  for (const auto& rec : r.records)
    os << rec.problem << "," << rec.method << "," << rec.metric << "," << rec.replication << ","
       << detail::format_double(rec.value) << "\n";
  return os.str();
}

inline std::string summary_json(const StudyResult& r) {
  nlohmann::json meta = nlohmann::json::object();
  for (const auto& kv : r.metadata) meta[kv.first] = kv.second;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& s : r.summary) {
    rows.push_back({{"problem", s.problem},
                    {"method", s.method},
                    {"metric", s.metric},
                    {"n_replications", s.n_replications},
                    {"mean", s.mean},
                    {"se", s.se}});
  }
  nlohmann::json j{{"study", r.study}, {"metadata", meta}, {"summary", rows}};
  return j.dump(2) + "\n";
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot open for writing: " + path);
  out << text;
}

inline void write_records_csv(const StudyResult& r, const std::string& path) {
  write_text(path, records_csv(r));
}

inline void write_summary_json(const StudyResult& r, const std::string& path) {
  write_text(path, summary_json(r));
}

}  // namespace snn
