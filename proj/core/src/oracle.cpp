#include "plab/oracle.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "plab/taskgen.hpp"

namespace plab {
namespace {

double binom(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return r;
}

int count_positive(int d, const double* x) {
  int p = 0;
  for (int i = 0; i < d; ++i)
    if (x[i] > 0) ++p;
  return p;
}

// Number of size-k subsets whose product over x is +1, i.e. subsets with an
// even number of -1 coordinates.
double positive_subset_count(int d, int k, const double* x) {
  const int p = count_positive(d, x);
  const int m = d - p;
  double pos = 0.0;
  for (int j = 0; j <= k; j += 2) pos += binom(m, j) * binom(p, k - j);
  return pos;
}

double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log(p) - (1.0 - p) * std::log(1.0 - p);
}

// P(f(x) = +1) over D_F for boolean tasks; exact.
double prob_positive(const TaskSpec& spec, const double* x) {
  switch (spec.kind) {
    case TaskKind::SparseParity:
      return positive_subset_count(spec.dim, spec.sparsity, x) /
             binom(spec.dim, spec.sparsity);
    case TaskKind::Parity: {
      // All 2^d subsets agree (+1) iff x is all-ones; otherwise exactly half
      // of the subsets hit an odd number of -1 coordinates.
      for (int i = 0; i < spec.dim; ++i)
        if (x[i] < 0) return 0.5;
      return 1.0;
    }
    case TaskKind::BooleanRetrieval:
      return 0.5;
    default:
      throw std::invalid_argument("prob_positive: not a boolean task");
  }
}

}  // namespace

int sparse_parity2_closed_form(int d, int k, const double* x) {
  if (k != 2)
    throw std::invalid_argument("sparse_parity2_closed_form supports k=2 only");
  double s = 0;
  for (int i = 0; i < d; ++i) s += x[i];
  // sum_{i<j} x_i x_j = (s^2 - d) / 2; tie (= 0) maps to -1.
  return (s * s - d) / 2.0 > 0.0 ? 1 : -1;
}

int sparse_parity_majority(int d, int k, const double* x) {
  double pos = positive_subset_count(d, k, x);
  return 2.0 * pos > binom(d, k) ? 1 : -1;
}

double closed_form_oracle(const TaskSpec& spec, const double* x, int dim) {
  if (dim != spec.dim) throw std::invalid_argument("oracle: dimension mismatch");
  const int d = spec.dim;
  double s = 0;
  for (int i = 0; i < d; ++i) s += x[i];
  switch (spec.kind) {
    case TaskKind::LinearRegression:
      return spec.mu * s;
    case TaskKind::SparseLinearRegression:
      return (static_cast<double>(spec.sparsity) / d) * spec.mu * s;
    case TaskKind::QuadraticRegression:
      // g*(x) = x^T U x with U_ij = mu / sqrt(d), matching E[f(x)] under the
      // 1/sqrt(d)-scaled entry distribution.
      return spec.mu / std::sqrt(static_cast<double>(d)) * s * s;
    case TaskKind::SparseParity:
      return sparse_parity_majority(d, spec.sparsity, x);
    case TaskKind::Parity: {
      for (int i = 0; i < d; ++i)
        if (x[i] < 0) return -1.0;  // exact tie among the 2^d subsets -> -1
      return 1.0;
    }
    case TaskKind::GaussianRetrieval:
      return 0.0;  // values are N(0,1), independent of the query
    case TaskKind::BooleanRetrieval:
      return -1.0;  // values uniform ±1: tie -> -1
    case TaskKind::LeakyReLURegression:
      throw std::invalid_argument(
          "LeakyReLU regression has no closed-form oracle; use mc_oracle");
  }
  throw std::logic_error("closed_form_oracle: unhandled kind");
}

std::vector<signed char> brute_force_boolean_oracle(const TaskSpec& spec) {
  if (spec.modality() != Modality::Boolean)
    throw std::invalid_argument("brute_force_boolean_oracle: boolean tasks only");
  const int d = spec.dim;
  if (spec.kind == TaskKind::SparseParity && d > 20)
    throw std::invalid_argument("sparse parity brute force limited to d <= 20");
  if (spec.kind == TaskKind::Parity && d > 16)
    throw std::invalid_argument("parity brute force limited to d <= 16");

  const std::uint64_t n = 1ull << d;
  std::vector<signed char> table(n);
  for (std::uint64_t xm = 0; xm < n; ++xm) {
    long long pos = 0, total = 0;
    if (spec.kind == TaskKind::SparseParity || spec.kind == TaskKind::Parity) {
      const int k = spec.sparsity;
      // Enumerate the function class: every size-k subset, or every subset.
      for (std::uint64_t a = 0; a < n; ++a) {
        if (spec.kind == TaskKind::SparseParity && std::popcount(a) != k) continue;
        ++total;
        // f(x) = +1 iff A picks an even number of -1 coordinates of x.
        if (std::popcount(a & ~xm & (n - 1)) % 2 == 0) ++pos;
      }
    } else {  // boolean retrieval: values uniform ±1, exact tie
      pos = 1;
      total = 2;
    }
    table[xm] = 2 * pos > total ? 1 : -1;
  }
  return table;
}

McEstimate mc_oracle(const TaskSpec& spec, const double* x, int dim, int samples,
                     Rng& rng) {
  if (spec.modality() != Modality::Continuous || spec.is_retrieval())
    throw std::invalid_argument("mc_oracle: continuous function tasks only");
  if (samples < 1) throw std::invalid_argument("mc_oracle: samples must be >= 1");
  double sum = 0, sum2 = 0;
  for (int s = 0; s < samples; ++s) {
    FunctionSample f = sample_function(spec, rng);
    double v = eval_function(f, x, dim);
    sum += v;
    sum2 += v * v;
  }
  McEstimate out;
  out.mean = sum / samples;
  double var = std::max(0.0, sum2 / samples - out.mean * out.mean);
  out.std_error = std::sqrt(var / samples);
  return out;
}

NoContextOracle::NoContextOracle(const TaskSpec& spec, int mc_samples, Rng mc_rng)
    : spec_(spec), mc_samples_(mc_samples), mc_rng_(mc_rng) {
  spec.validate();
}

double NoContextOracle::eval(const double* x, int dim) const {
  if (spec_.kind == TaskKind::LeakyReLURegression)
    return mc_oracle(spec_, x, dim, mc_samples_, mc_rng_).mean;
  return closed_form_oracle(spec_, x, dim);
}

NormalizationReport normalization_constant(const TaskSpec& spec, long long samples,
                                           Rng& rng) {
  spec.validate();
  NormalizationReport rep;
  rep.task = spec;
  rep.estimator_samples = samples;
  rep.low_sample_warning = samples < 1000;
  const int d = spec.dim;
  std::vector<double> x(d);

  double sum = 0, sum2 = 0;
  for (long long s = 0; s < samples; ++s) {
    double loss = 0;
    switch (spec.modality()) {
      case Modality::Continuous: {
        if (spec.kind == TaskKind::GaussianRetrieval) {
          // g* = 0 against a fresh value draw.
          double v = rng.normal();
          loss = v * v;
          break;
        }
        for (auto& xi : x) xi = rng.normal();
        FunctionSample f = sample_function(spec, rng);
        double g;
        if (spec.kind == TaskKind::LeakyReLURegression) {
          Rng inner = rng.substream(0x1ee7 + static_cast<std::uint64_t>(s));
          g = mc_oracle(spec, x.data(), d, 4096, inner).mean;
        } else {
          g = closed_form_oracle(spec, x.data(), d);
        }
        double diff = g - eval_function(f, x.data(), d);
        loss = diff * diff;
        break;
      }
      case Modality::Boolean: {
        for (auto& xi : x) xi = rng.sign();
        // Minimum achievable context-free logistic loss at x is the binary
        // entropy of p(x) = P(f(x) = +1).
        loss = binary_entropy(prob_positive(spec, x.data()));
        break;
      }
    }
    sum += loss;
    sum2 += loss * loss;
  }
  rep.no_context_loss = sum / samples;
  double var = std::max(0.0, sum2 / samples - rep.no_context_loss * rep.no_context_loss);
  rep.std_error = std::sqrt(var / samples);
  rep.c = 1.0 / rep.no_context_loss;
  return rep;
}

double no_context_accuracy(const TaskSpec& spec, long long samples, Rng& rng) {
  if (spec.modality() != Modality::Boolean)
    throw std::invalid_argument("no_context_accuracy: boolean tasks only");
  const int d = spec.dim;
  std::vector<double> x(d);
  long long hits = 0;
  for (long long s = 0; s < samples; ++s) {
    for (auto& xi : x) xi = rng.sign();
    double g = closed_form_oracle(spec, x.data(), d);
    double f;
    if (spec.kind == TaskKind::BooleanRetrieval) {
      f = rng.sign();
    } else {
      FunctionSample fn = sample_function(spec, rng);
      f = eval_function(fn, x.data(), d);
    }
    if (g == f) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(samples);
}

double nc_distance(const std::vector<double>& predictions,
                   const std::vector<double>& oracle_values, Modality modality) {
  if (predictions.size() != oracle_values.size() || predictions.empty())
    throw std::invalid_argument("nc_distance: length mismatch");
  double acc = 0;
  for (size_t i = 0; i < predictions.size(); ++i) {
    if (modality == Modality::Continuous) {
      double diff = predictions[i] - oracle_values[i];
      acc += diff * diff;
    } else {
      double sgn = predictions[i] >= 0.0 ? 1.0 : -1.0;  // sign(0) := +1
      acc += sgn != oracle_values[i] ? 1.0 : 0.0;
    }
  }
  return acc / static_cast<double>(predictions.size());
}

}  // namespace plab
