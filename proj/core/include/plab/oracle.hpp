#pragma once

#include <vector>

#include "plab/rng.hpp"
#include "plab/task.hpp"

namespace plab {

// Closed-form optimal no-context prediction g*(x). Supported kinds: linear,
// quadratic, sparse linear, sparse parity, parity, both retrieval variants.
// LeakyReLU has no closed form; callers are directed to the Monte-Carlo path.
double closed_form_oracle(const TaskSpec& spec, const double* x, int dim);

// Majority label over the entire finite function class for every x in {±1}^d,
// ties mapped to -1. Indexing: bit j of the table index is set iff x_j = +1.
// Feasibility: sparse parity d <= 20, parity d <= 16.
std::vector<signed char> brute_force_boolean_oracle(const TaskSpec& spec);

// Algebraic shortcut for the k=2 majority rule: sign of ((sum x)^2 - d)/2,
// tie -> -1. Unsupported for k != 2.
int sparse_parity2_closed_form(int d, int k, const double* x);

// Count-based majority for any arity (number of size-k subsets with an even
// count of -1 coordinates vs. half the class).
int sparse_parity_majority(int d, int k, const double* x);

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

// Monte-Carlo estimate of E_{f~D_F}[f(x)] for continuous tasks.
McEstimate mc_oracle(const TaskSpec& spec, const double* x, int dim, int samples,
                     Rng& rng);

// Unified evaluable oracle: closed form where one exists, Monte-Carlo for
// LeakyReLU. Pure per query given its internal stream.
class NoContextOracle {
 public:
  explicit NoContextOracle(const TaskSpec& spec, int mc_samples = 100000,
                           Rng mc_rng = Rng(0x9c0ffee, 41));
  double eval(const double* x, int dim) const;
  const TaskSpec& spec() const { return spec_; }

 private:
  TaskSpec spec_;
  int mc_samples_;
  mutable Rng mc_rng_;
};

struct NormalizationReport {
  TaskSpec task;
  double c = 0.0;               // 1 / E[loss(g*, f)]
  double no_context_loss = 0.0; // E[loss(g*, f)] itself
  long long estimator_samples = 0;
  double std_error = 0.0;       // of the loss estimate, 0 when exact
  bool low_sample_warning = false;
};

// c_m = 1 / E[l(g*(x), f(x))]; squared error for continuous tasks, minimum
// achievable context-free logistic loss (binary entropy of p(x)) for boolean.
NormalizationReport normalization_constant(const TaskSpec& spec, long long samples,
                                           Rng& rng);

// MC estimate of E_{f,x}[1(g*(x) = f(x))] for boolean tasks.
double no_context_accuracy(const TaskSpec& spec, long long samples, Rng& rng);

// Mean squared deviation (continuous) or mean sign-disagreement (boolean,
// sign(0) = +1) between model predictions and oracle values.
double nc_distance(const std::vector<double>& predictions,
                   const std::vector<double>& oracle_values, Modality modality);

}  // namespace plab
