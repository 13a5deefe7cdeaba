#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "plab/rng.hpp"
#include "plab/task.hpp"
#include "plab/transformer.hpp"

namespace plab {

// (x_1, y_1, ..., x_n, y_n) -> 2n tokens of width d; each y is padded with
// d-1 trailing zeros. x tokens sit at even 0-based positions.
template <class S>
std::vector<S> embed_prompt(const PromptSequence& p) {
  const int d = p.dim;
  std::vector<S> tokens(static_cast<size_t>(2 * p.n) * d, S(0));
  for (int i = 0; i < p.n; ++i) {
    S* xt = tokens.data() + static_cast<size_t>(2 * i) * d;
    for (int j = 0; j < d; ++j) xt[j] = static_cast<S>(p.x(i)[j]);
    tokens[static_cast<size_t>(2 * i + 1) * d] = static_cast<S>(p.ys[i]);
  }
  return tokens;
}

inline double loss_mse(double pred, double target) {
  double e = pred - target;
  return e * e;
}

// ln(1 + exp(-y z)) for y in {±1}, numerically stable for large |z|.
inline double loss_logistic(double z, double y) {
  double t = -y * z;
  return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

inline double loss_logistic_grad(double z, double y) {
  // d/dz ln(1+exp(-yz)) = -y * sigmoid(-y z)
  double t = -y * z;
  double sig = t > 0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t));
  return -y * sig;
}

struct BatchLoss {
  double total = 0.0;                 // sum_m c_m * component_m
  std::vector<double> per_task;       // mean prefix loss per mixture entry
  std::vector<int> per_task_count;    // sequences per entry in this batch
};

// Mixture training objective over one batch: component_m is the mean over
// task-m sequences of (1/n) sum_i l(pred_i, y_i); total = sum_m c_m comp_m.
// When grad is non-null, accumulates d(total)/d(params) sequence by sequence
// in batch order.
template <class S>
BatchLoss sequence_loss(const Transformer<S>& model,
                        const std::vector<PromptSequence>& batch,
                        const std::vector<double>& c,
                        const std::vector<Modality>& modality, S* grad = nullptr) {
  const size_t k = c.size();
  if (modality.size() != k) throw std::invalid_argument("sequence_loss: c/modality mismatch");
  BatchLoss out;
  out.per_task.assign(k, 0.0);
  out.per_task_count.assign(k, 0);
  for (const auto& p : batch) out.per_task_count.at(p.task_id)++;

  TransformerActs<S> acts;
  std::vector<S> dpred;
  for (const auto& p : batch) {
    const int m = p.task_id;
    std::vector<S> tokens = embed_prompt<S>(p);
    std::vector<S> preds = model.forward(tokens.data(), 2 * p.n, acts);
    const double w = c[m] / (static_cast<double>(out.per_task_count[m]) * p.n);
    dpred.assign(preds.size(), S(0));
    double seq_loss = 0;
    for (int i = 0; i < p.n; ++i) {
      double z = static_cast<double>(preds[i]);
      if (modality[m] == Modality::Continuous) {
        seq_loss += loss_mse(z, p.ys[i]);
        dpred[i] = static_cast<S>(2.0 * (z - p.ys[i]) * w);
      } else {
        seq_loss += loss_logistic(z, p.ys[i]);
        dpred[i] = static_cast<S>(loss_logistic_grad(z, p.ys[i]) * w);
      }
    }
    out.per_task[m] += seq_loss / p.n;
    if (grad) model.backward(acts, dpred, grad);
  }
  for (size_t m = 0; m < k; ++m) {
    if (out.per_task_count[m] > 0) out.per_task[m] /= out.per_task_count[m];
    out.total += c[m] * out.per_task[m];
  }
  return out;
}

// Central-difference check of an analytic gradient on a random coordinate
// subset. Returns the max relative error max |g_fd - g| / max(|g_fd|+|g|, eps).
inline double grad_check(const std::function<double(const double*)>& loss,
                         std::vector<double> params, const double* analytic_grad,
                         double eps, int coords, Rng& rng) {
  if (eps <= 0) throw std::invalid_argument("grad_check: eps must be positive");
  const size_t n = params.size();
  double worst = 0;
  for (int c = 0; c < coords; ++c) {
    size_t i = static_cast<size_t>(rng.below(n));
    double keep = params[i];
    params[i] = keep + eps;
    double up = loss(params.data());
    params[i] = keep - eps;
    double dn = loss(params.data());
    params[i] = keep;
    double fd = (up - dn) / (2 * eps);
    double denom = std::max(std::abs(fd) + std::abs(analytic_grad[i]), 1e-8);
    worst = std::max(worst, std::abs(fd - analytic_grad[i]) / denom);
  }
  return worst;
}

}  // namespace plab
