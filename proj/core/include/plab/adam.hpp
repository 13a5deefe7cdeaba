#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "plab/params.hpp"

namespace plab {

// Standard bias-corrected Adam. Moments mirror the parameter layout; each
// parameter entry's lr_scale multiplies the base learning rate.
template <class S>
struct AdamState {
  std::vector<S> m, v;
  long long step = 0;
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void reset(size_t n) {
    m.assign(n, S(0));
    v.assign(n, S(0));
    step = 0;
  }
};

template <class S>
void adam_step(ParamStore<S>& params, const S* grad, AdamState<S>& st) {
  if (st.m.size() != params.size() || st.v.size() != params.size())
    throw std::invalid_argument("adam_step: moment/parameter shape mismatch");
  st.step += 1;
  const double bc1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.step));
  const double bc2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.step));
  for (const auto& e : params.entries) {
    const double lr = st.lr * e.lr_scale;
    for (size_t i = e.offset; i < e.offset + e.size; ++i) {
      double g = static_cast<double>(grad[i]);
      double m = st.beta1 * static_cast<double>(st.m[i]) + (1.0 - st.beta1) * g;
      double v = st.beta2 * static_cast<double>(st.v[i]) + (1.0 - st.beta2) * g * g;
      st.m[i] = static_cast<S>(m);
      st.v[i] = static_cast<S>(v);
      double update = lr * (m / bc1) / (std::sqrt(v / bc2) + st.eps);
      double next = static_cast<double>(params.values[i]) - update;
      if (!std::isfinite(next))
        throw std::runtime_error("adam_step: non-finite update for " + e.name);
      params.values[i] = static_cast<S>(next);
    }
  }
}

}  // namespace plab
