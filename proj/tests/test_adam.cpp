#include <cmath>
#include <vector>

#include "doctest.h"
#include "plab/adam.hpp"

using namespace plab;

namespace {

// Independent reference: textbook bias-corrected Adam on one scalar.
double reference_adam(double theta, const std::vector<double>& grads, double lr,
                      double lr_scale) {
  double m = 0, v = 0;
  for (std::size_t t = 1; t <= grads.size(); ++t) {
    double g = grads[t - 1];
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    double mhat = m / (1.0 - std::pow(0.9, static_cast<double>(t)));
    double vhat = v / (1.0 - std::pow(0.999, static_cast<double>(t)));
    theta -= lr * lr_scale * mhat / (std::sqrt(vhat) + 1e-8);
  }
  return theta;
}

}  // namespace

TEST_CASE("adam matches the closed-form bias-corrected update over 3 steps") {
  ParamStore<double> ps;
  ps.add("a", {1});
  ps.add("b", {1}, 0.1);
  ps.values = {0.5, -0.25};
  AdamState<double> st;
  st.reset(2);
  st.lr = 0.01;

  std::vector<std::vector<double>> grads = {{0.3, -1.0}, {-0.2, 0.4}, {0.7, 0.7}};
  for (const auto& g : grads) adam_step(ps, g.data(), st);

  CHECK(ps.values[0] ==
        doctest::Approx(reference_adam(0.5, {0.3, -0.2, 0.7}, 0.01, 1.0))
            .epsilon(1e-12));
  CHECK(ps.values[1] ==
        doctest::Approx(reference_adam(-0.25, {-1.0, 0.4, 0.7}, 0.01, 0.1))
            .epsilon(1e-12));
  CHECK(st.step == 3);
}

TEST_CASE("first step moves each parameter by roughly lr in the gradient direction") {
  ParamStore<double> ps;
  ps.add("w", {3});
  ps.values = {0.0, 0.0, 0.0};
  AdamState<double> st;
  st.reset(3);
  st.lr = 0.001;
  std::vector<double> g = {5.0, -0.01, 1e-7};
  adam_step(ps, g.data(), st);
  CHECK(ps.values[0] == doctest::Approx(-0.001).epsilon(1e-6));
  CHECK(ps.values[1] == doctest::Approx(0.001).epsilon(1e-3));
  // Tiny gradients are damped by eps rather than amplified.
  CHECK(std::abs(ps.values[2]) < 0.001);
}

TEST_CASE("non-finite updates are rejected with the parameter name") {
  ParamStore<double> ps;
  ps.add("layer.w", {2});
  ps.values = {1.0, 2.0};
  AdamState<double> st;
  st.reset(2);
  std::vector<double> g = {0.1, std::nan("")};
  CHECK_THROWS_WITH_AS(adam_step(ps, g.data(), st),
                       doctest::Contains("layer.w"), std::runtime_error);
}

TEST_CASE("moment shape mismatch is rejected") {
  ParamStore<double> ps;
  ps.add("w", {2});
  ps.values = {1.0, 2.0};
  AdamState<double> st;
  st.reset(3);
  std::vector<double> g = {0.1, 0.1};
  CHECK_THROWS_AS(adam_step(ps, g.data(), st), std::invalid_argument);
}
