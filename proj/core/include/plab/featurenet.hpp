#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>

#include "plab/params.hpp"
#include "plab/rng.hpp"

namespace plab {

struct FeatureNetConfig {
  int d = 150;
  int h = 10;       // teacher feature count
  int hp = 100;     // student width h'
  int k = 15;       // sub-task count
  double init_scale = 0.05;
  bool multi_task = true;  // distinct mu_m per sub-task vs one shared mu
  bool operator==(const FeatureNetConfig&) const = default;
};

// Two-layer student f(x) = V sigmoid(W x) fitting a planted teacher
// f*(x) = U sigmoid(A* x). The k rows of U are the sub-tasks: their means
// mu_m are drawn from the radius-sqrt(h) sphere, independently per task in
// multi-task mode and once (shared) in single-task mode.
template <class S>
class FeatureNet {
 public:
  using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using MapM = Eigen::Map<Mat>;
  using CMapM = Eigen::Map<const Mat>;

  explicit FeatureNet(const FeatureNetConfig& cfg) : cfg_(cfg) {
    if (cfg.d < 1 || cfg.h < 1 || cfg.hp < 1 || cfg.k < 1)
      throw std::invalid_argument("bad feature net config");
    w_idx_ = p_.add("W", {cfg.hp, cfg.d});
    v_idx_ = p_.add("V", {cfg.k, cfg.hp}, 0.1);  // output head: 0.1x lr
    astar_.resize(cfg.h, cfg.d);
    u_.resize(cfg.k, cfg.h);
    mu_.resize(cfg.k, cfg.h);
  }

  void init(std::uint64_t seed) {
    Rng rng(seed, 0xfea7);
    // Teacher features: rows of A* uniform on the unit sphere in R^d.
    for (int i = 0; i < cfg_.h; ++i) {
      for (int j = 0; j < cfg_.d; ++j) astar_(i, j) = static_cast<S>(rng.normal());
      astar_.row(i) /= astar_.row(i).norm();
    }
    // Sub-task means on the radius-sqrt(h) sphere.
    auto draw_mu = [&](Eigen::Ref<Mat> row) {
      for (int j = 0; j < cfg_.h; ++j) row(0, j) = static_cast<S>(rng.normal());
      row *= static_cast<S>(std::sqrt(static_cast<double>(cfg_.h))) / row.norm();
    };
    if (cfg_.multi_task) {
      for (int m = 0; m < cfg_.k; ++m) draw_mu(mu_.row(m));
    } else {
      draw_mu(mu_.row(0));
      for (int m = 1; m < cfg_.k; ++m) mu_.row(m) = mu_.row(0);
    }
    for (int m = 0; m < cfg_.k; ++m)
      for (int j = 0; j < cfg_.h; ++j)
        u_(m, j) = mu_(m, j) + static_cast<S>(rng.normal());
    // Student: small Gaussian.
    for (auto& v : p_.values) v = static_cast<S>(cfg_.init_scale * rng.normal());
  }

  const FeatureNetConfig& config() const { return cfg_; }
  ParamStore<S>& params() { return p_; }
  const ParamStore<S>& params() const { return p_; }
  const Mat& teacher_features() const { return astar_; }
  const Mat& teacher_heads() const { return u_; }
  const Mat& task_means() const { return mu_; }
  Mat& teacher_heads() { return u_; }

  // Student forward: X is B x d; returns B x k.
  Mat forward(const Mat& X) const {
    Mat phi = sigmoid(X * W().transpose());
    return phi * V().transpose();
  }

  // Teacher forward f*(x) = U sigmoid(A* x).
  Mat teacher(const Mat& X) const {
    return sigmoid(X * astar_.transpose()) * u_.transpose();
  }

  // L = sum_m mean_batch[(pred_m - y_m)^2]; accumulates gradients when grad
  // is non-null.
  double loss_and_grad(const Mat& X, const Mat& Y, S* grad = nullptr) const {
    const int B = static_cast<int>(X.rows());
    Mat phi = sigmoid(X * W().transpose());       // B x h'
    Mat pred = phi * V().transpose();             // B x k
    Mat err = pred - Y;
    double loss = err.squaredNorm() / B;          // sums over k, averages over B
    if (grad) {
      Mat derr = err * S(2.0 / B);
      MapM gV(grad + p_.entries[v_idx_].offset, cfg_.k, cfg_.hp);
      MapM gW(grad + p_.entries[w_idx_].offset, cfg_.hp, cfg_.d);
      gV.noalias() += derr.transpose() * phi;
      Mat dphi = derr * V();
      Mat dz = dphi.cwiseProduct(phi.cwiseProduct(Mat::Ones(phi.rows(), phi.cols()) - phi));
      gW.noalias() += dz.transpose() * X;
    }
    return loss;
  }

  // Fresh standard-normal input batch.
  Mat sample_inputs(int batch, Rng& rng) const {
    Mat X(batch, cfg_.d);
    for (int i = 0; i < batch; ++i)
      for (int j = 0; j < cfg_.d; ++j) X(i, j) = static_cast<S>(rng.normal());
    return X;
  }

 private:
  CMapM W() const {
    const auto& e = p_.entries[w_idx_];
    return CMapM(p_.values.data() + e.offset, e.shape[0], e.shape[1]);
  }
  CMapM V() const {
    const auto& e = p_.entries[v_idx_];
    return CMapM(p_.values.data() + e.offset, e.shape[0], e.shape[1]);
  }
  static Mat sigmoid(const Mat& z) {
    return z.unaryExpr([](S v) { return S(1) / (S(1) + std::exp(-v)); });
  }

  FeatureNetConfig cfg_;
  ParamStore<S> p_;
  int w_idx_ = 0, v_idx_ = 0;
  Mat astar_, u_, mu_;
};

}  // namespace plab
