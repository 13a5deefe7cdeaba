#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "plab/params.hpp"
#include "plab/rng.hpp"
#include "plab/task.hpp"

namespace plab {

struct TransformerConfig {
  int layers = 4;
  int embed = 64;
  int heads = 4;
  int input_dim = 5;
  int max_tokens = 80;   // 2n
  int rel_clip = 128;    // relative-position bias distance clip
  std::string profile = "toy";

  static TransformerConfig paper_profile(int d, int n) {
    return {12, 256, 8, d, 2 * n, 128, "paper"};
  }
  static TransformerConfig toy_profile(int d, int n) {
    return {4, 64, 4, d, 2 * n, 128, "toy"};
  }
  int head_dim() const { return embed / heads; }
  int bias_width() const { return std::min(rel_clip, max_tokens - 1) + 1; }
  void validate() const {
    if (embed % heads != 0)
      throw std::invalid_argument("embed must be divisible by heads");
    if (layers < 1 || input_dim < 1 || max_tokens < 2)
      throw std::invalid_argument("bad transformer config");
  }
  bool operator==(const TransformerConfig&) const = default;
};

// Per-sequence activation cache for the backward pass.
template <class S>
struct TransformerActs {
  using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

  int T = 0;
  Mat tokens;  // T x d input copy
  struct Layer {
    Mat x_in;            // residual stream entering the block
    Mat ln1, ln2;        // normalized activations
    Vec mu1, rstd1, mu2, rstd2;
    Mat q, k, v;         // T x E
    Mat probs;           // (H*T) x T softmax rows, causal
    Mat att_cat;         // concatenated head outputs, pre out-proj
    Mat x_mid;           // after attention residual
    Mat z1;              // pre-GELU
    Mat h1;              // post-GELU
  };
  std::vector<Layer> layers;
  Mat x_final;  // residual stream entering the final norm
  Mat lnf;
  Vec muf, rstdf;
  std::vector<S> preds;  // one per x-token position
};

// Decoder-only transformer: pre-norm residual blocks, causal attention with a
// learned per-head relative-position bias, GELU MLP of width 4E, linear input
// head (d -> E) and scalar output head. Precision is the template parameter:
// float for training, double for gradient checking.
template <class S>
class Transformer {
 public:
  using Mat = typename TransformerActs<S>::Mat;
  using Vec = typename TransformerActs<S>::Vec;
  using MapM = Eigen::Map<Mat>;
  using CMapM = Eigen::Map<const Mat>;
  using MapV = Eigen::Map<Vec>;
  using CMapV = Eigen::Map<const Vec>;

  explicit Transformer(const TransformerConfig& cfg) : cfg_(cfg) {
    cfg.validate();
    const int E = cfg.embed, d = cfg.input_dim, H = cfg.heads, W = cfg.bias_width();
    p_.add("in.w", {E, d});
    p_.add("in.b", {E});
    for (int l = 0; l < cfg.layers; ++l) {
      std::string pre = "l" + std::to_string(l) + ".";
      p_.add(pre + "ln1.g", {E});
      p_.add(pre + "ln1.b", {E});
      p_.add(pre + "att.wq", {E, E});
      p_.add(pre + "att.bq", {E});
      p_.add(pre + "att.wk", {E, E});
      p_.add(pre + "att.bk", {E});
      p_.add(pre + "att.wv", {E, E});
      p_.add(pre + "att.bv", {E});
      p_.add(pre + "att.wo", {E, E});
      p_.add(pre + "att.bo", {E});
      p_.add(pre + "att.relbias", {H, W});
      p_.add(pre + "ln2.g", {E});
      p_.add(pre + "ln2.b", {E});
      p_.add(pre + "mlp.w1", {4 * E, E});
      p_.add(pre + "mlp.b1", {4 * E});
      p_.add(pre + "mlp.w2", {E, 4 * E});
      p_.add(pre + "mlp.b2", {E});
    }
    p_.add("lnf.g", {E});
    p_.add("lnf.b", {E});
    p_.add("out.w", {E});
    p_.add("out.b", {1});
  }

  // Gaussian N(0, scale^2) weights, unit layer-norm gains, zero biases, zero
  // relative-position bias, zero output head (initial prediction is 0).
  void init(std::uint64_t seed, double scale = 0.02) {
    Rng rng(seed, 0x7f0d);
    for (int i = 0; i < static_cast<int>(p_.entries.size()); ++i) {
      const auto& e = p_.entries[i];
      S* d = p_.data(i);
      bool is_weight =
          e.shape.size() == 2 && e.name.find("relbias") == std::string::npos;
      bool is_gain = e.name.size() > 2 && e.name.substr(e.name.size() - 2) == ".g" &&
                     e.name.find("ln") != std::string::npos;
      if (e.name == "out.w" || e.name == "out.b") {
        for (size_t j = 0; j < e.size; ++j) d[j] = S(0);
      } else if (is_weight) {
        for (size_t j = 0; j < e.size; ++j) d[j] = static_cast<S>(scale * rng.normal());
      } else if (is_gain) {
        for (size_t j = 0; j < e.size; ++j) d[j] = S(1);
      } else {
        for (size_t j = 0; j < e.size; ++j) d[j] = S(0);
      }
    }
  }

  const TransformerConfig& config() const { return cfg_; }
  ParamStore<S>& params() { return p_; }
  const ParamStore<S>& params() const { return p_; }

  // tokens: T x d row-major. Fills the cache and returns predictions at the
  // x-token positions (even 0-based indices).
  std::vector<S> forward(const S* tokens, int T, TransformerActs<S>& a) const {
    if (T > cfg_.max_tokens) throw std::invalid_argument("too many tokens");
    const int E = cfg_.embed, d = cfg_.input_dim, H = cfg_.heads, hd = cfg_.head_dim();
    const S inv_sqrt_hd = S(1) / std::sqrt(static_cast<S>(hd));

    a.T = T;
    a.tokens = CMapM(tokens, T, d);
    a.layers.resize(cfg_.layers);

    Mat x = a.tokens * param_m("in.w").transpose();
    x.rowwise() += param_v("in.b").transpose();

    for (int l = 0; l < cfg_.layers; ++l) {
      auto& L = a.layers[l];
      std::string pre = "l" + std::to_string(l) + ".";
      L.x_in = x;
      layernorm(L.x_in, param_v(pre + "ln1.g"), param_v(pre + "ln1.b"), L.ln1, L.mu1,
                L.rstd1);

      L.q = L.ln1 * param_m(pre + "att.wq").transpose();
      L.q.rowwise() += param_v(pre + "att.bq").transpose();
      L.k = L.ln1 * param_m(pre + "att.wk").transpose();
      L.k.rowwise() += param_v(pre + "att.bk").transpose();
      L.v = L.ln1 * param_m(pre + "att.wv").transpose();
      L.v.rowwise() += param_v(pre + "att.bv").transpose();

      CMapM relbias = param_m(pre + "att.relbias");
      L.probs.setZero(H * T, T);
      L.att_cat.setZero(T, E);
      for (int h = 0; h < H; ++h) {
        auto Qh = L.q.middleCols(h * hd, hd);
        auto Kh = L.k.middleCols(h * hd, hd);
        auto Vh = L.v.middleCols(h * hd, hd);
        for (int i = 0; i < T; ++i) {
          auto row = L.probs.row(h * T + i);
          S maxv = std::numeric_limits<S>::lowest();
          for (int j = 0; j <= i; ++j) {
            S s = Qh.row(i).dot(Kh.row(j)) * inv_sqrt_hd +
                  relbias(h, std::min(i - j, cfg_.bias_width() - 1));
            row(j) = s;
            maxv = std::max(maxv, s);
          }
          S denom = S(0);
          for (int j = 0; j <= i; ++j) {
            row(j) = std::exp(row(j) - maxv);
            denom += row(j);
          }
          for (int j = 0; j <= i; ++j) row(j) /= denom;
          // weighted value sum for this query position
          auto out = L.att_cat.row(i).segment(h * hd, hd);
          for (int j = 0; j <= i; ++j) out += row(j) * Vh.row(j);
        }
      }

      L.x_mid = L.x_in + L.att_cat * param_m(pre + "att.wo").transpose();
      L.x_mid.rowwise() += param_v(pre + "att.bo").transpose();

      layernorm(L.x_mid, param_v(pre + "ln2.g"), param_v(pre + "ln2.b"), L.ln2, L.mu2,
                L.rstd2);
      L.z1 = L.ln2 * param_m(pre + "mlp.w1").transpose();
      L.z1.rowwise() += param_v(pre + "mlp.b1").transpose();
      L.h1 = L.z1.unaryExpr([](S z) { return gelu(z); });
      x = L.x_mid + L.h1 * param_m(pre + "mlp.w2").transpose();
      x.rowwise() += param_v(pre + "mlp.b2").transpose();
    }

    a.x_final = x;
    layernorm(a.x_final, param_v("lnf.g"), param_v("lnf.b"), a.lnf, a.muf, a.rstdf);

    CMapV ow = param_v("out.w");
    S ob = p_.values[p_.find("out.b").offset];
    a.preds.clear();
    for (int t = 0; t < T; t += 2) {
      S v = a.lnf.row(t).dot(ow.transpose()) + ob;
      if (!std::isfinite(static_cast<double>(v)))
        throw std::runtime_error("transformer: non-finite prediction");
      a.preds.push_back(v);
    }
    return a.preds;
  }

  // dpred: gradient of the loss w.r.t. each x-position prediction.
  // Accumulates parameter gradients into grad (size params().size()).
  void backward(const TransformerActs<S>& a, const std::vector<S>& dpred,
                S* grad) const {
    const int T = a.T, E = cfg_.embed, H = cfg_.heads, hd = cfg_.head_dim();
    const S inv_sqrt_hd = S(1) / std::sqrt(static_cast<S>(hd));

    // output head
    Mat dlnf = Mat::Zero(T, E);
    CMapV ow = param_v("out.w");
    MapV g_ow = grad_v(grad, "out.w");
    S& g_ob = *(grad + p_.find("out.b").offset);
    for (size_t i = 0; i < dpred.size(); ++i) {
      int t = static_cast<int>(2 * i);
      dlnf.row(t) = dpred[i] * ow.transpose();
      g_ow += dpred[i] * a.lnf.row(t).transpose();
      g_ob += dpred[i];
    }

    Mat dx = Mat::Zero(T, E);
    layernorm_backward(a.x_final, a.lnf, a.muf, a.rstdf, param_v("lnf.g"), dlnf,
                       grad_v(grad, "lnf.g"), grad_v(grad, "lnf.b"), dx);

    for (int l = cfg_.layers - 1; l >= 0; --l) {
      const auto& L = a.layers[l];
      std::string pre = "l" + std::to_string(l) + ".";

      // MLP:  x = x_mid + gelu(ln2 W1^T + b1) W2^T + b2
      Mat dh1 = dx * param_m(pre + "mlp.w2");
      grad_m(grad, pre + "mlp.w2").noalias() += dx.transpose() * L.h1;
      grad_v(grad, pre + "mlp.b2") += dx.colwise().sum().transpose();
      Mat dz1 = dh1.cwiseProduct(L.z1.unaryExpr([](S z) { return gelu_grad(z); }));
      Mat dln2 = dz1 * param_m(pre + "mlp.w1");
      grad_m(grad, pre + "mlp.w1").noalias() += dz1.transpose() * L.ln2;
      grad_v(grad, pre + "mlp.b1") += dz1.colwise().sum().transpose();

      Mat dx_mid = dx;  // residual path
      layernorm_backward(L.x_mid, L.ln2, L.mu2, L.rstd2, param_v(pre + "ln2.g"), dln2,
                         grad_v(grad, pre + "ln2.g"), grad_v(grad, pre + "ln2.b"),
                         dx_mid);

      // attention out-proj
      Mat datt = dx_mid * param_m(pre + "att.wo");
      grad_m(grad, pre + "att.wo").noalias() += dx_mid.transpose() * L.att_cat;
      grad_v(grad, pre + "att.bo") += dx_mid.colwise().sum().transpose();

      Mat dq = Mat::Zero(T, E), dk = Mat::Zero(T, E), dv = Mat::Zero(T, E);
      MapM g_bias = grad_m(grad, pre + "att.relbias");
      for (int h = 0; h < H; ++h) {
        auto Qh = L.q.middleCols(h * hd, hd);
        auto Kh = L.k.middleCols(h * hd, hd);
        auto Vh = L.v.middleCols(h * hd, hd);
        auto dQh = dq.middleCols(h * hd, hd);
        auto dKh = dk.middleCols(h * hd, hd);
        auto dVh = dv.middleCols(h * hd, hd);
        for (int i = 0; i < T; ++i) {
          auto prow = L.probs.row(h * T + i);
          auto dout = datt.row(i).segment(h * hd, hd);
          // dP_j = dout . Vh_j ; softmax backward; bias/q/k grads
          S inner = S(0);
          Vec dp(i + 1);
          for (int j = 0; j <= i; ++j) {
            dp(j) = dout.dot(Vh.row(j));
            dVh.row(j) += prow(j) * dout;
            inner += dp(j) * prow(j);
          }
          for (int j = 0; j <= i; ++j) {
            S ds = prow(j) * (dp(j) - inner);
            g_bias(h, std::min(i - j, cfg_.bias_width() - 1)) += ds;
            dQh.row(i) += ds * inv_sqrt_hd * Kh.row(j);
            dKh.row(j) += ds * inv_sqrt_hd * Qh.row(i);
          }
        }
      }

      Mat dln1 = dq * param_m(pre + "att.wq");
      grad_m(grad, pre + "att.wq").noalias() += dq.transpose() * L.ln1;
      grad_v(grad, pre + "att.bq") += dq.colwise().sum().transpose();
      dln1.noalias() += dk * param_m(pre + "att.wk");
      grad_m(grad, pre + "att.wk").noalias() += dk.transpose() * L.ln1;
      grad_v(grad, pre + "att.bk") += dk.colwise().sum().transpose();
      dln1.noalias() += dv * param_m(pre + "att.wv");
      grad_m(grad, pre + "att.wv").noalias() += dv.transpose() * L.ln1;
      grad_v(grad, pre + "att.bv") += dv.colwise().sum().transpose();

      dx = dx_mid;  // residual into the block input
      layernorm_backward(L.x_in, L.ln1, L.mu1, L.rstd1, param_v(pre + "ln1.g"), dln1,
                         grad_v(grad, pre + "ln1.g"), grad_v(grad, pre + "ln1.b"),
                         dx);
    }

    grad_m(grad, "in.w").noalias() += dx.transpose() * a.tokens;
    grad_v(grad, "in.b") += dx.colwise().sum().transpose();
  }

  static S gelu(S z) {
    constexpr S kInvSqrt2 = S(0.7071067811865476);
    return S(0.5) * z * (S(1) + std::erf(z * kInvSqrt2));
  }
  static S gelu_grad(S z) {
    constexpr S kInvSqrt2 = S(0.7071067811865476);
    const S phi = std::exp(S(-0.5) * z * z) * S(0.3989422804014327);
    return S(0.5) * (S(1) + std::erf(z * kInvSqrt2)) + z * phi;
  }

 private:
  static constexpr S kLnEps = S(1e-5);

  CMapM param_m(const std::string& name) const {
    const auto& e = p_.find(name);
    return CMapM(p_.values.data() + e.offset, e.shape[0], e.shape[1]);
  }
  CMapV param_v(const std::string& name) const {
    const auto& e = p_.find(name);
    return CMapV(p_.values.data() + e.offset, e.shape[0]);
  }
  MapM grad_m(S* grad, const std::string& name) const {
    const auto& e = p_.find(name);
    return MapM(grad + e.offset, e.shape[0], e.shape[1]);
  }
  MapV grad_v(S* grad, const std::string& name) const {
    const auto& e = p_.find(name);
    return MapV(grad + e.offset, e.shape[0]);
  }

  static void layernorm(const Mat& x, CMapV g, CMapV b, Mat& y, Vec& mu, Vec& rstd) {
    const int T = static_cast<int>(x.rows()), E = static_cast<int>(x.cols());
    y.resize(T, E);
    mu.resize(T);
    rstd.resize(T);
    for (int t = 0; t < T; ++t) {
      S m = x.row(t).mean();
      S var = (x.row(t).array() - m).square().mean();
      S r = S(1) / std::sqrt(var + kLnEps);
      mu(t) = m;
      rstd(t) = r;
      y.row(t) =
          (((x.row(t).array() - m) * r) * g.transpose().array() + b.transpose().array())
              .matrix();
    }
  }

  static void layernorm_backward(const Mat& x, const Mat& y, const Vec& mu,
                                 const Vec& rstd, CMapV g, const Mat& dy, MapV dg,
                                 MapV db, Mat& dx_accum) {
    const int T = static_cast<int>(x.rows()), E = static_cast<int>(x.cols());
    for (int t = 0; t < T; ++t) {
      Eigen::Array<S, Eigen::Dynamic, 1> xhat =
          (x.row(t).transpose().array() - mu(t)) * rstd(t);
      Eigen::Array<S, Eigen::Dynamic, 1> dyr = dy.row(t).transpose().array();
      dg += (dyr * xhat).matrix();
      db += dyr.matrix();
      Eigen::Array<S, Eigen::Dynamic, 1> dxhat = dyr * g.array();
      S m1 = dxhat.mean();
      S m2 = (dxhat * xhat).mean();
      dx_accum.row(t) += (rstd(t) * (dxhat - m1 - xhat * m2)).matrix().transpose();
    }
  }

  TransformerConfig cfg_;
  ParamStore<S> p_;
};

}  // namespace plab
