#include "sawlab/lstm.hpp"

#include <Eigen/QR>
#include <cmath>

#include "sawlab/errors.hpp"

namespace sawlab {

namespace {

Eigen::VectorXd sigmoid(const Eigen::VectorXd& v) {
  return v.unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
}

Eigen::MatrixXd orthogonal(int rows, int cols, double scale,
                           RandomStream& rng) {
  Eigen::MatrixXd a(std::max(rows, cols), std::min(rows, cols));
  for (int j = 0; j < a.cols(); ++j)
    for (int i = 0; i < a.rows(); ++i) a(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() *
                      Eigen::MatrixXd::Identity(a.rows(), a.cols());
  if (rows >= cols) return scale * q;
  return scale * q.transpose();
}

}  // namespace

void LstmGradients::add(const LstmGradients& other) {
  for (std::size_t l = 0; l < layers.size(); ++l) {
    layers[l].w_ih += other.layers[l].w_ih;
    layers[l].w_hh += other.layers[l].w_hh;
    layers[l].b += other.layers[l].b;
  }
  head.w += other.head.w;
  head.b += other.head.b;
}

void LstmGradients::scale(double s) {
  for (auto& l : layers) {
    l.w_ih *= s;
    l.w_hh *= s;
    l.b *= s;
  }
  head.w *= s;
  head.b *= s;
}

LstmNetwork::LstmNetwork(int input_dim, std::vector<int> hidden_sizes,
                         int output_dim)
    : input_dim_(input_dim),
      output_dim_(output_dim),
      hidden_(std::move(hidden_sizes)) {
  if (input_dim < 1 || output_dim < 1 || hidden_.empty())
    throw std::invalid_argument("lstm: bad dimensions");
  int d = input_dim_;
  for (int h : hidden_) {
    if (h < 1) throw std::invalid_argument("lstm: bad hidden size");
    LstmLayerParams p;
    p.w_ih = Eigen::MatrixXd::Zero(4 * h, d);
    p.w_hh = Eigen::MatrixXd::Zero(4 * h, h);
    p.b = Eigen::VectorXd::Zero(4 * h);
    layers_.push_back(std::move(p));
    d = h;
  }
  head_.w = Eigen::MatrixXd::Zero(output_dim_, d);
  head_.b = Eigen::VectorXd::Zero(output_dim_);
}

void LstmNetwork::init_params(RandomStream& rng, double head_scale) {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const int h = hidden_[l];
    LstmLayerParams& p = layers_[l];
    for (int gate = 0; gate < 4; ++gate) {
      p.w_ih.middleRows(gate * h, h) =
          orthogonal(h, static_cast<int>(p.w_ih.cols()), 1.0, rng);
      p.w_hh.middleRows(gate * h, h) = orthogonal(h, h, 1.0, rng);
    }
    p.b.setZero();
    p.b.segment(h, h).setOnes();  // forget-gate bias
  }
  head_.w = orthogonal(output_dim_, static_cast<int>(head_.w.cols()),
                       head_scale, rng);
  head_.b.setZero();
}

LstmState LstmNetwork::zero_state() const {
  LstmState s;
  for (int h : hidden_) {
    s.h.push_back(Eigen::VectorXd::Zero(h));
    s.c.push_back(Eigen::VectorXd::Zero(h));
  }
  return s;
}

Eigen::VectorXd LstmNetwork::forward(const Eigen::VectorXd& x,
                                     LstmState& state) const {
  if (x.size() != input_dim_)
    throw std::invalid_argument("lstm: input dimension mismatch");
  if (state.empty()) state = zero_state();
  Eigen::VectorXd cur = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const int h = hidden_[l];
    const LstmLayerParams& p = layers_[l];
    Eigen::VectorXd z = p.w_ih * cur + p.w_hh * state.h[l] + p.b;
    const Eigen::VectorXd gi = sigmoid(z.segment(0, h));
    const Eigen::VectorXd gf = sigmoid(z.segment(h, h));
    const Eigen::VectorXd gg = z.segment(2 * h, h).array().tanh();
    const Eigen::VectorXd go = sigmoid(z.segment(3 * h, h));
    state.c[l] = gf.cwiseProduct(state.c[l]) + gi.cwiseProduct(gg);
    state.h[l] = go.cwiseProduct(state.c[l].array().tanh().matrix());
    cur = state.h[l];
  }
  return head_.w * cur + head_.b;
}

Eigen::VectorXd LstmNetwork::forward_cached(const Eigen::VectorXd& x,
                                            LstmState& state,
                                            Cache& cache) const {
  if (x.size() != input_dim_)
    throw std::invalid_argument("lstm: input dimension mismatch");
  if (state.empty()) state = zero_state();
  std::vector<Cache::StepLayer> step(layers_.size());
  Eigen::VectorXd cur = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const int h = hidden_[l];
    const LstmLayerParams& p = layers_[l];
    Cache::StepLayer& s = step[l];
    s.x = cur;
    s.h_prev = state.h[l];
    s.c_prev = state.c[l];
    Eigen::VectorXd z = p.w_ih * cur + p.w_hh * state.h[l] + p.b;
    s.gi = sigmoid(z.segment(0, h));
    s.gf = sigmoid(z.segment(h, h));
    s.gg = z.segment(2 * h, h).array().tanh();
    s.go = sigmoid(z.segment(3 * h, h));
    s.c_new = s.gf.cwiseProduct(s.c_prev) + s.gi.cwiseProduct(s.gg);
    s.tanh_c = s.c_new.array().tanh();
    state.c[l] = s.c_new;
    state.h[l] = s.go.cwiseProduct(s.tanh_c);
    cur = state.h[l];
  }
  Eigen::VectorXd y = head_.w * cur + head_.b;
  cache.steps.push_back(std::move(step));
  cache.outputs.push_back(y);
  return y;
}

void LstmNetwork::backward(const Cache& cache,
                           const std::vector<Eigen::VectorXd>& upstream,
                           LstmGradients& grads) const {
  const int T = cache.length();
  if (static_cast<int>(upstream.size()) != T)
    throw ProtocolError("lstm backward: upstream length != cached length");
  if (T == 0) throw ProtocolError("lstm backward: empty cache");
  const int L = num_layers();

  std::vector<Eigen::VectorXd> carry_dh(L), carry_dc(L);
  for (int l = 0; l < L; ++l) {
    carry_dh[l] = Eigen::VectorXd::Zero(hidden_[l]);
    carry_dc[l] = Eigen::VectorXd::Zero(hidden_[l]);
  }

  for (int t = T - 1; t >= 0; --t) {
    const auto& step = cache.steps[t];
    // Head.
    const Eigen::VectorXd& dy = upstream[t];
    grads.head.w.noalias() += dy * step[L - 1].go.cwiseProduct(
                                       step[L - 1].tanh_c).transpose();
    grads.head.b += dy;
    Eigen::VectorXd from_above = head_.w.transpose() * dy;

    for (int l = L - 1; l >= 0; --l) {
      const Cache::StepLayer& s = step[l];
      const LstmLayerParams& p = layers_[l];
      const int h = hidden_[l];

      const Eigen::VectorXd dh = carry_dh[l] + from_above;
      const Eigen::VectorXd one_minus_tc2 =
          (1.0 - s.tanh_c.array().square()).matrix();
      const Eigen::VectorXd dc =
          carry_dc[l] + dh.cwiseProduct(s.go).cwiseProduct(one_minus_tc2);
      const Eigen::VectorXd do_ = dh.cwiseProduct(s.tanh_c);
      const Eigen::VectorXd di = dc.cwiseProduct(s.gg);
      const Eigen::VectorXd df = dc.cwiseProduct(s.c_prev);
      const Eigen::VectorXd dg = dc.cwiseProduct(s.gi);
      carry_dc[l] = dc.cwiseProduct(s.gf);

      Eigen::VectorXd dz(4 * h);
      dz.segment(0, h) =
          di.cwiseProduct(s.gi).cwiseProduct((1.0 - s.gi.array()).matrix());
      dz.segment(h, h) =
          df.cwiseProduct(s.gf).cwiseProduct((1.0 - s.gf.array()).matrix());
      dz.segment(2 * h, h) =
          dg.cwiseProduct((1.0 - s.gg.array().square()).matrix());
      dz.segment(3 * h, h) =
          do_.cwiseProduct(s.go).cwiseProduct((1.0 - s.go.array()).matrix());

      grads.layers[l].w_ih.noalias() += dz * s.x.transpose();
      grads.layers[l].w_hh.noalias() += dz * s.h_prev.transpose();
      grads.layers[l].b += dz;

      carry_dh[l] = p.w_hh.transpose() * dz;
      from_above = p.w_ih.transpose() * dz;  // = dL/d h_{l-1,t} (or d input)
    }
  }
}

LstmGradients LstmNetwork::zero_gradients() const {
  LstmGradients g;
  for (const LstmLayerParams& p : layers_) {
    LstmLayerParams z;
    z.w_ih = Eigen::MatrixXd::Zero(p.w_ih.rows(), p.w_ih.cols());
    z.w_hh = Eigen::MatrixXd::Zero(p.w_hh.rows(), p.w_hh.cols());
    z.b = Eigen::VectorXd::Zero(p.b.size());
    g.layers.push_back(std::move(z));
  }
  g.head.w = Eigen::MatrixXd::Zero(head_.w.rows(), head_.w.cols());
  g.head.b = Eigen::VectorXd::Zero(head_.b.size());
  return g;
}

int LstmNetwork::num_params() const {
  int n = 0;
  for (const LstmLayerParams& p : layers_)
    n += static_cast<int>(p.w_ih.size() + p.w_hh.size() + p.b.size());
  n += static_cast<int>(head_.w.size() + head_.b.size());
  return n;
}

namespace {
void copy_out(const Eigen::MatrixXd& m, Eigen::VectorXd& flat, int& off) {
  flat.segment(off, m.size()) =
      Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
  off += static_cast<int>(m.size());
}
void copy_in(Eigen::MatrixXd& m, const Eigen::VectorXd& flat, int& off) {
  Eigen::Map<Eigen::VectorXd>(m.data(), m.size()) =
      flat.segment(off, m.size());
  off += static_cast<int>(m.size());
}
void copy_out_v(const Eigen::VectorXd& v, Eigen::VectorXd& flat, int& off) {
  flat.segment(off, v.size()) = v;
  off += static_cast<int>(v.size());
}
void copy_in_v(Eigen::VectorXd& v, const Eigen::VectorXd& flat, int& off) {
  v = flat.segment(off, v.size());
  off += static_cast<int>(v.size());
}
}  // namespace

Eigen::VectorXd LstmNetwork::get_params() const {
  Eigen::VectorXd flat(num_params());
  int off = 0;
  for (const LstmLayerParams& p : layers_) {
    copy_out(p.w_ih, flat, off);
    copy_out(p.w_hh, flat, off);
    copy_out_v(p.b, flat, off);
  }
  copy_out(head_.w, flat, off);
  copy_out_v(head_.b, flat, off);
  return flat;
}

void LstmNetwork::set_params(const Eigen::VectorXd& flat) {
  if (flat.size() != num_params())
    throw std::invalid_argument("lstm: flat parameter size mismatch");
  int off = 0;
  for (LstmLayerParams& p : layers_) {
    copy_in(p.w_ih, flat, off);
    copy_in(p.w_hh, flat, off);
    copy_in_v(p.b, flat, off);
  }
  copy_in(head_.w, flat, off);
  copy_in_v(head_.b, flat, off);
}

Eigen::VectorXd LstmNetwork::flatten(const LstmGradients& g) {
  int n = 0;
  for (const LstmLayerParams& p : g.layers)
    n += static_cast<int>(p.w_ih.size() + p.w_hh.size() + p.b.size());
  n += static_cast<int>(g.head.w.size() + g.head.b.size());
  Eigen::VectorXd flat(n);
  int off = 0;
  for (const LstmLayerParams& p : g.layers) {
    copy_out(p.w_ih, flat, off);
    copy_out(p.w_hh, flat, off);
    copy_out_v(p.b, flat, off);
  }
  copy_out(g.head.w, flat, off);
  copy_out_v(g.head.b, flat, off);
  return flat;
}

}  // namespace sawlab
