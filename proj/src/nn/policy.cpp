#include "stlmarl/nn/policy.hpp"

#include <cmath>

namespace stlmarl::nn {

void PolicyParams::set_zero() {
  w_in.setZero();
  w_hh.setZero();
  b_h.setZero();
  w_out.setZero();
  b_out.setZero();
}

PolicyParams PolicyParams::zeros_like() const {
  PolicyParams g = *this;
  g.set_zero();
  return g;
}

PolicyParams make_policy(int input_dim, int hidden_dim, int output_dim,
                         std::mt19937_64& rng, double out_gain) {
  if (input_dim < 1 || hidden_dim < 0 || output_dim < 1)
    throw NnError("make_policy: bad dimensions");
  PolicyParams p;
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  p.output_dim = output_dim;
  if (hidden_dim > 0) {
    p.w_in = orthogonal_init(hidden_dim, input_dim, 1.0, rng);
    p.w_hh = orthogonal_init(hidden_dim, hidden_dim, 1.0, rng);
    p.b_h = Vec::Zero(hidden_dim);
  } else {
    p.w_in.resize(0, 0);
    p.w_hh.resize(0, 0);
    p.b_h.resize(0);
  }
  p.w_out = orthogonal_init(output_dim, p.feature_dim(), out_gain, rng);
  p.b_out = Vec::Zero(output_dim);
  return p;
}

std::vector<ParamView> param_views(PolicyParams& p) {
  std::vector<ParamView> out;
  if (p.hidden_dim > 0) {
    out.push_back({"w_in", p.w_in.data(), p.w_in.size()});
    out.push_back({"w_hh", p.w_hh.data(), p.w_hh.size()});
    out.push_back({"b_h", p.b_h.data(), p.b_h.size()});
  }
  out.push_back({"w_out", p.w_out.data(), p.w_out.size()});
  out.push_back({"b_out", p.b_out.data(), p.b_out.size()});
  return out;
}

ForwardCache forward(const PolicyParams& p, std::span<const Vec> obs,
                     const Vec& hidden_in) {
  if (hidden_in.size() != p.hidden_dim)
    throw NnError("forward: hidden state dimension mismatch");
  ForwardCache c;
  c.inputs.assign(obs.begin(), obs.end());
  c.hidden.reserve(obs.size() + 1);
  c.hidden.push_back(hidden_in);
  c.outputs.reserve(obs.size());
  for (const Vec& x : obs) {
    if (x.size() != p.input_dim) throw NnError("forward: input dimension mismatch");
    if (p.hidden_dim > 0) {
      Vec pre = p.w_in * x + p.w_hh * c.hidden.back() + p.b_h;
      c.hidden.push_back(pre.array().tanh().matrix());
      c.outputs.push_back(p.w_out * c.hidden.back() + p.b_out);
    } else {
      c.hidden.push_back(Vec());
      c.outputs.push_back(p.w_out * x + p.b_out);
    }
  }
  return c;
}

Vec step_forward(const PolicyParams& p, const Vec& obs, Vec& hidden) {
  if (obs.size() != p.input_dim) throw NnError("step_forward: input dimension mismatch");
  if (p.hidden_dim > 0) {
    if (hidden.size() != p.hidden_dim)
      throw NnError("step_forward: hidden state dimension mismatch");
    hidden = (p.w_in * obs + p.w_hh * hidden + p.b_h).array().tanh().matrix();
    return p.w_out * hidden + p.b_out;
  }
  return p.w_out * obs + p.b_out;
}

PolicyParams backward(const PolicyParams& p, const ForwardCache& cache,
                      const std::vector<Vec>& dloss_doutput) {
  if (dloss_doutput.size() != cache.outputs.size())
    throw NnError("backward: output gradient count mismatch");
  PolicyParams g = p.zeros_like();
  const std::size_t steps = cache.outputs.size();
  Vec dh_carry = Vec::Zero(p.hidden_dim);
  for (std::size_t i = steps; i-- > 0;) {
    const Vec& dout = dloss_doutput[i];
    if (dout.size() != p.output_dim)
      throw NnError("backward: output gradient dimension mismatch");
    if (!dout.allFinite()) throw NnError("backward: non-finite output gradient");
    if (p.hidden_dim > 0) {
      const Vec& h = cache.hidden[i + 1];
      const Vec& h_prev = cache.hidden[i];
      g.w_out.noalias() += dout * h.transpose();
      g.b_out += dout;
      Vec dh = p.w_out.transpose() * dout + dh_carry;
      // tanh'(pre) = 1 - h^2
      Vec dpre = dh.cwiseProduct((1.0 - h.array().square()).matrix());
      g.w_in.noalias() += dpre * cache.inputs[i].transpose();
      g.w_hh.noalias() += dpre * h_prev.transpose();
      g.b_h += dpre;
      dh_carry.noalias() = p.w_hh.transpose() * dpre;
    } else {
      g.w_out.noalias() += dout * cache.inputs[i].transpose();
      g.b_out += dout;
    }
  }
  return g;
}

namespace {

// Max-shifted log-normalizer.
double log_sum_exp(const Vec& logits, double m) {
  return m + std::log((logits.array() - m).exp().sum());
}

}  // namespace

Vec softmax(const Vec& logits) {
  double m = logits.maxCoeff();
  Vec e = (logits.array() - m).exp().matrix();
  return e / e.sum();
}

double log_prob(const Vec& logits, int action) {
  if (action < 0 || action >= logits.size()) throw NnError("log_prob: bad action");
  return logits[action] - log_sum_exp(logits, logits.maxCoeff());
}

Vec dlogp_dlogits(const Vec& logits, int action) {
  Vec g = -softmax(logits);
  g[action] += 1.0;
  return g;
}

double entropy(const Vec& logits) {
  Vec p = softmax(logits);
  double s = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) s -= p[i] * std::log(p[i]);
  return s;
}

Vec dentropy_dlogits(const Vec& logits) {
  Vec p = softmax(logits);
  double h = entropy(logits);
  Vec g(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i)
    g[i] = p[i] > 0.0 ? -p[i] * (std::log(p[i]) + h) : 0.0;
  return g;
}

int argmax_action(const Vec& logits) {
  Eigen::Index best = 0;
  logits.maxCoeff(&best);
  return static_cast<int>(best);
}

int categorical_sample(const Vec& logits, std::mt19937_64& rng, double* logp) {
  if (!logits.allFinite()) throw NnError("categorical_sample: non-finite logits");
  Vec p = softmax(logits);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double u = unit(rng);
  double acc = 0.0;
  int action = static_cast<int>(p.size()) - 1;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    acc += p[i];
    if (u < acc) {
      action = static_cast<int>(i);
      break;
    }
  }
  if (logp) *logp = log_prob(logits, action);
  return action;
}

}  // namespace stlmarl::nn
