#pragma once

#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "stlmarl/nn/init.hpp"

namespace stlmarl::nn {

class NnError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Parameters of one recurrent head network: a tanh recurrent cell over the
/// inputs followed by a linear output layer. hidden_dim == 0 drops the cell
/// and the output layer reads the input directly (a feed-forward network).
struct PolicyParams {
  int input_dim = 0;
  int hidden_dim = 0;
  int output_dim = 0;
  Mat w_in;   // hidden x input
  Mat w_hh;   // hidden x hidden
  Vec b_h;    // hidden
  Mat w_out;  // output x feature
  Vec b_out;  // output

  int feature_dim() const { return hidden_dim > 0 ? hidden_dim : input_dim; }

  void set_zero();
  PolicyParams zeros_like() const;
  Vec initial_hidden() const { return Vec::Zero(hidden_dim); }
};

/// Orthogonally initialized network; the output layer uses `out_gain`
/// (small for policy heads, 1 for value heads).
PolicyParams make_policy(int input_dim, int hidden_dim, int output_dim,
                         std::mt19937_64& rng, double out_gain = 0.01);

/// Mutable flat views over every parameter tensor, in a fixed order shared
/// by the optimizer, the checkpoint format, and gradient containers.
struct ParamView {
  std::string name;
  double* data;
  std::ptrdiff_t size;
};
std::vector<ParamView> param_views(PolicyParams& p);

struct ForwardCache {
  std::vector<Vec> inputs;   // x_0..x_{T-1}
  std::vector<Vec> hidden;   // h_0..h_T, h_0 = hidden_in (empty vectors if H=0)
  std::vector<Vec> outputs;  // per-step output (logits or value)

  const Vec& hidden_out() const { return hidden.back(); }
};

/// Runs the network over an observation sequence. Throws NnError on
/// dimension mismatches.
ForwardCache forward(const PolicyParams& p, std::span<const Vec> obs,
                     const Vec& hidden_in);

/// Single-step forward for rollouts; updates `hidden` in place and returns
/// the output vector.
Vec step_forward(const PolicyParams& p, const Vec& obs, Vec& hidden);

/// Exact reverse-mode gradients of a scalar loss given dL/d(output_t) for
/// every step, back-propagated through time across the whole sequence.
/// Throws NnError if any intermediate value is non-finite.
PolicyParams backward(const PolicyParams& p, const ForwardCache& cache,
                      const std::vector<Vec>& dloss_doutput);

// ---------------------------------------------------------------------------
// Categorical policy head.
// ---------------------------------------------------------------------------

Vec softmax(const Vec& logits);
double log_prob(const Vec& logits, int action);
Vec dlogp_dlogits(const Vec& logits, int action);
double entropy(const Vec& logits);
Vec dentropy_dlogits(const Vec& logits);
int argmax_action(const Vec& logits);

/// Samples from softmax(logits); if `logp` is non-null it receives
/// log softmax(logits)[action].
int categorical_sample(const Vec& logits, std::mt19937_64& rng,
                       double* logp = nullptr);

}  // namespace stlmarl::nn
