#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "resq/feature_vec.hpp"

namespace resq {

enum class HeadMode { Dueling, Plain };

struct NetDims {
  int input = 0;
  int hidden = 128;
  int actions = 0;

  bool operator==(const NetDims&) const = default;
};

// One fully connected layer; weights row-major [in][out] so that forward and
// weight gradients stream over contiguous rows keyed by input index.
struct Layer {
  int in = 0;
  int out = 0;
  std::vector<double> w;
  std::vector<double> b;

  std::span<const double> row(int i) const { return {w.data() + static_cast<std::size_t>(i) * out,
                                                     static_cast<std::size_t>(out)}; }
  std::span<double> row(int i) { return {w.data() + static_cast<std::size_t>(i) * out,
                                         static_cast<std::size_t>(out)}; }
};

// Two-layer ReLU trunk with either a dueling (value + advantage) head pair or
// a single plain Q head. In dueling mode the advantages are mean-subtracted:
// q_a = V + A_a - mean(A).
struct DuelingNet {
  NetDims dims;
  HeadMode mode = HeadMode::Dueling;
  Layer fc1, fc2;
  Layer value;      // hidden -> 1, dueling mode only
  Layer advantage;  // hidden -> actions; the Q head in plain mode
};

// Same storage layout as the parameters.
struct Gradients {
  Layer fc1, fc2, value, advantage;
};

DuelingNet make_net(NetDims dims, HeadMode mode, std::uint64_t seed);
Gradients zero_gradients(const DuelingNet& net);

// Parameter tensors in a fixed order (weights then bias per layer); the same
// order indexes Gradients and optimizer moments.
std::vector<std::span<double>> param_tensors(DuelingNet& net);
std::vector<std::span<const double>> param_tensors(const DuelingNet& net);
std::vector<std::span<double>> param_tensors(Gradients& grads, const DuelingNet& net);
std::vector<std::span<const double>> param_tensors(const Gradients& grads, const DuelingNet& net);

std::vector<double> forward(const DuelingNet& net, const FeatureVec& x);
std::vector<double> forward(const DuelingNet& net, std::span<const double> x);

// Head decomposition alongside q; plain mode reports value 0 and the raw
// head output as both advantages and q.
struct ForwardParts {
  double value = 0.0;
  std::vector<double> advantages;  // raw, before mean subtraction
  std::vector<double> q;
};
ForwardParts forward_parts(const DuelingNet& net, const FeatureVec& x);

// Reverse-mode gradients of dot(q, upstream) with respect to all parameters.
Gradients backward(const DuelingNet& net, const FeatureVec& x, std::span<const double> upstream);
// Accumulating variant used by batched training steps.
void backward_into(const DuelingNet& net, const FeatureVec& x, std::span<const double> upstream,
                   Gradients& sink);

struct OptimState {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::int64_t step_count = 0;
  Gradients first_moment;
  Gradients second_moment;
};

OptimState make_optim(const DuelingNet& net, double learning_rate = 1e-3);
// Adam with bias correction. Rejects non-finite gradients.
void adam_step(DuelingNet& net, const Gradients& grads, OptimState& opt);

// Loss over the q vector with its analytic gradient, for gradient checking.
struct LossFn {
  std::function<double(std::span<const double>)> value;
  std::function<std::vector<double>(std::span<const double>)> grad;
};

// Max relative error between backward() and central finite differences.
// `analytic` overrides the gradients under test (used to prove the check
// detects corruption).
double grad_check(const DuelingNet& net, const FeatureVec& x, const LossFn& loss, double eps,
                  const Gradients* analytic = nullptr);

// Checkpoints: {version, dims, head_mode, parameter arrays, optimizer state}.
std::string net_to_json(const DuelingNet& net, const OptimState* opt = nullptr);
DuelingNet net_from_json(const std::string& text, OptimState* opt_out = nullptr);

}  // namespace resq
