#include "resq/nn.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "resq/errors.hpp"
#include "resq/rng.hpp"

namespace resq {

using nlohmann::json;

namespace {

// Trunk layers: uniform fan-in weights, a small positive bias so every ReLU
// unit starts in its linear regime (the encoded features are non-negative,
// so a unit pushed negative early could never recover).
Layer make_layer(int in, int out, Rng& rng) {
  Layer layer;
  layer.in = in;
  layer.out = out;
  layer.w.resize(static_cast<std::size_t>(in) * out);
  layer.b.assign(static_cast<std::size_t>(out), 0.1);
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  for (double& w : layer.w) w = rng.uniform(-bound, bound);
  return layer;
}

Layer zero_layer(int in, int out) {
  Layer layer;
  layer.in = in;
  layer.out = out;
  layer.w.assign(static_cast<std::size_t>(in) * out, 0.0);
  layer.b.assign(static_cast<std::size_t>(out), 0.0);
  return layer;
}

// y = b + W^T x, streaming rows of W for the non-zero entries of x.
void affine_sparse(const Layer& layer, const FeatureVec& x, std::vector<double>& y) {
  y.assign(layer.b.begin(), layer.b.end());
  for (std::size_t k = 0; k < x.idx.size(); ++k) {
    const double xv = static_cast<double>(x.val[k]);
    const auto row = layer.row(x.idx[k]);
    for (int j = 0; j < layer.out; ++j) y[static_cast<std::size_t>(j)] += xv * row[j];
  }
}

void affine_dense(const Layer& layer, std::span<const double> x, std::vector<double>& y) {
  y.assign(layer.b.begin(), layer.b.end());
  for (int i = 0; i < layer.in; ++i) {
    const double xv = x[static_cast<std::size_t>(i)];
    if (xv == 0.0) continue;
    const auto row = layer.row(i);
    for (int j = 0; j < layer.out; ++j) y[static_cast<std::size_t>(j)] += xv * row[j];
  }
}

void relu(std::vector<double>& v) {
  for (double& x : v) x = x > 0.0 ? x : 0.0;
}

struct Trace {
  std::vector<double> h1;  // post-ReLU
  std::vector<double> h2;
  std::vector<double> q;
};

void check_input(const DuelingNet& net, std::int32_t dim) {
  if (dim != net.dims.input) {
    throw Error(Errc::shape_mismatch, "input size " + std::to_string(dim) + " != configured " +
                                          std::to_string(net.dims.input));
  }
}

void head_forward(const DuelingNet& net, Trace& t) {
  std::vector<double> adv;
  affine_dense(net.advantage, t.h2, adv);
  if (net.mode == HeadMode::Plain) {
    t.q = std::move(adv);
    return;
  }
  std::vector<double> value;
  affine_dense(net.value, t.h2, value);
  double mean = 0.0;
  for (double a : adv) mean += a;
  mean /= static_cast<double>(adv.size());
  t.q.resize(adv.size());
  for (std::size_t a = 0; a < adv.size(); ++a) t.q[a] = value[0] + adv[a] - mean;
}

Trace run_forward(const DuelingNet& net, const FeatureVec& x) {
  Trace t;
  affine_sparse(net.fc1, x, t.h1);
  relu(t.h1);
  affine_dense(net.fc2, t.h1, t.h2);
  relu(t.h2);
  head_forward(net, t);
  return t;
}

}  // namespace

DuelingNet make_net(NetDims dims, HeadMode mode, std::uint64_t seed) {
  if (dims.input < 1 || dims.hidden < 1 || dims.actions < 1) {
    throw Error(Errc::bad_config, "network dimensions must be positive");
  }
  Rng rng(mix_seed(seed, 0x6e65740ull));
  DuelingNet net;
  net.dims = dims;
  net.mode = mode;
  net.fc1 = make_layer(dims.input, dims.hidden, rng);
  net.fc2 = make_layer(dims.hidden, dims.hidden, rng);
  // Heads start at zero: action values separate only as evidence arrives,
  // instead of inheriting fan-in noise amplified by the trunk's scale.
  if (mode == HeadMode::Dueling) net.value = zero_layer(dims.hidden, 1);
  net.advantage = zero_layer(dims.hidden, dims.actions);
  return net;
}

Gradients zero_gradients(const DuelingNet& net) {
  Gradients g;
  g.fc1 = zero_layer(net.fc1.in, net.fc1.out);
  g.fc2 = zero_layer(net.fc2.in, net.fc2.out);
  if (net.mode == HeadMode::Dueling) g.value = zero_layer(net.value.in, net.value.out);
  g.advantage = zero_layer(net.advantage.in, net.advantage.out);
  return g;
}

namespace {

template <typename Net, typename Span>
std::vector<Span> collect_tensors(Net& holder, bool dueling) {
  std::vector<Span> tensors;
  auto add = [&tensors](auto& layer) {
    tensors.push_back(Span(layer.w));
    tensors.push_back(Span(layer.b));
  };
  add(holder.fc1);
  add(holder.fc2);
  if (dueling) add(holder.value);
  add(holder.advantage);
  return tensors;
}

}  // namespace

std::vector<std::span<double>> param_tensors(DuelingNet& net) {
  return collect_tensors<DuelingNet, std::span<double>>(net, net.mode == HeadMode::Dueling);
}
std::vector<std::span<const double>> param_tensors(const DuelingNet& net) {
  return collect_tensors<const DuelingNet, std::span<const double>>(
      net, net.mode == HeadMode::Dueling);
}
std::vector<std::span<double>> param_tensors(Gradients& grads, const DuelingNet& net) {
  return collect_tensors<Gradients, std::span<double>>(grads, net.mode == HeadMode::Dueling);
}
std::vector<std::span<const double>> param_tensors(const Gradients& grads, const DuelingNet& net) {
  return collect_tensors<const Gradients, std::span<const double>>(grads,
                                                                   net.mode == HeadMode::Dueling);
}

std::vector<double> forward(const DuelingNet& net, const FeatureVec& x) {
  check_input(net, x.dim);
  return run_forward(net, x).q;
}

ForwardParts forward_parts(const DuelingNet& net, const FeatureVec& x) {
  check_input(net, x.dim);
  Trace t;
  affine_sparse(net.fc1, x, t.h1);
  relu(t.h1);
  affine_dense(net.fc2, t.h1, t.h2);
  relu(t.h2);

  ForwardParts parts;
  affine_dense(net.advantage, t.h2, parts.advantages);
  if (net.mode == HeadMode::Plain) {
    parts.q = parts.advantages;
    return parts;
  }
  std::vector<double> value;
  affine_dense(net.value, t.h2, value);
  parts.value = value[0];
  double mean = 0.0;
  for (double a : parts.advantages) mean += a;
  mean /= static_cast<double>(parts.advantages.size());
  parts.q.resize(parts.advantages.size());
  for (std::size_t a = 0; a < parts.advantages.size(); ++a) {
    parts.q[a] = parts.value + parts.advantages[a] - mean;
  }
  return parts;
}

std::vector<double> forward(const DuelingNet& net, std::span<const double> x) {
  check_input(net, static_cast<std::int32_t>(x.size()));
  FeatureVec sparse;
  sparse.dim = static_cast<std::int32_t>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) sparse.push(static_cast<std::int32_t>(i), x[i]);
  return forward(net, sparse);
}

void backward_into(const DuelingNet& net, const FeatureVec& x, std::span<const double> upstream,
                   Gradients& sink) {
  check_input(net, x.dim);
  if (static_cast<int>(upstream.size()) != net.dims.actions) {
    throw Error(Errc::shape_mismatch, "upstream arity != action count");
  }
  const Trace t = run_forward(net, x);
  const int hidden = net.dims.hidden;
  const int actions = net.dims.actions;

  // Head gradients. Dueling: q_a = V + A_a - mean(A).
  double upstream_sum = 0.0;
  for (double u : upstream) upstream_sum += u;
  std::vector<double> d_adv(upstream.begin(), upstream.end());
  std::vector<double> d_h2(static_cast<std::size_t>(hidden), 0.0);
  if (net.mode == HeadMode::Dueling) {
    const double mean_u = upstream_sum / static_cast<double>(actions);
    for (double& g : d_adv) g -= mean_u;
    const double d_value = upstream_sum;
    for (int i = 0; i < hidden; ++i) {
      const double h = t.h2[static_cast<std::size_t>(i)];
      if (h != 0.0) sink.value.w[static_cast<std::size_t>(i)] += h * d_value;
      d_h2[static_cast<std::size_t>(i)] += net.value.w[static_cast<std::size_t>(i)] * d_value;
    }
    sink.value.b[0] += d_value;
  }
  for (int i = 0; i < hidden; ++i) {
    const double h = t.h2[static_cast<std::size_t>(i)];
    const auto wrow = net.advantage.row(i);
    auto grow = sink.advantage.row(i);
    double acc = 0.0;
    for (int j = 0; j < actions; ++j) {
      const double g = d_adv[static_cast<std::size_t>(j)];
      if (h != 0.0) grow[j] += h * g;
      acc += wrow[j] * g;
    }
    d_h2[static_cast<std::size_t>(i)] += acc;
  }
  for (int j = 0; j < actions; ++j) sink.advantage.b[static_cast<std::size_t>(j)] += d_adv[j];

  // Through ReLU at h2 and fc2.
  std::vector<double> d_z2(static_cast<std::size_t>(hidden));
  for (int i = 0; i < hidden; ++i) {
    d_z2[static_cast<std::size_t>(i)] =
        t.h2[static_cast<std::size_t>(i)] > 0.0 ? d_h2[static_cast<std::size_t>(i)] : 0.0;
  }
  std::vector<double> d_h1(static_cast<std::size_t>(hidden), 0.0);
  for (int i = 0; i < hidden; ++i) {
    const double h = t.h1[static_cast<std::size_t>(i)];
    const auto wrow = net.fc2.row(i);
    double acc = 0.0;
    if (h != 0.0) {
      auto grow = sink.fc2.row(i);
      for (int j = 0; j < hidden; ++j) {
        const double g = d_z2[static_cast<std::size_t>(j)];
        grow[j] += h * g;
        acc += wrow[j] * g;
      }
    } else {
      for (int j = 0; j < hidden; ++j) acc += wrow[j] * d_z2[static_cast<std::size_t>(j)];
    }
    d_h1[static_cast<std::size_t>(i)] = acc;
  }
  for (int j = 0; j < hidden; ++j) sink.fc2.b[static_cast<std::size_t>(j)] += d_z2[j];

  // Through ReLU at h1 and fc1; only rows touched by non-zero inputs change.
  std::vector<double> d_z1(static_cast<std::size_t>(hidden));
  for (int i = 0; i < hidden; ++i) {
    d_z1[static_cast<std::size_t>(i)] =
        t.h1[static_cast<std::size_t>(i)] > 0.0 ? d_h1[static_cast<std::size_t>(i)] : 0.0;
  }
  for (std::size_t k = 0; k < x.idx.size(); ++k) {
    const double xv = static_cast<double>(x.val[k]);
    auto grow = sink.fc1.row(x.idx[k]);
    for (int j = 0; j < hidden; ++j) grow[j] += xv * d_z1[static_cast<std::size_t>(j)];
  }
  for (int j = 0; j < hidden; ++j) sink.fc1.b[static_cast<std::size_t>(j)] += d_z1[j];
}

Gradients backward(const DuelingNet& net, const FeatureVec& x, std::span<const double> upstream) {
  Gradients grads = zero_gradients(net);
  backward_into(net, x, upstream, grads);
  return grads;
}

OptimState make_optim(const DuelingNet& net, double learning_rate) {
  OptimState opt;
  opt.learning_rate = learning_rate;
  opt.first_moment = zero_gradients(net);
  opt.second_moment = zero_gradients(net);
  return opt;
}

void adam_step(DuelingNet& net, const Gradients& grads, OptimState& opt) {
  auto params = param_tensors(net);
  auto gs = param_tensors(grads, net);
  auto ms = param_tensors(opt.first_moment, net);
  auto vs = param_tensors(opt.second_moment, net);
  if (params.size() != gs.size()) throw Error(Errc::shape_mismatch, "gradient layout");
  for (std::size_t t = 0; t < params.size(); ++t) {
    if (params[t].size() != gs[t].size()) {
      throw Error(Errc::shape_mismatch, "gradient tensor " + std::to_string(t));
    }
    for (double g : gs[t]) {
      if (!std::isfinite(g)) throw Error(Errc::non_finite_gradient, "tensor " + std::to_string(t));
    }
  }

  opt.step_count += 1;
  const double c1 = 1.0 - std::pow(opt.beta1, static_cast<double>(opt.step_count));
  const double c2 = 1.0 - std::pow(opt.beta2, static_cast<double>(opt.step_count));
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto p = params[t];
    auto g = gs[t];
    auto m = ms[t];
    auto v = vs[t];
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = opt.beta1 * m[i] + (1.0 - opt.beta1) * g[i];
      v[i] = opt.beta2 * v[i] + (1.0 - opt.beta2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      p[i] -= opt.learning_rate * m_hat / (std::sqrt(v_hat) + opt.epsilon);
    }
  }
}

double grad_check(const DuelingNet& net, const FeatureVec& x, const LossFn& loss, double eps,
                  const Gradients* analytic) {
  if (eps <= 0.0) throw Error(Errc::bad_config, "eps must be positive");

  Gradients computed = zero_gradients(net);
  {
    const auto q = forward(net, x);
    const auto upstream = loss.grad(q);
    backward_into(net, x, upstream, computed);
  }
  const Gradients& reference = analytic != nullptr ? *analytic : computed;

  DuelingNet probe = net;  // perturbed copy
  auto params = param_tensors(probe);
  auto refs = param_tensors(reference, probe);

  double worst = 0.0;
  for (std::size_t t = 0; t < params.size(); ++t) {
    for (std::size_t i = 0; i < params[t].size(); ++i) {
      const double saved = params[t][i];
      params[t][i] = saved + eps;
      const double up = loss.value(forward(probe, x));
      params[t][i] = saved - eps;
      const double down = loss.value(forward(probe, x));
      params[t][i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double exact = refs[t][i];
      const double denom = std::max({std::fabs(numeric), std::fabs(exact), 1e-12});
      worst = std::max(worst, std::fabs(numeric - exact) / denom);
    }
  }
  return worst;
}

namespace {

json layer_to_json(const Layer& layer) {
  return json{{"in", layer.in}, {"out", layer.out}, {"w", layer.w}, {"b", layer.b}};
}

Layer layer_from_json(const json& doc) {
  Layer layer;
  layer.in = doc.at("in").get<int>();
  layer.out = doc.at("out").get<int>();
  layer.w = doc.at("w").get<std::vector<double>>();
  layer.b = doc.at("b").get<std::vector<double>>();
  if (layer.w.size() != static_cast<std::size_t>(layer.in) * layer.out ||
      layer.b.size() != static_cast<std::size_t>(layer.out)) {
    throw Error(Errc::shape_mismatch, "layer arrays do not match declared shape");
  }
  return layer;
}

}  // namespace

std::string net_to_json(const DuelingNet& net, const OptimState* opt) {
  json doc;
  doc["version"] = 1;
  doc["dims"] = {{"input", net.dims.input}, {"hidden", net.dims.hidden},
                 {"actions", net.dims.actions}};
  doc["head_mode"] = net.mode == HeadMode::Dueling ? "dueling" : "plain";
  json params;
  params["fc1"] = layer_to_json(net.fc1);
  params["fc2"] = layer_to_json(net.fc2);
  if (net.mode == HeadMode::Dueling) params["value"] = layer_to_json(net.value);
  params["advantage"] = layer_to_json(net.advantage);
  doc["params"] = std::move(params);
  if (opt != nullptr) {
    json o;
    o["learning_rate"] = opt->learning_rate;
    o["beta1"] = opt->beta1;
    o["beta2"] = opt->beta2;
    o["epsilon"] = opt->epsilon;
    o["step_count"] = opt->step_count;
    o["m_fc1"] = layer_to_json(opt->first_moment.fc1);
    o["m_fc2"] = layer_to_json(opt->first_moment.fc2);
    if (net.mode == HeadMode::Dueling) o["m_value"] = layer_to_json(opt->first_moment.value);
    o["m_advantage"] = layer_to_json(opt->first_moment.advantage);
    o["v_fc1"] = layer_to_json(opt->second_moment.fc1);
    o["v_fc2"] = layer_to_json(opt->second_moment.fc2);
    if (net.mode == HeadMode::Dueling) o["v_value"] = layer_to_json(opt->second_moment.value);
    o["v_advantage"] = layer_to_json(opt->second_moment.advantage);
    doc["optim"] = std::move(o);
  }
  return doc.dump() + "\n";
}

DuelingNet net_from_json(const std::string& text, OptimState* opt_out) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::io_error, std::string("checkpoint: ") + e.what());
  }
  if (!doc.contains("version") || doc["version"] != 1) {
    throw Error(Errc::version_mismatch, "unsupported checkpoint version");
  }
  DuelingNet net;
  net.dims.input = doc.at("dims").at("input").get<int>();
  net.dims.hidden = doc.at("dims").at("hidden").get<int>();
  net.dims.actions = doc.at("dims").at("actions").get<int>();
  const std::string mode = doc.at("head_mode").get<std::string>();
  if (mode != "dueling" && mode != "plain") {
    throw Error(Errc::version_mismatch, "unknown head mode '" + mode + "'");
  }
  net.mode = mode == "dueling" ? HeadMode::Dueling : HeadMode::Plain;
  const auto& params = doc.at("params");
  net.fc1 = layer_from_json(params.at("fc1"));
  net.fc2 = layer_from_json(params.at("fc2"));
  if (net.mode == HeadMode::Dueling) net.value = layer_from_json(params.at("value"));
  net.advantage = layer_from_json(params.at("advantage"));
  if (net.fc1.in != net.dims.input || net.fc1.out != net.dims.hidden ||
      net.fc2.in != net.dims.hidden || net.fc2.out != net.dims.hidden ||
      net.advantage.in != net.dims.hidden || net.advantage.out != net.dims.actions ||
      (net.mode == HeadMode::Dueling && (net.value.in != net.dims.hidden || net.value.out != 1))) {
    throw Error(Errc::shape_mismatch, "layer shapes do not match checkpoint dims");
  }
  if (opt_out != nullptr) {
    if (!doc.contains("optim")) {
      *opt_out = make_optim(net);
    } else {
      const auto& o = doc.at("optim");
      opt_out->learning_rate = o.at("learning_rate").get<double>();
      opt_out->beta1 = o.at("beta1").get<double>();
      opt_out->beta2 = o.at("beta2").get<double>();
      opt_out->epsilon = o.at("epsilon").get<double>();
      opt_out->step_count = o.at("step_count").get<std::int64_t>();
      opt_out->first_moment.fc1 = layer_from_json(o.at("m_fc1"));
      opt_out->first_moment.fc2 = layer_from_json(o.at("m_fc2"));
      if (net.mode == HeadMode::Dueling) {
        opt_out->first_moment.value = layer_from_json(o.at("m_value"));
      }
      opt_out->first_moment.advantage = layer_from_json(o.at("m_advantage"));
      opt_out->second_moment.fc1 = layer_from_json(o.at("v_fc1"));
      opt_out->second_moment.fc2 = layer_from_json(o.at("v_fc2"));
      if (net.mode == HeadMode::Dueling) {
        opt_out->second_moment.value = layer_from_json(o.at("v_value"));
      }
      opt_out->second_moment.advantage = layer_from_json(o.at("v_advantage"));
    }
  }
  return net;
}

}  // namespace resq
