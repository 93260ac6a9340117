// SPDX-FileCopyrightText: Copyright (c) 2026 The gennape Authors
// SPDX-License-Identifier: Apache-2.0

#include "gennape/encoder.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "gennape/error.hpp"

namespace gennape {
namespace {

Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng) {
  Matrix m(rows, cols);
  const double keep = 1.0 / (1.0 - rate);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = rng.uniform() < rate ? 0.0 : keep;
  return m;
}

std::vector<ad::Var> bind_constants(ad::Tape& t, const ParamSet& params) {
  std::vector<ad::Var> vars;
  vars.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) vars.push_back(t.constant_ref(params[i]));
  return vars;
}

double flops_target(double flops_g) { return std::log1p(1000.0 * flops_g); }

}  // namespace

void EncoderConfig::validate() const {
  if (embed_dim != 2 * branch_dim) throw std::invalid_argument("embed_dim must equal 2 * branch_dim");
  if (!(temperature > 0)) throw std::invalid_argument("temperature must be positive");
  if (!(dropout_rate >= 0 && dropout_rate < 1)) throw std::invalid_argument("dropout_rate must be in [0, 1)");
  if (attn_heads < 1 || branch_dim % attn_heads != 0) {
    throw std::invalid_argument("attn_heads must divide branch_dim");
  }
  if (proj_dim < 1 || gnn_layers < 1 || batch_size < 1 || q < 1) {
    throw std::invalid_argument("proj_dim, gnn_layers, batch_size and q must be positive");
  }
  if (alpha_sign != 1 && alpha_sign != -1) throw std::invalid_argument("alpha_sign must be +1 or -1");
  if (aux_flops_weight < 0) throw std::invalid_argument("aux_flops_weight must be non-negative");
}

Matrix node_features(const ComputeGraph& cg) {
  Matrix f = Matrix::Zero(static_cast<Eigen::Index>(cg.size()), kNodeFeatureDim);
  for (std::size_t i = 0; i < cg.size(); ++i) {
    const auto& n = cg.nodes()[i];
    const auto r = static_cast<Eigen::Index>(i);
    f(r, static_cast<Eigen::Index>(n.kind)) = 1.0;
    Eigen::Index c = kNumOpKinds;
    for (const auto* s : {&n.input_shape, &n.output_shape}) {
      f(r, c++) = std::log1p(s->height);
      f(r, c++) = std::log1p(s->width);
      f(r, c++) = std::log1p(s->channels);
    }
    double weights = 0.0;
    if (n.weight_shape) {
      weights = 1.0;
      for (int d : *n.weight_shape) weights *= d;
    }
    f(r, c++) = std::log1p(weights);
    f(r, c++) = n.has_bias ? 1.0 : 0.0;
  }
  return f;
}

GraphInputs graph_inputs(const ComputeGraph& cg) {
  const auto n = static_cast<Eigen::Index>(cg.size());
  GraphInputs in{node_features(cg), Matrix::Zero(n, n), Matrix::Zero(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& preds = cg.predecessors(static_cast<int>(i));
    for (int p : preds) in.pred_mean(i, p) = 1.0 / static_cast<double>(preds.size());
    const auto& succs = cg.successors(static_cast<int>(i));
    for (int s : succs) in.succ_mean(i, s) = 1.0 / static_cast<double>(succs.size());
  }
  return in;
}

EncoderParams EncoderParams::init(const EncoderConfig& config) {
  config.validate();
  EncoderParams p;
  p.config = config;
  Rng rng(derive_seed(config.seed, {0x656e63}));
  const int d = config.branch_dim;
  p.embed_w = p.params.add("embed.w", he_uniform(kNodeFeatureDim, d, rng));
  p.embed_b = p.params.add("embed.b", Matrix::Zero(1, d));
  for (int l = 0; l < config.gnn_layers; ++l) {
    const std::string tag = "gnn.l" + std::to_string(l);
    GnnLayer layer{};
    // Three summed inputs: scale each by 1/sqrt(3) relative to He.
    layer.self_w = p.params.add(tag + ".self", he_uniform(d, d, rng) / std::sqrt(3.0));
    layer.pred_w = p.params.add(tag + ".pred", he_uniform(d, d, rng) / std::sqrt(3.0));
    layer.succ_w = p.params.add(tag + ".succ", he_uniform(d, d, rng) / std::sqrt(3.0));
    layer.bias = p.params.add(tag + ".b", Matrix::Zero(1, d));
    p.gnn.push_back(layer);
  }
  const double attn_scale = 1.0 / std::sqrt(2.0);
  p.wq = p.params.add("attn.q", he_uniform(d, d, rng) * attn_scale);
  p.wk = p.params.add("attn.k", he_uniform(d, d, rng) * attn_scale);
  p.wv = p.params.add("attn.v", he_uniform(d, d, rng) * attn_scale);
  p.wo = p.params.add("attn.o", he_uniform(d, d, rng) * attn_scale);
  p.bo = p.params.add("attn.ob", Matrix::Zero(1, d));
  p.ffn = add_mlp(p.params, "attn.ffn", {d, 2 * d, d}, rng);
  p.proj = add_mlp(p.params, "proj", {config.embed_dim, config.embed_dim, config.proj_dim}, rng);
  p.aux = add_mlp(p.params, "aux", {config.embed_dim, d, 1}, rng);
  return p;
}

std::vector<std::size_t> EncoderParams::aux_indices() const {
  std::vector<std::size_t> idx = aux.weights;
  idx.insert(idx.end(), aux.biases.begin(), aux.biases.end());
  return idx;
}

ad::Var encode_on_tape(ad::Tape& t, const std::vector<ad::Var>& vars, const EncoderParams& p,
                       const GraphInputs& in, std::optional<std::uint64_t> dropout_seed) {
  const auto& cfg = p.config;
  const Eigen::Index n = in.features.rows();
  std::optional<Rng> rng;
  if (dropout_seed && cfg.dropout_rate > 0) rng.emplace(*dropout_seed);

  const ad::Var feats = t.constant(in.features);
  ad::Var x0 = ad::add_row(t, ad::matmul(t, feats, vars[p.embed_w]), vars[p.embed_b]);
  if (rng) x0 = ad::mul(t, x0, t.constant(dropout_mask(n, cfg.branch_dim, cfg.dropout_rate, *rng)));

  // Message-passing branch: self, mean-of-predecessors and mean-of-successors terms.
  const ad::Var pred = t.constant(in.pred_mean);
  const ad::Var succ = t.constant(in.succ_mean);
  ad::Var h = x0;
  for (const auto& layer : p.gnn) {
    ad::Var self_term = ad::matmul(t, h, vars[layer.self_w]);
    ad::Var pred_term = ad::matmul(t, ad::matmul(t, pred, h), vars[layer.pred_w]);
    ad::Var succ_term = ad::matmul(t, ad::matmul(t, succ, h), vars[layer.succ_w]);
    h = ad::relu(t, ad::add_row(t, ad::add(t, ad::add(t, self_term, pred_term), succ_term), vars[layer.bias]));
  }
  const ad::Var gnn_out = ad::mean_rows(t, h);

  // Attention branch: one multi-head self-attention layer with a feed-forward block.
  const ad::Var q = ad::matmul(t, x0, vars[p.wq]);
  const ad::Var k = ad::matmul(t, x0, vars[p.wk]);
  const ad::Var v = ad::matmul(t, x0, vars[p.wv]);
  const int head_dim = cfg.branch_dim / cfg.attn_heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(head_dim));
  ad::Var heads;
  for (int hd = 0; hd < cfg.attn_heads; ++hd) {
    const Eigen::Index off = hd * head_dim;
    const ad::Var qh = ad::slice_cols(t, q, off, head_dim);
    const ad::Var kh = ad::slice_cols(t, k, off, head_dim);
    const ad::Var vh = ad::slice_cols(t, v, off, head_dim);
    ad::Var attn = ad::softmax_rows(t, ad::scale(t, ad::matmul(t, qh, ad::transpose(t, kh)), inv_sqrt));
    if (rng) attn = ad::mul(t, attn, t.constant(dropout_mask(n, n, cfg.dropout_rate, *rng)));
    const ad::Var out = ad::matmul(t, attn, vh);
    heads = heads.valid() ? ad::concat_cols(t, heads, out) : out;
  }
  const ad::Var mixed = ad::add_row(t, ad::matmul(t, heads, vars[p.wo]), vars[p.bo]);
  const ad::Var y = ad::add(t, x0, mixed);
  const ad::Var z = ad::add(t, y, mlp_forward(t, vars, p.ffn, y));
  const ad::Var attn_out = ad::mean_rows(t, z);

  return ad::concat_cols(t, gnn_out, attn_out);
}

Embedding encode(const ComputeGraph& cg, const EncoderParams& p, std::optional<std::uint64_t> dropout_seed) {
  ad::Tape t;
  const auto vars = bind_constants(t, p.params);
  const ad::Var out = encode_on_tape(t, vars, p, graph_inputs(cg), dropout_seed);
  return {t.value(out).row(0).transpose()};
}

std::vector<Embedding> encode_all(std::span<const ComputeGraph> graphs, const EncoderParams& p) {
  std::vector<Embedding> out;
  out.reserve(graphs.size());
  for (const auto& g : graphs) out.push_back(encode(g, p));
  return out;
}

Projection project(const Embedding& h, const EncoderParams& p) {
  ad::Tape t;
  const auto vars = bind_constants(t, p.params);
  const ad::Var x = t.constant(h.h.transpose());
  const ad::Var z = ad::l2_normalize_rows(t, mlp_forward(t, vars, p.proj, x));
  return {t.value(z).row(0).transpose()};
}

double similarity(const Projection& a, const Projection& b, double tau) { return a.z.dot(b.z) / tau; }

ClLoss cl_loss(const Matrix& z, const Matrix& alpha, double tau) {
  const Eigen::Index n = z.rows();
  ClLoss out;
  out.grad = Matrix::Zero(z.rows(), z.cols());
  if (n < 2) return out;
  const Matrix s = z * z.transpose() / tau;
  Matrix g = Matrix::Zero(n, n);  // dL/ds_ij
  for (Eigen::Index i = 0; i < n; ++i) {
    double peak = -std::numeric_limits<double>::infinity();
    for (Eigen::Index r = 0; r < n; ++r) {
      if (r != i) peak = std::max(peak, s(i, r));
    }
    double denom = 0.0;
    for (Eigen::Index r = 0; r < n; ++r) {
      if (r != i) denom += std::exp(s(i, r) - peak);
    }
    const double lse = peak + std::log(denom);
    for (Eigen::Index l = 0; l < n; ++l) {
      if (l == i) continue;
      const double a = alpha(i, l);
      if (a != 0.0) out.loss -= a * (s(i, l) - lse);
      g(i, l) = std::exp(s(i, l) - lse) * alpha.row(i).sum() - a;
    }
  }
  out.grad = (g + g.transpose()) * z / tau;
  return out;
}

ad::Var cl_loss(ad::Tape& t, ad::Var z, const Matrix& alpha, double tau) {
  ClLoss r = cl_loss(t.value(z), alpha, tau);
  return t.push(Matrix::Constant(1, 1, r.loss), t.requires_grad(z),
                [z, grad = std::move(r.grad)](ad::Tape& tp, const Matrix& g) { tp.accumulate(z, grad * g(0, 0)); });
}

Matrix alpha_matrix(std::span<const SpectralSignature> batch, int sign) {
  const auto n = static_cast<Eigen::Index>(batch.size());
  Matrix a(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto row = alpha_weights(batch, static_cast<std::size_t>(i), sign);
    for (Eigen::Index l = 0; l < n; ++l) a(i, l) = row[static_cast<std::size_t>(l)];
  }
  return a;
}

BatchLoss encoder_batch_loss(const EncoderParams& p, std::span<const GraphInputs> graphs,
                             std::span<const SpectralSignature> sigs, std::span<const double> flops_targets,
                             std::uint64_t dropout_root, bool with_grad) {
  const auto& cfg = p.config;
  const std::size_t n = graphs.size();
  const std::size_t views = 2 * n;
  const auto view_seed = [&](std::size_t k) { return derive_seed(dropout_root, {k}); };

  // Two dropout views per graph: rows [0, n) and [n, 2n).
  Matrix h(static_cast<Eigen::Index>(views), cfg.embed_dim);
  {
    ad::Tape t;
    const auto vars = bind_constants(t, p.params);
    for (std::size_t k = 0; k < views; ++k) {
      const ad::Var out = encode_on_tape(t, vars, p, graphs[k % n], view_seed(k));
      h.row(static_cast<Eigen::Index>(k)) = t.value(out).row(0);
    }
  }
  std::vector<SpectralSignature> view_sigs;
  Matrix targets(static_cast<Eigen::Index>(views), 1);
  for (std::size_t k = 0; k < views; ++k) {
    view_sigs.push_back(sigs[k % n]);
    targets(static_cast<Eigen::Index>(k), 0) = flops_targets[k % n];
  }
  const Matrix alpha = alpha_matrix(view_sigs, cfg.alpha_sign);

  BatchLoss out;
  ad::Tape head;
  const auto vars = with_grad ? bind(head, p.params) : bind_constants(head, p.params);
  const ad::Var hv = with_grad ? head.variable(h) : head.constant(h);
  const ad::Var z = ad::l2_normalize_rows(head, mlp_forward(head, vars, p.proj, hv));
  const ad::Var lcl = cl_loss(head, z, alpha, cfg.temperature);
  out.cl = head.value(lcl)(0, 0);
  ad::Var total = lcl;
  if (cfg.aux_flops_weight > 0) {
    const ad::Var pred = mlp_forward(head, vars, p.aux, hv);
    const ad::Var laux = ad::mse(head, pred, head.constant(targets));
    out.aux = head.value(laux)(0, 0);
    total = ad::add(head, lcl, ad::scale(head, laux, cfg.aux_flops_weight));
  }
  out.loss = head.value(total)(0, 0);
  if (!with_grad) return out;

  head.backward(total);
  out.grads = gradients(head, vars);
  const Matrix dh = head.grad(hv);

  for (std::size_t k = 0; k < views; ++k) {
    ad::Tape t;
    const auto evars = bind(t, p.params);
    const ad::Var emb = encode_on_tape(t, evars, p, graphs[k % n], view_seed(k));
    t.backward(emb, dh.row(static_cast<Eigen::Index>(k)));
    for (std::size_t i = 0; i < evars.size(); ++i) {
      if (i < out.grads.size()) out.grads[i] += t.take_grad(evars[i]);
    }
  }
  return out;
}

TrainedEncoder train_encoder(std::span<const ComputeGraph> dataset, const EncoderConfig& config,
                             const ProgressFn& progress) {
  if (dataset.empty()) throw EmptyInput("encoder training set is empty");
  TrainedEncoder result{EncoderParams::init(config), {}};
  EncoderParams& p = result.params;

  std::vector<GraphInputs> inputs;
  std::vector<SpectralSignature> sigs;
  std::vector<double> targets;
  inputs.reserve(dataset.size());
  for (const auto& g : dataset) {
    inputs.push_back(graph_inputs(g));
    sigs.push_back(signature(g, config.q));
    targets.push_back(flops_target(compute_flops(g)));
  }
  double mean = std::accumulate(targets.begin(), targets.end(), 0.0) / static_cast<double>(targets.size());
  double var = 0.0;
  for (double t : targets) var += (t - mean) * (t - mean);
  double sd = std::sqrt(var / static_cast<double>(targets.size()));
  if (!(sd > 1e-12)) sd = 1.0;
  for (double& t : targets) t = (t - mean) / sd;
  result.log.flops_target_mean = mean;
  result.log.flops_target_std = sd;

  const std::size_t n = dataset.size();
  const std::size_t bs = static_cast<std::size_t>(config.batch_size);
  const auto gather = [&](const std::vector<std::size_t>& idx, std::size_t begin, std::size_t end) {
    std::vector<GraphInputs> gi;
    std::vector<SpectralSignature> gs;
    std::vector<double> gt;
    for (std::size_t k = begin; k < end; ++k) {
      gi.push_back(inputs[idx[k]]);
      gs.push_back(sigs[idx[k]]);
      gt.push_back(targets[idx[k]]);
    }
    return std::tuple{std::move(gi), std::move(gs), std::move(gt)};
  };

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  // Entry 0: loss of the initial parameters.
  {
    double total = 0, cl = 0, aux = 0;
    std::size_t batches = 0;
    for (std::size_t b = 0; b < n; b += bs) {
      auto [gi, gs, gt] = gather(order, b, std::min(n, b + bs));
      const auto l = encoder_batch_loss(p, gi, gs, gt, derive_seed(config.seed, {0, b}), false);
      total += l.loss;
      cl += l.cl;
      aux += l.aux;
      ++batches;
    }
    result.log.epoch_loss.push_back(total / static_cast<double>(batches));
    result.log.epoch_cl.push_back(cl / static_cast<double>(batches));
    result.log.epoch_aux.push_back(aux / static_cast<double>(batches));
  }

  Adam adam(config.learning_rate);
  Rng shuffle_rng(derive_seed(config.seed, {0x73687566}));
  std::size_t global_batch = 0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double total = 0, cl = 0, aux = 0;
    std::size_t batches = 0;
    for (std::size_t b = 0; b < n; b += bs, ++global_batch) {
      auto [gi, gs, gt] = gather(order, b, std::min(n, b + bs));
      auto l = encoder_batch_loss(p, gi, gs, gt,
                                  derive_seed(config.seed, {static_cast<std::uint64_t>(epoch), b}), true);
      if (!std::isfinite(l.loss)) throw NonFiniteLoss(global_batch);
      adam.step(p.params, l.grads);
      total += l.loss;
      cl += l.cl;
      aux += l.aux;
      ++batches;
    }
    result.log.epoch_loss.push_back(total / static_cast<double>(batches));
    result.log.epoch_cl.push_back(cl / static_cast<double>(batches));
    result.log.epoch_aux.push_back(aux / static_cast<double>(batches));
    if (progress) {
      progress("encoder epoch " + std::to_string(epoch) + "/" + std::to_string(config.epochs) +
               " loss " + std::to_string(result.log.epoch_loss.back()));
    }
  }
  if (!p.params.all_finite()) throw NonFiniteLoss(global_batch);
  return result;
}

void save_encoder(TensorContainer& c, const EncoderParams& p) {
  const auto& cfg = p.config;
  c.add_scalar("ENCODER.cfg/embed_dim", cfg.embed_dim);
  c.add_scalar("ENCODER.cfg/branch_dim", cfg.branch_dim);
  c.add_scalar("ENCODER.cfg/proj_dim", cfg.proj_dim);
  c.add_scalar("ENCODER.cfg/gnn_layers", cfg.gnn_layers);
  c.add_scalar("ENCODER.cfg/attn_heads", cfg.attn_heads);
  c.add_scalar("ENCODER.cfg/dropout_rate", cfg.dropout_rate);
  c.add_scalar("ENCODER.cfg/temperature", cfg.temperature);
  c.add_scalar("ENCODER.cfg/batch_size", cfg.batch_size);
  c.add_scalar("ENCODER.cfg/q", cfg.q);
  c.add_scalar("ENCODER.cfg/alpha_sign", cfg.alpha_sign);
  c.add_scalar("ENCODER.cfg/aux_flops_weight", cfg.aux_flops_weight);
  c.add_scalar("ENCODER.cfg/learning_rate", cfg.learning_rate);
  c.add_scalar("ENCODER.cfg/epochs", cfg.epochs);
  c.add_scalar("ENCODER.cfg/seed", static_cast<double>(cfg.seed));
  c.add_params("ENCODER", p.params);
}

EncoderParams load_encoder(const TensorContainer& c) {
  EncoderConfig cfg;
  const auto i = [&](const char* k) { return static_cast<int>(c.scalar(std::string("ENCODER.cfg/") + k)); };
  const auto d = [&](const char* k) { return c.scalar(std::string("ENCODER.cfg/") + k); };
  cfg.embed_dim = i("embed_dim");
  cfg.branch_dim = i("branch_dim");
  cfg.proj_dim = i("proj_dim");
  cfg.gnn_layers = i("gnn_layers");
  cfg.attn_heads = i("attn_heads");
  cfg.dropout_rate = d("dropout_rate");
  cfg.temperature = d("temperature");
  cfg.batch_size = i("batch_size");
  cfg.q = i("q");
  cfg.alpha_sign = i("alpha_sign");
  cfg.aux_flops_weight = d("aux_flops_weight");
  cfg.learning_rate = d("learning_rate");
  cfg.epochs = i("epochs");
  cfg.seed = static_cast<std::uint64_t>(d("seed"));
  EncoderParams p = EncoderParams::init(cfg);
  c.load_params("ENCODER", p.params);
  return p;
}

}  // namespace gennape
