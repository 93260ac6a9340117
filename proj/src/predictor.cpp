// SPDX-FileCopyrightText: Copyright (c) 2026 The gennape Authors
// SPDX-License-Identifier: Apache-2.0

#include "gennape/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "gennape/error.hpp"
#include "gennape/metrics.hpp"
#include "gennape/rng.hpp"

namespace gennape {
namespace {

Matrix gather_rows(const Matrix& m, std::span<const std::size_t> idx) {
  Matrix out(static_cast<Eigen::Index>(idx.size()), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(idx[i]));
  return out;
}

Vector gather(const Vector& v, std::span<const std::size_t> idx) {
  Vector out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(static_cast<Eigen::Index>(idx[i]));
  return out;
}

std::vector<ad::Var> bind_for(ad::Tape& t, const ParamSet& params, bool with_grad) {
  if (with_grad) return bind(t, params);
  std::vector<ad::Var> vars;
  for (std::size_t i = 0; i < params.size(); ++i) vars.push_back(t.constant_ref(params[i]));
  return vars;
}

std::vector<int> mlp_dims(int in, int hidden, int hidden_layers, int out) {
  std::vector<int> dims{in};
  for (int l = 0; l < hidden_layers; ++l) dims.push_back(hidden);
  dims.push_back(out);
  return dims;
}

// Optimizer steps in a run over n items.
std::size_t total_steps(std::size_t n, const TrainConfig& config) {
  const auto bs = static_cast<std::size_t>(std::max(1, config.batch_size));
  return static_cast<std::size_t>(std::max(0, config.epochs)) * ((n + bs - 1) / bs);
}

// Shuffled mini-batches over n items, one list per batch.
std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, int batch_size, Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  std::vector<std::vector<std::size_t>> batches;
  const auto bs = static_cast<std::size_t>(std::max(1, batch_size));
  for (std::size_t b = 0; b < n; b += bs) {
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(b),
                         order.begin() + static_cast<std::ptrdiff_t>(std::min(n, b + bs)));
  }
  return batches;
}

// Sum over heads of U_j * head_j(x); heads produce `out` columns each.
ad::Var gated_heads(ad::Tape& t, const std::vector<ad::Var>& vars, const std::vector<Mlp>& heads, ad::Var x,
                    const Matrix& memberships) {
  ad::Var total;
  for (std::size_t j = 0; j < heads.size(); ++j) {
    const ad::Var f = mlp_forward(t, vars, heads[j], x);
    const ad::Var term = ad::mul_col(t, f, t.constant(memberships.col(static_cast<Eigen::Index>(j))));
    total = total.valid() ? ad::add(t, total, term) : term;
  }
  return total;
}

void save_stats(TensorContainer& c, const std::string& section, const TransformStats& s) {
  c.add_scalar(section + "/mean", s.mean);
  c.add_scalar(section + "/std", s.stddev);
  c.add_scalar(section + "/prune_threshold", s.prune_threshold);
  c.add_scalar(section + "/use_flops", s.use_flops ? 1.0 : 0.0);
}

TransformStats load_stats(const TensorContainer& c, const std::string& section) {
  TransformStats s;
  s.mean = c.scalar(section + "/mean");
  s.stddev = c.scalar(section + "/std");
  s.prune_threshold = c.scalar(section + "/prune_threshold");
  s.use_flops = c.scalar(section + "/use_flops") != 0.0;
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Label transform

double raw_label(double accuracy_pct, double flops_g, bool use_flops) {
  return use_flops ? accuracy_pct / (std::log10(flops_g + 1.0) + 1.0) : accuracy_pct;
}

double transform_label(double accuracy_pct, double flops_g, const TransformStats& stats) {
  return (raw_label(accuracy_pct, flops_g, stats.use_flops) - stats.mean) / stats.stddev;
}

double inverse_transform(double y, double flops_g, const TransformStats& stats) {
  const double raw = y * stats.stddev + stats.mean;
  return stats.use_flops ? raw * (std::log10(flops_g + 1.0) + 1.0) : raw;
}

TransformStats fit_transform_stats(std::span<const double> accuracy_pct, std::span<const double> flops_g,
                                   bool use_flops, double prune_threshold) {
  if (accuracy_pct.size() != flops_g.size()) throw MismatchedLengths("accuracies and FLOPs differ in length");
  std::vector<double> raw;
  for (std::size_t i = 0; i < accuracy_pct.size(); ++i) {
    if (accuracy_pct[i] >= prune_threshold) raw.push_back(raw_label(accuracy_pct[i], flops_g[i], use_flops));
  }
  if (raw.empty()) throw InsufficientSamples("no sample at or above the prune threshold");
  const double n = static_cast<double>(raw.size());
  const double mean = std::accumulate(raw.begin(), raw.end(), 0.0) / n;
  double var = 0.0;
  for (double r : raw) var += (r - mean) * (r - mean);
  const double sd = std::sqrt(var / n);
  if (!(sd > 1e-12)) throw DegenerateVariance("transformed labels are constant");
  return {mean, sd, prune_threshold, use_flops};
}

std::vector<std::size_t> select_finetune_samples(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k > n) throw InsufficientSamples("asked for " + std::to_string(k) + " of " + std::to_string(n) + " samples");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(derive_seed(seed, {0x6674}));
  rng.shuffle(idx);
  idx.resize(k);
  return idx;
}

// ---------------------------------------------------------------------------
// Ensemble

FcmModel single_cluster(int dim) {
  FcmModel m;
  m.clusters = 1;
  m.m = 2.0;
  m.centroids = Matrix::Zero(1, dim);
  m.converged = true;
  return m;
}

EnsembleModel EnsembleModel::init(FcmModel fcm, TransformStats stats, int input_dim, std::uint64_t seed, int hidden,
                                  int hidden_layers) {
  EnsembleModel m;
  m.fcm = std::move(fcm);
  m.stats = stats;
  m.input_dim = input_dim;
  m.hidden = hidden;
  m.hidden_layers = hidden_layers;
  for (int j = 0; j < m.fcm.clusters; ++j) {
    Rng rng(derive_seed(seed, {0x68656164, static_cast<std::uint64_t>(j)}));
    m.heads.push_back(add_mlp(m.params, "head" + std::to_string(j), mlp_dims(input_dim, hidden, hidden_layers, 1), rng));
  }
  return m;
}

Matrix head_outputs(const EnsembleModel& model, const Matrix& features) {
  Matrix out(features.rows(), static_cast<Eigen::Index>(model.heads.size()));
  for (std::size_t j = 0; j < model.heads.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) = mlp_eval(model.params, model.heads[j], features).col(0);
  }
  return out;
}

Vector ensemble_predict(const EnsembleModel& model, const Matrix& features, const Matrix& memberships) {
  const Matrix f = head_outputs(model, features);
  Vector y = Vector::Zero(features.rows());
  for (Eigen::Index j = 0; j < f.cols(); ++j) y += memberships.col(j).cwiseProduct(f.col(j));
  return y;
}

Vector ensemble_predict(const EnsembleModel& model, const Matrix& features) {
  return ensemble_predict(model, features, fcm_memberships(features, model.fcm));
}

Vector ensemble_predict_accuracy(const EnsembleModel& model, const Matrix& features, std::span<const double> flops_g) {
  Vector y = ensemble_predict(model, features);
  for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = inverse_transform(y(i), flops_g[static_cast<std::size_t>(i)], model.stats);
  return y;
}

LossAndGrad ensemble_loss(const EnsembleModel& model, const Matrix& features, const Matrix& memberships,
                          const Vector& targets, bool with_grad) {
  ad::Tape t;
  const auto vars = bind_for(t, model.params, with_grad);
  const ad::Var pred = gated_heads(t, vars, model.heads, t.constant(features), memberships);
  const ad::Var loss = ad::mse(t, pred, t.constant(targets));
  LossAndGrad out{t.value(loss)(0, 0), {}};
  if (with_grad) {
    t.backward(loss);
    out.grads = gradients(t, vars);
  }
  return out;
}

void train_heads(EnsembleModel& model, const Matrix& features, const Vector& targets, const TrainConfig& config) {
  if (features.rows() == 0) throw InsufficientSamples("no training samples");
  const Matrix u = fcm_memberships(features, model.fcm);
  Adam adam(config.learning_rate);
  Rng rng(derive_seed(config.seed, {0x7472}));
  const std::size_t total = total_steps(static_cast<std::size_t>(features.rows()), config);
  std::size_t step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (const auto& batch : epoch_batches(static_cast<std::size_t>(features.rows()), config.batch_size, rng)) {
      if (config.anneal) adam.set_learning_rate(cosine_lr(config.learning_rate, step, total));
      auto lg = ensemble_loss(model, gather_rows(features, batch), gather_rows(u, batch), gather(targets, batch), true);
      if (!std::isfinite(lg.loss)) throw NonFiniteLoss(step);
      adam.step(model.params, lg.grads);
      ++step;
    }
  }
}

EnsembleModel fine_tune(const EnsembleModel& model, const Matrix& features, const Vector& targets,
                        const TrainConfig& config) {
  if (features.rows() < 1) throw InsufficientSamples("fine-tuning needs at least one sample");
  EnsembleModel copy = model;
  train_heads(copy, features, targets, config);
  return copy;
}

// ---------------------------------------------------------------------------
// Pairwise

PairwiseModel PairwiseModel::init(FcmModel fcm, int input_dim, std::uint64_t seed, int hidden, int latent) {
  PairwiseModel m;
  m.fcm = std::move(fcm);
  m.input_dim = input_dim;
  m.hidden = hidden;
  m.latent_dim = latent;
  for (int j = 0; j < m.fcm.clusters; ++j) {
    Rng rng(derive_seed(seed, {0x6c6174, static_cast<std::uint64_t>(j)}));
    m.latent_heads.push_back(add_mlp(m.params, "latent" + std::to_string(j), {input_dim, hidden, latent}, rng));
  }
  Rng rng(derive_seed(seed, {0x636d70}));
  m.comparator = m.params.add("comparator", he_uniform(2 * latent, 1, rng));
  return m;
}

Matrix pairwise_latents(const PairwiseModel& model, const Matrix& features) {
  const Matrix u = fcm_memberships(features, model.fcm);
  Matrix out = Matrix::Zero(features.rows(), model.latent_dim);
  for (std::size_t j = 0; j < model.latent_heads.size(); ++j) {
    const Matrix g = mlp_eval(model.params, model.latent_heads[j], features);
    out += (g.array().colwise() * u.col(static_cast<Eigen::Index>(j)).array()).matrix();
  }
  return out;
}

double pairwise_logit(const PairwiseModel& model, const Matrix& latents, std::size_t a, std::size_t b) {
  const Matrix& w = model.params[model.comparator];
  const auto d = static_cast<Eigen::Index>(model.latent_dim);
  const auto ra = latents.row(static_cast<Eigen::Index>(a));
  const auto rb = latents.row(static_cast<Eigen::Index>(b));
  const double ab = ra.dot(w.col(0).head(d)) + rb.dot(w.col(0).tail(d));
  const double ba = rb.dot(w.col(0).head(d)) + ra.dot(w.col(0).tail(d));
  return ab - ba;
}

double pairwise_score(const PairwiseModel& model, const Vector& a, const Vector& b) {
  Matrix x(2, a.size());
  x.row(0) = a.transpose();
  x.row(1) = b.transpose();
  return pairwise_logit(model, pairwise_latents(model, x), 0, 1);
}

std::vector<double> pairwise_rank_scores(const PairwiseModel& model, const Matrix& features) {
  const Matrix lat = pairwise_latents(model, features);
  const auto order = rank_via_comparator(static_cast<std::size_t>(features.rows()), [&](std::size_t a, std::size_t b) {
    return pairwise_logit(model, lat, a, b) < 0.0;
  });
  return positions_as_scores(order);
}

LossAndGrad pairwise_loss(const PairwiseModel& model, const Matrix& features, const Matrix& memberships,
                          const std::vector<std::pair<std::size_t, std::size_t>>& pairs, bool with_grad) {
  // Latents once per distinct item, then gathered for both sides of each pair.
  std::vector<std::size_t> items;
  for (const auto& [a, b] : pairs) {
    items.push_back(a);
    items.push_back(b);
  }
  std::sort(items.begin(), items.end());
  items.erase(std::unique(items.begin(), items.end()), items.end());
  const auto slot = [&](std::size_t i) {
    return static_cast<Eigen::Index>(std::lower_bound(items.begin(), items.end(), i) - items.begin());
  };
  Matrix sel_a = Matrix::Zero(static_cast<Eigen::Index>(pairs.size()), static_cast<Eigen::Index>(items.size()));
  Matrix sel_b = sel_a;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    sel_a(static_cast<Eigen::Index>(k), slot(pairs[k].first)) = 1.0;
    sel_b(static_cast<Eigen::Index>(k), slot(pairs[k].second)) = 1.0;
  }

  ad::Tape t;
  const auto vars = bind_for(t, model.params, with_grad);
  const ad::Var lat =
      gated_heads(t, vars, model.latent_heads, t.constant(gather_rows(features, items)), gather_rows(memberships, items));
  const ad::Var la = ad::matmul(t, t.constant(sel_a), lat);
  const ad::Var lb = ad::matmul(t, t.constant(sel_b), lat);
  const ad::Var w = vars[model.comparator];
  const ad::Var logits = ad::sub(t, ad::matmul(t, ad::concat_cols(t, la, lb), w),
                                 ad::matmul(t, ad::concat_cols(t, lb, la), w));
  const ad::Var loss = ad::logistic_loss(t, logits, t.constant(Matrix::Ones(static_cast<Eigen::Index>(pairs.size()), 1)));
  LossAndGrad out{t.value(loss)(0, 0), {}};
  if (with_grad) {
    t.backward(loss);
    out.grads = gradients(t, vars);
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> sample_pairs(std::span<const double> labels,
                                                              const PairwiseConfig& config, std::uint64_t seed) {
  // Pairs are oriented so the first item is the better one; label is always 1.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  const std::size_t n = labels.size();
  Rng rng(seed);
  if (n <= config.all_pairs_limit) {
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        if (labels[a] > labels[b]) pairs.emplace_back(a, b);
      }
    }
    rng.shuffle(pairs);
    return pairs;
  }
  const std::size_t want = config.pairs_per_sample * n;
  for (std::size_t tries = 0; pairs.size() < want && tries < 4 * want; ++tries) {
    const std::size_t a = rng.below(n);
    const std::size_t b = rng.below(n);
    if (labels[a] > labels[b]) {
      pairs.emplace_back(a, b);
    } else if (labels[b] > labels[a]) {
      pairs.emplace_back(b, a);
    }
  }
  return pairs;
}

void train_pairwise(PairwiseModel& model, const Matrix& features, std::span<const double> labels,
                    const PairwiseConfig& config) {
  if (features.rows() < 2) throw InsufficientSamples("pairwise training needs at least two samples");
  if (static_cast<std::size_t>(features.rows()) != labels.size()) throw MismatchedLengths("features and labels");
  const Matrix u = fcm_memberships(features, model.fcm);
  Adam adam(config.train.learning_rate);
  const auto bs = static_cast<std::size_t>(std::max(1, config.train.batch_size));
  std::size_t step = 0;
  for (int epoch = 0; epoch < config.train.epochs; ++epoch) {
    const auto pairs = sample_pairs(labels, config, derive_seed(config.train.seed, {static_cast<std::uint64_t>(epoch)}));
    const std::size_t total = static_cast<std::size_t>(config.train.epochs) * ((pairs.size() + bs - 1) / bs);
    for (std::size_t b = 0; b < pairs.size(); b += bs) {
      if (config.train.anneal) adam.set_learning_rate(cosine_lr(config.train.learning_rate, step, total));
      const std::vector<std::pair<std::size_t, std::size_t>> batch(
          pairs.begin() + static_cast<std::ptrdiff_t>(b),
          pairs.begin() + static_cast<std::ptrdiff_t>(std::min(pairs.size(), b + bs)));
      auto lg = pairwise_loss(model, features, u, batch, true);
      if (!std::isfinite(lg.loss)) throw NonFiniteLoss(step);
      adam.step(model.params, lg.grads);
      ++step;
    }
  }
}

PairwiseModel fine_tune(const PairwiseModel& model, const Matrix& features, std::span<const double> labels,
                        const PairwiseConfig& config) {
  if (features.rows() < 1) throw InsufficientSamples("fine-tuning needs at least one sample");
  PairwiseModel copy = model;
  if (features.rows() >= 2) train_pairwise(copy, features, labels, config);
  return copy;
}

// ---------------------------------------------------------------------------
// Baseline message-passing regressor

BaselineGnn BaselineGnn::init(TransformStats stats, std::uint64_t seed, int node_dim, int num_layers, int head_hidden,
                              int head_layers) {
  BaselineGnn m;
  m.stats = stats;
  m.node_dim = node_dim;
  m.head_hidden = head_hidden;
  m.head_layers = head_layers;
  Rng rng(derive_seed(seed, {0x676e6e}));
  m.embed_w = m.params.add("embed.w", he_uniform(kNodeFeatureDim, node_dim, rng));
  m.embed_b = m.params.add("embed.b", Matrix::Zero(1, node_dim));
  for (int l = 0; l < num_layers; ++l) {
    const std::string tag = "mp.l" + std::to_string(l);
    Layer layer{};
    layer.self_w = m.params.add(tag + ".self", he_uniform(node_dim, node_dim, rng) / std::sqrt(3.0));
    layer.pred_w = m.params.add(tag + ".pred", he_uniform(node_dim, node_dim, rng) / std::sqrt(3.0));
    layer.succ_w = m.params.add(tag + ".succ", he_uniform(node_dim, node_dim, rng) / std::sqrt(3.0));
    layer.bias = m.params.add(tag + ".b", Matrix::Zero(1, node_dim));
    m.layers.push_back(layer);
  }
  m.head = add_mlp(m.params, "head", mlp_dims(node_dim, head_hidden, head_layers - 1, 1), rng);
  return m;
}

namespace {

ad::Var baseline_forward(ad::Tape& t, const std::vector<ad::Var>& vars, const BaselineGnn& m, const GraphInputs& in) {
  ad::Var h = ad::add_row(t, ad::matmul(t, t.constant(in.features), vars[m.embed_w]), vars[m.embed_b]);
  const ad::Var pred = t.constant(in.pred_mean);
  const ad::Var succ = t.constant(in.succ_mean);
  for (const auto& layer : m.layers) {
    const ad::Var s = ad::matmul(t, h, vars[layer.self_w]);
    const ad::Var p = ad::matmul(t, ad::matmul(t, pred, h), vars[layer.pred_w]);
    const ad::Var q = ad::matmul(t, ad::matmul(t, succ, h), vars[layer.succ_w]);
    h = ad::relu(t, ad::add_row(t, ad::add(t, ad::add(t, s, p), q), vars[layer.bias]));
  }
  return mlp_forward(t, vars, m.head, ad::mean_rows(t, h));
}

}  // namespace

double baseline_predict(const BaselineGnn& model, const GraphInputs& in) {
  ad::Tape t;
  const auto vars = bind_for(t, model.params, false);
  return t.value(baseline_forward(t, vars, model, in))(0, 0);
}

std::vector<double> baseline_predict(const BaselineGnn& model, std::span<const GraphInputs> graphs) {
  std::vector<double> out;
  out.reserve(graphs.size());
  for (const auto& g : graphs) out.push_back(baseline_predict(model, g));
  return out;
}

LossAndGrad baseline_loss(const BaselineGnn& model, std::span<const GraphInputs> graphs, const Vector& targets,
                          bool with_grad) {
  ad::Tape t;
  const auto vars = bind_for(t, model.params, with_grad);
  ad::Var total;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    const ad::Var p = baseline_forward(t, vars, model, graphs[i]);
    const ad::Var d = ad::sub(t, p, t.constant(Matrix::Constant(1, 1, targets(static_cast<Eigen::Index>(i)))));
    const ad::Var sq = ad::mul(t, d, d);
    total = total.valid() ? ad::add(t, total, sq) : sq;
  }
  const ad::Var loss = ad::scale(t, total, 1.0 / static_cast<double>(graphs.size()));
  LossAndGrad out{t.value(loss)(0, 0), {}};
  if (with_grad) {
    t.backward(loss);
    out.grads = gradients(t, vars);
  }
  return out;
}

void train_baseline_gnn(BaselineGnn& model, std::span<const GraphInputs> graphs, const Vector& targets,
                        const TrainConfig& config) {
  if (graphs.empty()) throw InsufficientSamples("no training graphs");
  Adam adam(config.learning_rate);
  Rng rng(derive_seed(config.seed, {0x626173}));
  const std::size_t total = total_steps(graphs.size(), config);
  std::size_t step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (const auto& batch : epoch_batches(graphs.size(), config.batch_size, rng)) {
      if (config.anneal) adam.set_learning_rate(cosine_lr(config.learning_rate, step, total));
      std::vector<GraphInputs> bg;
      for (std::size_t i : batch) bg.push_back(graphs[i]);
      auto lg = baseline_loss(model, bg, gather(targets, batch), true);
      if (!std::isfinite(lg.loss)) throw NonFiniteLoss(step);
      adam.step(model.params, lg.grads);
      ++step;
    }
  }
}

BaselineGnn fine_tune(const BaselineGnn& model, std::span<const GraphInputs> graphs, const Vector& targets,
                      const TrainConfig& config) {
  if (graphs.empty()) throw InsufficientSamples("fine-tuning needs at least one sample");
  BaselineGnn copy = model;
  train_baseline_gnn(copy, graphs, targets, config);
  return copy;
}

// ---------------------------------------------------------------------------
// Combination

std::vector<double> rank_normalize(std::span<const double> scores) {
  if (scores.size() == 1) return {0.5};
  auto r = average_ranks(scores);
  const double denom = static_cast<double>(scores.size()) - 1.0;
  for (double& v : r) v = (v - 1.0) / denom;
  return r;
}

std::vector<double> kt_softmax_weights(std::span<const double> taus) {
  if (taus.empty()) return {};
  const double peak = *std::max_element(taus.begin(), taus.end());
  std::vector<double> w;
  double sum = 0.0;
  for (double t : taus) {
    w.push_back(std::exp(t - peak));
    sum += w.back();
  }
  for (double& v : w) v /= sum;
  return w;
}

CombineResult gennape_combine(const std::vector<std::vector<double>>& constituents, CombineMode mode,
                              std::span<const std::size_t> ft_indices, std::span<const double> ft_labels) {
  if (constituents.empty()) throw MismatchedLengths("no constituents to combine");
  const std::size_t n = constituents[0].size();
  for (const auto& c : constituents) {
    if (c.size() != n) throw MismatchedLengths("constituent score lists differ in length");
  }
  CombineResult out;
  const auto k = constituents.size();
  if (mode == CombineMode::kZeroShot) {
    out.weights.assign(k, 1.0 / static_cast<double>(k));
  } else {
    if (ft_indices.size() != ft_labels.size()) throw MismatchedLengths("fine-tuning indices and labels");
    if (ft_indices.size() < 2) throw InsufficientSamples("fine-tuned weighting needs at least two labeled samples");
    std::vector<double> taus;
    for (const auto& c : constituents) {
      std::vector<double> sub;
      for (std::size_t i : ft_indices) {
        if (i >= n) throw MismatchedLengths("fine-tuning index out of range");
        sub.push_back(c[i]);
      }
      double tau = 0.0;
      try {
        tau = kendall_tau(sub, ft_labels);
      } catch (const ConstantInput&) {
        tau = 0.0;
      }
      taus.push_back(tau);
    }
    out.weights = kt_softmax_weights(taus);
  }
  out.scores.assign(n, 0.0);
  for (std::size_t c = 0; c < k; ++c) {
    const auto r = rank_normalize(constituents[c]);
    for (std::size_t i = 0; i < n; ++i) out.scores[i] += out.weights[c] * r[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Persistence

void save_ensemble(TensorContainer& c, const EnsembleModel& m) {
  save_fcm(c, m.fcm);
  save_stats(c, "TRANSFORM", m.stats);
  c.add_scalar("HEADS.cfg/input_dim", m.input_dim);
  c.add_scalar("HEADS.cfg/hidden", m.hidden);
  c.add_scalar("HEADS.cfg/hidden_layers", m.hidden_layers);
  c.add_params("HEADS", m.params);
}

EnsembleModel load_ensemble(const TensorContainer& c) {
  EnsembleModel m = EnsembleModel::init(load_fcm(c), load_stats(c, "TRANSFORM"),
                                        static_cast<int>(c.scalar("HEADS.cfg/input_dim")), 0,
                                        static_cast<int>(c.scalar("HEADS.cfg/hidden")),
                                        static_cast<int>(c.scalar("HEADS.cfg/hidden_layers")));
  c.load_params("HEADS", m.params);
  return m;
}

void save_pairwise(TensorContainer& c, const PairwiseModel& m) {
  save_fcm(c, m.fcm);
  c.add_scalar("PAIRWISE.cfg/input_dim", m.input_dim);
  c.add_scalar("PAIRWISE.cfg/hidden", m.hidden);
  c.add_scalar("PAIRWISE.cfg/latent", m.latent_dim);
  c.add_params("PAIRWISE", m.params);
}

PairwiseModel load_pairwise(const TensorContainer& c) {
  PairwiseModel m = PairwiseModel::init(load_fcm(c), static_cast<int>(c.scalar("PAIRWISE.cfg/input_dim")), 0,
                                        static_cast<int>(c.scalar("PAIRWISE.cfg/hidden")),
                                        static_cast<int>(c.scalar("PAIRWISE.cfg/latent")));
  c.load_params("PAIRWISE", m.params);
  return m;
}

void save_baseline(TensorContainer& c, const BaselineGnn& m) {
  save_stats(c, "TRANSFORM", m.stats);
  c.add_scalar("BASELINE.cfg/node_dim", m.node_dim);
  c.add_scalar("BASELINE.cfg/layers", static_cast<double>(m.layers.size()));
  c.add_scalar("BASELINE.cfg/head_hidden", m.head_hidden);
  c.add_scalar("BASELINE.cfg/head_layers", m.head_layers);
  c.add_params("BASELINE", m.params);
}

BaselineGnn load_baseline(const TensorContainer& c) {
  BaselineGnn m = BaselineGnn::init(load_stats(c, "TRANSFORM"), 0, static_cast<int>(c.scalar("BASELINE.cfg/node_dim")),
                                    static_cast<int>(c.scalar("BASELINE.cfg/layers")),
                                    static_cast<int>(c.scalar("BASELINE.cfg/head_hidden")),
                                    static_cast<int>(c.scalar("BASELINE.cfg/head_layers")));
  c.load_params("BASELINE", m.params);
  return m;
}

}  // namespace gennape
