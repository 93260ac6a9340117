// SPDX-FileCopyrightText: Copyright (c) 2026 The gennape Authors
// SPDX-License-Identifier: Apache-2.0

// gennape: command-line driver for the predictor pipeline.
//
//   gennape <command> [options] [--config FILE] [--manifest FILE] [--quiet]
//
// Exit codes: 0 success, 1 usage error, 2 runtime error.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gennape/encoder.hpp"
#include "gennape/error.hpp"
#include "gennape/families.hpp"
#include "gennape/fcm.hpp"
#include "gennape/graph_io.hpp"
#include "gennape/metrics.hpp"
#include "gennape/predictor.hpp"
#include "gennape/search.hpp"
#include "gennape/tensor_io.hpp"
#include "manifest.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace gennape::cli {
namespace {

class ReplayMismatch : public Error {
 public:
  explicit ReplayMismatch(const std::string& what) : Error("ReplayMismatch", what) {}
};

// Runtime usage problems detected after parsing (bad combinations of flags).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

const std::vector<std::string> kVariants = {"cl",       "cl+t",         "cl+fcm",      "cl+fcm+t",
                                            "pairwise", "pairwise+fcm", "baseline-gnn"};

bool g_quiet = false;

void progress(const std::string& line) {
  if (!g_quiet) std::cerr << line << '\n';
}

// ---------------------------------------------------------------------------
// Shared data helpers

struct Labeled {
  std::vector<ComputeGraph> graphs;
  std::vector<double> acc_pct;
  std::vector<double> flops;
};

Labeled load_labeled(const fs::path& path) {
  Labeled out;
  for (auto& r : read_dataset(path)) {
    out.acc_pct.push_back(100.0 * r.accuracy);
    out.flops.push_back(r.flops_g);
    out.graphs.push_back(std::move(r.graph));
  }
  return out;
}

Matrix embed(const std::vector<ComputeGraph>& graphs, const EncoderParams& enc) {
  return embedding_matrix(encode_all(graphs, enc));
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

Matrix rows_of(const Matrix& m, const std::vector<std::size_t>& idx) {
  Matrix out(static_cast<Eigen::Index>(idx.size()), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(idx[i]));
  return out;
}

template <typename T>
std::vector<T> pick(const std::vector<T>& v, const std::vector<std::size_t>& idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(v[i]);
  return out;
}

std::vector<std::size_t> complement(std::size_t n, const std::vector<std::size_t>& idx) {
  std::vector<bool> used(n, false);
  for (std::size_t i : idx) used[i] = true;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (!used[i]) out.push_back(i);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Predictor artifacts

struct Predictor {
  std::string variant;
  std::optional<EncoderParams> encoder;
  std::optional<EnsembleModel> ensemble;
  std::optional<PairwiseModel> pairwise;
  std::optional<BaselineGnn> baseline;

  const FcmModel& fcm() const { return ensemble ? ensemble->fcm : pairwise->fcm; }
};

std::size_t variant_index(const std::string& v) {
  return static_cast<std::size_t>(std::find(kVariants.begin(), kVariants.end(), v) - kVariants.begin());
}

void save_predictor(const fs::path& path, const Predictor& p) {
  TensorContainer c;
  c.add_scalar("MODEL/variant", static_cast<double>(variant_index(p.variant)));
  if (p.encoder) save_encoder(c, *p.encoder);
  if (p.ensemble) save_ensemble(c, *p.ensemble);
  if (p.pairwise) save_pairwise(c, *p.pairwise);
  if (p.baseline) save_baseline(c, *p.baseline);
  save_container(path, c);
}

Predictor load_predictor(const fs::path& path) {
  const auto c = load_container(path);
  if (!c.has("MODEL/variant")) throw ValidationError(path.string() + " is not a predictor container");
  Predictor p;
  const auto idx = static_cast<std::size_t>(c.scalar("MODEL/variant"));
  if (idx >= kVariants.size()) throw ValidationError("unknown predictor variant in " + path.string());
  p.variant = kVariants[idx];
  if (c.has("ENCODER.cfg/embed_dim")) p.encoder = load_encoder(c);
  if (p.variant == "baseline-gnn") {
    p.baseline = load_baseline(c);
  } else if (p.variant.rfind("pairwise", 0) == 0) {
    p.pairwise = load_pairwise(c);
  } else {
    p.ensemble = load_ensemble(c);
  }
  return p;
}

EncoderParams load_encoder_file(const fs::path& path) { return load_encoder(load_container(path)); }

Matrix predictor_features(const Predictor& p, const std::vector<ComputeGraph>& graphs,
                          const std::vector<double>& flops) {
  const auto& red = p.fcm().reducer;
  if (!red) throw ValidationError("predictor has no feature reducer");
  return red->apply(embed(graphs, *p.encoder), flops);
}

std::vector<GraphInputs> inputs_of(const std::vector<ComputeGraph>& graphs) {
  std::vector<GraphInputs> in;
  in.reserve(graphs.size());
  for (const auto& g : graphs) in.push_back(graph_inputs(g));
  return in;
}

/// Predicted accuracy in percent for regressors; mergesort positions for the
/// pairwise models (higher is better in both cases).
std::vector<double> predict_scores(const Predictor& p, const std::vector<ComputeGraph>& graphs,
                                   const std::vector<double>& flops) {
  if (p.baseline) {
    const auto y = baseline_predict(*p.baseline, inputs_of(graphs));
    std::vector<double> out;
    for (std::size_t i = 0; i < y.size(); ++i) out.push_back(inverse_transform(y[i], flops[i], p.baseline->stats));
    return out;
  }
  const Matrix x = predictor_features(p, graphs, flops);
  if (p.pairwise) return pairwise_rank_scores(*p.pairwise, x);
  return to_std(ensemble_predict_accuracy(*p.ensemble, x, flops));
}

/// Fine-tunes a copy of `p` on the given labeled subset.
Predictor fine_tune_predictor(const Predictor& p, const std::vector<ComputeGraph>& graphs,
                              const std::vector<double>& acc, const std::vector<double>& flops,
                              const TrainConfig& tc) {
  Predictor out = p;
  if (p.baseline) {
    Vector y(static_cast<Eigen::Index>(graphs.size()));
    for (std::size_t i = 0; i < graphs.size(); ++i) y[static_cast<Eigen::Index>(i)] = transform_label(acc[i], flops[i], p.baseline->stats);
    out.baseline = fine_tune(*p.baseline, inputs_of(graphs), y, tc);
    return out;
  }
  const Matrix x = predictor_features(p, graphs, flops);
  if (p.pairwise) {
    PairwiseConfig pc;
    pc.train = tc;
    out.pairwise = fine_tune(*p.pairwise, x, acc, pc);
    return out;
  }
  Vector y(static_cast<Eigen::Index>(graphs.size()));
  for (std::size_t i = 0; i < graphs.size(); ++i) y[static_cast<Eigen::Index>(i)] = transform_label(acc[i], flops[i], p.ensemble->stats);
  out.ensemble = fine_tune(*p.ensemble, x, y, tc);
  return out;
}

json report_object(const RankingReport& r) { return json::parse(report_json(r)); }

// ---------------------------------------------------------------------------
// Command options. Every field has a CLI flag of the same spelling.

struct GenOpts {
  std::string family;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::string out;
  std::string oracle;
};

struct SplitOpts {
  std::string data, out_dir;
  std::uint64_t seed = 0;
};

struct EncoderOpts {
  std::string data, out;
  int epochs = 10, batch_size = 128, proj_dim = 32, alpha_sign = 1;
  double lr = 1e-4, tau = 0.05, aux_weight = 1.0, dropout = 0.1;
  std::uint64_t seed = 0;
};

struct EmbedOpts {
  std::string encoder, data, out;
};

struct ClusterOpts {
  std::string encoder, data, val, out;
  int clusters = 16;
  double m = 4.0;
  bool grid = false;
  int grid_epochs = 10;
  std::uint64_t seed = 0;
};

struct TrainOpts {
  std::string variant, encoder, fcm, data, out;
  int epochs = 40, batch_size = 32, hidden = 256, layers = 4;
  double lr = 1e-4;
  std::uint64_t seed = 0;
};

struct FineTuneOpts {
  std::string model, data, out;
  std::size_t samples = 50;
  int epochs = 100, batch_size = 1;
  double lr = 1e-4;
  std::uint64_t seed = 0;
};

struct EvaluateOpts {
  std::string model, data, out;
  int seeds = 0;
  bool fine_tune = false;
  std::size_t samples = 50;
  int epochs = 100;
  double lr = 1e-4;
  std::uint64_t seed = 0;
};

struct SearchOpts {
  std::string model, data, out, best;
  std::size_t index = 0;
  int iterations = 6, top_k = 8, mutations = 16;
  std::string budget;
  std::uint64_t seed = 0;
};

struct CombineOpts {
  std::vector<std::string> models;
  std::string data, out, mode = "zero-shot";
  std::size_t samples = 50;
  std::uint64_t seed = 0;
};

// ---------------------------------------------------------------------------
// Commands. Each returns the input and output files for the run manifest.

struct Io {
  std::vector<fs::path> inputs, outputs;
};

Io run_gen(const GenOpts& o) {
  const auto kind = family_from_name(o.family);
  if (!kind) throw UsageError("--family: unknown family '" + o.family + "'");
  OracleConfig oracle = default_oracle(*kind, o.seed);
  Io io;
  if (!o.oracle.empty()) {
    oracle = oracle_from_json(read_file(o.oracle));
    io.inputs.push_back(o.oracle);
  }
  progress("generating " + std::to_string(o.n) + " " + o.family + " graphs");
  write_dataset(o.out, build_dataset(*kind, o.n, oracle, o.seed));
  const fs::path meta = o.out + ".meta.json";
  write_file(meta, dataset_manifest_json(*kind, o.n, o.seed, oracle) + "\n");
  io.outputs = {o.out, meta};
  return io;
}

Io run_split(const SplitOpts& o) {
  auto records = read_dataset(o.data);
  std::vector<std::size_t> idx(records.size());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(derive_seed(o.seed, {0x73706c6974}));
  rng.shuffle(idx);
  const std::size_t n = records.size();
  const std::size_t n_train = n * 8 / 10;
  const std::size_t n_val = n / 10;
  std::vector<DatasetRecord> train, val, test;
  for (std::size_t k = 0; k < n; ++k) {
    auto& dst = k < n_train ? train : (k < n_train + n_val ? val : test);
    dst.push_back(records[idx[k]]);
  }
  fs::create_directories(o.out_dir);
  const fs::path dir = o.out_dir;
  write_dataset(dir / "train.jsonl", train);
  write_dataset(dir / "val.jsonl", val);
  write_dataset(dir / "test.jsonl", test);
  progress("split " + std::to_string(n) + " records into " + std::to_string(train.size()) + "/" +
           std::to_string(val.size()) + "/" + std::to_string(test.size()));
  return {{o.data}, {dir / "train.jsonl", dir / "val.jsonl", dir / "test.jsonl"}};
}

Io run_train_encoder(const EncoderOpts& o) {
  const auto data = load_labeled(o.data);
  EncoderConfig cfg;
  cfg.epochs = o.epochs;
  cfg.batch_size = o.batch_size;
  cfg.proj_dim = o.proj_dim;
  cfg.alpha_sign = o.alpha_sign;
  cfg.learning_rate = o.lr;
  cfg.temperature = o.tau;
  cfg.aux_flops_weight = o.aux_weight;
  cfg.dropout_rate = o.dropout;
  cfg.seed = o.seed;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto trained = train_encoder(data.graphs, cfg, progress);
  TensorContainer c;
  save_encoder(c, trained.params);
  c.add_vector("ENCODER.log/epoch_loss", trained.log.epoch_loss);
  save_container(o.out, c);
  return {{o.data}, {o.out}};
}

Io run_embed(const EmbedOpts& o) {
  const auto enc = load_encoder_file(o.encoder);
  const auto records = read_dataset(o.data);
  std::string out;
  for (const auto& r : records) {
    const auto e = encode(r.graph, enc);
    json j;
    j["name"] = r.graph.name();
    j["flops_g"] = r.flops_g;
    j["h"] = to_std(e.h);
    out += j.dump() + "\n";
  }
  write_file(o.out, out);
  progress("embedded " + std::to_string(records.size()) + " graphs");
  return {{o.encoder, o.data}, {o.out}};
}

struct TrainFeatures {
  Matrix x;
  FeatureReducer reducer;
};

TrainFeatures train_features(const EncoderParams& enc, const Labeled& data) {
  const Matrix e = embed(data.graphs, enc);
  std::vector<std::string> warnings;
  auto red = fit_reducer(e, data.flops, kPcaComponents, &warnings);
  for (const auto& w : warnings) progress("warning: " + w);
  Matrix x = red.apply(e, data.flops);
  return {std::move(x), std::move(red)};
}

Vector transformed(const Labeled& d, const TransformStats& st) {
  Vector y(static_cast<Eigen::Index>(d.acc_pct.size()));
  for (std::size_t i = 0; i < d.acc_pct.size(); ++i) y[static_cast<Eigen::Index>(i)] = transform_label(d.acc_pct[i], d.flops[i], st);
  return y;
}

Io run_cluster(const ClusterOpts& o) {
  const auto enc = load_encoder_file(o.encoder);
  const auto data = load_labeled(o.data);
  auto tf = train_features(enc, data);
  Io io{{o.encoder, o.data}, {o.out}};
  FcmModel model;
  if (o.grid) {
    if (o.val.empty()) throw UsageError("--grid requires --val");
    io.inputs.push_back(o.val);
    const auto val = load_labeled(o.val);
    const Matrix vx = tf.reducer.apply(embed(val.graphs, enc), val.flops);
    const auto st = fit_transform_stats(data.acc_pct, data.flops);
    const Vector y = transformed(data, st);
    const auto scorer = [&](const FcmModel& m) {
      auto ens = EnsembleModel::init(m, st, static_cast<int>(tf.x.cols()), derive_seed(o.seed, {1}));
      TrainConfig tc;
      tc.epochs = o.grid_epochs;
      tc.seed = derive_seed(o.seed, {2});
      train_heads(ens, tf.x, y, tc);
      const double s = srcc(to_std(ensemble_predict_accuracy(ens, vx, val.flops)), val.acc_pct);
      progress("grid C=" + std::to_string(m.clusters) + " m=" + std::to_string(m.m) + " srcc=" + std::to_string(s));
      return s;
    };
    auto r = grid_search(tf.x, o.seed, scorer);
    progress("grid optimum C=" + std::to_string(r.clusters) + " m=" + std::to_string(r.m));
    model = std::move(r.model);
  } else {
    model = fcm_fit(tf.x, o.clusters, o.m, o.seed);
    progress("fcm converged=" + std::to_string(model.converged) + " after " + std::to_string(model.iterations) +
             " iterations");
  }
  model.reducer = std::move(tf.reducer);
  TensorContainer c;
  save_fcm(c, model);
  save_container(o.out, c);
  return io;
}

Io run_train_predictor(const TrainOpts& o) {
  if (variant_index(o.variant) == kVariants.size()) throw UsageError("--variant: unknown variant '" + o.variant + "'");
  const bool uses_fcm = o.variant.find("+fcm") != std::string::npos;
  if (uses_fcm && o.fcm.empty()) throw UsageError("--variant " + o.variant + " requires --fcm");
  const auto data = load_labeled(o.data);
  Io io{{o.data}, {o.out}};
  TrainConfig tc{o.epochs, o.batch_size, o.lr, derive_seed(o.seed, {0x747263})};
  Predictor p;
  p.variant = o.variant;
  if (o.variant == "baseline-gnn") {
    const auto st = fit_transform_stats(data.acc_pct, data.flops, false);
    p.baseline = BaselineGnn::init(st, derive_seed(o.seed, {0x676e6e}));
    progress("training baseline gnn on " + std::to_string(data.graphs.size()) + " graphs");
    train_baseline_gnn(*p.baseline, inputs_of(data.graphs), transformed(data, st), tc);
    save_predictor(o.out, p);
    return io;
  }
  if (o.encoder.empty()) throw UsageError("--variant " + o.variant + " requires --encoder");
  io.inputs.push_back(o.encoder);
  p.encoder = load_encoder_file(o.encoder);
  Matrix x;
  FcmModel fcm;
  if (uses_fcm) {
    io.inputs.push_back(o.fcm);
    fcm = load_fcm(load_container(o.fcm));
    if (!fcm.reducer) throw ValidationError(o.fcm + " has no feature reducer");
    x = fcm.reducer->apply(embed(data.graphs, *p.encoder), data.flops);
  } else {
    auto tf = train_features(*p.encoder, data);
    fcm = single_cluster(static_cast<int>(tf.x.cols()));
    fcm.reducer = std::move(tf.reducer);
    x = std::move(tf.x);
  }
  const int dim = static_cast<int>(x.cols());
  if (o.variant.rfind("pairwise", 0) == 0) {
    p.pairwise = PairwiseModel::init(std::move(fcm), dim, derive_seed(o.seed, {0x7077}));
    PairwiseConfig pc;
    pc.train = tc;
    progress("training " + o.variant + " on " + std::to_string(data.graphs.size()) + " graphs");
    train_pairwise(*p.pairwise, x, data.acc_pct, pc);
  } else {
    const bool use_flops = o.variant.back() == 't';
    const auto st = fit_transform_stats(data.acc_pct, data.flops, use_flops);
    p.ensemble = EnsembleModel::init(std::move(fcm), st, dim, derive_seed(o.seed, {0x656e73}), o.hidden, o.layers);
    progress("training " + o.variant + " with " + std::to_string(p.ensemble->heads.size()) + " heads on " +
             std::to_string(data.graphs.size()) + " graphs");
    train_heads(*p.ensemble, x, transformed(data, st), tc);
  }
  save_predictor(o.out, p);
  return io;
}

Io run_fine_tune(const FineTuneOpts& o) {
  const auto p = load_predictor(o.model);
  const auto data = load_labeled(o.data);
  const auto idx = select_finetune_samples(data.graphs.size(), o.samples, o.seed);
  TrainConfig tc{o.epochs, o.batch_size, o.lr, derive_seed(o.seed, {0x6674})};
  progress("fine-tuning " + p.variant + " on " + std::to_string(idx.size()) + " samples");
  save_predictor(o.out, fine_tune_predictor(p, pick(data.graphs, idx), pick(data.acc_pct, idx),
                                            pick(data.flops, idx), tc));
  return {{o.model, o.data}, {o.out}};
}

json mean_std(const std::vector<RankingReport>& reports) {
  const auto stats = [](const std::vector<double>& v) {
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    return std::pair{mean, std::sqrt(var / static_cast<double>(v.size()))};
  };
  json mean, sd;
  const auto put = [&](const std::string& key, const std::vector<double>& v, json& m, json& s) {
    const auto [a, b] = stats(v);
    m[key] = a;
    s[key] = b;
  };
  std::vector<double> mae_v, srcc_v, kt_v;
  for (const auto& r : reports) {
    mae_v.push_back(r.mae);
    srcc_v.push_back(r.srcc);
    kt_v.push_back(r.kendall_tau);
  }
  put("mae", mae_v, mean, sd);
  put("srcc", srcc_v, mean, sd);
  put("kt", kt_v, mean, sd);
  mean["ndcg"] = json::object();
  sd["ndcg"] = json::object();
  for (const auto& [k, unused] : reports.front().ndcg) {
    std::vector<double> v;
    for (const auto& r : reports) v.push_back(r.ndcg.at(k));
    json m, s;
    put(std::to_string(k), v, mean["ndcg"], sd["ndcg"]);
  }
  return json{{"mean", mean}, {"std", sd}};
}

Io run_evaluate(const EvaluateOpts& o) {
  const auto p = load_predictor(o.model);
  const auto data = load_labeled(o.data);
  json out;
  if (o.seeds <= 0) {
    if (o.fine_tune) throw UsageError("--fine-tune requires --seeds");
    out = report_object(ranking_report(predict_scores(p, data.graphs, data.flops), data.acc_pct));
  } else {
    std::vector<RankingReport> reports;
    json per_seed = json::array();
    for (int s = 0; s < o.seeds; ++s) {
      const std::uint64_t seed = o.seed + static_cast<std::uint64_t>(s);
      const auto ft = select_finetune_samples(data.graphs.size(), o.samples, seed);
      const auto rest = complement(data.graphs.size(), ft);
      Predictor model = p;
      if (o.fine_tune) {
        TrainConfig tc{o.epochs, 1, o.lr, derive_seed(seed, {0x6674})};
        model = fine_tune_predictor(p, pick(data.graphs, ft), pick(data.acc_pct, ft), pick(data.flops, ft), tc);
      }
      const auto preds = predict_scores(model, pick(data.graphs, rest), pick(data.flops, rest));
      reports.push_back(ranking_report(preds, pick(data.acc_pct, rest)));
      json entry = report_object(reports.back());
      entry["seed"] = seed;
      per_seed.push_back(entry);
      progress("seed " + std::to_string(seed) + " srcc " + std::to_string(reports.back().srcc));
    }
    out = mean_std(reports);
    out["fine_tuned"] = o.fine_tune;
    out["per_seed"] = per_seed;
  }
  write_file(o.out, out.dump(2) + "\n");
  return {{o.model, o.data}, {o.out}};
}

Io run_search(const SearchOpts& o) {
  const auto p = load_predictor(o.model);
  const auto records = read_dataset(o.data);
  if (o.index >= records.size()) throw UsageError("--index: out of range");
  const ComputeGraph& seed = records[o.index].graph;
  SearchConfig cfg;
  cfg.iterations = o.iterations;
  cfg.top_k = o.top_k;
  cfg.mutations_per_parent = o.mutations;
  cfg.seed = o.seed;
  if (o.budget == "seed") {
    cfg.flops_budget = compute_flops(seed);
  } else if (!o.budget.empty()) {
    try {
      cfg.flops_budget = std::stod(o.budget);
    } catch (const std::exception&) {
      throw UsageError("--budget: expected a number or 'seed'");
    }
  }
  Scorer scorer;
  if (p.pairwise) {
    const Matrix ref = predictor_features(p, {seed}, {compute_flops(seed)});
    scorer = [&p, ref](const ComputeGraph& g) {
      const Matrix x = predictor_features(p, {g}, {compute_flops(g)});
      return pairwise_score(*p.pairwise, x.row(0).transpose(), ref.row(0).transpose());
    };
  } else {
    scorer = [&p](const ComputeGraph& g) { return predict_scores(p, {g}, {compute_flops(g)})[0]; };
  }
  const auto r = local_search(seed, scorer, cfg);
  write_file(o.out, trajectory_jsonl(r.trajectory));
  Io io{{o.model, o.data}, {o.out}};
  if (!o.best.empty()) {
    write_file(o.best, serialize(r.best.graph) + "\n");
    io.outputs.push_back(o.best);
  }
  progress("best " + r.best.graph.name() + " score " + std::to_string(r.best.predicted) + " flops_g " +
           std::to_string(r.best.flops));
  return io;
}

Io run_combine(const CombineOpts& o) {
  if (o.models.size() != 6) throw UsageError("--models: expected six predictor files");
  if (o.mode != "zero-shot" && o.mode != "fine-tuned") throw UsageError("--mode: expected zero-shot or fine-tuned");
  const auto data = load_labeled(o.data);
  Io io{{}, {o.out}};
  std::vector<std::vector<double>> scores;
  std::vector<std::string> variants;
  for (const auto& m : o.models) {
    io.inputs.push_back(m);
    const auto p = load_predictor(m);
    variants.push_back(p.variant);
    scores.push_back(predict_scores(p, data.graphs, data.flops));
  }
  io.inputs.push_back(o.data);
  const bool ft = o.mode == "fine-tuned";
  std::vector<std::size_t> ft_idx;
  std::vector<double> ft_labels;
  if (ft) {
    ft_idx = select_finetune_samples(data.graphs.size(), o.samples, o.seed);
    ft_labels = pick(data.acc_pct, ft_idx);
  }
  const auto r = gennape_combine(scores, ft ? CombineMode::kFineTuned : CombineMode::kZeroShot, ft_idx, ft_labels);
  const auto rest = ft ? complement(data.graphs.size(), ft_idx) : [&] {
    std::vector<std::size_t> all(data.graphs.size());
    std::iota(all.begin(), all.end(), 0);
    return all;
  }();
  json out;
  out["mode"] = o.mode;
  out["constituents"] = variants;
  out["weights"] = r.weights;
  out["report"] = report_object(ranking_report(pick(r.scores, rest), pick(data.acc_pct, rest)));
  json items = json::array();
  for (std::size_t i = 0; i < r.scores.size(); ++i) items.push_back({{"name", data.graphs[i].name()}, {"score", r.scores[i]}});
  out["scores"] = items;
  write_file(o.out, out.dump(2) + "\n");
  return io;
}

// ---------------------------------------------------------------------------
// Driver

/// Moves "--config FILE" out of args and splices the file's entries in right
/// after the command name so that explicit flags (parsed later) win.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  // args[1] is the subcommand; file options go right after it.
  for (std::size_t i = 2; i < args.size(); ++i) {
    std::string file;
    std::size_t erase = 0;
    if (args[i] == "--config" && i + 1 < args.size()) {
      file = args[i + 1];
      erase = 2;
    } else if (args[i].rfind("--config=", 0) == 0) {
      file = args[i].substr(9);
      erase = 1;
    }
    if (erase == 0) continue;
    args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + erase));
    const auto extra = config_file_args(file);
    args.insert(args.begin() + 2, extra.begin(), extra.end());
    break;
  }
  return args;
}

json resolved_config(const CLI::App* sub) {
  json cfg = json::object();
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help" || name == "manifest" || name == "quiet") continue;
    if (opt->count() > 0) {
      const auto& res = opt->results();
      if (opt->get_type_size() == 0) {
        cfg[name] = true;
      } else if (opt->get_expected_max() > 1) {
        cfg[name] = res;
      } else {
        cfg[name] = res.back();
      }
    } else {
      cfg[name] = opt->get_default_str();
    }
  }
  return cfg;
}

int run(std::vector<std::string> args) {
  CLI::App app{"gennape: cross-family neural architecture performance prediction"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_help_all_flag("--help-all");

  std::string manifest_path;
  bool quiet = false;
  const auto common = [&](CLI::App* sub) {
    sub->add_flag("--quiet", quiet, "Suppress progress lines");
    sub->add_option("--manifest", manifest_path, "Run manifest path (default: <first output>.manifest.json)");
  };

  GenOpts gen;
  auto* c_gen = app.add_subcommand("gen", "Generate a labeled synthetic family");
  c_gen->add_option("--family", gen.family, "nb101_like | hiaml_like | inception_like | twopath_like")->required();
  c_gen->add_option("--n", gen.n, "Number of graphs")->required()->check(CLI::PositiveNumber);
  c_gen->add_option("--seed", gen.seed, "Root seed")->capture_default_str();
  c_gen->add_option("--out", gen.out, "Dataset JSON-lines path")->required();
  c_gen->add_option("--oracle", gen.oracle, "Oracle configuration JSON (default: family oracle)");
  common(c_gen);

  SplitOpts split;
  auto* c_split = app.add_subcommand("split", "Seeded 80/10/10 split");
  c_split->add_option("--data", split.data)->required();
  c_split->add_option("--seed", split.seed)->capture_default_str();
  c_split->add_option("--out-dir", split.out_dir)->required();
  common(c_split);

  EncoderOpts enc;
  auto* c_enc = app.add_subcommand("train-encoder", "Contrastive encoder pretraining");
  c_enc->add_option("--data", enc.data)->required();
  c_enc->add_option("--out", enc.out)->required();
  c_enc->add_option("--epochs", enc.epochs)->capture_default_str()->check(CLI::NonNegativeNumber);
  c_enc->add_option("--batch-size", enc.batch_size)->capture_default_str()->check(CLI::PositiveNumber);
  c_enc->add_option("--proj-dim", enc.proj_dim)->capture_default_str();
  c_enc->add_option("--alpha-sign", enc.alpha_sign)->capture_default_str();
  c_enc->add_option("--lr", enc.lr)->capture_default_str();
  c_enc->add_option("--tau", enc.tau)->capture_default_str();
  c_enc->add_option("--aux-weight", enc.aux_weight)->capture_default_str();
  c_enc->add_option("--dropout", enc.dropout)->capture_default_str();
  c_enc->add_option("--seed", enc.seed)->capture_default_str();
  common(c_enc);

  EmbedOpts emb;
  auto* c_emb = app.add_subcommand("embed", "Write graph embeddings as JSON lines");
  c_emb->add_option("--encoder", emb.encoder)->required();
  c_emb->add_option("--data", emb.data)->required();
  c_emb->add_option("--out", emb.out)->required();
  common(c_emb);

  ClusterOpts cl;
  auto* c_cl = app.add_subcommand("cluster", "Fit the feature reducer and fuzzy c-means");
  c_cl->add_option("--encoder", cl.encoder)->required();
  c_cl->add_option("--data", cl.data)->required();
  c_cl->add_option("--out", cl.out)->required();
  c_cl->add_option("--clusters", cl.clusters)->capture_default_str();
  c_cl->add_option("--m", cl.m)->capture_default_str();
  c_cl->add_flag("--grid", cl.grid, "Search C in 10..20 and m in {2, 2.5, 3, 3.5, 4}");
  c_cl->add_option("--val", cl.val, "Validation dataset scored during --grid");
  c_cl->add_option("--grid-epochs", cl.grid_epochs)->capture_default_str();
  c_cl->add_option("--seed", cl.seed)->capture_default_str();
  common(c_cl);

  TrainOpts tr;
  auto* c_tr = app.add_subcommand("train-predictor", "Train one predictor variant");
  c_tr->add_option("--variant", tr.variant, "cl | cl+t | cl+fcm | cl+fcm+t | pairwise | pairwise+fcm | baseline-gnn")
      ->required();
  c_tr->add_option("--encoder", tr.encoder);
  c_tr->add_option("--fcm", tr.fcm);
  c_tr->add_option("--data", tr.data)->required();
  c_tr->add_option("--out", tr.out)->required();
  c_tr->add_option("--epochs", tr.epochs)->capture_default_str();
  c_tr->add_option("--batch-size", tr.batch_size)->capture_default_str()->check(CLI::PositiveNumber);
  c_tr->add_option("--hidden", tr.hidden)->capture_default_str();
  c_tr->add_option("--layers", tr.layers)->capture_default_str();
  c_tr->add_option("--lr", tr.lr)->capture_default_str();
  c_tr->add_option("--seed", tr.seed)->capture_default_str();
  common(c_tr);

  FineTuneOpts ft;
  auto* c_ft = app.add_subcommand("fine-tune", "Fine-tune a predictor on labeled target samples");
  c_ft->add_option("--model", ft.model)->required();
  c_ft->add_option("--data", ft.data)->required();
  c_ft->add_option("--out", ft.out)->required();
  c_ft->add_option("--samples", ft.samples)->capture_default_str();
  c_ft->add_option("--epochs", ft.epochs)->capture_default_str();
  c_ft->add_option("--batch-size", ft.batch_size)->capture_default_str()->check(CLI::PositiveNumber);
  c_ft->add_option("--lr", ft.lr)->capture_default_str();
  c_ft->add_option("--seed", ft.seed)->capture_default_str();
  common(c_ft);

  EvaluateOpts ev;
  auto* c_ev = app.add_subcommand("evaluate", "Ranking report of a predictor on a labeled dataset");
  c_ev->add_option("--model", ev.model)->required();
  c_ev->add_option("--data", ev.data)->required();
  c_ev->add_option("--out", ev.out)->required();
  c_ev->add_option("--seeds", ev.seeds, "Seeds to aggregate; each holds out its fine-tuning samples")
      ->capture_default_str();
  c_ev->add_flag("--fine-tune", ev.fine_tune, "Fine-tune on each seed's samples before scoring");
  c_ev->add_option("--samples", ev.samples)->capture_default_str();
  c_ev->add_option("--epochs", ev.epochs)->capture_default_str();
  c_ev->add_option("--lr", ev.lr)->capture_default_str();
  c_ev->add_option("--seed", ev.seed)->capture_default_str();
  common(c_ev);

  SearchOpts se;
  auto* c_se = app.add_subcommand("search", "Predictor-guided local search from a dataset graph");
  c_se->add_option("--model", se.model)->required();
  c_se->add_option("--data", se.data)->required();
  c_se->add_option("--index", se.index)->capture_default_str();
  c_se->add_option("--out", se.out, "Trajectory JSON-lines path")->required();
  c_se->add_option("--best", se.best, "Write the best graph here");
  c_se->add_option("--iterations", se.iterations)->capture_default_str()->check(CLI::PositiveNumber);
  c_se->add_option("--top-k", se.top_k)->capture_default_str()->check(CLI::PositiveNumber);
  c_se->add_option("--mutations", se.mutations)->capture_default_str()->check(CLI::NonNegativeNumber);
  c_se->add_option("--budget", se.budget, "GFLOPs budget, or 'seed' for the seed graph's FLOPs");
  c_se->add_option("--seed", se.seed)->capture_default_str();
  common(c_se);

  CombineOpts co;
  auto* c_co = app.add_subcommand("gennape", "Combine six predictors by rank");
  c_co->add_option("--models", co.models, "Six predictor files")->required()->delimiter(',');
  c_co->add_option("--data", co.data)->required();
  c_co->add_option("--out", co.out)->required();
  c_co->add_option("--mode", co.mode, "zero-shot | fine-tuned")->capture_default_str();
  c_co->add_option("--samples", co.samples)->capture_default_str();
  c_co->add_option("--seed", co.seed)->capture_default_str();
  common(c_co);

  std::string replay_path;
  auto* c_re = app.add_subcommand("replay", "Rerun the command recorded in a manifest");
  c_re->add_option("--manifest", replay_path)->required();
  c_re->add_flag("--quiet", quiet);

  args = expand_config(std::move(args));
  std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  }
  g_quiet = quiet;

  if (c_re->parsed()) {
    const auto m = read_manifest(replay_path);
    for (const auto& [path, digest] : m.inputs) {
      if (!fs::exists(path)) throw ReplayMismatch("input " + path + " is missing");
      if (file_digest(path) != digest) throw ReplayMismatch("input " + path + " changed since the recorded run");
    }
    return run(m.args);
  }

  CLI::App* sub = app.get_subcommands().front();
  Io io;
  try {
    if (sub == c_gen) io = run_gen(gen);
    else if (sub == c_split) io = run_split(split);
    else if (sub == c_enc) io = run_train_encoder(enc);
    else if (sub == c_emb) io = run_embed(emb);
    else if (sub == c_cl) io = run_cluster(cl);
    else if (sub == c_tr) io = run_train_predictor(tr);
    else if (sub == c_ft) io = run_fine_tune(ft);
    else if (sub == c_ev) io = run_evaluate(ev);
    else if (sub == c_se) io = run_search(se);
    else if (sub == c_co) io = run_combine(co);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  }

  RunManifest manifest;
  manifest.command = sub->get_name();
  manifest.args = args;
  manifest.config = resolved_config(sub);
  manifest.inputs = io.inputs;
  manifest.outputs = io.outputs;
  const fs::path mpath = manifest_path.empty() ? fs::path(io.outputs.front().string() + ".manifest.json")
                                               : fs::path(manifest_path);
  write_manifest(mpath, manifest);
  progress("manifest " + mpath.string());
  return 0;
}

}  // namespace
}  // namespace gennape::cli

int main(int argc, char** argv) {
  std::vector<std::string> args{"gennape"};
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  try {
    return gennape::cli::run(args);
  } catch (const gennape::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
