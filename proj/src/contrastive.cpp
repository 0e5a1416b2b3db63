#include "lyrav/contrastive.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <unordered_map>

#include <json.hpp>

#include "lyrav/errors.hpp"
#include "lyrav/io.hpp"
#include "lyrav/metrics.hpp"
#include "lyrav/text.hpp"

namespace lyrav {

using ordered_json = nlohmann::ordered_json;

void validate_encoder_params(const EncoderParams& params) {
  if (params.feature_dim == 0) throw ValidationError("encoder: feature_dim must be positive");
  if (params.embed_dim == 0) throw ValidationError("encoder: embed_dim must be positive");
  if (!(params.margin > 0.0) || params.margin > 2.0)
    throw ValidationError("encoder: margin must be in (0, 2]");
  if (params.max_seq_len == 0) throw ValidationError("encoder: max_seq_len must be positive");
  if (!params.projection.empty() &&
      params.projection.size() != params.feature_dim * params.embed_dim)
    throw ValidationError("encoder: projection size disagrees with dimensions");
}

std::size_t ngram_bucket(std::string_view ngram_utf8, std::uint64_t hash_seed,
                         std::size_t bucket_count) {
  return static_cast<std::size_t>(text::fnv1a64_seeded(ngram_utf8, hash_seed) % bucket_count);
}

std::vector<double> featurize_text(std::string_view lyric_text, const EncoderParams& params) {
  validate_encoder_params(params);
  if (params.feature_dim <= kSummaryComponents)
    throw ValidationError("featurize: feature_dim must exceed the summary slots");
  const std::string truncated = text::truncate_chars(lyric_text, params.max_seq_len);
  const std::u32string u = text::decode_utf8(truncated);
  const std::size_t buckets = params.feature_dim - kSummaryComponents;
  std::vector<double> vec(params.feature_dim, 0.0);
  if (u.empty()) return vec;
  const double n_chars = static_cast<double>(u.size());

  for (std::size_t n = 1; n <= 3; ++n) {
    if (u.size() < n) break;
    for (std::size_t i = 0; i + n <= u.size(); ++i) {
      const std::string bytes = text::encode_utf8(std::u32string_view(u).substr(i, n));
      vec[ngram_bucket(bytes, params.hash_seed, buckets)] += 1.0;
    }
  }
  for (std::size_t i = 0; i < buckets; ++i) vec[i] /= n_chars;

  double punct = 0, comma = 0, period = 0, exclaim = 0, question = 0;
  for (char32_t c : u) {
    if (text::is_punct(c)) ++punct;
    if (c == U',' || c == U'，') ++comma;
    if (c == U'.' || c == U'。') ++period;
    if (c == U'!' || c == U'！') ++exclaim;
    if (c == U'?' || c == U'？') ++question;
  }
  std::vector<double> line_lens;
  std::size_t run = 0;
  for (char32_t c : u) {
    if (c == U'\n') {
      line_lens.push_back(static_cast<double>(run));
      run = 0;
    } else {
      ++run;
    }
  }
  line_lens.push_back(static_cast<double>(run));
  double mean_len = 0;
  for (double L : line_lens) mean_len += L;
  mean_len /= static_cast<double>(line_lens.size());
  double var = 0;
  for (double L : line_lens) var += (L - mean_len) * (L - mean_len);
  var /= static_cast<double>(line_lens.size());

  const std::size_t base = buckets;
  const double max_len = static_cast<double>(params.max_seq_len);
  vec[base + 0] = punct / n_chars;
  vec[base + 1] = comma / n_chars;
  vec[base + 2] = period / n_chars;
  vec[base + 3] = exclaim / n_chars;
  vec[base + 4] = question / n_chars;
  vec[base + 5] = mean_len / max_len;
  vec[base + 6] = std::sqrt(var) / max_len;
  vec[base + 7] = static_cast<double>(line_lens.size()) / n_chars;
  return vec;
}

std::vector<double> featurize(const Song& song, const EncoderParams& params) {
  if (song.lines.empty()) throw ValidationError("featurize: song " + song.id + " has no lines");
  return featurize_text(song.text(), params);
}

namespace {

// projection^T * features, exploiting feature sparsity.
std::vector<double> project(const EncoderParams& params, const std::vector<double>& features) {
  const std::size_t D = params.embed_dim;
  std::vector<double> out(D, 0.0);
  for (std::size_t f = 0; f < params.feature_dim; ++f) {
    const double x = features[f];
    if (x == 0.0) continue;
    const double* row = params.projection.data() + f * D;
    for (std::size_t d = 0; d < D; ++d) out[d] += row[d] * x;
  }
  return out;
}

double l2_norm(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

std::vector<double> encode(const EncoderParams& params, const std::vector<double>& features) {
  validate_encoder_params(params);
  if (params.projection.empty()) throw ValidationError("encode: projection not initialized");
  if (features.size() != params.feature_dim)
    throw ValidationError("encode: feature dimension mismatch");
  std::vector<double> u = project(params, features);
  const double n = l2_norm(u);
  if (n == 0.0) return u;
  for (double& x : u) x /= n;
  return u;
}

double cosine_similarity(const std::vector<double>& u, const std::vector<double>& v) {
  if (u.size() != v.size()) throw ValidationError("cosine_similarity: dimension mismatch");
  double dot = 0, nu = 0, nv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return dot / (std::sqrt(nu) * std::sqrt(nv));
}

double contrastive_loss(int label, double similarity, double margin) {
  const double d = 1.0 - similarity;
  if (label == 1) return d * d;
  const double slack = margin - d;
  return slack > 0.0 ? slack * slack : 0.0;
}

namespace {

void check_batch(const EncoderParams& params, const std::vector<PairExample>& batch) {
  validate_encoder_params(params);
  if (params.projection.empty()) throw ValidationError("loss: projection not initialized");
  if (batch.empty()) throw ValidationError("loss: empty batch");
  for (const auto& ex : batch)
    if (ex.features_a.size() != params.feature_dim || ex.features_b.size() != params.feature_dim)
      throw ValidationError("loss: feature dimension mismatch");
}

}  // namespace

double batch_loss(const EncoderParams& params, const std::vector<PairExample>& batch) {
  check_batch(params, batch);
  double total = 0;
  for (const auto& ex : batch) {
    std::vector<double> u = project(params, ex.features_a);
    std::vector<double> v = project(params, ex.features_b);
    const double nu = l2_norm(u);
    const double nv = l2_norm(v);
    double sim = 0.0;
    if (nu != 0.0 && nv != 0.0) {
      double dot = 0;
      for (std::size_t d = 0; d < u.size(); ++d) dot += u[d] * v[d];
      sim = dot / (nu * nv);
    }
    total += contrastive_loss(ex.label, sim, params.margin);
  }
  return total / static_cast<double>(batch.size());
}

std::vector<double> loss_gradient(const EncoderParams& params,
                                  const std::vector<PairExample>& batch) {
  check_batch(params, batch);
  const std::size_t D = params.embed_dim;
  std::vector<double> grad(params.feature_dim * D, 0.0);
  for (const auto& ex : batch) {
    std::vector<double> u = project(params, ex.features_a);
    std::vector<double> v = project(params, ex.features_b);
    const double nu = l2_norm(u);
    const double nv = l2_norm(v);
    if (nu == 0.0 || nv == 0.0) continue;  // cosine pinned to 0; flat branch
    double dot = 0;
    for (std::size_t d = 0; d < D; ++d) dot += u[d] * v[d];
    const double sim = dot / (nu * nv);
    const double dist = 1.0 - sim;
    double dloss_dsim;
    if (ex.label == 1) {
      dloss_dsim = -2.0 * dist;
    } else {
      const double slack = params.margin - dist;
      if (slack <= 0.0) continue;
      dloss_dsim = 2.0 * slack;
    }
    // d sim / d u = (v_hat - sim * u_hat) / |u|, symmetrically for v.
    std::vector<double> gu(D), gv(D);
    for (std::size_t d = 0; d < D; ++d) {
      const double uh = u[d] / nu;
      const double vh = v[d] / nv;
      gu[d] = dloss_dsim * (vh - sim * uh) / nu;
      gv[d] = dloss_dsim * (uh - sim * vh) / nv;
    }
    for (std::size_t f = 0; f < params.feature_dim; ++f) {
      const double xa = ex.features_a[f];
      if (xa != 0.0) {
        double* row = grad.data() + f * D;
        for (std::size_t d = 0; d < D; ++d) row[d] += xa * gu[d];
      }
      const double xb = ex.features_b[f];
      if (xb != 0.0) {
        double* row = grad.data() + f * D;
        for (std::size_t d = 0; d < D; ++d) row[d] += xb * gv[d];
      }
    }
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (double& g : grad) g *= inv;
  return grad;
}

namespace {

void validate_training_config(const TrainingConfig& cfg) {
  if (cfg.epochs < 0) throw ValidationError("training: epochs must be >= 0");
  if (!(cfg.learning_rate > 0)) throw ValidationError("training: learning rate must be positive");
  if (cfg.batch_size < 1) throw ValidationError("training: batch size must be >= 1");
  if (cfg.warmup_steps < 0) throw ValidationError("training: warmup steps must be >= 0");
  if (cfg.eval_interval_steps < 1) throw ValidationError("training: eval interval must be >= 1");
  if (!(cfg.validation_fraction > 0.0) || !(cfg.validation_fraction < 1.0))
    throw ValidationError("training: validation fraction must be in (0, 1)");
}

}  // namespace

TrainResult train(const std::vector<Pair>& pairs, const std::vector<Song>& songs,
                  EncoderParams params, const TrainingConfig& config) {
  validate_training_config(config);
  validate_encoder_params(params);
  if (pairs.size() < 2) throw ValidationError("training: need at least 2 pairs");

  std::unordered_map<std::string, const Song*> by_id;
  for (const auto& s : songs) by_id[s.id] = &s;
  std::unordered_map<std::string, std::vector<double>> feature_cache;
  const auto features_of = [&](const std::string& id) -> const std::vector<double>& {
    auto it = feature_cache.find(id);
    if (it != feature_cache.end()) return it->second;
    auto sit = by_id.find(id);
    if (sit == by_id.end()) throw ValidationError("training: unknown song id: " + id);
    return feature_cache.emplace(id, featurize(*sit->second, params)).first->second;
  };

  std::mt19937_64 rng(config.seed);

  if (params.projection.empty()) {
    params.projection.resize(params.feature_dim * params.embed_dim);
    std::normal_distribution<double> init(0.0, 1.0 / std::sqrt(static_cast<double>(params.feature_dim)));
    for (double& w : params.projection) w = init(rng);
  }

  // Pair-level validation split.
  std::vector<std::size_t> perm(pairs.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  auto val_count = static_cast<std::size_t>(
      std::llround(config.validation_fraction * static_cast<double>(pairs.size())));
  val_count = std::clamp<std::size_t>(val_count, 1, pairs.size() - 1);
  const std::vector<std::size_t> val_idx(perm.begin(), perm.begin() + static_cast<long>(val_count));
  std::vector<std::size_t> train_idx(perm.begin() + static_cast<long>(val_count), perm.end());

  const auto has_both_classes = [&](const std::vector<std::size_t>& idx) {
    bool pos = false, neg = false;
    for (std::size_t i : idx) (pairs[i].label == 1 ? pos : neg) = true;
    return pos && neg;
  };
  if (!has_both_classes(val_idx) || !has_both_classes(train_idx))
    throw ValidationError(
        "training: single-class train/validation split; use a different seed or validation "
        "fraction");

  for (const auto& p : pairs) {
    features_of(p.a_id);
    features_of(p.b_id);
  }

  std::vector<int> val_labels;
  val_labels.reserve(val_idx.size());
  for (std::size_t i : val_idx) val_labels.push_back(pairs[i].label);

  ThresholdModel thresholds;
  const auto evaluate = [&](long step) {
    std::unordered_map<std::string, std::vector<double>> embeddings;
    const auto embedding_of = [&](const std::string& id) -> const std::vector<double>& {
      auto it = embeddings.find(id);
      if (it != embeddings.end()) return it->second;
      return embeddings.emplace(id, encode(params, features_of(id))).first->second;
    };
    std::vector<double> sims;
    sims.reserve(val_idx.size());
    for (std::size_t i : val_idx)
      sims.push_back(cosine_similarity(embedding_of(pairs[i].a_id), embedding_of(pairs[i].b_id)));
    const ThresholdSearch best = sweep_threshold(sims, val_labels);
    if (!thresholds.history.empty() && thresholds.history.back().step == step) return;
    thresholds.history.push_back({step, best.threshold, best.macro_f1});
    // Ties go to the latest evaluation so the kept threshold stays aligned
    // with the parameters that are actually returned.
    if (best.macro_f1 >= thresholds.best_validation_macro_f1 || thresholds.history.size() == 1) {
      thresholds.best_validation_macro_f1 = best.macro_f1;
      thresholds.threshold = best.threshold;
    }
  };

  // Adam with linear warmup to the configured rate.
  std::vector<double> m(params.projection.size(), 0.0);
  std::vector<double> v(params.projection.size(), 0.0);
  long step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(train_idx.begin(), train_idx.end(), rng);
    for (std::size_t start = 0; start < train_idx.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end =
          std::min(train_idx.size(), start + static_cast<std::size_t>(config.batch_size));
      std::vector<PairExample> batch;
      batch.reserve(end - start);
      for (std::size_t k = start; k < end; ++k) {
        const Pair& p = pairs[train_idx[k]];
        batch.push_back({features_of(p.a_id), features_of(p.b_id), p.label});
      }
      ++step;
      const double warm =
          config.warmup_steps > 0
              ? std::min(1.0, static_cast<double>(step) / static_cast<double>(config.warmup_steps))
              : 1.0;
      const double lr = config.learning_rate * warm;
      const std::vector<double> grad = loss_gradient(params, batch);
      const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
      for (std::size_t i = 0; i < grad.size(); ++i) {
        m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * grad[i];
        v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * grad[i] * grad[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        params.projection[i] -= lr * mhat / (std::sqrt(vhat) + config.epsilon);
      }
      if (step % config.eval_interval_steps == 0) evaluate(step);
    }
  }
  if (thresholds.history.empty() || thresholds.history.back().step != step) evaluate(step);

  return {std::move(params), std::move(thresholds)};
}

double pair_similarity(const EncoderParams& params, const Song& a, const Song& b) {
  return cosine_similarity(encode(params, featurize(a, params)),
                           encode(params, featurize(b, params)));
}

int predict(const EncoderParams& params, double threshold, const Pair& pair,
            const std::vector<Song>& songs) {
  const Song* a = nullptr;
  const Song* b = nullptr;
  for (const auto& s : songs) {
    if (s.id == pair.a_id) a = &s;
    if (s.id == pair.b_id) b = &s;
  }
  if (!a) throw ValidationError("predict: unknown song id: " + pair.a_id);
  if (!b) throw ValidationError("predict: unknown song id: " + pair.b_id);
  return pair_similarity(params, *a, *b) >= threshold ? 1 : 0;
}

std::vector<int> predict_all(const EncoderParams& params, double threshold,
                             const std::vector<Pair>& pairs, const std::vector<Song>& songs) {
  std::unordered_map<std::string, const Song*> by_id;
  for (const auto& s : songs) by_id[s.id] = &s;
  std::unordered_map<std::string, std::vector<double>> embeddings;
  const auto embedding_of = [&](const std::string& id) -> const std::vector<double>& {
    auto it = embeddings.find(id);
    if (it != embeddings.end()) return it->second;
    auto sit = by_id.find(id);
    if (sit == by_id.end()) throw ValidationError("predict: unknown song id: " + id);
    return embeddings.emplace(id, encode(params, featurize(*sit->second, params))).first->second;
  };
  std::vector<int> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    const double sim = cosine_similarity(embedding_of(p.a_id), embedding_of(p.b_id));
    out.push_back(sim >= threshold ? 1 : 0);
  }
  return out;
}

std::string serialize_model(const VerifierModel& model) {
  validate_encoder_params(model.params);
  if (model.params.projection.empty())
    throw ValidationError("model: projection not initialized");
  ordered_json obj;
  obj["format"] = "lyrav-verifier";
  obj["version"] = 1;
  obj["feature_dim"] = model.params.feature_dim;
  obj["embed_dim"] = model.params.embed_dim;
  obj["hash_seed"] = model.params.hash_seed;
  obj["max_seq_len"] = model.params.max_seq_len;
  obj["margin"] = model.params.margin;
  obj["threshold"] = model.threshold;
  obj["best_validation_macro_f1"] = model.best_validation_macro_f1;
  ordered_json training;
  training["epochs"] = model.training.epochs;
  training["learning_rate"] = model.training.learning_rate;
  training["batch_size"] = model.training.batch_size;
  training["warmup_steps"] = model.training.warmup_steps;
  training["eval_interval_steps"] = model.training.eval_interval_steps;
  training["validation_fraction"] = model.training.validation_fraction;
  training["seed"] = model.training.seed;
  training["beta1"] = model.training.beta1;
  training["beta2"] = model.training.beta2;
  training["epsilon"] = model.training.epsilon;
  obj["training"] = std::move(training);
  obj["projection"] = model.params.projection;
  return obj.dump();
}

VerifierModel parse_model(std::string_view json_text) {
  ordered_json obj = ordered_json::parse(json_text, nullptr, false);
  if (obj.is_discarded() || !obj.is_object()) throw ValidationError("model: not a JSON object");
  if (obj.value("format", "") != "lyrav-verifier")
    throw ValidationError("model: unknown container format");
  if (obj.value("version", 0) != 1) throw ValidationError("model: unsupported version");
  VerifierModel model;
  try {
    model.params.feature_dim = obj.at("feature_dim").get<std::size_t>();
    model.params.embed_dim = obj.at("embed_dim").get<std::size_t>();
    model.params.hash_seed = obj.at("hash_seed").get<std::uint64_t>();
    model.params.max_seq_len = obj.at("max_seq_len").get<std::size_t>();
    model.params.margin = obj.at("margin").get<double>();
    model.threshold = obj.at("threshold").get<double>();
    model.best_validation_macro_f1 = obj.at("best_validation_macro_f1").get<double>();
    const auto& training = obj.at("training");
    model.training.epochs = training.at("epochs").get<int>();
    model.training.learning_rate = training.at("learning_rate").get<double>();
    model.training.batch_size = training.at("batch_size").get<int>();
    model.training.warmup_steps = training.at("warmup_steps").get<int>();
    model.training.eval_interval_steps = training.at("eval_interval_steps").get<int>();
    model.training.validation_fraction = training.at("validation_fraction").get<double>();
    model.training.seed = training.at("seed").get<std::uint64_t>();
    model.training.beta1 = training.at("beta1").get<double>();
    model.training.beta2 = training.at("beta2").get<double>();
    model.training.epsilon = training.at("epsilon").get<double>();
    model.params.projection = obj.at("projection").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("model: ") + e.what());
  }
  validate_encoder_params(model.params);
  if (model.params.projection.size() != model.params.feature_dim * model.params.embed_dim)
    throw ValidationError("model: projection size disagrees with dimensions");
  return model;
}

void save_model(const VerifierModel& model, const std::string& path) {
  io::write_file(path, serialize_model(model));
}

VerifierModel load_model(const std::string& path) { return parse_model(io::read_file(path)); }

std::string threshold_history_csv(const ThresholdModel& model) {
  std::string out = "step,threshold,macro_f1\n";
  for (const auto& e : model.history) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%ld,%.4f,%.6f\n", e.step, e.threshold, e.macro_f1);
    out += buf;
  }
  return out;
}

}  // namespace lyrav
