#include <doctest.h>

#include <cmath>
#include <random>

#include "lyrav/contrastive.hpp"
#include "lyrav/errors.hpp"
#include "test_util.hpp"

using namespace lyrav;
using lyrav::testutil::make_song;
using lyrav::testutil::separable_corpus;
using lyrav::testutil::separable_training_config;
using lyrav::testutil::small_encoder_params;
using lyrav::testutil::TempDir;

namespace {

EncoderParams tiny_params(std::size_t F, std::size_t D, std::uint64_t seed = 0) {
  EncoderParams p;
  p.feature_dim = F;
  p.embed_dim = D;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 0.5);
  p.projection.resize(F * D);
  for (double& w : p.projection) w = dist(rng);
  return p;
}

// Independent FNV-1a re-implementation for the bucket oracle.
std::uint64_t oracle_fnv(const std::string& bytes, std::uint64_t seed) {
  std::uint64_t h = 14695981039346656037ull;
  for (int i = 0; i < 8; ++i) {
    h = (h ^ ((seed >> (8 * i)) & 0xff)) * 1099511628211ull;
  }
  for (unsigned char b : bytes) h = (h ^ b) * 1099511628211ull;
  return h;
}

}  // namespace

TEST_CASE("featurize is deterministic and truncates at max_seq_len") {
  const EncoderParams params = small_encoder_params();
  const Song a = make_song("a", {"X"}, {}, {"月光下的歌", "第二行"});
  CHECK(featurize(a, params) == featurize(a, params));

  // a suffix beyond the 128-char window changes nothing
  const std::string base_line(130, 'x');
  const Song base = make_song("b", {"X"}, {}, {base_line});
  const Song padded = make_song("c", {"X"}, {}, {base_line + std::string(50, 'y')});
  CHECK(featurize(padded, params) == featurize(base, params));
}

TEST_CASE("featurize separates texts via hashed n-gram buckets") {
  EncoderParams params = small_encoder_params();
  const auto va = featurize_text("aa", params);
  const auto vb = featurize_text("ab", params);
  CHECK(va != vb);
  // hand-hash oracle: bucket of the bigram "ab" only populated in vb
  const std::size_t buckets = params.feature_dim - kSummaryComponents;
  const std::size_t b_ab = oracle_fnv("ab", params.hash_seed) % buckets;
  CHECK(ngram_bucket("ab", params.hash_seed, buckets) == b_ab);
  const std::size_t b_aa = oracle_fnv("aa", params.hash_seed) % buckets;
  CHECK(va[b_aa] > 0.0);
  CHECK(vb[b_ab] > 0.0);
  if (b_aa != b_ab) CHECK(va[b_ab] == 0.0);
}

TEST_CASE("featurize summary components") {
  EncoderParams params = small_encoder_params();
  const auto v = featurize_text("你好，世界！\n第二行。", params);
  const std::size_t base = params.feature_dim - kSummaryComponents;
  const double n = 11.0;  // codepoints including the newline
  CHECK(v[base + 0] == doctest::Approx(3.0 / n));  // ，！。
  CHECK(v[base + 1] == doctest::Approx(1.0 / n));  // ，
  CHECK(v[base + 2] == doctest::Approx(1.0 / n));  // 。
  CHECK(v[base + 3] == doctest::Approx(1.0 / n));  // ！
  CHECK(v[base + 4] == 0.0);                       // no question mark
  CHECK(v[base + 7] == doctest::Approx(2.0 / n));  // two lines
  for (double x : v) {
    CHECK(std::isfinite(x));
    CHECK(x >= 0.0);
  }
}

TEST_CASE("encode normalizes and is scale invariant") {
  const EncoderParams params = tiny_params(16, 4, 1);
  std::vector<double> f(16, 0.0);
  f[2] = 0.5;
  f[9] = 1.25;
  const auto e = encode(params, f);
  double norm = 0;
  for (double x : e) norm += x * x;
  CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-9));

  std::vector<double> scaled = f;
  for (double& x : scaled) x *= 3.0;
  const auto e3 = encode(params, scaled);
  for (std::size_t i = 0; i < e.size(); ++i) CHECK(e3[i] == doctest::Approx(e[i]).epsilon(1e-12));

  SUBCASE("zero features map to the zero embedding") {
    const auto z = encode(params, std::vector<double>(16, 0.0));
    for (double x : z) CHECK(x == 0.0);
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(encode(params, std::vector<double>(15, 0.0)), ValidationError);
  }
}

TEST_CASE("cosine similarity") {
  const std::vector<double> x = {1.0, 2.0, -1.0};
  CHECK(cosine_similarity(x, x) == doctest::Approx(1.0));
  CHECK(cosine_similarity({1, 0}, {0, 1}) == doctest::Approx(0.0));
  std::vector<double> neg = x;
  for (double& v : neg) v = -v;
  CHECK(cosine_similarity(x, neg) == doctest::Approx(-1.0));
  CHECK(cosine_similarity({0, 0}, {1, 2}) == 0.0);
  CHECK_THROWS_AS(cosine_similarity({1}, {1, 2}), ValidationError);
}

TEST_CASE("contrastive loss formula") {
  CHECK(contrastive_loss(1, 1.0, 0.5) == 0.0);
  CHECK(contrastive_loss(0, 0.3, 0.5) == 0.0);  // d = 0.7 >= margin
  CHECK(contrastive_loss(0, 0.9, 0.5) == doctest::Approx(0.16));
  CHECK(contrastive_loss(1, 0.5, 0.5) == doctest::Approx(0.25));

  // nonnegative everywhere; zero exactly on the stated set
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> sim_dist(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double margin = 0.1 + 1.8 * std::uniform_real_distribution<double>(0, 1)(rng);
    const double sim = sim_dist(rng);
    const double d = 1.0 - sim;
    for (int label : {0, 1}) {
      const double loss = contrastive_loss(label, sim, margin);
      CHECK(loss >= 0.0);
      const bool should_be_zero = label == 1 ? d == 0.0 : d >= margin;
      CHECK((loss == 0.0) == should_be_zero);
    }
  }
}

TEST_CASE("loss gradient is zero when every pair is satisfied") {
  EncoderParams params;
  params.feature_dim = 10;
  params.embed_dim = 2;
  params.projection.assign(20, 0.0);
  params.projection[0 * 2 + 0] = 1.0;  // feature 0 -> dim 0
  params.projection[1 * 2 + 1] = 1.0;  // feature 1 -> dim 1
  std::vector<double> e0(10, 0.0);
  e0[0] = 1.0;
  std::vector<double> e1(10, 0.0);
  e1[1] = 1.0;
  // orthogonal negative (d = 1 >= margin) and identical positive (d = 0)
  const std::vector<PairExample> batch = {{e0, e1, 0}, {e0, e0, 1}};
  CHECK(batch_loss(params, batch) == 0.0);
  for (double g : loss_gradient(params, batch)) CHECK(g == 0.0);
}

TEST_CASE("zero-norm embeddings contribute zero gradient") {
  const EncoderParams params = tiny_params(12, 3, 5);
  const std::vector<double> zero(12, 0.0);
  std::vector<double> f(12, 0.0);
  f[3] = 1.0;
  const std::vector<PairExample> batch = {{zero, f, 1}};
  CHECK(batch_loss(params, batch) == doctest::Approx(1.0));  // sim pinned to 0, d = 1
  for (double g : loss_gradient(params, batch)) CHECK(g == 0.0);
}

TEST_CASE("analytic gradient matches central finite differences") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> feat_dist(0.0, 1.0);
  int done = 0;
  while (done < 25) {
    const std::size_t F = 6 + static_cast<std::size_t>(done % 3);  // 6..8
    const std::size_t D = 2 + static_cast<std::size_t>(done % 3);  // 2..4
    EncoderParams params = tiny_params(F, D, 100 + static_cast<std::uint64_t>(done));
    std::vector<PairExample> batch;
    for (int p = 0; p < 2; ++p) {
      PairExample ex;
      ex.features_a.resize(params.feature_dim);
      ex.features_b.resize(params.feature_dim);
      for (auto& x : ex.features_a) x = feat_dist(rng);
      for (auto& x : ex.features_b) x = feat_dist(rng);
      ex.label = p % 2;
      batch.push_back(std::move(ex));
    }
    // keep clear of the hinge kink so the finite difference is valid
    bool near_kink = false;
    for (const auto& ex : batch) {
      if (ex.label == 1) continue;
      const EncoderParams& pp = params;
      const double sim = cosine_similarity(encode(pp, ex.features_a), encode(pp, ex.features_b));
      if (std::abs(pp.margin - (1.0 - sim)) < 1e-3) near_kink = true;
    }
    if (near_kink) continue;

    const std::vector<double> grad = loss_gradient(params, batch);
    const double h = 1e-6;
    double max_rel = 0.0;
    for (std::size_t i = 0; i < params.projection.size(); ++i) {
      EncoderParams plus = params;
      plus.projection[i] += h;
      EncoderParams minus = params;
      minus.projection[i] -= h;
      const double numeric = (batch_loss(plus, batch) - batch_loss(minus, batch)) / (2 * h);
      const double rel =
          std::abs(grad[i] - numeric) / std::max(1e-6, std::abs(grad[i]) + std::abs(numeric));
      max_rel = std::max(max_rel, rel);
    }
    CHECK(max_rel < 1e-4);
    ++done;
  }
}

TEST_CASE("duplicating a batch keeps the mean gradient") {
  const EncoderParams params = tiny_params(10, 3, 9);
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> feat_dist(0.0, 1.0);
  PairExample ex;
  ex.features_a.resize(10);
  ex.features_b.resize(10);
  for (auto& x : ex.features_a) x = feat_dist(rng);
  for (auto& x : ex.features_b) x = feat_dist(rng);
  ex.label = 1;
  PairExample ex2 = ex;
  ex2.label = 0;
  const auto g1 = loss_gradient(params, {ex, ex2});
  const auto g2 = loss_gradient(params, {ex, ex2, ex, ex2});
  REQUIRE(g1.size() == g2.size());
  for (std::size_t i = 0; i < g1.size(); ++i)
    CHECK(g1[i] == doctest::Approx(g2[i]).epsilon(1e-12));
}

TEST_CASE("training separates the synthetic two-author corpus") {
  const auto corpus = separable_corpus();
  const TrainResult result =
      train(corpus.pairs, corpus.songs, small_encoder_params(), separable_training_config());
  CHECK(result.thresholds.best_validation_macro_f1 >= 0.9);
  CHECK(!result.thresholds.history.empty());
  for (std::size_t i = 1; i < result.thresholds.history.size(); ++i)
    CHECK(result.thresholds.history[i].step > result.thresholds.history[i - 1].step);
  double best = 0;
  for (const auto& e : result.thresholds.history) best = std::max(best, e.macro_f1);
  CHECK(result.thresholds.best_validation_macro_f1 == best);

  SUBCASE("rerun with the same seed is byte-identical") {
    const TrainResult again =
        train(corpus.pairs, corpus.songs, small_encoder_params(), separable_training_config());
    VerifierModel m1{result.params, result.thresholds.threshold,
                     result.thresholds.best_validation_macro_f1, separable_training_config()};
    VerifierModel m2{again.params, again.thresholds.threshold,
                     again.thresholds.best_validation_macro_f1, separable_training_config()};
    CHECK(serialize_model(m1) == serialize_model(m2));
    CHECK(threshold_history_csv(again.thresholds) == threshold_history_csv(result.thresholds));
  }
  SUBCASE("trained model predicts the held-out style split") {
    const auto preds = predict_all(result.params, result.thresholds.threshold, corpus.pairs,
                                   corpus.songs);
    std::vector<int> truth;
    for (const auto& p : corpus.pairs) truth.push_back(p.label);
    int agree = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) agree += preds[i] == truth[i];
    CHECK(agree >= 36);  // 0.9 on the full 40 pairs
  }
}

TEST_CASE("train with zero epochs evaluates the initial parameters once") {
  const auto corpus = separable_corpus();
  TrainingConfig cfg = separable_training_config();
  cfg.epochs = 0;
  const TrainResult result = train(corpus.pairs, corpus.songs, small_encoder_params(), cfg);
  REQUIRE(result.thresholds.history.size() == 1);
  CHECK(result.thresholds.history[0].step == 0);
  CHECK(result.thresholds.best_validation_macro_f1 == result.thresholds.history[0].macro_f1);
}

TEST_CASE("train rejects a single-class validation split") {
  const auto corpus = separable_corpus();
  std::vector<Pair> positives_only;
  for (const auto& p : corpus.pairs)
    if (p.label == 1) positives_only.push_back(p);
  TrainingConfig cfg = separable_training_config();
  CHECK_THROWS_WITH_AS(train(positives_only, corpus.songs, small_encoder_params(), cfg),
                       doctest::Contains("different seed"), ValidationError);
}

TEST_CASE("predict thresholds on cosine similarity") {
  const auto corpus = separable_corpus();
  const EncoderParams params =
      train(corpus.pairs, corpus.songs, small_encoder_params(), separable_training_config())
          .params;
  const std::vector<Song> songs = {corpus.songs[0], corpus.songs[1], corpus.songs[12]};
  Pair same;
  same.a_id = songs[0].id;
  same.b_id = songs[0].id;  // identical song on both sides
  Pair self_like = same;
  self_like.b_id = songs[1].id;

  // identical songs: similarity exactly 1
  CHECK(predict(params, 0.99, same, songs) == 1);
  // threshold -1 always predicts 1
  CHECK(predict(params, -1.0, self_like, songs) == 1);
  // strict boundary semantics: just above the similarity flips to 0
  const double sim = pair_similarity(params, songs[0], songs[1]);
  CHECK(predict(params, sim, self_like, songs) == 1);
  CHECK(predict(params, sim + 1e-6, self_like, songs) == 0);
  CHECK_THROWS_AS(predict(params, 0.0, Pair{"ghost", "x", 0, PairMode::kPerGenre, {}, Split::kTrain},
                          songs),
                  ValidationError);
}

TEST_CASE("model container round-trips byte-identically") {
  TempDir tmp;
  VerifierModel model;
  model.params = tiny_params(16, 4, 11);
  model.threshold = 0.12;
  model.best_validation_macro_f1 = 0.9375;
  model.training = separable_training_config();
  const std::string path = tmp.file("model.json");
  save_model(model, path);
  const VerifierModel loaded = load_model(path);
  CHECK(loaded.params.projection == model.params.projection);
  CHECK(loaded.threshold == model.threshold);
  CHECK(loaded.training.seed == model.training.seed);
  const std::string second = tmp.file("model2.json");
  save_model(loaded, second);
  CHECK(io::read_file(path) == io::read_file(second));

  SUBCASE("foreign containers are rejected") {
    io::write_file(path, R"({"format":"other","version":1})");
    CHECK_THROWS_AS(load_model(path), ValidationError);
  }
}

TEST_CASE("encoder parameter validation") {
  EncoderParams p;
  p.margin = 2.5;
  CHECK_THROWS_AS(validate_encoder_params(p), ValidationError);
  p = EncoderParams{};
  p.projection.assign(7, 0.0);
  CHECK_THROWS_AS(validate_encoder_params(p), ValidationError);
  // featurization needs room for the summary slots
  p = EncoderParams{};
  p.feature_dim = 4;
  CHECK_THROWS_AS(featurize_text("abc", p), ValidationError);
}

TEST_CASE("threshold history csv layout") {
  ThresholdModel t;
  t.history = {{0, -0.5, 0.25}, {50, 0.11, 0.9375}};
  const std::string csv = threshold_history_csv(t);
  CHECK(csv == "step,threshold,macro_f1\n0,-0.5000,0.250000\n50,0.1100,0.937500\n");
}
