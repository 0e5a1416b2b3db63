#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "lyrav/corpus.hpp"
#include "lyrav/pairs.hpp"

namespace lyrav {

// Stylometric encoder parameters. Features are hashed character n-gram
// counts (n = 1..3) over the first max_seq_len characters of the lyric
// text, with the last kSummaryComponents slots reserved for punctuation
// frequencies and line-length summaries. All counts are normalized by the
// truncated character count.
struct EncoderParams {
  std::size_t feature_dim = 4096;  // F
  std::size_t embed_dim = 256;     // D
  double margin = 0.5;             // cosine-distance margin, in (0, 2]
  std::uint64_t hash_seed = 0x6c79'7261'7600'0001ull;
  std::size_t max_seq_len = 128;   // characters
  std::vector<double> projection;  // row-major F x D; empty until initialized
};

inline constexpr std::size_t kSummaryComponents = 8;

void validate_encoder_params(const EncoderParams& params);

// Bucket of one n-gram inside the hashed region (feature_dim - summary).
std::size_t ngram_bucket(std::string_view ngram_utf8, std::uint64_t hash_seed,
                         std::size_t bucket_count);

std::vector<double> featurize_text(std::string_view lyric_text, const EncoderParams& params);
std::vector<double> featurize(const Song& song, const EncoderParams& params);

// L2-normalized projection^T * features; an exactly-zero projected vector
// stays the zero vector.
std::vector<double> encode(const EncoderParams& params, const std::vector<double>& features);

// dot(u,v)/(|u||v|); 0 when either norm is 0.
double cosine_similarity(const std::vector<double>& u, const std::vector<double>& v);

// With d = 1 - similarity: label*d^2 + (1-label)*max(0, margin - d)^2.
double contrastive_loss(int label, double similarity, double margin);

struct PairExample {
  std::vector<double> features_a;
  std::vector<double> features_b;
  int label = 0;
};

double batch_loss(const EncoderParams& params, const std::vector<PairExample>& batch);

// Analytic gradient of the mean batch loss w.r.t. the projection matrix,
// row-major F x D. The zero-norm branch contributes zero gradient.
std::vector<double> loss_gradient(const EncoderParams& params,
                                  const std::vector<PairExample>& batch);

struct TrainingConfig {
  int epochs = 2;
  double learning_rate = 2e-5;
  int batch_size = 16;
  int warmup_steps = 100;
  int eval_interval_steps = 50;
  double validation_fraction = 0.2;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct ThresholdHistoryEntry {
  long step = 0;
  double threshold = 0;
  double macro_f1 = 0;
};

struct ThresholdModel {
  double threshold = 0;
  double best_validation_macro_f1 = 0;
  std::vector<ThresholdHistoryEntry> history;
};

struct TrainResult {
  EncoderParams params;
  ThresholdModel thresholds;
};

// Splits pairs 80/20 train/validation by seed, runs seeded mini-batches with
// Adam and linear warmup, and re-selects the best validation threshold every
// eval_interval_steps (and at the end).
TrainResult train(const std::vector<Pair>& pairs, const std::vector<Song>& songs,
                  EncoderParams params, const TrainingConfig& config);

double pair_similarity(const EncoderParams& params, const Song& a, const Song& b);

// 1 iff cosine similarity >= threshold.
int predict(const EncoderParams& params, double threshold, const Pair& pair,
            const std::vector<Song>& songs);
std::vector<int> predict_all(const EncoderParams& params, double threshold,
                             const std::vector<Pair>& pairs, const std::vector<Song>& songs);

struct VerifierModel {
  EncoderParams params;
  double threshold = 0;
  double best_validation_macro_f1 = 0;
  TrainingConfig training;
};

std::string serialize_model(const VerifierModel& model);
VerifierModel parse_model(std::string_view json_text);
void save_model(const VerifierModel& model, const std::string& path);
VerifierModel load_model(const std::string& path);

// CSV with header step,threshold,macro_f1.
std::string threshold_history_csv(const ThresholdModel& model);

}  // namespace lyrav
