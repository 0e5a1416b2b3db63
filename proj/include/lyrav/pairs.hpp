#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lyrav/corpus.hpp"
#include "lyrav/genre.hpp"

namespace lyrav {

enum class PairMode { kPerGenre = 0, kCrossGenre };

std::string_view mode_name(PairMode m);
PairMode parse_mode(std::string_view s);

// An unordered pair of songs with a same-author label. For per-genre pairs
// `genres` holds the single shared tag; for cross-genre pairs it holds the
// tag used for each side (two distinct tags).
struct Pair {
  std::string a_id;
  std::string b_id;
  int label = 0;  // 1 = same author
  PairMode mode = PairMode::kPerGenre;
  std::vector<GenreTag> genres;
  Split split = Split::kTrain;

  bool operator==(const Pair&) const = default;
};

// Targets for pair construction. The genre quota drives the per-genre-mode
// pair count per genre; the mode fraction then sets the cross-genre total.
struct PairSetSpec {
  double per_genre_fraction = 546.0 / 965.0;
  double same_author_fraction_per_genre = 303.0 / 546.0;
  double same_author_fraction_cross_genre = 168.0 / 419.0;
  std::map<GenreTag, int> genre_quota = {
      {GenreTag::kFolkloreTradition, 20}, {GenreTag::kLoveRomance, 232},
      {GenreTag::kLifeReflection, 171},   {GenreTag::kSocietyReality, 59},
      {GenreTag::kLandscapeJourney, 64},
  };
  double tolerance = 0.05;
  std::uint64_t seed = 0;
  // When false, a song never pairs with its own augmented copies.
  bool pair_augmented_with_origin = false;
};

struct AugmentationSpec {
  std::vector<std::string> token_vocabulary = {
      "[SYN0]", "[SYN1]", "[SYN2]", "[SYN3]", "[SYN4]",
      "[SYN5]", "[SYN6]", "[SYN7]", "[SYN8]", "[SYN9]"};
  int insertions_per_song = 1;
  int copies_per_song = 1;
  std::uint64_t seed = 0;
};

struct BuildWarning {
  GenreTag genre;
  std::string family;  // e.g. "per-genre same-author"
  std::string message;
};

struct PairBuildResult {
  std::vector<Pair> pairs;
  std::vector<BuildWarning> warnings;
};

// Song-level random split stratified by genre combination. `train_fraction`
// in [0, 1]; throws ValidationError on fewer than 5 songs.
std::pair<std::vector<Song>, std::vector<Song>> split_songs(const std::vector<Song>& songs,
                                                            double train_fraction,
                                                            std::uint64_t seed);

// Returns the lyricist names shared between the two sets (empty = disjoint).
std::vector<std::string> assert_unseen_authors(const std::vector<Song>& test2,
                                               const std::vector<Song>& train);

bool lyricists_intersect(const Song& a, const Song& b);

// "song#aug2" -> "song"; ids without an augmentation suffix pass through.
std::string base_song_id(std::string_view id);

// Builds the four pair families (per-genre/cross-genre x same/different
// author) under seeded sampling without replacement.
PairBuildResult build_pairs(const std::vector<Song>& songs, const PairSetSpec& spec);

// Token-level augmentation: appends copies with [SYNk] tokens inserted at
// seeded word boundaries. With insertions_per_song == 0 the input is
// returned unchanged.
std::vector<Song> augment_songs(const std::vector<Song>& songs, const AugmentationSpec& spec);

struct GenreRowStats {
  GenreTag genre;
  std::size_t authors = 0;
  std::size_t pairs = 0;
  std::size_t label0 = 0;
  std::size_t label1 = 0;
};

struct TypeRowStats {
  PairMode mode;
  std::size_t same_author = 0;
  std::size_t diff_author = 0;
};

struct PairSetStats {
  std::vector<GenreRowStats> genre_rows;  // five rows, genre order
  std::vector<TypeRowStats> type_rows;    // per-genre row then cross-genre row
  std::size_t total = 0;
};

// A cross-genre pair counts once in each of its two genre rows. Throws on a
// pair that references an unknown song id.
PairSetStats pairset_stats(const std::vector<Pair>& pairs, const std::vector<Song>& songs);

// Text tables with percentages rounded to 2 decimals (display only).
std::string render_pairset_stats(const PairSetStats& stats);

// Pair JSONL: a_id, b_id, label, mode, genres, split.
std::vector<Pair> load_pairs(const std::string& path);
void save_pairs(const std::vector<Pair>& pairs, const std::string& path);
std::vector<Pair> parse_pairs(std::string_view jsonl, std::string_view origin = "pairs");
std::string serialize_pairs(const std::vector<Pair>& pairs);

}  // namespace lyrav
