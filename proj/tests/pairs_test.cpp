#include <doctest.h>

#include <regex>
#include <set>

#include "lyrav/errors.hpp"
#include "lyrav/pairs.hpp"
#include "pair_checks.hpp"
#include "test_util.hpp"

using namespace lyrav;
using lyrav::testutil::make_song;
using lyrav::testutil::pair_structure_violations;
using lyrav::testutil::random_corpus;
using lyrav::testutil::TempDir;

namespace {

// Ample supply in every family: 15 authors, each writing in two adjacent
// genres, 8 songs per genre.
std::vector<Song> rich_corpus() {
  std::vector<Song> songs;
  for (int a = 0; a < 15; ++a) {
    const auto g1 = static_cast<GenreTag>(a % 5);
    const auto g2 = static_cast<GenreTag>((a + 1) % 5);
    for (int k = 0; k < 16; ++k) {
      const GenreTag g = k < 8 ? g1 : g2;
      songs.push_back(make_song("a" + std::to_string(a) + "s" + std::to_string(k),
                                {"author" + std::to_string(a)}, {g},
                                {"词" + std::to_string(a) + "_" + std::to_string(k)}));
    }
  }
  return songs;
}

}  // namespace

TEST_CASE("split_songs partitions 1000 songs near 80/20") {
  std::mt19937_64 rng(5);
  const auto songs = random_corpus(rng, 1000, 60);
  auto [train, test1] = split_songs(songs, 0.8, 42);
  CHECK(train.size() + test1.size() == 1000);
  // stratification rounding keeps the split within a few songs of 800
  CHECK(train.size() >= 770);
  CHECK(train.size() <= 830);
  std::set<std::string> train_ids;
  for (const auto& s : train) {
    CHECK(s.split == Split::kTrain);
    train_ids.insert(s.id);
  }
  for (const auto& s : test1) {
    CHECK(s.split == Split::kTest1);
    CHECK(!train_ids.count(s.id));
  }

  SUBCASE("same seed reproduces the partition") {
    auto [train2, test2] = split_songs(songs, 0.8, 42);
    CHECK(train2 == train);
    CHECK(test2 == test1);
  }
  SUBCASE("ratio 100:0 sends everything to train") {
    auto [all_train, none] = split_songs(songs, 1.0, 7);
    CHECK(all_train.size() == 1000);
    CHECK(none.empty());
  }
}

TEST_CASE("split_songs rejects tiny corpora") {
  std::mt19937_64 rng(6);
  const auto songs = random_corpus(rng, 4, 2);
  CHECK_THROWS_WITH_AS(split_songs(songs, 0.8, 0), "fewer than 5 songs", ValidationError);
}

TEST_CASE("assert_unseen_authors") {
  const auto train = std::vector<Song>{make_song("t1", {"刘畅"}, {}, {"x"}),
                                       make_song("t2", {"林夕"}, {}, {"y"})};
  SUBCASE("disjoint sets are ok") {
    const auto test2 = std::vector<Song>{make_song("u1", {"方文山"}, {}, {"z"})};
    CHECK(assert_unseen_authors(test2, train).empty());
  }
  SUBCASE("shared lyricist is reported by name") {
    const auto test2 = std::vector<Song>{make_song("u1", {"刘畅", "方文山"}, {}, {"z"})};
    CHECK(assert_unseen_authors(test2, train) == std::vector<std::string>{"刘畅"});
  }
  SUBCASE("empty test2 is vacuously ok") {
    CHECK(assert_unseen_authors({}, train).empty());
  }
}

TEST_CASE("base_song_id strips augmentation suffixes") {
  CHECK(base_song_id("song1") == "song1");
  CHECK(base_song_id("song1#aug0") == "song1");
  CHECK(base_song_id("song1#aug12") == "song1");
  CHECK(base_song_id("song#augx") == "song#augx");
}

TEST_CASE("build_pairs forced single-pair cases") {
  SUBCASE("same author, same single genre") {
    const std::vector<Song> songs = {
        make_song("x", {"A"}, {GenreTag::kLoveRomance}, {"一"}),
        make_song("y", {"A"}, {GenreTag::kLoveRomance}, {"二"})};
    const auto built = build_pairs(songs, PairSetSpec{});
    REQUIRE(built.pairs.size() == 1);
    CHECK(built.pairs[0].mode == PairMode::kPerGenre);
    CHECK(built.pairs[0].label == 1);
    CHECK(built.pairs[0].genres == std::vector<GenreTag>{GenreTag::kLoveRomance});
  }
  SUBCASE("different authors, disjoint genres") {
    const std::vector<Song> songs = {
        make_song("x", {"A"}, {GenreTag::kFolkloreTradition}, {"一"}),
        make_song("y", {"B"}, {GenreTag::kLoveRomance}, {"二"})};
    const auto built = build_pairs(songs, PairSetSpec{});
    REQUIRE(built.pairs.size() == 1);
    CHECK(built.pairs[0].mode == PairMode::kCrossGenre);
    CHECK(built.pairs[0].label == 0);
    CHECK(built.pairs[0].genres.size() == 2);
  }
}

TEST_CASE("build_pairs approaches the default targets on an ample corpus") {
  const auto songs = rich_corpus();
  PairSetSpec spec;
  spec.seed = 3;
  const auto built = build_pairs(songs, spec);
  CHECK(pair_structure_violations(built.pairs, songs).empty());

  std::size_t per_genre = 0, cross = 0, per_same = 0, cross_same = 0;
  for (const auto& p : built.pairs) {
    if (p.mode == PairMode::kPerGenre) {
      ++per_genre;
      per_same += static_cast<std::size_t>(p.label);
    } else {
      ++cross;
      cross_same += static_cast<std::size_t>(p.label);
    }
  }
  CHECK(per_genre == 546);
  CHECK(cross == 419);
  CHECK(built.pairs.size() == 965);
  CHECK(std::abs(static_cast<double>(per_same) / per_genre - 0.5549) < 0.02);
  CHECK(std::abs(static_cast<double>(cross_same) / cross - 0.4010) < 0.02);

  // every genre hosts all four families
  for (GenreTag g : all_genres()) {
    int families[2][2] = {};
    for (const auto& p : built.pairs) {
      for (GenreTag pg : p.genres)
        if (pg == g) families[p.mode == PairMode::kCrossGenre][p.label] = 1;
    }
    CHECK(families[0][0] == 1);
    CHECK(families[0][1] == 1);
    CHECK(families[1][0] == 1);
    CHECK(families[1][1] == 1);
  }

  SUBCASE("same seed gives byte-identical output") {
    const auto again = build_pairs(songs, spec);
    CHECK(serialize_pairs(again.pairs) == serialize_pairs(built.pairs));
  }
}

TEST_CASE("build_pairs warns when a family has no supply") {
  // Two different authors sharing one genre: no same-author supply anywhere,
  // no cross-genre supply at all.
  const std::vector<Song> songs = {
      make_song("x", {"A"}, {GenreTag::kFolkloreTradition}, {"一"}),
      make_song("y", {"B"}, {GenreTag::kFolkloreTradition}, {"二"})};
  const auto built = build_pairs(songs, PairSetSpec{});
  REQUIRE(built.pairs.size() == 1);
  CHECK(built.pairs[0].label == 0);
  bool warned_same = false;
  for (const auto& w : built.warnings)
    if (w.genre == GenreTag::kFolkloreTradition && w.family == "per-genre same-author")
      warned_same = true;
  CHECK(warned_same);
}

TEST_CASE("build_pairs structural suite over random corpora") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> n_songs_dist(10, 120);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = n_songs_dist(rng);
    const auto songs = random_corpus(rng, n, std::max(2, n / 6));
    PairSetSpec spec;
    spec.seed = static_cast<std::uint64_t>(trial);
    const auto built = build_pairs(songs, spec);
    const auto violations = pair_structure_violations(built.pairs, songs);
    if (!violations.empty()) {
      CAPTURE(violations.front());
      CHECK(violations.empty());
    }
  }
}

TEST_CASE("build_pairs never pairs augmented copies with their origin") {
  std::mt19937_64 rng(17);
  auto songs = random_corpus(rng, 30, 6);
  AugmentationSpec aug;
  aug.insertions_per_song = 2;
  aug.seed = 4;
  songs = augment_songs(songs, aug);
  PairSetSpec spec;
  spec.seed = 8;
  const auto built = build_pairs(songs, spec);
  CHECK(pair_structure_violations(built.pairs, songs).empty());
}

TEST_CASE("augment_songs identity when no insertions requested") {
  std::mt19937_64 rng(2);
  const auto songs = random_corpus(rng, 4, 2);
  AugmentationSpec spec;
  spec.insertions_per_song = 0;
  CHECK(augment_songs(songs, spec) == songs);
}

TEST_CASE("augment_songs inserts removable tokens") {
  const std::vector<Song> songs = {
      make_song("s", {"A"}, {GenreTag::kLoveRomance}, {"月光下的歌词", "第二行 words here"})};
  AugmentationSpec spec;
  spec.insertions_per_song = 1;
  spec.seed = 9;
  const auto out = augment_songs(songs, spec);
  REQUIRE(out.size() == 2);
  CHECK(out[0] == songs[0]);
  const Song& aug = out[1];
  CHECK(aug.id == "s#aug0");
  CHECK(aug.lyricists == songs[0].lyricists);
  CHECK(aug.genres == songs[0].genres);
  CHECK(aug.lines.size() == songs[0].lines.size());

  static const std::regex token_re(R"(\[SYN\d+\])");
  const std::string joined = aug.text();
  auto begin = std::sregex_iterator(joined.begin(), joined.end(), token_re);
  const auto count = std::distance(begin, std::sregex_iterator());
  CHECK(count == 1);
  // removing the token restores the original text
  std::smatch match;
  REQUIRE(std::regex_search(joined, match, token_re));
  std::string restored = joined;
  restored.erase(static_cast<std::size_t>(match.position(0)),
                 static_cast<std::size_t>(match.length(0)));
  CHECK(restored == songs[0].text());

  SUBCASE("same seed reproduces the augmentation") {
    CHECK(augment_songs(songs, spec) == out);
  }
  SUBCASE("tokens never split an ascii word") {
    AugmentationSpec heavy;
    heavy.insertions_per_song = 30;
    heavy.seed = 5;
    const auto many = augment_songs(songs, heavy);
    const std::string t = many[1].text();
    CHECK(t.find("wo[") == std::string::npos);  // inside "words"
    CHECK(t.find("]rds") == std::string::npos);
  }
}

TEST_CASE("augment_songs validates the token vocabulary") {
  AugmentationSpec spec;
  spec.token_vocabulary = {"<SYN0>"};
  CHECK_THROWS_AS(augment_songs({}, spec), ValidationError);
}

TEST_CASE("pairset_stats matches the reference type-table shape") {
  // 14 same / 20 diff in each mode.
  std::vector<Song> songs = {
      make_song("a", {"A"}, {GenreTag::kFolkloreTradition}, {"一"}),
      make_song("b", {"A"}, {GenreTag::kFolkloreTradition}, {"二"}),
      make_song("c", {"B"}, {GenreTag::kLoveRomance}, {"三"}),
  };
  std::vector<Pair> pairs;
  for (int i = 0; i < 34; ++i) {
    Pair p;
    p.a_id = "a";
    p.b_id = i % 2 ? "b" : "c";
    p.label = i < 14 ? 1 : 0;
    p.mode = PairMode::kPerGenre;
    p.genres = {GenreTag::kFolkloreTradition};
    pairs.push_back(p);
    Pair q = p;
    q.mode = PairMode::kCrossGenre;
    q.genres = {GenreTag::kFolkloreTradition, GenreTag::kLoveRomance};
    pairs.push_back(q);
  }
  const auto stats = pairset_stats(pairs, songs);
  CHECK(stats.total == 68);
  const std::string table = render_pairset_stats(stats);
  CHECK(table.find("| Per-genre | 14 (41.18%) | 20 (58.82%) | 34 (50.00%) |") != std::string::npos);
  CHECK(table.find("| Cross-genre | 14 (41.18%) | 20 (58.82%) | 34 (50.00%) |") !=
        std::string::npos);
}

TEST_CASE("pairset_stats edge cases") {
  SUBCASE("empty pair list renders an all-zero table") {
    const auto stats = pairset_stats({}, {});
    CHECK(stats.total == 0);
    for (const auto& row : stats.genre_rows) CHECK(row.pairs == 0);
    CHECK(render_pairset_stats(stats).find("| 0 (0.00%) | 0 (0.00%) | 0 (0.00%) |") !=
          std::string::npos);
  }
  SUBCASE("single per-genre pair shows a 100% label-1 row") {
    std::vector<Song> songs = {make_song("a", {"A"}, {GenreTag::kFolkloreTradition}, {"一"}),
                               make_song("b", {"A"}, {GenreTag::kFolkloreTradition}, {"二"})};
    Pair p;
    p.a_id = "a";
    p.b_id = "b";
    p.label = 1;
    p.mode = PairMode::kPerGenre;
    p.genres = {GenreTag::kFolkloreTradition};
    const auto stats = pairset_stats({p}, songs);
    CHECK(stats.genre_rows[0].pairs == 1);
    CHECK(stats.genre_rows[0].label1 == 1);
    CHECK(stats.genre_rows[0].authors == 1);
    CHECK(render_pairset_stats(stats).find("| Folklore & Tradition | 1 | 1 | 0 | 1 | 0.00% | "
                                           "100.00% | 100.00% |") != std::string::npos);
  }
  SUBCASE("dangling reference is an error") {
    Pair p;
    p.a_id = "ghost";
    p.b_id = "b";
    p.label = 0;
    p.mode = PairMode::kPerGenre;
    p.genres = {GenreTag::kLoveRomance};
    CHECK_THROWS_WITH_AS(pairset_stats({p}, {}), doctest::Contains("ghost"), ValidationError);
  }
}

TEST_CASE("cross-genre pairs count in both genre rows") {
  std::vector<Song> songs = {
      make_song("a", {"A"}, {GenreTag::kFolkloreTradition}, {"一"}),
      make_song("b", {"B"}, {GenreTag::kLoveRomance}, {"二"}),
  };
  Pair p;
  p.a_id = "a";
  p.b_id = "b";
  p.label = 0;
  p.mode = PairMode::kCrossGenre;
  p.genres = {GenreTag::kFolkloreTradition, GenreTag::kLoveRomance};
  const auto stats = pairset_stats({p}, songs);
  CHECK(stats.genre_rows[0].pairs == 1);
  CHECK(stats.genre_rows[1].pairs == 1);
  CHECK(stats.total == 1);
}

TEST_CASE("pairs JSONL round-trip and validation") {
  TempDir tmp;
  std::vector<Pair> pairs;
  Pair p;
  p.a_id = "x";
  p.b_id = "y";
  p.label = 1;
  p.mode = PairMode::kPerGenre;
  p.genres = {GenreTag::kLifeReflection};
  p.split = Split::kTrain;
  pairs.push_back(p);
  Pair q;
  q.a_id = "x";
  q.b_id = "z";
  q.label = 0;
  q.mode = PairMode::kCrossGenre;
  q.genres = {GenreTag::kLoveRomance, GenreTag::kSocietyReality};
  q.split = Split::kTest2;
  pairs.push_back(q);

  const std::string path = tmp.file("pairs.jsonl");
  save_pairs(pairs, path);
  const auto loaded = load_pairs(path);
  CHECK(loaded == pairs);
  const std::string second = tmp.file("pairs2.jsonl");
  save_pairs(loaded, second);
  CHECK(io::read_file(path) == io::read_file(second));

  SUBCASE("unknown mode string") {
    io::write_file(path,
                   R"({"a_id":"x","b_id":"y","label":1,"mode":"sideways","genres":["Love & Romance"],"split":"train"})"
                   "\n");
    CHECK_THROWS_WITH_AS(load_pairs(path), doctest::Contains("unknown mode"), ValidationError);
  }
  SUBCASE("duplicate unordered pair") {
    io::write_file(path,
                   R"({"a_id":"x","b_id":"y","label":1,"mode":"per-genre","genres":["Love & Romance"],"split":"train"})"
                   "\n"
                   R"({"a_id":"y","b_id":"x","label":1,"mode":"per-genre","genres":["Love & Romance"],"split":"train"})"
                   "\n");
    CHECK_THROWS_WITH_AS(load_pairs(path), doctest::Contains("duplicate pair"), ValidationError);
  }
  SUBCASE("self pair") {
    io::write_file(path,
                   R"({"a_id":"x","b_id":"x","label":1,"mode":"per-genre","genres":["Love & Romance"],"split":"train"})"
                   "\n");
    CHECK_THROWS_WITH_AS(load_pairs(path), doctest::Contains("self pair"), ValidationError);
  }
}
