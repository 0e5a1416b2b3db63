#include "lyrav/pairs.hpp"

#include <algorithm>
#include <random>
#include <regex>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "lyrav/errors.hpp"
#include "lyrav/io.hpp"
#include "lyrav/text.hpp"

namespace lyrav {

using ordered_json = nlohmann::ordered_json;

std::string_view mode_name(PairMode m) {
  return m == PairMode::kPerGenre ? "per-genre" : "cross-genre";
}

PairMode parse_mode(std::string_view s) {
  if (s == "per-genre") return PairMode::kPerGenre;
  if (s == "cross-genre") return PairMode::kCrossGenre;
  throw ValidationError("unknown mode: " + std::string(s));
}

std::pair<std::vector<Song>, std::vector<Song>> split_songs(const std::vector<Song>& songs,
                                                            double train_fraction,
                                                            std::uint64_t seed) {
  if (songs.size() < 5) throw ValidationError("fewer than 5 songs");
  if (train_fraction < 0.0 || train_fraction > 1.0)
    throw ValidationError("train fraction must be in [0, 1]");

  // Strata keyed by the song's genre combination.
  std::map<std::string, std::vector<const Song*>> strata;
  for (const auto& s : songs) {
    std::vector<int> tags;
    for (GenreTag g : s.genres) tags.push_back(static_cast<int>(g));
    std::sort(tags.begin(), tags.end());
    std::string key;
    for (int t : tags) key += static_cast<char>('0' + t);
    strata[key].push_back(&s);
  }

  std::mt19937_64 rng(seed);
  std::vector<Song> train;
  std::vector<Song> test1;
  for (auto& [key, members] : strata) {
    std::sort(members.begin(), members.end(),
              [](const Song* a, const Song* b) { return a->id < b->id; });
    std::shuffle(members.begin(), members.end(), rng);
    const auto n_train = static_cast<std::size_t>(
        std::llround(train_fraction * static_cast<double>(members.size())));
    for (std::size_t i = 0; i < members.size(); ++i) {
      Song s = *members[i];
      s.split = i < n_train ? Split::kTrain : Split::kTest1;
      (i < n_train ? train : test1).push_back(std::move(s));
    }
  }
  return {std::move(train), std::move(test1)};
}

std::vector<std::string> assert_unseen_authors(const std::vector<Song>& test2,
                                               const std::vector<Song>& train) {
  std::set<std::string> train_names;
  for (const auto& s : train) train_names.insert(s.lyricists.begin(), s.lyricists.end());
  std::set<std::string> violations;
  for (const auto& s : test2)
    for (const auto& n : s.lyricists)
      if (train_names.count(n)) violations.insert(n);
  return {violations.begin(), violations.end()};
}

bool lyricists_intersect(const Song& a, const Song& b) {
  for (const auto& x : a.lyricists)
    for (const auto& y : b.lyricists)
      if (x == y) return true;
  return false;
}

std::string base_song_id(std::string_view id) {
  const std::size_t pos = id.rfind("#aug");
  if (pos == std::string_view::npos) return std::string(id);
  std::string_view suffix = id.substr(pos + 4);
  if (suffix.empty()) return std::string(id);
  for (char c : suffix)
    if (c < '0' || c > '9') return std::string(id);
  return std::string(id.substr(0, pos));
}

namespace {

struct PerCand {
  std::size_t i, j;
};

struct CrossCand {
  std::size_t i, j;
  std::vector<std::pair<GenreTag, GenreTag>> combos;  // (tag of i, tag of j)
};

std::string pair_key(const std::string& a, const std::string& b) {
  return a < b ? a + '\x1f' + b : b + '\x1f' + a;
}

const char* family_name(PairMode mode, int label) {
  if (mode == PairMode::kPerGenre) return label ? "per-genre same-author" : "per-genre different-author";
  return label ? "cross-genre same-author" : "cross-genre different-author";
}

}  // namespace

PairBuildResult build_pairs(const std::vector<Song>& songs, const PairSetSpec& spec) {
  const auto fraction_ok = [](double f) { return f > 0.0 && f < 1.0; };
  if (!fraction_ok(spec.per_genre_fraction) ||
      !fraction_ok(spec.same_author_fraction_per_genre) ||
      !fraction_ok(spec.same_author_fraction_cross_genre))
    throw ValidationError("pair spec: fractions must lie in (0, 1)");
  if (spec.tolerance < 0.0) throw ValidationError("pair spec: tolerance must be >= 0");
  for (const auto& [g, q] : spec.genre_quota)
    if (q < 0) throw ValidationError("pair spec: quotas must be >= 0");
  for (const auto& s : songs)
    if (s.genres.empty()) throw ValidationError("song " + s.id + " has no genre tags");

  std::vector<const Song*> ordered;
  ordered.reserve(songs.size());
  for (const auto& s : songs) ordered.push_back(&s);
  std::sort(ordered.begin(), ordered.end(),
            [](const Song* a, const Song* b) { return a->id < b->id; });

  // Candidate enumeration. label index: 0 = different author, 1 = same.
  std::map<GenreTag, std::vector<PerCand>> per_cands[2];
  std::vector<CrossCand> cross_cands[2];
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    for (std::size_t j = i + 1; j < ordered.size(); ++j) {
      const Song& a = *ordered[i];
      const Song& b = *ordered[j];
      if (a.id == b.id) continue;
      if (!spec.pair_augmented_with_origin && base_song_id(a.id) == base_song_id(b.id)) continue;
      const int label = lyricists_intersect(a, b) ? 1 : 0;
      CrossCand cc{i, j, {}};
      for (GenreTag ga : a.genres) {
        for (GenreTag gb : b.genres) {
          if (ga == gb) {
            per_cands[label][ga].push_back({i, j});
          } else {
            cc.combos.emplace_back(ga, gb);
          }
        }
      }
      if (!cc.combos.empty()) cross_cands[label].push_back(std::move(cc));
    }
  }

  std::mt19937_64 rng(spec.seed);
  PairBuildResult result;
  std::unordered_set<std::string> used;
  std::map<std::pair<GenreTag, int>, std::size_t> per_counts;
  std::size_t cross_counts[2] = {0, 0};

  const auto emit_per = [&](const PerCand& c, GenreTag g, int label) {
    const Song& a = *ordered[c.i];
    const Song& b = *ordered[c.j];
    if (!used.insert(pair_key(a.id, b.id)).second) return false;
    result.pairs.push_back(Pair{a.id, b.id, label, PairMode::kPerGenre, {g}, Split::kTrain});
    ++per_counts[{g, label}];
    return true;
  };
  const auto emit_cross = [&](const CrossCand& c, int label,
                              const std::pair<GenreTag, GenreTag>& combo) {
    const Song& a = *ordered[c.i];
    const Song& b = *ordered[c.j];
    if (!used.insert(pair_key(a.id, b.id)).second) return false;
    result.pairs.push_back(
        Pair{a.id, b.id, label, PairMode::kCrossGenre, {combo.first, combo.second}, Split::kTrain});
    ++cross_counts[label];
    return true;
  };

  // Shuffled orders, fixed up front so coverage and fill draws share them.
  std::map<GenreTag, std::vector<PerCand>> per_order[2];
  for (int label : {1, 0}) {
    for (GenreTag g : all_genres()) {
      auto it = per_cands[label].find(g);
      if (it == per_cands[label].end()) continue;
      auto list = it->second;
      std::shuffle(list.begin(), list.end(), rng);
      per_order[label][g] = std::move(list);
    }
  }
  std::vector<CrossCand> cross_order[2];
  for (int label : {1, 0}) {
    cross_order[label] = cross_cands[label];
    std::shuffle(cross_order[label].begin(), cross_order[label].end(), rng);
  }

  // Coverage pass: one pair from every (genre, family) cell that has supply.
  for (GenreTag g : all_genres()) {
    for (int label : {1, 0}) {
      bool covered = false;
      auto it = per_order[label].find(g);
      if (it != per_order[label].end()) {
        for (const auto& cand : it->second) {
          if (emit_per(cand, g, label)) {
            covered = true;
            break;
          }
        }
      }
      if (!covered)
        result.warnings.push_back(
            {g, family_name(PairMode::kPerGenre, label), "no feasible pairs"});
    }
    for (int label : {1, 0}) {
      bool covered = false;
      for (const auto& cand : cross_order[label]) {
        std::vector<std::pair<GenreTag, GenreTag>> with_g;
        for (const auto& combo : cand.combos)
          if (combo.first == g || combo.second == g) with_g.push_back(combo);
        if (with_g.empty()) continue;
        std::uniform_int_distribution<std::size_t> pick(0, with_g.size() - 1);
        if (emit_cross(cand, label, with_g[pick(rng)])) {
          covered = true;
          break;
        }
      }
      if (!covered)
        result.warnings.push_back(
            {g, family_name(PairMode::kCrossGenre, label), "no feasible pairs"});
    }
  }

  // Targets. The genre quota fixes per-genre counts; the mode fraction sets
  // the cross-genre total.
  long quota_total = 0;
  for (const auto& [g, q] : spec.genre_quota) quota_total += q;
  const long total_target =
      quota_total > 0
          ? std::lround(static_cast<double>(quota_total) / spec.per_genre_fraction)
          : 0;
  const long cross_target = std::max<long>(0, total_target - quota_total);
  const long cross_pos_target =
      std::lround(static_cast<double>(cross_target) * spec.same_author_fraction_cross_genre);
  const long cross_neg_target = cross_target - cross_pos_target;

  // Fill per-genre families up to their quotas.
  for (GenreTag g : all_genres()) {
    auto qit = spec.genre_quota.find(g);
    const long quota = qit == spec.genre_quota.end() ? 0 : qit->second;
    const long pos_target =
        std::lround(static_cast<double>(quota) * spec.same_author_fraction_per_genre);
    const long neg_target = quota - pos_target;
    for (int label : {1, 0}) {
      const long target = label ? pos_target : neg_target;
      auto it = per_order[label].find(g);
      if (it == per_order[label].end()) continue;
      for (const auto& cand : it->second) {
        if (static_cast<long>(per_counts[{g, label}]) >= target) break;
        emit_per(cand, g, label);
      }
      const long got = static_cast<long>(per_counts[{g, label}]);
      // shortfalls inside the tolerance band are expected sampling slack
      const double floor = static_cast<double>(target) * (1.0 - spec.tolerance);
      if (target > 0 && static_cast<double>(got) < floor)
        result.warnings.push_back({g, family_name(PairMode::kPerGenre, label),
                                   "short of target: built " + std::to_string(got) + " of " +
                                       std::to_string(target)});
    }
  }

  // Fill cross-genre families; the attributed combo is drawn per pair.
  for (int label : {1, 0}) {
    const long target = label ? cross_pos_target : cross_neg_target;
    for (const auto& cand : cross_order[label]) {
      if (static_cast<long>(cross_counts[label]) >= target) break;
      std::uniform_int_distribution<std::size_t> pick(0, cand.combos.size() - 1);
      emit_cross(cand, label, cand.combos[pick(rng)]);
    }
  }

  return result;
}

std::vector<Song> augment_songs(const std::vector<Song>& songs, const AugmentationSpec& spec) {
  static const std::regex token_re(R"(\[SYN\d+\])");
  if (spec.token_vocabulary.empty()) throw ValidationError("augmentation: empty token vocabulary");
  for (const auto& tok : spec.token_vocabulary)
    if (!std::regex_match(tok, token_re))
      throw ValidationError("augmentation: bad synthetic token: " + tok);
  if (spec.insertions_per_song <= 0 || spec.copies_per_song <= 0) return songs;

  std::mt19937_64 rng(spec.seed);
  std::vector<Song> out = songs;
  const auto ascii_alnum = [](char32_t c) {
    return (c >= U'0' && c <= U'9') || (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z');
  };
  for (const auto& song : songs) {
    for (int k = 0; k < spec.copies_per_song; ++k) {
      Song copy = song;
      copy.id = song.id + "#aug" + std::to_string(k);
      for (int t = 0; t < spec.insertions_per_song; ++t) {
        std::uniform_int_distribution<std::size_t> pick_line(0, copy.lines.size() - 1);
        const std::size_t li = pick_line(rng);
        std::u32string u = text::decode_utf8(copy.lines[li]);
        // Word boundaries: every inter-character gap except inside an ASCII
        // alphanumeric run, plus the line ends.
        std::vector<std::size_t> boundaries;
        for (std::size_t p = 0; p <= u.size(); ++p) {
          if (p > 0 && p < u.size() && ascii_alnum(u[p - 1]) && ascii_alnum(u[p])) continue;
          boundaries.push_back(p);
        }
        std::uniform_int_distribution<std::size_t> pick_pos(0, boundaries.size() - 1);
        std::uniform_int_distribution<std::size_t> pick_tok(0, spec.token_vocabulary.size() - 1);
        const std::u32string tok = text::decode_utf8(spec.token_vocabulary[pick_tok(rng)]);
        u.insert(boundaries[pick_pos(rng)], tok);
        copy.lines[li] = text::encode_utf8(u);
      }
      out.push_back(std::move(copy));
    }
  }
  return out;
}

PairSetStats pairset_stats(const std::vector<Pair>& pairs, const std::vector<Song>& songs) {
  std::unordered_map<std::string, const Song*> by_id;
  for (const auto& s : songs) by_id[s.id] = &s;
  const auto lookup = [&](const std::string& id) -> const Song& {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw ValidationError("unknown song id: " + id);
    return *it->second;
  };

  PairSetStats stats;
  stats.total = pairs.size();
  std::map<GenreTag, std::set<std::string>> authors;
  std::map<GenreTag, GenreRowStats> rows;
  for (GenreTag g : all_genres()) rows[g] = GenreRowStats{g, 0, 0, 0, 0};
  TypeRowStats per_row{PairMode::kPerGenre, 0, 0};
  TypeRowStats cross_row{PairMode::kCrossGenre, 0, 0};

  for (const auto& p : pairs) {
    const Song& a = lookup(p.a_id);
    const Song& b = lookup(p.b_id);
    for (GenreTag g : p.genres) {
      auto& row = rows[g];
      ++row.pairs;
      if (p.label == 1) ++row.label1;
      else ++row.label0;
      authors[g].insert(a.lyricists.begin(), a.lyricists.end());
      authors[g].insert(b.lyricists.begin(), b.lyricists.end());
    }
    auto& type_row = p.mode == PairMode::kPerGenre ? per_row : cross_row;
    if (p.label == 1) ++type_row.same_author;
    else ++type_row.diff_author;
  }
  for (GenreTag g : all_genres()) {
    rows[g].authors = authors[g].size();
    stats.genre_rows.push_back(rows[g]);
  }
  stats.type_rows = {per_row, cross_row};
  return stats;
}

namespace {

std::string pct(std::size_t num, std::size_t den) {
  char buf[32];
  const double v = den == 0 ? 0.0 : 100.0 * static_cast<double>(num) / static_cast<double>(den);
  std::snprintf(buf, sizeof(buf), "%.2f%%", v);
  return buf;
}

}  // namespace

std::string render_pairset_stats(const PairSetStats& stats) {
  std::string out = "Genre Breakdown\n";
  out += "| Genre | Authors | Pairs | Label 0 | Label 1 | L0% | L1% | %Total |\n";
  out += "|---|---|---|---|---|---|---|---|\n";
  for (const auto& row : stats.genre_rows) {
    out += "| " + std::string(genre_english_name(row.genre)) + " | " +
           std::to_string(row.authors) + " | " + std::to_string(row.pairs) + " | " +
           std::to_string(row.label0) + " | " + std::to_string(row.label1) + " | " +
           pct(row.label0, row.pairs) + " | " + pct(row.label1, row.pairs) + " | " +
           pct(row.pairs, stats.total) + " |\n";
  }
  out += "\nPair Type Breakdown\n";
  out += "| Type | Same-Author | Diff-Author | Total (%) |\n";
  out += "|---|---|---|---|\n";
  for (const auto& row : stats.type_rows) {
    const std::size_t mode_total = row.same_author + row.diff_author;
    std::string name = row.mode == PairMode::kPerGenre ? "Per-genre" : "Cross-genre";
    out += "| " + name + " | " + std::to_string(row.same_author) + " (" +
           pct(row.same_author, mode_total) + ") | " + std::to_string(row.diff_author) + " (" +
           pct(row.diff_author, mode_total) + ") | " + std::to_string(mode_total) + " (" +
           pct(mode_total, stats.total) + ") |\n";
  }
  return out;
}

namespace {

[[noreturn]] void pair_error(std::string_view origin, std::size_t line_no, const std::string& what) {
  throw ValidationError(std::string(origin) + ":" + std::to_string(line_no) + ": " + what);
}

}  // namespace

std::vector<Pair> parse_pairs(std::string_view jsonl, std::string_view origin) {
  std::vector<Pair> pairs;
  std::unordered_set<std::string> seen;
  std::size_t line_no = 0;
  for (const std::string& line : text::split_lines(jsonl)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    ordered_json obj = ordered_json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) pair_error(origin, line_no, "not a JSON object");
    Pair p;
    for (const char* key : {"a_id", "b_id", "label", "mode", "genres", "split"})
      if (!obj.contains(key)) pair_error(origin, line_no, "missing field \"" + std::string(key) + "\"");
    if (!obj["a_id"].is_string() || !obj["b_id"].is_string())
      pair_error(origin, line_no, "song ids must be strings");
    p.a_id = obj["a_id"].get<std::string>();
    p.b_id = obj["b_id"].get<std::string>();
    if (p.a_id.empty() || p.b_id.empty()) pair_error(origin, line_no, "empty song id");
    if (p.a_id == p.b_id) pair_error(origin, line_no, "self pair: " + p.a_id);
    if (!seen.insert(pair_key(p.a_id, p.b_id)).second)
      pair_error(origin, line_no, "duplicate pair: " + p.a_id + " / " + p.b_id);
    if (!obj["label"].is_number_integer()) pair_error(origin, line_no, "label must be 0 or 1");
    const int label = obj["label"].get<int>();
    if (label != 0 && label != 1) pair_error(origin, line_no, "label must be 0 or 1");
    p.label = label;
    try {
      p.mode = parse_mode(obj["mode"].get<std::string>());
    } catch (const std::exception& e) {
      pair_error(origin, line_no, e.what());
    }
    if (!obj["genres"].is_array()) pair_error(origin, line_no, "genres must be an array");
    for (const auto& gname : obj["genres"]) {
      if (!gname.is_string()) pair_error(origin, line_no, "genres must hold strings");
      auto tag = parse_genre_name(gname.get<std::string>());
      if (!tag) pair_error(origin, line_no, "unknown genre: " + gname.get<std::string>());
      p.genres.push_back(*tag);
    }
    if (p.mode == PairMode::kPerGenre && p.genres.size() != 1)
      pair_error(origin, line_no, "per-genre pair needs exactly one genre");
    if (p.mode == PairMode::kCrossGenre &&
        (p.genres.size() != 2 || p.genres[0] == p.genres[1]))
      pair_error(origin, line_no, "cross-genre pair needs two distinct genres");
    try {
      p.split = parse_split(obj["split"].get<std::string>());
    } catch (const std::exception& e) {
      pair_error(origin, line_no, e.what());
    }
    if (p.split == Split::kUnassigned) pair_error(origin, line_no, "pair split cannot be unassigned");
    pairs.push_back(std::move(p));
  }
  return pairs;
}

std::string serialize_pairs(const std::vector<Pair>& pairs) {
  std::string out;
  for (const auto& p : pairs) {
    ordered_json obj;
    obj["a_id"] = p.a_id;
    obj["b_id"] = p.b_id;
    obj["label"] = p.label;
    obj["mode"] = std::string(mode_name(p.mode));
    ordered_json genres = ordered_json::array();
    for (GenreTag g : p.genres) genres.push_back(std::string(genre_english_name(g)));
    obj["genres"] = std::move(genres);
    obj["split"] = std::string(split_name(p.split));
    out += obj.dump();
    out.push_back('\n');
  }
  return out;
}

std::vector<Pair> load_pairs(const std::string& path) {
  return parse_pairs(io::read_file(path), path);
}

void save_pairs(const std::vector<Pair>& pairs, const std::string& path) {
  io::write_file(path, serialize_pairs(pairs));
}

}  // namespace lyrav
