#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lyrav/corpus.hpp"
#include "lyrav/gateway.hpp"
#include "lyrav/genre.hpp"

namespace lyrav {

enum class PromptLanguage { kZh, kEn };

std::string_view language_name(PromptLanguage lang);
PromptLanguage parse_language(std::string_view s);

// The raw template with its {lyrics} placeholder intact.
std::string_view genre_prompt_template(PromptLanguage lang);

// Replaces {lyrics} with the input; no other substitutions.
std::string build_genre_prompt(std::string_view lyrics, PromptLanguage lang);

// Strips <think> blocks, takes the last line starting with 流派：/流派:/
// "Genres:", and maps the bracketed names (Chinese or English, spelling
// variants tolerated) to tags in listed order.
std::vector<GenreTag> parse_genre_response(std::string_view raw);

enum class ReviewStatus { kUnreviewed, kConfirmed, kCorrected };

std::string_view review_status_name(ReviewStatus s);
ReviewStatus parse_review_status(std::string_view s);

struct GenreAssignment {
  std::string song_id;
  std::vector<GenreTag> tags;
  std::string raw_response;
  PromptLanguage prompt_language = PromptLanguage::kZh;
  ReviewStatus verified = ReviewStatus::kUnreviewed;
  std::vector<GenreTag> corrected_tags;  // nonempty iff verified == kCorrected

  std::vector<GenreTag> effective_tags() const {
    return verified == ReviewStatus::kCorrected ? corrected_tags : tags;
  }
};

struct LabelError {
  std::string song_id;
  std::string message;
};

struct LabelResult {
  std::vector<GenreAssignment> assignments;  // in song order
  std::vector<LabelError> errors;
};

// Labels the first sample_limit songs (all when unset) through the gateway;
// per-song failures are collected, successful parses update the songs' tags.
LabelResult label_corpus(std::vector<Song>& songs, Gateway& gateway, PromptLanguage language,
                         std::optional<std::size_t> sample_limit = std::nullopt);

// Review CSV: song_id,title,assigned_tags,verdict with |-separated English
// tags. Export prefills every verdict with "confirm".
void export_review_sheet(const std::vector<GenreAssignment>& assignments,
                         const std::vector<Song>& songs, const std::string& path);

// Applies verdicts {confirm, correct:<tag|tag>}; throws with the row number
// on unknown verdicts, tags, or song ids.
std::vector<GenreAssignment> apply_review(std::vector<GenreAssignment> assignments,
                                          const std::string& path);

// Writes each assignment's effective tags onto the matching songs.
void apply_assignments(const std::vector<GenreAssignment>& assignments, std::vector<Song>& songs);

// Assignment JSONL round-trip.
std::string serialize_assignments(const std::vector<GenreAssignment>& assignments);
std::vector<GenreAssignment> parse_assignments(std::string_view jsonl,
                                               std::string_view origin = "assignments");
void save_assignments(const std::vector<GenreAssignment>& assignments, const std::string& path);
std::vector<GenreAssignment> load_assignments(const std::string& path);

}  // namespace lyrav
