#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "lyrav/corpus.hpp"
#include "lyrav/gateway.hpp"
#include "lyrav/genre_labeling.hpp"
#include "lyrav/pairs.hpp"

namespace lyrav {

// Raw attribution template with {text_a}/{text_b} placeholders intact.
std::string_view attrib_prompt_template(PromptLanguage lang);

// Inserts both lyric texts into labeled blocks (文本一/文本二 or Text 1/Text 2).
std::string build_attrib_prompt(std::string_view lyrics_a, std::string_view lyrics_b,
                                PromptLanguage lang);

// Strips <think> blocks, then returns the last standalone 0/1 digit.
// Throws ParseError("unparseable verdict") when none exists.
int parse_verdict(std::string_view raw);

struct Verdict {
  std::string a_id;
  std::string b_id;
  int predicted = 0;
  std::string raw_response_digest;

  bool operator==(const Verdict&) const = default;
};

struct ZeroshotError {
  std::string a_id;
  std::string b_id;
  std::string message;
};

struct ZeroshotResult {
  std::vector<Verdict> verdicts;  // pair order preserved
  std::vector<ZeroshotError> errors;
};

// One gateway call per pair; failures and unparseable responses become error
// records instead of aborting the run.
ZeroshotResult run_zeroshot(const std::vector<Pair>& pairs, const std::vector<Song>& songs,
                            Gateway& gateway, PromptLanguage language = PromptLanguage::kZh);

// Verdict JSONL: a_id, b_id, predicted, raw_response_digest.
std::string serialize_verdicts(const std::vector<Verdict>& verdicts);
std::vector<Verdict> parse_verdicts(std::string_view jsonl, std::string_view origin = "verdicts");
void save_verdicts(const std::vector<Verdict>& verdicts, const std::string& path);
std::vector<Verdict> load_verdicts(const std::string& path);

}  // namespace lyrav
