#include "lyrav/zeroshot.hpp"

#include <unordered_map>

#include <json.hpp>

#include "lyrav/errors.hpp"
#include "lyrav/io.hpp"
#include "lyrav/text.hpp"

namespace lyrav {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr std::string_view kAttribPromptZh =
    R"(验证两段输入文本是否由同一位作者撰写。分析输入文本的写作风格，忽略主题和内容的差异。推理应基于语言特征，例如动词、标点符号、稀有词汇、词缀、幽默、讽刺、打字错误和拼写错误等。输出应遵循以下格式：0 或 1（0表示不同作者，1表示相同作者）。

文本一：
{text_a}

文本二：
{text_b}
)";

constexpr std::string_view kAttribPromptEn =
    R"(Determine whether the two input texts were written by the same author.
Analyze the writing style of the texts while ignoring differences in topic and content.
The reasoning should be based on linguistic features such as verb usage, punctuation,
rare vocabulary, affixes, humor, sarcasm, typos, and spelling variations.
The output should follow this format: 0 or 1 (0 indicates different authors, 1 indicates the same author).

Text 1:
{text_a}

Text 2:
{text_b}
)";

std::string replace_once(std::string s, std::string_view placeholder, std::string_view value) {
  const std::size_t pos = s.find(placeholder);
  if (pos == std::string::npos)
    throw ValidationError("prompt template lacks placeholder " + std::string(placeholder));
  s.replace(pos, placeholder.size(), value);
  return s;
}

}  // namespace

std::string_view attrib_prompt_template(PromptLanguage lang) {
  return lang == PromptLanguage::kZh ? kAttribPromptZh : kAttribPromptEn;
}

std::string build_attrib_prompt(std::string_view lyrics_a, std::string_view lyrics_b,
                                PromptLanguage lang) {
  if (text::trim(lyrics_a).empty() || text::trim(lyrics_b).empty())
    throw ValidationError("build_attrib_prompt: empty lyric text");
  std::string out(attrib_prompt_template(lang));
  out = replace_once(std::move(out), "{text_a}", lyrics_a);
  out = replace_once(std::move(out), "{text_b}", lyrics_b);
  return out;
}

int parse_verdict(std::string_view raw) {
  if (text::trim(raw).empty()) throw ParseError("unparseable verdict");
  const std::u32string u = text::decode_utf8(text::strip_think_blocks(raw));
  const auto alnum = [](char32_t c) {
    return (c >= U'0' && c <= U'9') || (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z');
  };
  const auto digit = [](char32_t c) { return c >= U'0' && c <= U'9'; };
  for (std::size_t k = u.size(); k-- > 0;) {
    const char32_t c = u[k];
    if (c != U'0' && c != U'1') continue;
    const char32_t prev = k > 0 ? u[k - 1] : U'\0';
    const char32_t next = k + 1 < u.size() ? u[k + 1] : U'\0';
    if (alnum(prev) || alnum(next)) continue;
    // Skip digits that are part of a decimal number like 0.5 or 2.0.
    if (next == U'.' && k + 2 < u.size() && digit(u[k + 2])) continue;
    if (prev == U'.' && k >= 2 && digit(u[k - 2])) continue;
    return static_cast<int>(c - U'0');
  }
  throw ParseError("unparseable verdict");
}

ZeroshotResult run_zeroshot(const std::vector<Pair>& pairs, const std::vector<Song>& songs,
                            Gateway& gateway, PromptLanguage language) {
  std::unordered_map<std::string, const Song*> by_id;
  for (const auto& s : songs) by_id[s.id] = &s;
  const auto lookup = [&](const std::string& id) -> const Song& {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw ValidationError("zeroshot: unknown song id: " + id);
    return *it->second;
  };

  std::vector<std::string> prompts;
  prompts.reserve(pairs.size());
  for (const auto& p : pairs)
    prompts.push_back(
        build_attrib_prompt(lookup(p.a_id).text(), lookup(p.b_id).text(), language));

  const std::vector<BatchItem> responses = gateway.complete_batch(prompts);
  ZeroshotResult result;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const Pair& p = pairs[i];
    const BatchItem& item = responses[i];
    if (!item.ok) {
      result.errors.push_back({p.a_id, p.b_id, item.error});
      continue;
    }
    try {
      Verdict v;
      v.a_id = p.a_id;
      v.b_id = p.b_id;
      v.predicted = parse_verdict(item.value);
      v.raw_response_digest = text::hex64(text::fnv1a64(item.value));
      result.verdicts.push_back(std::move(v));
    } catch (const ParseError& e) {
      result.errors.push_back({p.a_id, p.b_id, e.what()});
    }
  }
  return result;
}

std::string serialize_verdicts(const std::vector<Verdict>& verdicts) {
  std::string out;
  for (const auto& v : verdicts) {
    ordered_json obj;
    obj["a_id"] = v.a_id;
    obj["b_id"] = v.b_id;
    obj["predicted"] = v.predicted;
    obj["raw_response_digest"] = v.raw_response_digest;
    out += obj.dump();
    out.push_back('\n');
  }
  return out;
}

std::vector<Verdict> parse_verdicts(std::string_view jsonl, std::string_view origin) {
  std::vector<Verdict> out;
  std::size_t line_no = 0;
  for (const std::string& line : text::split_lines(jsonl)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const std::string where = std::string(origin) + ":" + std::to_string(line_no);
    ordered_json obj = ordered_json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) throw ValidationError(where + ": not a JSON object");
    Verdict v;
    try {
      v.a_id = obj.at("a_id").get<std::string>();
      v.b_id = obj.at("b_id").get<std::string>();
      v.predicted = obj.at("predicted").get<int>();
      v.raw_response_digest = obj.at("raw_response_digest").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(where + ": " + e.what());
    }
    if (v.predicted != 0 && v.predicted != 1)
      throw ValidationError(where + ": predicted must be 0 or 1");
    out.push_back(std::move(v));
  }
  return out;
}

void save_verdicts(const std::vector<Verdict>& verdicts, const std::string& path) {
  io::write_file(path, serialize_verdicts(verdicts));
}

std::vector<Verdict> load_verdicts(const std::string& path) {
  return parse_verdicts(io::read_file(path), path);
}

}  // namespace lyrav
