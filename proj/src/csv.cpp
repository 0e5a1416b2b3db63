#include "lyrav/csv.hpp"

#include "lyrav/errors.hpp"

namespace lyrav::csv {

std::string quote(std::string_view field) {
  bool needs = field.find_first_of(",\"\n\r") != std::string_view::npos;
  if (!needs) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string join_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    out += quote(fields[i]);
  }
  return out;
}

std::vector<std::string> parse_row(std::string_view line) {
  auto rows = parse(line);
  if (rows.empty()) return {};
  return rows.front();
}

std::vector<std::vector<std::string>> parse(std::string_view doc) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t i = 0;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    rows.push_back(std::move(row));
    row.clear();
  };
  while (i < doc.size()) {
    char c = doc[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < doc.size() && doc[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"' && field.empty() && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\n') {
      if (!field.empty() || field_started || !row.empty()) end_row();
    } else if (c == '\r') {
      // swallowed; \r\n handled by the \n branch
    } else {
      field.push_back(c);
      field_started = true;
    }
    ++i;
  }
  if (in_quotes) throw ValidationError("csv: unterminated quoted field");
  if (!field.empty() || field_started || !row.empty()) end_row();
  return rows;
}

}  // namespace lyrav::csv
