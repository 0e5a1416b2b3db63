#pragma once

#include <string>
#include <utility>
#include <vector>

namespace lyrav::cli {

// Exit codes: 0 success, 1 validation error, 2 I/O or gateway failure.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

struct CommandDoc {
  std::string name;
  std::string description;
  // option name -> help text, for the flag/doc parity check
  std::vector<std::pair<std::string, std::string>> options;
};

std::vector<CommandDoc> command_docs();
std::string command_help(const std::string& command);

}  // namespace lyrav::cli
