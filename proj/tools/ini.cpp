#include "ini.hpp"

#include <fstream>

#include "driftloc/errors.hpp"

namespace driftloc::tools {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

const std::string* IniSection::find(const std::string& key) const {
  for (const auto& entry : entries) {
    if (entry.key == key) return &entry.value;
  }
  return nullptr;
}

std::vector<IniSection> parse_ini_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");

  std::vector<IniSection> sections;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#' || text[0] == ';') continue;
    if (text.front() == '[') {
      if (text.back() != ']')
        throw ConfigError(path + ":" + std::to_string(line_number) +
                          ": unterminated section header");
      sections.push_back({trim(text.substr(1, text.size() - 2)), line_number, {}});
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(line_number) +
                        ": expected 'key = value'");
    if (sections.empty())
      throw ConfigError(path + ":" + std::to_string(line_number) +
                        ": entry before any [section]");
    IniEntry entry{trim(text.substr(0, eq)), trim(text.substr(eq + 1)), line_number};
    if (entry.key.empty())
      throw ConfigError(path + ":" + std::to_string(line_number) + ": empty key");
    sections.back().entries.push_back(std::move(entry));
  }
  return sections;
}

}  // namespace driftloc::tools
