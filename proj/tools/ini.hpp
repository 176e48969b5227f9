#ifndef DRIFTLOC_TOOLS_INI_HPP
#define DRIFTLOC_TOOLS_INI_HPP

#include <string>
#include <vector>

namespace driftloc::tools {

struct IniEntry {
  std::string key;
  std::string value;
  int line = 0;
};

struct IniSection {
  std::string name;  // e.g. "data", "run", "method cp-dt"
  int line = 0;
  std::vector<IniEntry> entries;

  const std::string* find(const std::string& key) const;
};

/// Flat INI: `[section]` headers, `key = value` lines, `#`/`;` comment lines.
/// Throws ConfigError with file:line diagnostics on malformed lines.
std::vector<IniSection> parse_ini_file(const std::string& path);

}  // namespace driftloc::tools

#endif
