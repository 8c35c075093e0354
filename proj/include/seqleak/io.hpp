#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace seqleak {

// Shortest round-trip decimal form via std::to_chars; bit-identical output
// across platforms, which the determinism contract for CSVs relies on.
std::string format_double(double x);

double parse_double(const std::string& s);
long long parse_int(const std::string& s);

std::vector<std::string> split(const std::string& line, char sep);

// Flat `key = value` files (config sidecars, experiment configs). Lines
// starting with '#' and blank lines are ignored; keys must be unique.
using KeyValueMap = std::map<std::string, std::string>;
KeyValueMap read_key_value_file(const std::filesystem::path& path);
void write_key_value_file(const std::filesystem::path& path, const KeyValueMap& kv);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace seqleak
