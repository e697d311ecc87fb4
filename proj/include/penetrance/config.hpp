#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace penetrance {

// Flat key = value configuration with [section] headers and '#' comments.
// Keys inside a section are addressed as "section.key"; keys before any
// section header are addressed bare. Values keep everything after '=' with
// surrounding whitespace trimmed.
class Config {
 public:
  Config() = default;
  static Config parse(std::istream& in);
  static Config from_string(const std::string& text);
  static Config load(const std::string& path);

  bool has(const std::string& key) const;
  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long get_long(const std::string& key, long fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::uint64_t get_seed(const std::string& key, std::uint64_t fallback) const;
  std::vector<double> get_doubles(const std::string& key,
                                  std::vector<double> fallback) const;

  void set(const std::string& key, const std::string& value);

  // Original text, for run-manifest digests; synthesized when built
  // programmatically.
  const std::string& text() const { return text_; }

 private:
  std::map<std::string, std::string> values_;
  std::string text_;
};

}  // namespace penetrance
