#pragma once

#include "sps/solvers.hpp"

#include <filesystem>
#include <map>
#include <string>

namespace sps {

inline constexpr int record_schema_version = 1;

/// Flag values that produced a record, echoed verbatim into the file.
using ConfigEcho = std::map<std::string, std::string>;

struct StoredRecord {
  SolutionRecord record;
  ConfigEcho config;
  std::string hash;
  /// stored hash equals the hash of the stored content
  bool hash_ok = false;
};

/// 64-bit FNV-1a, as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);

/// JSON document with reals at full round-trip precision; includes a hash of
/// all other content.
std::string record_to_json(const SolutionRecord &rec,
                           const ConfigEcho &config = {});

/// Parses a record document. Throws SchemaError naming the first missing or
/// ill-typed field. The grid is rebuilt from (n, r_max, gamma).
StoredRecord record_from_json(const std::string &text);

/// Writes through a temporary file in the same directory and renames it.
void write_atomic(const std::filesystem::path &path, const std::string &data);

void write_record(const std::filesystem::path &path, const SolutionRecord &rec,
                  const ConfigEcho &config = {});
StoredRecord read_record(const std::filesystem::path &path);

/// CSV with header r,u,phi.
std::string profile_csv(const SolutionRecord &rec);
void write_profile(const std::filesystem::path &path,
                   const SolutionRecord &rec);

} // namespace sps
