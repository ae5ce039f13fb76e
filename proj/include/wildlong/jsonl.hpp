#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

namespace wildlong {

using Json = nlohmann::json;

struct JsonlReadStats {
  std::size_t lines = 0;
  std::size_t malformed = 0;
};

/// Calls `fn` for each parsed object in a line-delimited JSON file. Blank
/// lines are skipped; lines that fail to parse (or are not objects) are
/// counted as malformed and skipped. Throws InputError if the file cannot be
/// opened.
JsonlReadStats read_jsonl(const std::filesystem::path& path,
                          const std::function<void(const Json&)>& fn);

std::vector<Json> read_jsonl_all(const std::filesystem::path& path,
                                 JsonlReadStats* stats = nullptr);

/// Writes one compact object per line, creating parent directories.
/// The file is written to a temporary sibling and renamed into place.
void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& rows);

/// Atomic whole-file write (temporary sibling + rename).
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

}  // namespace wildlong
