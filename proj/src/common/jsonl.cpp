#include "wildlong/jsonl.hpp"

#include <fstream>
#include <sstream>

#include "wildlong/error.hpp"

namespace wildlong {

namespace fs = std::filesystem;

JsonlReadStats read_jsonl(const fs::path& path, const std::function<void(const Json&)>& fn) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  JsonlReadStats stats;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++stats.lines;
    Json row = Json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (row.is_discarded() || !row.is_object()) {
      ++stats.malformed;
      continue;
    }
    fn(row);
  }
  return stats;
}

std::vector<Json> read_jsonl_all(const fs::path& path, JsonlReadStats* stats) {
  std::vector<Json> rows;
  auto s = read_jsonl(path, [&](const Json& j) { rows.push_back(j); });
  if (stats) *stats = s;
  return rows;
}

void write_file_atomic(const fs::path& path, std::string_view contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw InputError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

void write_jsonl(const fs::path& path, const std::vector<Json>& rows) {
  std::string buf;
  for (const auto& row : rows) {
    buf += row.dump(-1, ' ', false, Json::error_handler_t::replace);
    buf += '\n';
  }
  write_file_atomic(path, buf);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace wildlong
