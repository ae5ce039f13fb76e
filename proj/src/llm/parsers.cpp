#include "wildlong/llm/parsers.hpp"

#include <regex>

#include "wildlong/error.hpp"
#include "wildlong/meta/meta_model.hpp"

namespace wildlong::llm {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string strip_bold(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c != '*') out.push_back(c);
  }
  return std::string(trim(out));
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return lines;
}

// "12. item", "12) item", optionally wrapped in bold.
const std::regex& item_re() {
  static const std::regex re(R"(^\s*\**\s*(\d{1,3})[.)]\**\s+(.*)$)");
  return re;
}

// Position just past `label` (case-insensitive, optional bold around it), or npos.
std::size_t find_label(std::string_view text, std::string_view label, std::size_t from,
                       std::size_t* label_start, bool line_start = true) {
  std::string lower(text);
  for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  std::string needle(label);
  for (auto& c : needle) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  std::size_t pos = from;
  while ((pos = lower.find(needle, pos)) != std::string::npos) {
    // Label must start a line (ignoring whitespace and bold markers).
    std::size_t b = pos;
    while (b > 0 && (lower[b - 1] == ' ' || lower[b - 1] == '\t' || lower[b - 1] == '*')) --b;
    if (!line_start || b == 0 || lower[b - 1] == '\n') {
      if (label_start) *label_start = b;
      std::size_t end = pos + needle.size();
      while (end < lower.size() && lower[end] == '*') ++end;
      return end;
    }
    pos += needle.size();
  }
  return std::string::npos;
}

}  // namespace

std::vector<std::string> parse_numbered_list(std::string_view text) {
  std::vector<std::string> items;
  for (auto line : split_lines(text)) {
    std::string s(line);
    std::smatch m;
    if (std::regex_match(s, m, item_re())) {
      std::string item = strip_bold(m[2].str());
      if (!item.empty()) items.push_back(std::move(item));
    }
  }
  if (items.empty()) throw ParseError("no numbered items found", std::string(trim(text.substr(0, 200))));
  return items;
}

std::string format_numbered_list(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    out += std::to_string(i + 1) + ". " + items[i] + "\n";
  }
  return out;
}

QueryResponse parse_query_response(std::string_view text) {
  std::size_t q_start = 0;
  const auto q_end = find_label(text, "Query/Instruction:", 0, &q_start);
  if (q_end == std::string::npos) throw ParseError("missing 'Query/Instruction:' label");
  std::size_t r_start = 0;
  auto r_end = find_label(text, "Response:", q_end, &r_start);
  if (r_end == std::string::npos) r_end = find_label(text, "Response:", q_end, &r_start, false);
  if (r_end == std::string::npos) throw ParseError("missing 'Response:' label");
  QueryResponse qr;
  qr.instruction = std::string(trim(text.substr(q_end, r_start - q_end)));
  qr.response = std::string(trim(text.substr(r_end)));
  if (qr.instruction.empty()) throw ParseError("empty query/instruction segment");
  if (qr.response.empty()) throw ParseError("empty response segment");
  return qr;
}

std::string format_query_response(const QueryResponse& qr) {
  return "Query/Instruction: " + qr.instruction + "\nResponse: " + qr.response;
}

std::map<std::string, std::string> parse_rewrite_map(std::string_view text) {
  std::map<std::string, std::string> out;
  for (auto line : split_lines(text)) {
    std::string s(line);
    std::smatch m;
    if (!std::regex_match(s, m, item_re())) continue;
    const std::string body = m[2].str();
    const auto colon = body.find(':');
    if (colon == std::string::npos) continue;
    auto original = meta::try_normalize_value(strip_bold(std::string_view(body).substr(0, colon)));
    std::string modified = strip_bold(std::string_view(body).substr(colon + 1));
    if (!original || modified.empty()) continue;
    out.emplace(original->normalized(), std::move(modified));
  }
  if (out.empty()) throw ParseError("no 'original: modified' lines found");
  return out;
}

std::string format_rewrite_map(const std::vector<std::pair<std::string, std::string>>& rows) {
  std::string out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out += std::to_string(i + 1) + ". " + rows[i].first + ": " + rows[i].second + "\n";
  }
  return out;
}

}  // namespace wildlong::llm
