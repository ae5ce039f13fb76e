#pragma once

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace wildlong::llm {

/// Items of a "1. x\n2. y" list, in order, with markers and surrounding
/// whitespace/bold removed. Text before the first item and unnumbered lines
/// are ignored. Throws ParseError when no item is found.
std::vector<std::string> parse_numbered_list(std::string_view text);

struct QueryResponse {
  std::string instruction;
  std::string response;
  friend bool operator==(const QueryResponse&, const QueryResponse&) = default;
};

/// Splits on the "Query/Instruction:" and "Response:" labels. Throws
/// ParseError if either label is missing or a segment is empty.
QueryResponse parse_query_response(std::string_view text);

/// Inverse of parse_query_response.
std::string format_query_response(const QueryResponse& qr);

/// Parses numbered "original: modified" lines. Keys are normalized like meta
/// values; lines without a colon are skipped. Throws ParseError when nothing
/// parses.
std::map<std::string, std::string> parse_rewrite_map(std::string_view text);

/// Inverse of parse_rewrite_map for a list of (original, modified) pairs.
std::string format_rewrite_map(const std::vector<std::pair<std::string, std::string>>& rows);

/// Inverse of parse_numbered_list.
std::string format_numbered_list(const std::vector<std::string>& items);

}  // namespace wildlong::llm
