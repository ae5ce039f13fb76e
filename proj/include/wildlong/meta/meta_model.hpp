#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace wildlong::meta {

/// The thirteen extracted meta-information fields. Declaration order is the
/// canonical order used for serialization and for node ordering in graphs.
enum class MetaField : std::uint8_t {
  kDocumentType = 0,
  kTasksOrRequests,
  kUserIntention,
  kUserProfile,
  kLanguageStyle,
  kContext,
  kKnowledgeForUser,
  kKnowledgeForChatbot,
  kLongContextCapability,
  kOutputFormat,
  kSentiment,
  kConstraint,
  kSimplifiedInstruction,
};

inline constexpr std::size_t kFieldCount = 13;
inline constexpr std::size_t kGraphFieldCount = 11;

inline constexpr std::array<MetaField, kFieldCount> kAllFields = {
    MetaField::kDocumentType,        MetaField::kTasksOrRequests,
    MetaField::kUserIntention,       MetaField::kUserProfile,
    MetaField::kLanguageStyle,       MetaField::kContext,
    MetaField::kKnowledgeForUser,    MetaField::kKnowledgeForChatbot,
    MetaField::kLongContextCapability, MetaField::kOutputFormat,
    MetaField::kSentiment,           MetaField::kConstraint,
    MetaField::kSimplifiedInstruction,
};

/// Fields that become graph nodes: everything except document type (which
/// selects the graph) and the simplified instruction (used as demonstration).
constexpr bool graph_eligible(MetaField f) noexcept {
  return f != MetaField::kDocumentType && f != MetaField::kSimplifiedInstruction;
}

/// snake_case name used in JSON records and graph files.
std::string_view field_key(MetaField f);
/// Header used in the extraction output layout ("Task or Request", ...).
std::string_view field_header(MetaField f);
std::optional<MetaField> field_from_key(std::string_view key);
std::optional<MetaField> field_from_index(int index);

/// A normalized meta-information value. Construct through normalize_value;
/// the stored text is lowercase, whitespace-collapsed, trimmed, non-empty and
/// never the "na" sentinel.
class MetaValue {
 public:
  const std::string& raw() const noexcept { return raw_; }
  const std::string& normalized() const noexcept { return normalized_; }

  friend bool operator==(const MetaValue& a, const MetaValue& b) noexcept {
    return a.normalized_ == b.normalized_;
  }
  friend std::strong_ordering operator<=>(const MetaValue& a, const MetaValue& b) noexcept {
    return a.normalized_ <=> b.normalized_;
  }

 private:
  friend MetaValue normalize_value(std::string_view raw);
  friend std::optional<MetaValue> try_normalize_value(std::string_view raw);
  MetaValue(std::string raw, std::string normalized)
      : raw_(std::move(raw)), normalized_(std::move(normalized)) {}

  std::string raw_;
  std::string normalized_;
};

/// Lowercase ASCII, collapse whitespace runs to one space, trim. Pure text
/// transform with no validation.
std::string normalize_text(std::string_view raw);

/// Throws InputError when the text normalizes to empty or to "na".
MetaValue normalize_value(std::string_view raw);
std::optional<MetaValue> try_normalize_value(std::string_view raw);

struct MetaRecord {
  std::string conversation_id;
  std::vector<MetaValue> doc_types;  // 1 or 2 entries
  /// Graph fields plus nothing else: document type and simplified instruction
  /// live in their own members. Fields whose extraction was "NA" are absent.
  std::map<MetaField, std::vector<MetaValue>> values;
  /// "Purpose of Query" items. Parsed and kept, never a graph field.
  std::vector<MetaValue> purpose_of_query;
  std::optional<std::string> simplified_instruction;

  friend bool operator==(const MetaRecord&, const MetaRecord&) = default;
};

struct NoLongDocument {
  friend bool operator==(NoLongDocument, NoLongDocument) = default;
};

using ExtractionResult = std::variant<MetaRecord, NoLongDocument>;

inline constexpr std::string_view kNoLongDocument = "No long document involved";

/// Parses extraction output laid out as headed sections with numbered items.
/// Accepts optional markdown bold/heading markers around headers and inline
/// "Header: value" lines. Throws ParseError (carrying the offending line) on
/// an unknown header-like line, or when no section is recognized, or when the
/// document type section is missing.
ExtractionResult parse_meta_extraction(std::string_view raw, std::string conversation_id = {});

/// Inverse of parse_meta_extraction for records: canonical headers, numbered
/// items, "NA" for absent fields.
std::string format_meta_extraction(const MetaRecord& record);

struct GraphItem {
  MetaField field;
  MetaValue value;
  friend bool operator==(const GraphItem&, const GraphItem&) = default;
  friend auto operator<=>(const GraphItem&, const GraphItem&) = default;
};

/// Every (field, value) pair from graph-eligible fields, deduplicated within
/// a field, in canonical field order then first-occurrence order.
std::vector<GraphItem> graph_items(const MetaRecord& record);

/// A harvested path plus its simplified instruction, used as a one-shot
/// demonstration.
struct SeedPath {
  std::string record_id;
  std::vector<GraphItem> nodes;  // sorted, unique
  std::string instruction;
};

/// Seed path from a record; nullopt when the record has no simplified
/// instruction or no graph items.
std::optional<SeedPath> make_seed_path(const MetaRecord& record);

/// Human-readable "Field: value; value" block used inside prompts.
std::string describe_items(const std::vector<GraphItem>& items);

nlohmann::json to_json(const MetaRecord& record);
/// Unknown keys are ignored; values are re-normalized and "NA" entries dropped.
/// Throws InputError if doc_types is missing or has more than two entries.
MetaRecord meta_record_from_json(const nlohmann::json& j);

}  // namespace wildlong::meta
