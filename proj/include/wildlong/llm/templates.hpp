#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wildlong::llm {

enum class TemplateId { kExtractMeta, kPathToInstruction, kInstructResponse, kSingleToMulti };

inline constexpr std::array<TemplateId, 4> kAllTemplates = {
    TemplateId::kExtractMeta, TemplateId::kPathToInstruction, TemplateId::kInstructResponse,
    TemplateId::kSingleToMulti};

std::string_view template_name(TemplateId id);
std::optional<TemplateId> template_from_name(std::string_view name);

/// Template text with `${name}` placeholders. Everything else, including
/// literal braces, is copied through unchanged.
struct PromptTemplate {
  TemplateId id;
  int version = 1;
  std::string body;

  /// Placeholder names in order of first appearance.
  std::vector<std::string> placeholders() const;
  /// SHA-256 of the body.
  std::string digest() const;
};

using Bindings = std::map<std::string, std::string, std::less<>>;

/// Built-in template compiled from assets/templates.
const PromptTemplate& builtin_template(TemplateId id);

/// Single-pass substitution of every `${name}`. Bound values are not
/// re-scanned. Throws InputError naming the first missing or extra binding.
std::string render(const PromptTemplate& tmpl, const Bindings& bindings);

/// render() against the built-in template.
std::string render_prompt(TemplateId id, const Bindings& bindings);

/// Checks `<dir>/<name>.v<version>.txt` for every template against the
/// digests of the built-in bodies. Throws FormatError on the first mismatch
/// or missing asset.
void verify_template_assets(const std::filesystem::path& dir);

/// Identifies which template produced a rendered prompt from its fixed
/// opening text.
std::optional<TemplateId> detect_template(std::string_view prompt);

/// Prompt used to turn a k-means cluster's exemplar strings into one
/// document-type label. Not one of the four synthesis templates.
std::string render_cluster_label_prompt(const std::vector<std::string>& exemplars);
bool is_cluster_label_prompt(std::string_view prompt);

}  // namespace wildlong::llm
