#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>

#include "wildlong/meta/meta_model.hpp"

// Fixed vocabulary behind the mock backend and the synthetic mini-corpus.
// Document-type strings come in ten groups of four free-form variants, so
// taxonomy fitting over their embeddings has a known answer.

namespace wildlong::vocab {

inline constexpr std::size_t kDocTypeGroups = 10;
inline constexpr std::size_t kVariantsPerGroup = 4;

using DocTypeGroup = std::array<std::string_view, kVariantsPerGroup>;

inline constexpr std::array<DocTypeGroup, kDocTypeGroups> kDocTypes = {{
    {"research paper", "academic article", "scientific study", "journal manuscript"},
    {"fictional story", "short story", "novel chapter", "fan fiction"},
    {"technical report", "api documentation", "software manual", "engineering specification"},
    {"legal contract", "terms of service", "court ruling", "privacy policy"},
    {"business report", "financial statement", "market analysis", "meeting minutes"},
    {"news article", "press release", "opinion column", "magazine feature"},
    {"lecture notes", "textbook chapter", "course syllabus", "study guide"},
    {"source code", "code repository", "configuration file", "program listing"},
    {"interview transcript", "chat log", "podcast transcript", "debate transcript"},
    {"screenplay", "poem collection", "song lyrics", "stage play"},
}};

/// Group of a free-form document type string, if it is in the vocabulary.
std::optional<std::size_t> doc_type_group(std::string_view normalized);

/// Candidate values for a graph-eligible field (empty for other fields).
std::span<const std::string_view> field_values(meta::MetaField field);

/// Filler words for synthetic document bodies.
std::span<const std::string_view> filler_words();

}  // namespace wildlong::vocab
