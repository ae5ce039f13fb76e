#include "wildlong/vocabulary.hpp"

namespace wildlong::vocab {

namespace {

using meta::MetaField;

constexpr std::string_view kTasks[] = {
    "summarize key points",       "extract details",         "continue the story",
    "provide an analysis",        "answer specific questions", "rewrite in simpler language",
    "identify main arguments",    "translate sections",      "generate discussion questions",
    "critique the writing"};
constexpr std::string_view kIntentions[] = {
    "completing an assignment", "preparing for a debate",  "gaining a general understanding",
    "making a decision",        "improving own writing",   "preparing a presentation"};
constexpr std::string_view kProfiles[] = {
    "graduate student",  "software engineer", "fiction writer",  "legal professional",
    "business analyst",  "high school teacher", "hobbyist reader", "journalist"};
constexpr std::string_view kStyles[] = {"formal", "casual", "concise", "technical", "polite",
                                        "direct"};
constexpr std::string_view kContexts[] = {
    "preparing for an exam",          "working on a group project",
    "research related to ancient greece", "preparing for a presentation",
    "reviewing a contract before signing", "drafting a blog post",
    "onboarding at a new job"};
constexpr std::string_view kUserKnowledge[] = {
    "basic domain terminology",  "familiarity with the document", "understanding of narrative structure",
    "general reading comprehension", "basic statistics",          "legal vocabulary"};
constexpr std::string_view kBotKnowledge[] = {
    "understanding of narrative structure", "academic writing conventions", "legal reasoning",
    "software engineering practices",       "financial analysis",           "summarization techniques",
    "historical context"};
constexpr std::string_view kCapabilities[] = {
    "long document comprehension", "key information retrieval", "handling multiple perspectives",
    "tracking characters and events", "cross-referencing sections", "maintaining coherence"};
constexpr std::string_view kFormats[] = {"bullet points", "paragraph",   "numbered list",
                                         "table",         "short essay", "dialogue"};
constexpr std::string_view kSentiments[] = {"neutral",     "positive",  "critical",
                                            "encouraging", "emotional", "objective"};
constexpr std::string_view kConstraints[] = {"word limit",           "use simple language",
                                             "cite sections",        "maintain original tone",
                                             "avoid spoilers",       "focus on the conclusion"};

constexpr std::string_view kFiller[] = {
    "the",      "analysis", "shows",    "that",     "system",   "results",  "were",
    "observed", "across",   "several",  "sections", "and",      "data",     "suggest",
    "further",  "study",    "of",       "key",      "factors",  "report",   "story",
    "character", "market",  "growth",   "policy",   "court",    "clause",   "function",
    "module",   "lecture",  "chapter",  "interview", "scene",   "verse",    "evidence",
    "method",   "review",   "summary",  "context",  "history",  "model",    "value",
    "process",  "question", "answer",   "detail",   "example",  "theory",   "impact"};

}  // namespace

std::optional<std::size_t> doc_type_group(std::string_view normalized) {
  for (std::size_t g = 0; g < kDocTypes.size(); ++g) {
    for (auto s : kDocTypes[g]) {
      if (s == normalized) return g;
    }
  }
  return std::nullopt;
}

std::span<const std::string_view> field_values(MetaField field) {
  switch (field) {
    case MetaField::kTasksOrRequests: return kTasks;
    case MetaField::kUserIntention: return kIntentions;
    case MetaField::kUserProfile: return kProfiles;
    case MetaField::kLanguageStyle: return kStyles;
    case MetaField::kContext: return kContexts;
    case MetaField::kKnowledgeForUser: return kUserKnowledge;
    case MetaField::kKnowledgeForChatbot: return kBotKnowledge;
    case MetaField::kLongContextCapability: return kCapabilities;
    case MetaField::kOutputFormat: return kFormats;
    case MetaField::kSentiment: return kSentiments;
    case MetaField::kConstraint: return kConstraints;
    default: return {};
  }
}

std::span<const std::string_view> filler_words() { return kFiller; }

}  // namespace wildlong::vocab
