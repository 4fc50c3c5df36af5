#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tkgf/calendar.hpp"
#include "tkgf/embedding.hpp"

namespace tkgf {

struct Passage {
  std::string doc_id;
  std::string text;
  std::optional<CivilDate> retrieved_at;  // document reference date
};

struct TextSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
};

// Sentence boundaries fall after `.`, `!` or `?` (plus closing quotes or
// brackets) when followed by whitespace and a capital letter, and at line
// breaks. Known abbreviations never end a sentence. Spans exclude surrounding
// whitespace; the text between consecutive spans is whitespace only.
std::vector<TextSpan> sentence_spans(std::string_view text);
std::vector<std::string> tokenize_sentences(std::string_view text);

// Partial dates (month or year precision) resolve to the first or last day of
// the interval they name.
enum class ResolveMode { interval_start, interval_end };

enum class MentionKind { absolute, partial, relative };

struct TemporalMention {
  std::string text;
  std::size_t begin = 0;  // offsets into the sentence
  std::size_t end = 0;
  MentionKind kind = MentionKind::absolute;
  std::optional<CivilDate> date;  // empty when a relative mention lacks a reference
};

struct DatedSentence {
  std::string sentence;
  std::size_t offset = 0;  // offset of the sentence in its passage
  std::vector<TemporalMention> mentions;
  std::vector<CivilDate> resolved_dates;
  std::vector<std::string> diagnostics;

  bool dated() const { return !resolved_dates.empty(); }
};

// Recognizes YYYY-MM-DD, "Month D, YYYY", "D Month YYYY", "Month YYYY", bare
// years 1900-2100 and a small set of relative expressions ("next year",
// "3 days ago", "yesterday", ...), case-insensitively. Relative expressions
// and year-less "Month D" resolve only against `reference`.
DatedSentence tag_and_resolve(std::string_view sentence,
                              std::optional<CivilDate> reference = std::nullopt,
                              ResolveMode mode = ResolveMode::interval_start);

enum class UndatedPolicy { retain, drop };

struct RelevancePeriod {
  CivilDate threshold;  // sentences dated after this day are dropped
  UndatedPolicy undated = UndatedPolicy::retain;
  ResolveMode mode = ResolveMode::interval_start;
};

// Period ending on the last day before the interval of step `t_q`.
RelevancePeriod relevance_period_before(const TimeAxis& axis, Step t_q,
                                        UndatedPolicy undated = UndatedPolicy::retain);

struct Diagnostic {
  std::string doc_id;
  std::string sentence;
  std::string reason;
};

struct FilterResult {
  std::string retained_text;
  std::vector<DatedSentence> retained;
  std::vector<DatedSentence> dropped;
  std::vector<Diagnostic> diagnostics;
};

FilterResult filter_future(const Passage& passage, const RelevancePeriod& period);

struct Chunk {
  std::string text;
  std::string doc_id;
  std::size_t index = 0;  // position within its document
  EmbeddingVector vector;
};

// Whitespace-token windows of at most max_tokens, consecutive windows sharing
// `overlap` tokens. Windows end on sentence boundaries unless a sentence is
// longer than the window.
std::vector<Chunk> chunk_passages(const std::vector<Passage>& passages, const Embedder& embedder,
                                  std::size_t max_tokens, std::size_t overlap);

struct ScoredChunk {
  Chunk chunk;
  double similarity = 0.0;
};

// Top-k by cosine similarity, ties by (doc_id, index).
std::vector<ScoredChunk> rank_chunks(const EmbeddingVector& query, const std::vector<Chunk>& chunks,
                                     std::size_t k);

// JSON-lines passage fixtures: {"doc_id", "text", "retrieved_at"}.
std::vector<Passage> read_passages_jsonl(std::istream& in);
void write_passages_jsonl(std::ostream& out, const std::vector<Passage>& passages);
void write_diagnostics_jsonl(std::ostream& out, const std::vector<Diagnostic>& diagnostics);

}  // namespace tkgf
