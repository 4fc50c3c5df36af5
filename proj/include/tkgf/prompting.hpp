#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tkgf/embedding.hpp"
#include "tkgf/pllm_client.hpp"
#include "tkgf/retrieval.hpp"
#include "tkgf/temporal_filter.hpp"
#include "tkgf/tkg_store.hpp"

namespace tkgf {

enum class KnowledgeStrategy { relevant, none, random, popular };

std::string_view to_string(KnowledgeStrategy s);
KnowledgeStrategy parse_knowledge_strategy(std::string_view s);

struct PromptConfig {
  bool use_hkr = true;   // historical facts from the graph
  bool use_wsci = true;  // web passages
  bool use_dtg = true;   // PLLM summary
  bool with_timestamps = true;
  bool shuffle_facts = false;
  std::uint64_t shuffle_seed = 0;
  KnowledgeStrategy knowledge_strategy = KnowledgeStrategy::relevant;
  int m = 25;
  ContextMode context_mode = ContextMode::entity_pair_union;
  std::optional<std::size_t> max_facts;
  bool include_reciprocal_facts = true;
  double similarity_threshold = 0.0;
  std::uint64_t sample_seed = 0;        // random strategy
  std::size_t popular_relations = 1;    // popular strategy
  std::size_t web_top_k = 3;
  std::size_t chunk_max_tokens = 64;
  std::size_t chunk_overlap = 8;
  UndatedPolicy undated_policy = UndatedPolicy::retain;
  QueryTemplater query_templater = QueryTemplater::builtin_template;

  void validate() const;
};

enum class Section { history, web, summary, question };
enum class Provenance { tkg, web, pllm, query };

std::string_view to_string(Section s);
std::string_view to_string(Provenance p);

struct PromptLine {
  Section section = Section::question;
  Provenance source = Provenance::query;
  std::string text;
  std::optional<Quadruple> fact;  // set for tkg lines
};

// Lines in section order history, web, summary, question. The question line
// is always present and last.
struct KnowledgePrompt {
  std::vector<PromptLine> lines;
  Timestamp t_q;

  const std::string& question() const;
  bool has_section(Section s) const;
  std::vector<const PromptLine*> section(Section s) const;

  // `### <Section>` headers over each non-empty section, then `Q: <question>`.
  std::string to_text() const;
  // Same content with per-line provenance tags.
  std::string to_json() const;
};

class LeakageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

KnowledgePrompt assemble(const Query& query, const TemporalKG& kg, std::span<const Passage> passages,
                         const Embedder& embedder, PllmClient* pllm, const PromptConfig& cfg);

struct LeakageViolation {
  std::size_t line = 0;
  Provenance source = Provenance::tkg;
  std::string text;
  std::string reason;
};

// First knowledge line that refers to the query step or later. Graph lines are
// checked by their fact step and rendered timestamp; web and summary lines by
// every date the temporal tagger resolves in them.
std::optional<LeakageViolation> leakage_check(const KnowledgePrompt& prompt);

}  // namespace tkgf
