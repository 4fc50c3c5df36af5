#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "tkgf/embedding.hpp"
#include "tkgf/pllm_client.hpp"
#include "tkgf/tkg_store.hpp"

namespace tkgf {

enum class QueryDirection { object_missing, subject_missing };

// (s, r, ?, t). A subject_missing query (?, r, s, t) stores the known object
// in `s`; canonical_query rewrites it onto the reciprocal relation.
struct Query {
  EntityId s = 0;
  RelationId r = 0;
  Step t = 0;
  QueryDirection direction = QueryDirection::object_missing;
  std::optional<std::string> verbalized;
};

Query canonical_query(const Query& q, const TemporalKG& kg);

enum class ContextMode { entity_pair_union, single_entity_only, entity_pair_only };

std::string_view to_string(ContextMode mode);
ContextMode parse_context_mode(std::string_view s);

struct ContextFact {
  Quadruple fact;
  std::string text;
};

// Facts before t_q within [t_q - m, t_q - 1], ascending by step then (s, r, o).
struct HistoricalContext {
  std::vector<ContextFact> facts;
  int window_m = 25;
  ContextMode mode = ContextMode::entity_pair_union;
  Step t_q = 0;
};

struct RetrievalOptions {
  std::optional<std::size_t> max_facts;  // keeps the most recent facts
  bool with_timestamps = true;
  // Whether facts on reciprocal relations may enter the window.
  bool include_reciprocal_facts = true;
};

HistoricalContext retrieve_context(const TemporalKG& kg, const Query& query, int m, ContextMode mode,
                                   const RetrievalOptions& opts = {});

// `<date>: [<s>, <r>, <o>]`, or `[<s>, <r>, <o>]` without the timestamp.
std::string verbalize_fact(const Quadruple& q, bool with_timestamp, const TemporalKG& kg);

enum class QueryTemplater { builtin_template, pllm };

// Builtin: "What is the <r> of <s> on <date>?". The PLLM templater falls back
// to the builtin text when the client fails.
std::string verbalize_query(const Query& query, const TemporalKG& kg,
                            QueryTemplater templater = QueryTemplater::builtin_template,
                            PllmClient* client = nullptr);

// Keeps facts whose verbalization has cosine similarity >= threshold to the
// query text.
HistoricalContext reject_irrelevant(const HistoricalContext& context, const std::string& query_text,
                                    const Embedder& embedder, double threshold);

// Summary request built from the query and its (pre-t_q) context.
SummaryRequest make_summary_request(const TemporalKG& kg, const Query& query,
                                    const HistoricalContext& context);
std::string generate_historical_summary(PllmClient& client, const TemporalKG& kg, const Query& query,
                                        const HistoricalContext& context);

}  // namespace tkgf
