#include "tkgf/retrieval.hpp"

#include <algorithm>
#include <stdexcept>

namespace tkgf {

Query canonical_query(const Query& q, const TemporalKG& kg) {
  if (q.direction == QueryDirection::object_missing) return q;
  if (!kg.has_reciprocals())
    throw std::invalid_argument("subject-missing queries need a store with reciprocal relations");
  Query out = q;
  out.r = kg.inverse(q.r);
  out.direction = QueryDirection::object_missing;
  out.verbalized.reset();
  return out;
}

std::string_view to_string(ContextMode mode) {
  switch (mode) {
    case ContextMode::entity_pair_union: return "entity_pair_union";
    case ContextMode::single_entity_only: return "single_entity_only";
    case ContextMode::entity_pair_only: return "entity_pair_only";
  }
  return "entity_pair_union";
}

ContextMode parse_context_mode(std::string_view s) {
  if (s == "entity_pair_union") return ContextMode::entity_pair_union;
  if (s == "single_entity_only") return ContextMode::single_entity_only;
  if (s == "entity_pair_only") return ContextMode::entity_pair_only;
  throw std::invalid_argument("unknown context mode '" + std::string(s) + "'");
}

std::string verbalize_fact(const Quadruple& q, bool with_timestamp, const TemporalKG& kg) {
  std::string out;
  if (with_timestamp) out = kg.axis().render(q.t) + ": ";
  out += '[';
  out += kg.entities().label(q.s);
  out += ", ";
  out += kg.relations().label(q.r);
  out += ", ";
  out += kg.entities().label(q.o);
  out += ']';
  return out;
}

HistoricalContext retrieve_context(const TemporalKG& kg, const Query& query, int m, ContextMode mode,
                                   const RetrievalOptions& opts) {
  if (m < 1) throw std::invalid_argument("history window m must be >= 1");
  const Query q = canonical_query(query, kg);
  if (q.s >= kg.entities().size()) throw std::out_of_range("query subject id not in store");
  if (q.r >= kg.relations().size()) throw std::out_of_range("query relation id not in store");

  const Step lo = q.t - m;
  const Step hi = q.t - 1;
  auto in_window = [&](const Quadruple& f) { return f.t >= lo && f.t <= hi && f.t < q.t; };

  // The (s_q, r_q) facts are a subset of the s_q facts, so the union is the
  // subject index itself.
  const auto refs = mode == ContextMode::entity_pair_only ? kg.by_subject_relation(q.s, q.r)
                                                          : kg.by_subject(q.s);
  std::vector<Quadruple> facts;
  for (std::size_t i : refs) {
    const Quadruple& f = kg.quadruples()[i];
    if (!in_window(f)) continue;
    if (!opts.include_reciprocal_facts && kg.is_reciprocal(f.r) && f.r != q.r) continue;
    facts.push_back(f);
  }
  std::sort(facts.begin(), facts.end(), ChronologicalLess{});
  if (opts.max_facts && facts.size() > *opts.max_facts)
    facts.erase(facts.begin(), facts.end() - static_cast<std::ptrdiff_t>(*opts.max_facts));

  HistoricalContext ctx;
  ctx.window_m = m;
  ctx.mode = mode;
  ctx.t_q = q.t;
  ctx.facts.reserve(facts.size());
  for (const auto& f : facts) ctx.facts.push_back({f, verbalize_fact(f, opts.with_timestamps, kg)});
  return ctx;
}

namespace {

std::string builtin_query_text(const Query& q, const TemporalKG& kg) {
  return "What is the " + kg.relations().label(q.r) + " of " + kg.entities().label(q.s) + " on " +
         kg.axis().render(q.t) + "?";
}

}  // namespace

std::string verbalize_query(const Query& query, const TemporalKG& kg, QueryTemplater templater,
                            PllmClient* client) {
  const Query q = canonical_query(query, kg);
  const std::string builtin = builtin_query_text(q, kg);
  if (templater == QueryTemplater::builtin_template || client == nullptr) return builtin;
  const std::string prompt = "Rewrite the temporal knowledge graph query (" + kg.entities().label(q.s) +
                             ", " + kg.relations().label(q.r) + ", ?, " + kg.axis().render(q.t) +
                             ") as one natural-language question.";
  try {
    std::string text = client->complete(prompt).text;
    if (text.empty() || text.find('\n') != std::string::npos) return builtin;
    return text;
  } catch (const PllmError&) {
    return builtin;
  }
}

HistoricalContext reject_irrelevant(const HistoricalContext& context, const std::string& query_text,
                                    const Embedder& embedder, double threshold) {
  if (threshold < -1.0 || threshold > 1.0)
    throw std::invalid_argument("similarity threshold must lie in [-1, 1]");
  HistoricalContext out = context;
  if (threshold <= -1.0) return out;
  const EmbeddingVector qv = embedder.embed(query_text);
  out.facts.clear();
  for (const auto& f : context.facts)
    if (cosine(qv, embedder.embed(f.text)) >= threshold) out.facts.push_back(f);
  return out;
}

SummaryRequest make_summary_request(const TemporalKG& kg, const Query& query,
                                    const HistoricalContext& context) {
  const Query q = canonical_query(query, kg);
  SummaryRequest req;
  req.subject = kg.entities().label(q.s);
  req.question = query.verbalized ? *query.verbalized : builtin_query_text(q, kg);
  const auto cutoff = kg.axis().end_date(q.t - 1);
  req.cutoff = cutoff ? format_iso(*cutoff) : "step " + std::to_string(q.t - 1);
  for (const auto& f : context.facts)
    if (f.fact.t < q.t) req.facts.push_back(f.text);
  return req;
}

std::string generate_historical_summary(PllmClient& client, const TemporalKG& kg, const Query& query,
                                        const HistoricalContext& context) {
  return client.summarize(make_summary_request(kg, query, context));
}

}  // namespace tkgf
