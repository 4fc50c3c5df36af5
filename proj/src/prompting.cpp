#include "tkgf/prompting.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include <json.hpp>

#include "tkgf/hashing.hpp"
#include "tkgf/rng.hpp"

namespace tkgf {

std::string_view to_string(KnowledgeStrategy s) {
  switch (s) {
    case KnowledgeStrategy::relevant: return "relevant";
    case KnowledgeStrategy::none: return "none";
    case KnowledgeStrategy::random: return "random";
    case KnowledgeStrategy::popular: return "popular";
  }
  return "relevant";
}

KnowledgeStrategy parse_knowledge_strategy(std::string_view s) {
  if (s == "relevant") return KnowledgeStrategy::relevant;
  if (s == "none") return KnowledgeStrategy::none;
  if (s == "random") return KnowledgeStrategy::random;
  if (s == "popular") return KnowledgeStrategy::popular;
  throw std::invalid_argument("unknown knowledge strategy '" + std::string(s) + "'");
}

std::string_view to_string(Section s) {
  switch (s) {
    case Section::history: return "History";
    case Section::web: return "Web";
    case Section::summary: return "Summary";
    case Section::question: return "Question";
  }
  return "Question";
}

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::tkg: return "tkg";
    case Provenance::web: return "web";
    case Provenance::pllm: return "pllm";
    case Provenance::query: return "query";
  }
  return "query";
}

void PromptConfig::validate() const {
  if (m < 1) throw std::invalid_argument("prompt history window m must be >= 1");
  if (similarity_threshold < -1.0 || similarity_threshold > 1.0)
    throw std::invalid_argument("similarity threshold must lie in [-1, 1]");
  if (chunk_max_tokens == 0 || chunk_overlap >= chunk_max_tokens)
    throw std::invalid_argument("chunking needs 0 <= overlap < max tokens");
}

// ------------------------------------------------------------------- prompt

const std::string& KnowledgePrompt::question() const {
  if (lines.empty() || lines.back().section != Section::question)
    throw std::logic_error("prompt has no question line");
  return lines.back().text;
}

bool KnowledgePrompt::has_section(Section s) const {
  return std::any_of(lines.begin(), lines.end(), [&](const PromptLine& l) { return l.section == s; });
}

std::vector<const PromptLine*> KnowledgePrompt::section(Section s) const {
  std::vector<const PromptLine*> out;
  for (const auto& l : lines)
    if (l.section == s) out.push_back(&l);
  return out;
}

std::string KnowledgePrompt::to_text() const {
  std::string out;
  std::optional<Section> current;
  for (const auto& l : lines) {
    if (l.section == Section::question) {
      out += "Q: " + l.text + '\n';
      continue;
    }
    if (current != l.section) {
      out += "### ";
      out += to_string(l.section);
      out += '\n';
      current = l.section;
    }
    out += l.text + '\n';
  }
  return out;
}

std::string KnowledgePrompt::to_json() const {
  nlohmann::json j;
  j["t_q"] = t_q.step;
  j["t_q_text"] = t_q.axis.render(t_q.step);
  j["lines"] = nlohmann::json::array();
  for (const auto& l : lines) {
    nlohmann::json line{{"section", to_string(l.section)}, {"source", to_string(l.source)}, {"text", l.text}};
    if (l.fact) line["fact"] = {{"s", l.fact->s}, {"r", l.fact->r}, {"o", l.fact->o}, {"t", l.fact->t}};
    j["lines"].push_back(std::move(line));
  }
  return j.dump();
}

// ----------------------------------------------------------------- assembly

namespace {

std::uint64_t query_seed(std::uint64_t base, const Query& q) {
  return fnv1a64(std::to_string(q.s) + ',' + std::to_string(q.r) + ',' + std::to_string(q.t), base);
}

// Facts from all subjects inside the window, sampled to the given size.
std::vector<Quadruple> random_facts(const TemporalKG& kg, const Query& q, int m, std::size_t count,
                                    std::uint64_t seed) {
  std::vector<Quadruple> pool;
  for (Step t = q.t - m; t < q.t; ++t)
    for (std::size_t i : kg.at_step(t)) pool.push_back(kg.quadruples()[i]);
  std::sort(pool.begin(), pool.end(), ChronologicalLess{});
  if (pool.size() > count) {
    Rng rng(seed);
    // Partial Fisher-Yates: the first `count` slots become the sample.
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(count);
    std::sort(pool.begin(), pool.end(), ChronologicalLess{});
  }
  return pool;
}

// Facts of s_q on the relations (among those s_q uses in the window) that are
// most frequent across the whole graph before t_q.
std::vector<Quadruple> popular_facts(const TemporalKG& kg, const HistoricalContext& window,
                                     const Query& q, std::size_t n_relations) {
  std::map<RelationId, std::size_t> global;
  for (const auto& f : kg.quadruples())
    if (f.t < q.t) ++global[f.r];
  std::vector<RelationId> rels;
  for (const auto& cf : window.facts)
    if (std::find(rels.begin(), rels.end(), cf.fact.r) == rels.end()) rels.push_back(cf.fact.r);
  std::sort(rels.begin(), rels.end(), [&](RelationId a, RelationId b) {
    if (global[a] != global[b]) return global[a] > global[b];
    return a < b;
  });
  if (rels.size() > n_relations) rels.resize(n_relations);
  std::vector<Quadruple> out;
  for (const auto& cf : window.facts)
    if (std::find(rels.begin(), rels.end(), cf.fact.r) != rels.end()) out.push_back(cf.fact);
  return out;
}

RelevancePeriod period_for(const TimeAxis& axis, Step t_q, UndatedPolicy policy) {
  if (axis.has_calendar()) return relevance_period_before(axis, t_q, policy);
  // Without a calendar no date can be placed before t_q, so every dated
  // sentence is treated as out of range.
  return {CivilDate{1, 1, 1}, policy, ResolveMode::interval_start};
}

// Runs untrusted text (web or PLLM output) through the future-fact filter
// line by line and returns the surviving lines.
std::vector<std::string> filtered_lines(const std::string& text, const RelevancePeriod& period) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const FilterResult r = filter_future({"", line, std::nullopt}, period);
    std::string kept;
    for (const auto& s : r.retained) {
      if (!kept.empty()) kept += ' ';
      kept += s.sentence;
    }
    if (!kept.empty()) out.push_back(std::move(kept));
  }
  return out;
}

}  // namespace

KnowledgePrompt assemble(const Query& query, const TemporalKG& kg, std::span<const Passage> passages,
                         const Embedder& embedder, PllmClient* pllm, const PromptConfig& cfg) {
  cfg.validate();
  const Query q = canonical_query(query, kg);
  KnowledgePrompt prompt;
  prompt.t_q = kg.timestamp(q.t);

  const QueryTemplater templater = pllm ? cfg.query_templater : QueryTemplater::builtin_template;
  const std::string question = verbalize_query(q, kg, templater, pllm);

  RetrievalOptions ropts;
  ropts.max_facts = cfg.max_facts;
  ropts.with_timestamps = cfg.with_timestamps;
  ropts.include_reciprocal_facts = cfg.include_reciprocal_facts;
  const HistoricalContext window = retrieve_context(kg, q, cfg.m, cfg.context_mode, ropts);
  const HistoricalContext relevant = reject_irrelevant(window, question, embedder, cfg.similarity_threshold);

  if (cfg.use_hkr) {
    std::vector<Quadruple> facts;
    switch (cfg.knowledge_strategy) {
      case KnowledgeStrategy::relevant:
        for (const auto& f : relevant.facts) facts.push_back(f.fact);
        break;
      case KnowledgeStrategy::random:
        facts = random_facts(kg, q, cfg.m, relevant.facts.size(), query_seed(cfg.sample_seed, q));
        break;
      case KnowledgeStrategy::popular:
        facts = popular_facts(kg, window, q, cfg.popular_relations);
        break;
      case KnowledgeStrategy::none:
        break;
    }
    if (cfg.shuffle_facts) {
      Rng rng(query_seed(cfg.shuffle_seed, q));
      rng.shuffle(std::span<Quadruple>(facts));
    }
    for (const auto& f : facts)
      prompt.lines.push_back({Section::history, Provenance::tkg, verbalize_fact(f, cfg.with_timestamps, kg), f});
  }

  const RelevancePeriod period = period_for(kg.axis(), q.t, cfg.undated_policy);

  if (cfg.use_wsci && !passages.empty()) {
    std::vector<Passage> kept;
    for (const auto& p : passages) {
      FilterResult r = filter_future(p, period);
      if (!r.retained_text.empty()) kept.push_back({p.doc_id, std::move(r.retained_text), p.retrieved_at});
    }
    const auto chunks = chunk_passages(kept, embedder, cfg.chunk_max_tokens, cfg.chunk_overlap);
    for (const auto& sc : rank_chunks(embedder.embed(question), chunks, cfg.web_top_k))
      for (auto& line : filtered_lines(sc.chunk.text, period))
        prompt.lines.push_back({Section::web, Provenance::web, std::move(line), std::nullopt});
  }

  if (cfg.use_dtg && pllm) {
    try {
      Query asked = q;
      asked.verbalized = question;
      const std::string summary = generate_historical_summary(*pllm, kg, asked, relevant);
      for (auto& line : filtered_lines(summary, period))
        prompt.lines.push_back({Section::summary, Provenance::pllm, std::move(line), std::nullopt});
    } catch (const PllmError&) {
      // Summary is optional; forecasting proceeds without it.
    }
  }

  prompt.lines.push_back({Section::question, Provenance::query, question, std::nullopt});

  if (auto v = leakage_check(prompt))
    throw LeakageError("leakage in assembled prompt, line " + std::to_string(v->line) + " (" +
                       std::string(to_string(v->source)) + "): " + v->reason + ": " + v->text);
  return prompt;
}

std::optional<LeakageViolation> leakage_check(const KnowledgePrompt& prompt) {
  const TimeAxis& axis = prompt.t_q.axis;
  const Step t_q = prompt.t_q.step;
  const std::optional<CivilDate> threshold =
      axis.has_calendar() ? std::optional(relevance_period_before(axis, t_q).threshold) : std::nullopt;

  auto scan = [&](std::string_view text) -> std::optional<std::string> {
    for (const auto& span : sentence_spans(text)) {
      const DatedSentence ds = tag_and_resolve(text.substr(span.begin, span.end - span.begin));
      for (const auto& d : ds.resolved_dates) {
        if (!threshold) return "dated text " + format_iso(d) + " cannot be ordered against a non-calendar query time";
        if (d > *threshold) return "date " + format_iso(d) + " is not before the query time " + axis.render(t_q);
      }
    }
    return std::nullopt;
  };

  for (std::size_t i = 0; i < prompt.lines.size(); ++i) {
    const PromptLine& line = prompt.lines[i];
    if (line.section == Section::question) continue;
    if (line.source == Provenance::tkg) {
      if (line.fact && line.fact->t >= t_q)
        return LeakageViolation{i, line.source, line.text,
                                "fact step " + std::to_string(line.fact->t) + " >= query step " + std::to_string(t_q)};
      // Only the rendered timestamp is temporal; entity labels are names.
      if (threshold) {
        const auto bracket = line.text.find('[');
        if (auto reason = scan(std::string_view(line.text).substr(0, bracket)))
          return LeakageViolation{i, line.source, line.text, *reason};
      }
      continue;
    }
    if (auto reason = scan(line.text)) return LeakageViolation{i, line.source, line.text, *reason};
  }
  return std::nullopt;
}

}  // namespace tkgf
