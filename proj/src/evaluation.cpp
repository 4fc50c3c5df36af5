#include "tkgf/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "tkgf/hashing.hpp"
#include "tkgf/rng.hpp"

namespace tkgf {

std::string_view to_string(SettingKind k) { return k == SettingKind::single_step ? "single_step" : "multi_step"; }

SettingKind parse_setting_kind(std::string_view s) {
  if (s == "single" || s == "single_step") return SettingKind::single_step;
  if (s == "multi" || s == "multi_step") return SettingKind::multi_step;
  throw std::invalid_argument("unknown setting '" + std::string(s) + "'");
}

void ForecastSetting::validate() const {
  if (dt < 1) throw std::invalid_argument("dt must be >= 1");
  if (DT < dt) throw std::invalid_argument("DT must be >= dt");
}

std::string ForecastSetting::label() const {
  return std::string(to_string(kind)) + "(dt=" + std::to_string(dt) + ",DT=" + std::to_string(DT) + ")";
}

std::string EvaluationReport::to_json() const {
  nlohmann::ordered_json j;
  j["setting"] = setting;
  j["mrr"] = mrr ? nlohmann::ordered_json(*mrr) : nlohmann::ordered_json(nullptr);
  nlohmann::ordered_json h = nlohmann::ordered_json::object();
  for (const auto& [k, v] : hits) h[std::to_string(k)] = n_queries ? nlohmann::ordered_json(v) : nullptr;
  j["hits"] = h;
  j["n_queries"] = n_queries;
  j["excluded"] = excluded;
  j["config_fingerprint"] = config_fingerprint;
  if (!notices.empty()) j["notices"] = notices;
  return j.dump(2);
}

double mrr(std::span<const std::size_t> ranks) {
  if (ranks.empty()) throw std::invalid_argument("mrr of an empty rank list");
  double sum = 0;
  for (auto r : ranks) {
    if (r == 0) throw std::invalid_argument("ranks are 1-based");
    sum += 1.0 / static_cast<double>(r);
  }
  return sum / static_cast<double>(ranks.size());
}

double hits_at_k(std::span<const std::size_t> ranks, std::size_t k) {
  if (ranks.empty()) throw std::invalid_argument("hits of an empty rank list");
  if (k == 0) throw std::invalid_argument("k must be >= 1");
  std::size_t hits = 0;
  for (auto r : ranks) {
    if (r == 0) throw std::invalid_argument("ranks are 1-based");
    hits += r <= k;
  }
  return static_cast<double>(hits) / static_cast<double>(ranks.size());
}

std::vector<EntityId> time_aware_filter(std::span<const EntityId> ranking, std::span<const EntityId> true_objects,
                                        EntityId target) {
  if (std::find(ranking.begin(), ranking.end(), target) == ranking.end())
    throw std::invalid_argument("target entity is not in the ranking");
  const std::set<EntityId> remove(true_objects.begin(), true_objects.end());
  std::vector<EntityId> out;
  for (EntityId e : ranking)
    if (e == target || !remove.count(e)) out.push_back(e);
  return out;
}

std::size_t filtered_rank(std::span<const EntityId> ranking, std::span<const EntityId> true_objects,
                          EntityId target) {
  const auto kept = time_aware_filter(ranking, true_objects, target);
  return static_cast<std::size_t>(std::find(kept.begin(), kept.end(), target) - kept.begin()) + 1;
}

// ---------------------------------------------------------------- predictors

std::vector<double> OraclePredictor::score(const KnowledgePrompt&, const Query& q) const {
  std::vector<double> s(truth_.entities().size(), 0.0);
  for (std::size_t i : truth_.by_subject_relation(q.s, q.r)) {
    const auto& f = truth_.quadruples()[i];
    if (f.t == q.t) s.at(f.o) = 1.0;
  }
  return s;
}

std::vector<double> UniformRandomPredictor::score(const KnowledgePrompt&, const Query& q) const {
  const std::string key = std::to_string(q.s) + ',' + std::to_string(q.r) + ',' + std::to_string(q.t);
  Rng rng(fnv1a64(key, seed_));
  std::vector<double> s(n_);
  for (auto& v : s) v = rng.uniform();
  return s;
}

std::vector<double> FrequencyPredictor::score(const KnowledgePrompt& prompt, const Query& q) const {
  std::vector<double> s(n_, 0.0);
  for (const auto* line : prompt.section(Section::history)) {
    if (!line->fact || line->fact->s != q.s || line->fact->o >= n_) continue;
    s[line->fact->o] += line->fact->r == q.r ? 1.0 : 1e-3;
  }
  return s;
}

std::vector<double> ModelPredictor::score(const KnowledgePrompt& prompt, const Query&) const {
  const auto ids = tokenize_prompt(prompt, ckpt_->vocab, ckpt_->params.config.max_seq_len);
  const auto scores = forward(ckpt_->params, std::span<const TokenId>(ids));
  return {scores.begin(), scores.end()};
}

// ---------------------------------------------------------------- harness

EvaluationReport aggregate(const std::vector<RankRecord>& records, std::size_t excluded, std::string setting,
                           std::string fingerprint) {
  EvaluationReport rep;
  rep.setting = std::move(setting);
  rep.config_fingerprint = std::move(fingerprint);
  rep.excluded = excluded;
  rep.n_queries = records.size();
  std::vector<std::size_t> ranks;
  for (const auto& r : records) ranks.push_back(r.filtered_rank);
  for (int k : {1, 3, 10}) rep.hits[k] = 0.0;
  if (ranks.empty()) {
    rep.notices.push_back("no queries were scored");
    return rep;
  }
  rep.mrr = mrr(ranks);
  for (int k : {1, 3, 10}) rep.hits[k] = hits_at_k(ranks, static_cast<std::size_t>(k));
  return rep;
}

namespace {

struct Harness {
  const Predictor& predictor;
  const EvalContext& ctx;
  TemporalKG all;
  std::vector<Quadruple> queries;  // test facts to answer, chronological

  Harness(const Predictor& p, const EvalContext& c) : predictor(p), ctx(c) {
    if (!c.split) throw std::invalid_argument("evaluation needs a dataset split");
    if (!c.embedder) throw std::invalid_argument("evaluation needs an embedder");
    all = c.split->all();
    std::vector<Quadruple> pool = c.inductive_only ? inductive_subset(c.split->train, c.split->test)
                                                   : c.split->test.quadruples();
    for (const auto& q : pool)
      if (c.bidirectional || !c.split->test.is_reciprocal(q.r)) queries.push_back(q);
    std::sort(queries.begin(), queries.end(), ChronologicalLess{});
  }

  std::vector<Step> query_steps() const {
    std::vector<Step> steps;
    for (const auto& q : queries)
      if (steps.empty() || steps.back() != q.t) steps.push_back(q.t);
    return steps;
  }

  std::vector<Quadruple> queries_at(Step t) const {
    std::vector<Quadruple> out;
    for (const auto& q : queries)
      if (q.t == t) out.push_back(q);
    return out;
  }

  TemporalKG knowledge(Step up_to, const std::vector<Quadruple>& extra) const {
    std::vector<Quadruple> facts;
    for (const auto& f : all.quadruples())
      if (f.t <= up_to) facts.push_back(f);
    facts.insert(facts.end(), extra.begin(), extra.end());
    return all.with_quadruples(std::move(facts));
  }

  std::vector<EntityId> true_objects(EntityId s, RelationId r, Step t) const {
    std::vector<EntityId> out;
    for (std::size_t i : all.by_subject_relation(s, r))
      if (all.quadruples()[i].t == t) out.push_back(all.quadruples()[i].o);
    return out;
  }

  // Answers the given facts of one step against `kb`. Records ranks when
  // `out` is set; appends predicted facts when `predictions` is set.
  void answer(const TemporalKG& kb, const std::vector<Quadruple>& facts, EvaluationResult* out,
              std::vector<Quadruple>* predictions) const {
    std::map<std::pair<EntityId, RelationId>, std::vector<EntityId>> grouped;
    for (const auto& f : facts) grouped[{f.s, f.r}].push_back(f.o);
    for (const auto& [key, targets] : grouped) {
      const Step t = facts.front().t;
      const Query q{key.first, key.second, t, QueryDirection::object_missing, std::nullopt};
      std::vector<double> scores;
      try {
        const KnowledgePrompt prompt =
            assemble(q, kb, std::span<const Passage>(ctx.passages), *ctx.embedder, ctx.pllm, ctx.prompt);
        scores = predictor.score(prompt, q);
        if (scores.size() != all.entities().size()) throw std::runtime_error("predictor returned wrong score count");
      } catch (const std::exception& e) {
        if (out)
          for (std::size_t i = 0; i < targets.size(); ++i) out->failures.emplace_back(q, e.what());
        continue;
      }
      const Ranking ranking = rank_entities(std::span<const double>(scores));
      if (predictions)
        for (std::size_t i = 0; i < std::min(ctx.feedback_top_k, ranking.order.size()); ++i)
          predictions->push_back({q.s, q.r, ranking.order[i], t});
      if (!out) continue;
      const auto truth = true_objects(q.s, q.r, t);
      for (EntityId target : targets) {
        RankRecord rec;
        rec.query = q;
        if (all.is_reciprocal(q.r)) rec.query.direction = QueryDirection::subject_missing;
        rec.target = target;
        rec.raw_rank = ranking.rank.at(target);
        rec.filtered_rank = rec.raw_rank;
        for (EntityId e : truth)
          if (e != target && ranking.rank[e] < rec.raw_rank) --rec.filtered_rank;
        for (std::size_t i = 0; i < std::min(ctx.record_top, ranking.order.size()); ++i)
          rec.top.push_back({ranking.order[i], scores[ranking.order[i]]});
        out->records.push_back(std::move(rec));
      }
    }
  }

  void finish(EvaluationResult& r, const std::string& setting) const {
    auto notices = std::move(r.report.notices);
    r.report = aggregate(r.records, r.failures.size(), setting, ctx.fingerprint);
    notices.insert(notices.end(), r.report.notices.begin(), r.report.notices.end());
    if (ctx.inductive_only && queries.empty()) notices.push_back("split has no test facts with unseen entities");
    r.report.notices = std::move(notices);
  }
};

}  // namespace

EvaluationResult evaluate_single_step(const Predictor& predictor, const EvalContext& ctx) {
  const Harness h(predictor, ctx);
  EvaluationResult r;
  for (Step t : h.query_steps()) h.answer(h.knowledge(t - 1, {}), h.queries_at(t), &r, nullptr);
  h.finish(r, ForecastSetting{SettingKind::single_step, 1, 1}.label());
  return r;
}

EvaluationResult evaluate_multi_step(const Predictor& predictor, const EvalContext& ctx) {
  const Harness h(predictor, ctx);
  EvaluationResult r;
  std::vector<Quadruple> predicted;
  for (Step t : h.query_steps()) {
    std::vector<Quadruple> step_predictions;
    h.answer(h.knowledge(ctx.split->valid_end, predicted), h.queries_at(t), &r, &step_predictions);
    predicted.insert(predicted.end(), step_predictions.begin(), step_predictions.end());
  }
  h.finish(r, ForecastSetting{SettingKind::multi_step, 1, 1}.label());
  return r;
}

std::map<Step, EvaluationResult> evaluate_long_horizon(const Predictor& predictor, const EvalContext& ctx,
                                                       SettingKind kind, Step dt, const std::vector<Step>& horizons) {
  const Harness h(predictor, ctx);
  const auto steps = h.query_steps();
  std::map<Step, EvaluationResult> out;
  for (Step DT : horizons) {
    const ForecastSetting setting{kind, dt, DT};
    setting.validate();
    EvaluationResult r;
    bool any = false;
    for (Step tau : steps) {
      const Step origin = tau - DT;
      if (origin < ctx.split->valid_end) continue;
      any = true;
      std::vector<Quadruple> predicted;
      if (kind == SettingKind::multi_step) {
        for (Step s : steps) {
          if (s <= origin || s >= tau || (s - origin) % dt != 0) continue;
          std::vector<Quadruple> step_predictions;
          h.answer(h.knowledge(origin, predicted), h.queries_at(s), nullptr, &step_predictions);
          predicted.insert(predicted.end(), step_predictions.begin(), step_predictions.end());
        }
      }
      h.answer(h.knowledge(origin, predicted), h.queries_at(tau), &r, nullptr);
    }
    if (!any) {
      EvaluationResult skipped;
      skipped.report.notices.push_back("horizon DT=" + std::to_string(DT) + " exceeds the test range; skipped");
      h.finish(skipped, setting.label());
      out.emplace(DT, std::move(skipped));
      continue;
    }
    h.finish(r, setting.label());
    out.emplace(DT, std::move(r));
  }
  return out;
}

EvaluationResult evaluate(const Predictor& predictor, const EvalContext& ctx, const ForecastSetting& setting) {
  setting.validate();
  if (setting.dt == 1 && setting.DT == 1)
    return setting.kind == SettingKind::single_step ? evaluate_single_step(predictor, ctx)
                                                    : evaluate_multi_step(predictor, ctx);
  auto reports = evaluate_long_horizon(predictor, ctx, setting.kind, setting.dt, {setting.DT});
  return std::move(reports.begin()->second);
}

// ---------------------------------------------------------------- records

namespace {

nlohmann::ordered_json query_json(const Query& q) {
  return {{"s", q.s},
          {"r", q.r},
          {"t", q.t},
          {"direction", q.direction == QueryDirection::object_missing ? "object_missing" : "subject_missing"}};
}

}  // namespace

void write_rank_records(std::ostream& out, const EvaluationResult& result) {
  for (const auto& r : result.records) {
    nlohmann::ordered_json j;
    j["query"] = query_json(r.query);
    j["target"] = r.target;
    j["raw_rank"] = r.raw_rank;
    j["filtered_rank"] = r.filtered_rank;
    j["top10"] = nlohmann::ordered_json::array();
    for (const auto& e : r.top) j["top10"].push_back({{"entity", e.entity}, {"score", e.score}});
    out << j.dump() << '\n';
  }
  for (const auto& [q, reason] : result.failures) {
    nlohmann::ordered_json j;
    j["excluded"] = true;
    j["query"] = query_json(q);
    j["reason"] = reason;
    out << j.dump() << '\n';
  }
}

EvaluationReport replay_records(std::istream& in, std::string setting, std::string fingerprint) {
  std::vector<RankRecord> records;
  std::size_t excluded = 0;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(e.what(), n);
    }
    if (j.value("excluded", false)) {
      ++excluded;
      continue;
    }
    RankRecord r;
    r.query.s = j.at("query").at("s");
    r.query.r = j.at("query").at("r");
    r.query.t = j.at("query").at("t");
    r.target = j.at("target");
    r.raw_rank = j.at("raw_rank");
    r.filtered_rank = j.at("filtered_rank");
    records.push_back(std::move(r));
  }
  return aggregate(records, excluded, std::move(setting), std::move(fingerprint));
}

// ---------------------------------------------------------------- ablation

std::vector<AblationVariant> standard_variants(const PromptConfig& base, const std::vector<std::string>& names) {
  std::vector<AblationVariant> out;
  for (const auto& name : names) {
    AblationVariant v{name, base, true};
    PromptConfig& p = v.prompt;
    if (name == "full") {
    } else if (name == "wo_hkr") {
      p.use_hkr = false;
    } else if (name == "wo_wsci") {
      p.use_wsci = false;
    } else if (name == "wo_dtg") {
      p.use_dtg = false;
    } else if (name == "nk") {
      p.knowledge_strategy = KnowledgeStrategy::none;
    } else if (name == "rk") {
      p.knowledge_strategy = KnowledgeStrategy::random;
    } else if (name == "pk") {
      p.knowledge_strategy = KnowledgeStrategy::popular;
    } else if (name == "no_ts") {
      p.with_timestamps = false;
    } else if (name == "no_ts_rs") {
      p.with_timestamps = false;
      p.shuffle_facts = true;
    } else if (name.starts_with("hl") && name.size() > 2 &&
               name.find_first_not_of("0123456789", 2) == std::string::npos) {
      p.m = std::stoi(name.substr(2));
    } else if (name == "single_entity") {
      p.context_mode = ContextMode::single_entity_only;
    } else if (name == "entity_pair") {
      p.context_mode = ContextMode::entity_pair_only;
    } else if (name == "unidirectional") {
      v.bidirectional = false;
    } else if (name == "bidirectional") {
      v.bidirectional = true;
    } else {
      throw std::invalid_argument("unknown ablation row '" + name + "'");
    }
    p.validate();
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<AblationRow> run_ablation(const std::vector<AblationVariant>& variants, const PredictorFactory& factory,
                                      const EvalContext& ctx, const ForecastSetting& setting) {
  std::vector<AblationRow> rows;
  for (const auto& v : variants) {
    EvalContext c = ctx;
    c.prompt = v.prompt;
    c.bidirectional = v.bidirectional;
    const auto predictor = factory(v);
    rows.push_back({v.name, evaluate(*predictor, c, setting).report});
  }
  return rows;
}

std::string ablation_table(const std::vector<AblationRow>& rows) {
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-16s %8s %8s %8s %8s %8s %8s\n", "variant", "MRR", "H@1", "H@3", "H@10",
                "queries", "excluded");
  out << buf;
  for (const auto& r : rows) {
    const auto& rep = r.report;
    std::snprintf(buf, sizeof buf, "%-16s %8.4f %8.4f %8.4f %8.4f %8zu %8zu\n", r.name.c_str(), rep.mrr.value_or(0.0),
                  rep.hits.at(1), rep.hits.at(3), rep.hits.at(10), rep.n_queries, rep.excluded);
    out << buf;
  }
  return out.str();
}

std::string ablation_json(const std::vector<AblationRow>& rows) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json row;
    row["variant"] = r.name;
    row["report"] = nlohmann::ordered_json::parse(r.report.to_json());
    j.push_back(std::move(row));
  }
  return j.dump(2);
}

}  // namespace tkgf
