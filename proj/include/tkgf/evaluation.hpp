#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tkgf/checkpoint.hpp"
#include "tkgf/prompting.hpp"
#include "tkgf/retrieval.hpp"
#include "tkgf/tkg_store.hpp"

namespace tkgf {

enum class SettingKind { single_step, multi_step };

std::string_view to_string(SettingKind k);
SettingKind parse_setting_kind(std::string_view s);

struct ForecastSetting {
  SettingKind kind = SettingKind::single_step;
  Step dt = 1;
  Step DT = 1;

  void validate() const;
  std::string label() const;
};

struct ScoredEntity {
  EntityId entity = 0;
  double score = 0;
};

struct RankRecord {
  Query query;
  EntityId target = 0;
  std::size_t raw_rank = 0;
  std::size_t filtered_rank = 0;
  std::vector<ScoredEntity> top;  // best first
};

struct EvaluationReport {
  std::string setting;
  std::optional<double> mrr;  // empty when no query was scored
  std::map<int, double> hits;
  std::size_t n_queries = 0;
  std::size_t excluded = 0;
  std::string config_fingerprint;
  std::vector<std::string> notices;

  std::string to_json() const;
  bool operator==(const EvaluationReport&) const = default;
};

// Mean of 1/rank. Throws std::invalid_argument on an empty list or a rank of 0.
double mrr(std::span<const std::size_t> ranks);
// Share of ranks <= k.
double hits_at_k(std::span<const std::size_t> ranks, std::size_t k);

// Removes every true object other than the target from a ranking. Throws
// std::invalid_argument if the target is not ranked.
std::vector<EntityId> time_aware_filter(std::span<const EntityId> ranking, std::span<const EntityId> true_objects,
                                        EntityId target);
// 1-based rank of the target after filtering.
std::size_t filtered_rank(std::span<const EntityId> ranking, std::span<const EntityId> true_objects, EntityId target);

class Predictor {
 public:
  virtual ~Predictor() = default;
  // Scores of every entity for the prompt's question.
  virtual std::vector<double> score(const KnowledgePrompt& prompt, const Query& query) const = 0;
};

// Every true object at the query step scores 1, everything else 0.
class OraclePredictor final : public Predictor {
 public:
  explicit OraclePredictor(TemporalKG truth) : truth_(std::move(truth)) {}
  std::vector<double> score(const KnowledgePrompt& prompt, const Query& query) const override;

 private:
  TemporalKG truth_;
};

// Independent uniform scores, seeded per query.
class UniformRandomPredictor final : public Predictor {
 public:
  UniformRandomPredictor(std::size_t entity_count, std::uint64_t seed) : n_(entity_count), seed_(seed) {}
  std::vector<double> score(const KnowledgePrompt& prompt, const Query& query) const override;

 private:
  std::size_t n_;
  std::uint64_t seed_;
};

// Counts objects of history facts in the prompt that share the query's
// subject and relation; facts on other relations add a small tie-breaking
// weight.
class FrequencyPredictor final : public Predictor {
 public:
  explicit FrequencyPredictor(std::size_t entity_count) : n_(entity_count) {}
  std::vector<double> score(const KnowledgePrompt& prompt, const Query& query) const override;

 private:
  std::size_t n_;
};

class ModelPredictor final : public Predictor {
 public:
  explicit ModelPredictor(std::shared_ptr<const Checkpoint> ckpt) : ckpt_(std::move(ckpt)) {}
  std::vector<double> score(const KnowledgePrompt& prompt, const Query& query) const override;

 private:
  std::shared_ptr<const Checkpoint> ckpt_;
};

struct EvalContext {
  const DatasetSplit* split = nullptr;
  std::vector<Passage> passages;
  const Embedder* embedder = nullptr;
  PllmClient* pllm = nullptr;
  PromptConfig prompt;
  bool bidirectional = true;  // also ask queries on reciprocal relations
  bool inductive_only = false;
  std::size_t feedback_top_k = 1;  // predicted objects inserted per multi-step query
  std::size_t record_top = 10;
  std::string fingerprint;
};

struct EvaluationResult {
  EvaluationReport report;
  std::vector<RankRecord> records;
  std::vector<std::pair<Query, std::string>> failures;  // excluded queries and reasons
};

EvaluationReport aggregate(const std::vector<RankRecord>& records, std::size_t excluded, std::string setting,
                           std::string fingerprint);

EvaluationResult evaluate_single_step(const Predictor& predictor, const EvalContext& ctx);
EvaluationResult evaluate_multi_step(const Predictor& predictor, const EvalContext& ctx);
// Rolling origins: a query at test step tau is answered from ground truth up
// to tau - DT; in the multi-step setting predictions for the test steps
// origin + dt, origin + 2dt, ... < tau are fed back first. Horizons with no
// eligible test step are skipped with a notice.
std::map<Step, EvaluationResult> evaluate_long_horizon(const Predictor& predictor, const EvalContext& ctx,
                                                       SettingKind kind, Step dt, const std::vector<Step>& horizons);
EvaluationResult evaluate(const Predictor& predictor, const EvalContext& ctx, const ForecastSetting& setting);

// RankRecord JSON lines; excluded queries appear as {"excluded": true, ...}.
void write_rank_records(std::ostream& out, const EvaluationResult& result);
// Re-aggregates a record file into a report.
EvaluationReport replay_records(std::istream& in, std::string setting, std::string fingerprint);

struct AblationVariant {
  std::string name;
  PromptConfig prompt;
  bool bidirectional = true;
};

// Rows named full, wo_hkr, wo_wsci, wo_dtg, nk, rk, pk, no_ts, no_ts_rs,
// hl<m>, single_entity, entity_pair, unidirectional, bidirectional.
std::vector<AblationVariant> standard_variants(const PromptConfig& base, const std::vector<std::string>& names);

using PredictorFactory = std::function<std::unique_ptr<Predictor>(const AblationVariant&)>;

struct AblationRow {
  std::string name;
  EvaluationReport report;
};

std::vector<AblationRow> run_ablation(const std::vector<AblationVariant>& variants, const PredictorFactory& factory,
                                      const EvalContext& ctx, const ForecastSetting& setting);
std::string ablation_table(const std::vector<AblationRow>& rows);
std::string ablation_json(const std::vector<AblationRow>& rows);

}  // namespace tkgf
