#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tkgf/calendar.hpp"

namespace tkgf {

using EntityId = std::uint32_t;
using RelationId = std::uint32_t;

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Bijective label <-> dense id map. Ids are assigned in first-intern order.
class Vocabulary {
 public:
  Vocabulary() = default;

  std::uint32_t intern(std::string_view label);
  std::optional<std::uint32_t> find(std::string_view label) const;
  const std::string& label(std::uint32_t id) const { return labels_.at(id); }
  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }

  // Builds from explicit (label, id) pairs. Ids must be exactly 0..n-1 and both
  // labels and ids unique.
  static Vocabulary from_entries(const std::vector<std::pair<std::string, std::uint32_t>>& entries);

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

struct Quadruple {
  EntityId s = 0;
  RelationId r = 0;
  EntityId o = 0;
  Step t = 0;

  bool operator==(const Quadruple&) const = default;
};

// Ascending by step, then (s, r, o).
struct ChronologicalLess {
  bool operator()(const Quadruple& a, const Quadruple& b) const {
    if (a.t != b.t) return a.t < b.t;
    if (a.s != b.s) return a.s < b.s;
    if (a.r != b.r) return a.r < b.r;
    return a.o < b.o;
  }
};

// Immutable multiset of quadruples with subject, (subject, relation) and step
// indices. Index entries hold positions into quadruples().
class TemporalKG {
 public:
  TemporalKG();
  TemporalKG(std::shared_ptr<const Vocabulary> entities, std::shared_ptr<const Vocabulary> relations,
             TimeAxis axis, std::vector<Quadruple> quadruples,
             std::optional<std::size_t> base_relation_count = std::nullopt);

  const std::vector<Quadruple>& quadruples() const { return quads_; }
  std::size_t size() const { return quads_.size(); }
  bool empty() const { return quads_.empty(); }

  std::span<const std::size_t> by_subject(EntityId s) const;
  std::span<const std::size_t> by_subject_relation(EntityId s, RelationId r) const;
  std::span<const std::size_t> at_step(Step t) const;
  // Quadruples of one step, i.e. the snapshot at t.
  std::vector<Quadruple> snapshot(Step t) const;

  std::vector<Step> steps() const;
  std::size_t n_obs() const { return by_time_.size(); }
  std::optional<Step> min_step() const;
  std::optional<Step> max_step() const;

  const Vocabulary& entities() const { return *entities_; }
  const Vocabulary& relations() const { return *relations_; }
  const std::shared_ptr<const Vocabulary>& entities_ptr() const { return entities_; }
  const std::shared_ptr<const Vocabulary>& relations_ptr() const { return relations_; }
  const TimeAxis& axis() const { return axis_; }
  Timestamp timestamp(Step t) const { return {t, axis_}; }

  bool has_reciprocals() const { return base_relations_.has_value(); }
  // Number of relations before reciprocal augmentation.
  std::size_t base_relation_count() const { return base_relations_.value_or(relations_->size()); }
  bool is_reciprocal(RelationId r) const { return base_relations_ && r >= *base_relations_; }
  RelationId inverse(RelationId r) const;

  // Entities occurring as subject or object.
  std::vector<bool> entity_presence() const;

  // Same vocabularies and axis, different facts.
  TemporalKG with_quadruples(std::vector<Quadruple> quads) const;

 private:
  std::shared_ptr<const Vocabulary> entities_;
  std::shared_ptr<const Vocabulary> relations_;
  TimeAxis axis_;
  std::vector<Quadruple> quads_;
  std::optional<std::size_t> base_relations_;

  std::vector<std::vector<std::size_t>> by_subject_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> by_subject_relation_;
  std::map<Step, std::vector<std::size_t>> by_time_;
};

enum class QuadFormat { labels_tsv, ids_tsv_with_maps };

struct ParseOptions {
  Granularity granularity = Granularity::day;
  // Calendar anchor for step 0. Defaults to the earliest date in the input.
  std::optional<CivilDate> origin;
};

// `subject<TAB>relation<TAB>object<TAB>time[<TAB>time_end]`. An end column
// expands the fact into one quadruple per step.
TemporalKG parse_labels_tsv(std::istream& in, const ParseOptions& opts);
// Integer quadruples with `label<TAB>id` map files for both namespaces.
TemporalKG parse_ids_tsv(std::istream& in, std::istream& entity_map, std::istream& relation_map,
                         const ParseOptions& opts);
TemporalKG parse_quadruples(std::istream& in, QuadFormat format, const ParseOptions& opts,
                            std::istream* entity_map = nullptr, std::istream* relation_map = nullptr);

// Writes labels_tsv with rendered timestamps.
void write_labels_tsv(std::ostream& out, const TemporalKG& kg);

std::vector<Quadruple> discretize_interval_fact(EntityId s, RelationId p, EntityId o,
                                                const Timestamp& start, const Timestamp& end);

using RelationNamer = std::function<std::string(const std::string&)>;

std::string default_inverse_label(const std::string& label);

// Adds (o, r^-1, s, t) for every fact. Reciprocal relation ids are base + r.
TemporalKG add_reciprocals(const TemporalKG& kg, const RelationNamer& namer = {});
TemporalKG strip_reciprocals(const TemporalKG& kg);

struct SplitRatios {
  double train = 0.8;
  double valid = 0.1;
  double test = 0.1;
};

struct DatasetSplit {
  TemporalKG train;
  TemporalKG valid;
  TemporalKG test;
  Step train_end = 0;
  Step valid_end = 0;  // equals train_end when there is no validation part

  // Train and valid facts together, i.e. everything observed before testing.
  TemporalKG observed() const;
  // All facts of the three parts.
  TemporalKG all() const;
};

// Cuts on whole steps. Each boundary minimizes |cumulative fraction - target|,
// ties going to the earlier step.
DatasetSplit chronological_split(const TemporalKG& kg, const SplitRatios& ratios);

// Test facts whose subject or object never occurs in train.
std::vector<Quadruple> inductive_subset(const TemporalKG& train, const TemporalKG& test);

}  // namespace tkgf
