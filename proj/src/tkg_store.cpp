#include "tkgf/tkg_store.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <unordered_set>

namespace tkgf {

// ---------------------------------------------------------------- Vocabulary

std::uint32_t Vocabulary::intern(std::string_view label) {
  std::string key(label);
  if (auto it = index_.find(key); it != index_.end()) return it->second;
  const auto id = static_cast<std::uint32_t>(labels_.size());
  labels_.push_back(key);
  index_.emplace(std::move(key), id);
  return id;
}

std::optional<std::uint32_t> Vocabulary::find(std::string_view label) const {
  if (auto it = index_.find(std::string(label)); it != index_.end()) return it->second;
  return std::nullopt;
}

Vocabulary Vocabulary::from_entries(const std::vector<std::pair<std::string, std::uint32_t>>& entries) {
  Vocabulary v;
  v.labels_.resize(entries.size());
  std::vector<bool> seen(entries.size(), false);
  for (const auto& [label, id] : entries) {
    if (id >= entries.size())
      throw std::invalid_argument("id " + std::to_string(id) + " for '" + label + "' is not dense");
    if (seen[id]) throw std::invalid_argument("duplicate id " + std::to_string(id));
    if (!v.index_.emplace(label, id).second)
      throw std::invalid_argument("duplicate label '" + label + "'");
    seen[id] = true;
    v.labels_[id] = label;
  }
  return v;
}

// ---------------------------------------------------------------- TemporalKG

namespace {

std::uint64_t pair_key(EntityId s, RelationId r) {
  return (static_cast<std::uint64_t>(s) << 32) | r;
}

}  // namespace

TemporalKG::TemporalKG()
    : entities_(std::make_shared<Vocabulary>()), relations_(std::make_shared<Vocabulary>()) {}

TemporalKG::TemporalKG(std::shared_ptr<const Vocabulary> entities,
                       std::shared_ptr<const Vocabulary> relations, TimeAxis axis,
                       std::vector<Quadruple> quadruples,
                       std::optional<std::size_t> base_relation_count)
    : entities_(std::move(entities)),
      relations_(std::move(relations)),
      axis_(std::move(axis)),
      quads_(std::move(quadruples)),
      base_relations_(base_relation_count) {
  if (base_relations_ && *base_relations_ * 2 != relations_->size())
    throw std::invalid_argument("reciprocal store must hold exactly twice the base relations");
  by_subject_.resize(entities_->size());
  for (std::size_t i = 0; i < quads_.size(); ++i) {
    const Quadruple& q = quads_[i];
    if (q.s >= entities_->size() || q.o >= entities_->size() || q.r >= relations_->size())
      throw std::invalid_argument("quadruple references an id outside the vocabularies");
    if (q.t < 0) throw std::invalid_argument("negative time step");
    by_subject_[q.s].push_back(i);
    by_subject_relation_[pair_key(q.s, q.r)].push_back(i);
    by_time_[q.t].push_back(i);
  }
}

std::span<const std::size_t> TemporalKG::by_subject(EntityId s) const {
  if (s >= by_subject_.size()) return {};
  return by_subject_[s];
}

std::span<const std::size_t> TemporalKG::by_subject_relation(EntityId s, RelationId r) const {
  auto it = by_subject_relation_.find(pair_key(s, r));
  if (it == by_subject_relation_.end()) return {};
  return it->second;
}

std::span<const std::size_t> TemporalKG::at_step(Step t) const {
  auto it = by_time_.find(t);
  if (it == by_time_.end()) return {};
  return it->second;
}

std::vector<Quadruple> TemporalKG::snapshot(Step t) const {
  std::vector<Quadruple> out;
  for (std::size_t i : at_step(t)) out.push_back(quads_[i]);
  return out;
}

std::vector<Step> TemporalKG::steps() const {
  std::vector<Step> out;
  out.reserve(by_time_.size());
  for (const auto& [t, _] : by_time_) out.push_back(t);
  return out;
}

std::optional<Step> TemporalKG::min_step() const {
  if (by_time_.empty()) return std::nullopt;
  return by_time_.begin()->first;
}

std::optional<Step> TemporalKG::max_step() const {
  if (by_time_.empty()) return std::nullopt;
  return by_time_.rbegin()->first;
}

RelationId TemporalKG::inverse(RelationId r) const {
  if (!base_relations_) throw std::logic_error("store has no reciprocal relations");
  const auto base = static_cast<RelationId>(*base_relations_);
  return r >= base ? r - base : r + base;
}

std::vector<bool> TemporalKG::entity_presence() const {
  std::vector<bool> seen(entities_->size(), false);
  for (const auto& q : quads_) seen[q.s] = seen[q.o] = true;
  return seen;
}

TemporalKG TemporalKG::with_quadruples(std::vector<Quadruple> quads) const {
  return TemporalKG(entities_, relations_, axis_, std::move(quads), base_relations_);
}

// ------------------------------------------------------------------- parsing

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

bool parse_int(std::string_view s, std::int64_t& out) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  return std::from_chars(s.data(), s.data() + s.size(), out).ec == std::errc{};
}

// A timestamp column before the calendar origin is known.
struct RawTime {
  std::int64_t value = 0;  // days since epoch, year, or unit step
};

RawTime parse_raw_time(std::string_view s, Granularity g, std::size_t line) {
  RawTime rt;
  switch (g) {
    case Granularity::day: {
      auto d = parse_iso(s);
      if (!d) throw ParseError("timestamp '" + std::string(s) + "' is not a YYYY-MM-DD date", line);
      rt.value = to_days(*d);
      break;
    }
    case Granularity::year:
      if (s.size() != 4 || !parse_int(s, rt.value))
        throw ParseError("timestamp '" + std::string(s) + "' is not a YYYY year", line);
      break;
    case Granularity::unit:
      if (!parse_int(s, rt.value))
        throw ParseError("timestamp '" + std::string(s) + "' is not a non-negative integer", line);
      break;
  }
  return rt;
}

struct RawRow {
  std::uint32_t s, r, o;
  RawTime start, end;
  std::size_t line;
};

TimeAxis make_axis(const std::vector<RawRow>& rows, const ParseOptions& opts) {
  TimeAxis axis;
  axis.granularity = opts.granularity;
  if (opts.granularity == Granularity::unit) return axis;
  if (opts.origin) {
    axis.origin = opts.origin;
    if (opts.granularity == Granularity::year) axis.origin = CivilDate{opts.origin->year, 1, 1};
    return axis;
  }
  if (rows.empty()) return axis;
  std::int64_t lo = rows.front().start.value;
  for (const auto& row : rows) lo = std::min(lo, row.start.value);
  axis.origin = opts.granularity == Granularity::day ? from_days(lo)
                                                     : CivilDate{static_cast<int>(lo), 1, 1};
  return axis;
}

Step to_step(const RawTime& rt, const TimeAxis& axis, std::size_t line) {
  Step step = rt.value;
  if (axis.granularity == Granularity::day) step = rt.value - to_days(*axis.origin);
  if (axis.granularity == Granularity::year) step = rt.value - axis.origin->year;
  if (step < 0) throw ParseError("timestamp precedes the calendar origin", line);
  return step;
}

TemporalKG build_store(std::vector<RawRow> rows, Vocabulary entities, Vocabulary relations,
                       const ParseOptions& opts) {
  const TimeAxis axis = make_axis(rows, opts);
  std::vector<Quadruple> quads;
  quads.reserve(rows.size());
  for (const auto& row : rows) {
    const Step a = to_step(row.start, axis, row.line);
    const Step b = to_step(row.end, axis, row.line);
    if (b < a) throw ParseError("interval end precedes its start", row.line);
    for (Step t = a; t <= b; ++t) quads.push_back({row.s, row.r, row.o, t});
  }
  return TemporalKG(std::make_shared<Vocabulary>(std::move(entities)),
                    std::make_shared<Vocabulary>(std::move(relations)), axis, std::move(quads));
}

template <typename RowFn>
void for_each_line(std::istream& in, RowFn&& fn) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    fn(std::string_view(line), lineno);
  }
}

Vocabulary parse_map(std::istream& in, const char* what) {
  std::vector<std::pair<std::string, std::uint32_t>> entries;
  for_each_line(in, [&](std::string_view line, std::size_t lineno) {
    const auto cols = split_tabs(line);
    std::int64_t id = 0;
    if (cols.size() != 2 || cols[0].empty() || !parse_int(cols[1], id))
      throw ParseError(std::string("malformed ") + what + " map entry", lineno);
    entries.emplace_back(std::string(cols[0]), static_cast<std::uint32_t>(id));
  });
  try {
    return Vocabulary::from_entries(entries);
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string(what) + " map: " + e.what(), 0);
  }
}

}  // namespace

TemporalKG parse_labels_tsv(std::istream& in, const ParseOptions& opts) {
  Vocabulary entities, relations;
  std::vector<RawRow> rows;
  for_each_line(in, [&](std::string_view line, std::size_t lineno) {
    const auto cols = split_tabs(line);
    if (cols.size() != 4 && cols.size() != 5)
      throw ParseError("expected 4 or 5 tab-separated columns, got " + std::to_string(cols.size()),
                       lineno);
    for (std::size_t i = 0; i < 3; ++i)
      if (cols[i].empty()) throw ParseError("empty label column", lineno);
    RawRow row;
    row.s = entities.intern(cols[0]);
    row.r = relations.intern(cols[1]);
    row.o = entities.intern(cols[2]);
    row.start = parse_raw_time(cols[3], opts.granularity, lineno);
    row.end = cols.size() == 5 ? parse_raw_time(cols[4], opts.granularity, lineno) : row.start;
    row.line = lineno;
    rows.push_back(row);
  });
  return build_store(std::move(rows), std::move(entities), std::move(relations), opts);
}

TemporalKG parse_ids_tsv(std::istream& in, std::istream& entity_map, std::istream& relation_map,
                         const ParseOptions& opts) {
  Vocabulary entities = parse_map(entity_map, "entity");
  Vocabulary relations = parse_map(relation_map, "relation");
  std::vector<RawRow> rows;
  for_each_line(in, [&](std::string_view line, std::size_t lineno) {
    const auto cols = split_tabs(line);
    if (cols.size() != 4 && cols.size() != 5)
      throw ParseError("expected 4 or 5 tab-separated columns, got " + std::to_string(cols.size()),
                       lineno);
    std::int64_t s = 0, r = 0, o = 0;
    if (!parse_int(cols[0], s) || !parse_int(cols[1], r) || !parse_int(cols[2], o))
      throw ParseError("non-integer id column", lineno);
    if (static_cast<std::size_t>(s) >= entities.size() ||
        static_cast<std::size_t>(o) >= entities.size() ||
        static_cast<std::size_t>(r) >= relations.size())
      throw ParseError("id not present in the map files", lineno);
    RawRow row;
    row.s = static_cast<std::uint32_t>(s);
    row.r = static_cast<std::uint32_t>(r);
    row.o = static_cast<std::uint32_t>(o);
    row.start = parse_raw_time(cols[3], opts.granularity, lineno);
    row.end = cols.size() == 5 ? parse_raw_time(cols[4], opts.granularity, lineno) : row.start;
    row.line = lineno;
    rows.push_back(row);
  });
  return build_store(std::move(rows), std::move(entities), std::move(relations), opts);
}

TemporalKG parse_quadruples(std::istream& in, QuadFormat format, const ParseOptions& opts,
                            std::istream* entity_map, std::istream* relation_map) {
  if (format == QuadFormat::labels_tsv) return parse_labels_tsv(in, opts);
  if (!entity_map || !relation_map)
    throw std::invalid_argument("ids_tsv_with_maps requires entity and relation map streams");
  return parse_ids_tsv(in, *entity_map, *relation_map, opts);
}

void write_labels_tsv(std::ostream& out, const TemporalKG& kg) {
  for (const auto& q : kg.quadruples()) {
    out << kg.entities().label(q.s) << '\t' << kg.relations().label(q.r) << '\t'
        << kg.entities().label(q.o) << '\t' << kg.axis().render(q.t) << '\n';
  }
}

// -------------------------------------------------------------- augmentation

std::vector<Quadruple> discretize_interval_fact(EntityId s, RelationId p, EntityId o,
                                                const Timestamp& start, const Timestamp& end) {
  if (!(start.axis == end.axis))
    throw std::invalid_argument("interval endpoints use different time axes");
  if (start.step > end.step) throw std::invalid_argument("interval start is after its end");
  std::vector<Quadruple> out;
  out.reserve(static_cast<std::size_t>(end.step - start.step + 1));
  for (Step t = start.step; t <= end.step; ++t) out.push_back({s, p, o, t});
  return out;
}

std::string default_inverse_label(const std::string& label) { return label + "⁻¹"; }

TemporalKG add_reciprocals(const TemporalKG& kg, const RelationNamer& namer) {
  if (kg.has_reciprocals()) throw std::logic_error("store already carries reciprocal relations");
  const std::size_t base = kg.relations().size();
  auto relations = std::make_shared<Vocabulary>(kg.relations());
  for (std::size_t r = 0; r < base; ++r) {
    const std::string& label = kg.relations().label(static_cast<RelationId>(r));
    std::string inv = namer ? namer(label) : default_inverse_label(label);
    if (inv.empty() || relations->find(inv)) inv = default_inverse_label(label);
    if (relations->find(inv))
      throw std::invalid_argument("cannot name a unique inverse for relation '" + label + "'");
    relations->intern(inv);
  }
  std::vector<Quadruple> quads = kg.quadruples();
  quads.reserve(quads.size() * 2);
  for (const auto& q : kg.quadruples())
    quads.push_back({q.o, static_cast<RelationId>(q.r + base), q.s, q.t});
  return TemporalKG(kg.entities_ptr(), relations, kg.axis(), std::move(quads), base);
}

TemporalKG strip_reciprocals(const TemporalKG& kg) {
  if (!kg.has_reciprocals()) return kg;
  const std::size_t base = kg.base_relation_count();
  auto relations = std::make_shared<Vocabulary>();
  for (std::size_t r = 0; r < base; ++r) relations->intern(kg.relations().label(static_cast<RelationId>(r)));
  std::vector<Quadruple> quads;
  for (const auto& q : kg.quadruples())
    if (q.r < base) quads.push_back(q);
  return TemporalKG(kg.entities_ptr(), relations, kg.axis(), std::move(quads));
}

// --------------------------------------------------------------------- split

namespace {

TemporalKG select_steps(const TemporalKG& kg, Step lo, Step hi) {
  std::vector<Quadruple> quads;
  for (const auto& q : kg.quadruples())
    if (q.t >= lo && q.t <= hi) quads.push_back(q);
  return kg.with_quadruples(std::move(quads));
}

std::size_t best_boundary(const std::vector<double>& cum, std::size_t lo, std::size_t hi,
                          double target) {
  std::size_t best = lo;
  double best_err = std::abs(cum[lo] - target);
  for (std::size_t i = lo + 1; i <= hi; ++i) {
    const double err = std::abs(cum[i] - target);
    if (err < best_err) {
      best = i;
      best_err = err;
    }
  }
  return best;
}

}  // namespace

TemporalKG DatasetSplit::observed() const {
  std::vector<Quadruple> quads = train.quadruples();
  quads.insert(quads.end(), valid.quadruples().begin(), valid.quadruples().end());
  return train.with_quadruples(std::move(quads));
}

TemporalKG DatasetSplit::all() const {
  std::vector<Quadruple> quads = train.quadruples();
  quads.insert(quads.end(), valid.quadruples().begin(), valid.quadruples().end());
  quads.insert(quads.end(), test.quadruples().begin(), test.quadruples().end());
  return train.with_quadruples(std::move(quads));
}

DatasetSplit chronological_split(const TemporalKG& kg, const SplitRatios& ratios) {
  if (ratios.train <= 0 || ratios.valid < 0 || ratios.test < 0 ||
      std::abs(ratios.train + ratios.valid + ratios.test - 1.0) > 1e-6)
    throw std::invalid_argument("split ratios must be non-negative, train > 0, and sum to 1");
  const std::vector<Step> steps = kg.steps();
  const std::size_t n = steps.size();
  const std::size_t later_parts = (ratios.valid > 0 ? 1 : 0) + (ratios.test > 0 ? 1 : 0);
  if (n < 1 + later_parts)
    throw std::invalid_argument("only " + std::to_string(n) + " distinct steps for " +
                                std::to_string(1 + later_parts) + " non-empty parts");

  std::vector<double> cum(n);
  std::size_t running = 0;
  for (std::size_t i = 0; i < n; ++i) {
    running += kg.at_step(steps[i]).size();
    cum[i] = static_cast<double>(running) / static_cast<double>(kg.size());
  }

  std::size_t train_end, valid_end;
  if (later_parts == 0) {
    train_end = valid_end = n - 1;
  } else {
    train_end = best_boundary(cum, 0, n - 1 - later_parts, ratios.train);
    if (ratios.valid <= 0) {
      valid_end = train_end;
    } else if (ratios.test <= 0) {
      valid_end = n - 1;
    } else {
      valid_end = best_boundary(cum, train_end + 1, n - 2, ratios.train + ratios.valid);
    }
  }

  DatasetSplit split;
  split.train_end = steps[train_end];
  split.valid_end = steps[valid_end];
  split.train = select_steps(kg, steps.front(), split.train_end);
  split.valid = valid_end > train_end ? select_steps(kg, steps[train_end + 1], split.valid_end)
                                      : kg.with_quadruples({});
  split.test = valid_end + 1 < n ? select_steps(kg, steps[valid_end + 1], steps.back())
                                 : kg.with_quadruples({});
  return split;
}

std::vector<Quadruple> inductive_subset(const TemporalKG& train, const TemporalKG& test) {
  const std::vector<bool> seen = train.entity_presence();
  auto known = [&](EntityId e) { return e < seen.size() && seen[e]; };
  std::vector<Quadruple> out;
  for (const auto& q : test.quadruples())
    if (!known(q.s) || !known(q.o)) out.push_back(q);
  return out;
}

}  // namespace tkgf
