#pragma once

#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "tkgf/rng.hpp"
#include "tkgf/tkg_store.hpp"

namespace tkgf::testing {

inline TemporalKG parse_tsv(const std::string& text, Granularity g = Granularity::day) {
  std::istringstream in(text);
  ParseOptions opts;
  opts.granularity = g;
  return parse_labels_tsv(in, opts);
}

// Random unit-axis graph with entities e0.. and relations r0..
inline TemporalKG random_kg(Rng& rng, std::size_t n_entities, std::size_t n_relations, std::size_t n_quads,
                            Step max_step) {
  auto ents = std::make_shared<Vocabulary>();
  auto rels = std::make_shared<Vocabulary>();
  for (std::size_t i = 0; i < n_entities; ++i) ents->intern("e" + std::to_string(i));
  for (std::size_t i = 0; i < n_relations; ++i) rels->intern("r" + std::to_string(i));
  std::vector<Quadruple> quads;
  for (std::size_t i = 0; i < n_quads; ++i)
    quads.push_back({static_cast<EntityId>(rng.below(n_entities)), static_cast<RelationId>(rng.below(n_relations)),
                     static_cast<EntityId>(rng.below(n_entities)), static_cast<Step>(rng.below(max_step + 1))});
  return TemporalKG(ents, rels, TimeAxis{Granularity::unit, std::nullopt}, std::move(quads));
}

}  // namespace tkgf::testing
