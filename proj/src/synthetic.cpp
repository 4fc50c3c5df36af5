#include "tkgf/synthetic.hpp"

#include <memory>
#include <numeric>
#include <stdexcept>

#include "tkgf/rng.hpp"

namespace tkgf {

TemporalKG recurrence_kg(const RecurrenceOptions& opts) {
  if (opts.subjects == 0 || opts.places < 2 || opts.steps == 0)
    throw std::invalid_argument("recurrence dataset needs subjects, two places and steps");
  if (opts.groups == 0 || opts.groups > opts.subjects) throw std::invalid_argument("groups must lie in [1, subjects]");
  Rng rng(opts.seed);
  auto entities = std::make_shared<Vocabulary>();
  auto relations = std::make_shared<Vocabulary>();
  std::vector<EntityId> subjects, places;
  for (std::size_t i = 0; i < opts.subjects; ++i) subjects.push_back(entities->intern("a" + std::to_string(i)));
  for (std::size_t i = 0; i < opts.places; ++i) places.push_back(entities->intern("p" + std::to_string(i)));
  const RelationId rel = relations->intern(opts.relation);

  // Tour order over places and each group's starting position on it.
  std::vector<std::size_t> tour(opts.places);
  std::iota(tour.begin(), tour.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(tour));
  std::vector<std::size_t> position(opts.groups);
  for (auto& p : position) p = static_cast<std::size_t>(rng.below(opts.places));
  std::vector<std::size_t> fixed(opts.subjects);
  for (auto& f : fixed) f = static_cast<std::size_t>(rng.below(opts.places));

  std::vector<Quadruple> quads;
  for (std::size_t t = 0; t < opts.steps; ++t) {
    if (t > 0)
      for (auto& p : position) p = (p + (rng.uniform() < opts.skip_probability ? 2 : 1)) % opts.places;
    for (std::size_t i = 0; i < opts.subjects; ++i) {
      const std::size_t place = opts.fixed_places ? fixed[i] : tour[position[i % opts.groups]];
      quads.push_back({subjects[i], rel, places[place], static_cast<Step>(t)});
    }
  }
  return TemporalKG(entities, relations, TimeAxis{Granularity::unit, std::nullopt}, std::move(quads));
}

std::vector<Passage> filler_passages(std::size_t count, std::uint64_t seed) {
  static const char* const kSubjects[] = {"The council", "A spokesperson", "Local traders", "The committee",
                                          "Several residents"};
  static const char* const kVerbs[] = {"discussed", "reviewed", "commented on", "postponed", "welcomed"};
  static const char* const kObjects[] = {"the budget", "road repairs", "a new library", "the weather",
                                         "market prices"};
  Rng rng(seed);
  std::vector<Passage> out;
  for (std::size_t i = 0; i < count; ++i) {
    std::string text;
    for (int s = 0; s < 3; ++s) {
      if (!text.empty()) text += ' ';
      text += kSubjects[rng.below(5)];
      text += ' ';
      text += kVerbs[rng.below(5)];
      text += ' ';
      text += kObjects[rng.below(5)];
      text += '.';
    }
    out.push_back({"filler-" + std::to_string(i), std::move(text), std::nullopt});
  }
  return out;
}

}  // namespace tkgf
