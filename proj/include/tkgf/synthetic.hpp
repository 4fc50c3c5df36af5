#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "tkgf/temporal_filter.hpp"
#include "tkgf/tkg_store.hpp"

namespace tkgf {

// Subjects a0..a{n-1} each visit one of the places p0..p{k-1} at every step.
// Subjects fall into groups that share a location; every group moves one
// place forward along a fixed cyclic tour per step, so the next object
// follows from the previous one. With skip_probability > 0 a group sometimes
// moves two places instead. With fixed_places each subject stays at one
// place forever.
struct RecurrenceOptions {
  std::size_t subjects = 10;
  std::size_t places = 11;
  std::size_t groups = 2;
  std::size_t steps = 200;
  double skip_probability = 0.0;
  bool fixed_places = false;
  std::string relation = "visits";
  std::uint64_t seed = 0;
};

// Unit-step axis starting at step 0.
TemporalKG recurrence_kg(const RecurrenceOptions& opts);

// Undated passages about nothing in particular.
std::vector<Passage> filler_passages(std::size_t count, std::uint64_t seed);

}  // namespace tkgf
