#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "tkgf/tkg_store.hpp"
#include "unit/helpers.hpp"

namespace tkgf {
namespace {

using testing::parse_tsv;
using testing::random_kg;

TEST(Parse, SingleObamaLine) {
  const auto kg = parse_tsv("Barack Obama\tvisit\tIndia\t2015-01-25\n");
  EXPECT_EQ(kg.size(), 1u);
  EXPECT_EQ(kg.entities().size(), 2u);
  EXPECT_EQ(kg.relations().size(), 1u);
  EXPECT_EQ(kg.entities().label(kg.quadruples()[0].o), "India");
  EXPECT_EQ(kg.axis().render(kg.quadruples()[0].t), "2015-01-25");
}

TEST(Parse, EmptyStream) {
  const auto kg = parse_tsv("");
  EXPECT_TRUE(kg.empty());
  EXPECT_EQ(kg.entities().size(), 0u);
}

TEST(Parse, FirstAppearanceInterning) {
  const auto kg = parse_tsv("B\tr\tA\t2015-01-02\nA\tq\tC\t2015-01-01\n");
  EXPECT_EQ(kg.entities().label(0), "B");
  EXPECT_EQ(kg.entities().label(1), "A");
  EXPECT_EQ(kg.entities().label(2), "C");
  EXPECT_EQ(kg.relations().label(1), "q");
  // Origin defaults to the earliest date.
  EXPECT_EQ(kg.axis().render(0), "2015-01-01");
}

TEST(Parse, ErrorsCarryLineNumbers) {
  try {
    parse_tsv("A\tr\tB\t2015-01-01\nA\tr\tB\n");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(parse_tsv("A\tr\tB\t2015\n"), ParseError);
  EXPECT_THROW(parse_tsv("A\tr\tB\t2015-01-01\n", Granularity::year), ParseError);
  EXPECT_THROW(parse_tsv("A\tr\tB\tx\n", Granularity::unit), ParseError);
}

TEST(Parse, IdsWithMaps) {
  std::istringstream facts("0\t0\t1\t3\n1\t0\t0\t5\n");
  std::istringstream ents("Alice\t0\nBob\t1\n");
  std::istringstream rels("meets\t0\n");
  ParseOptions opts;
  opts.granularity = Granularity::unit;
  const auto kg = parse_ids_tsv(facts, ents, rels, opts);
  ASSERT_EQ(kg.size(), 2u);
  EXPECT_EQ(kg.quadruples()[1].t, 5);
  EXPECT_EQ(kg.entities().label(1), "Bob");

  std::istringstream facts2("0\t0\t1\t3\n");
  std::istringstream dup("Alice\t0\nAlice\t1\n");
  std::istringstream rels2("meets\t0\n");
  EXPECT_THROW(parse_ids_tsv(facts2, dup, rels2, opts), ParseError);
}

TEST(Parse, IndicesMatchScan) {
  Rng rng(3);
  std::string text;
  for (int i = 0; i < 100; ++i)
    text += "e" + std::to_string(rng.below(12)) + "\tr" + std::to_string(rng.below(4)) + "\te" +
            std::to_string(rng.below(12)) + "\t" + std::to_string(rng.below(20)) + "\n";
  const auto kg = parse_tsv(text, Granularity::unit);
  ASSERT_EQ(kg.size(), 100u);
  for (EntityId s = 0; s < kg.entities().size(); ++s) {
    std::multiset<std::size_t> scan, idx(kg.by_subject(s).begin(), kg.by_subject(s).end());
    for (std::size_t i = 0; i < kg.size(); ++i)
      if (kg.quadruples()[i].s == s) scan.insert(i);
    EXPECT_EQ(scan, idx);
    for (RelationId r = 0; r < kg.relations().size(); ++r) {
      std::multiset<std::size_t> scan2, idx2(kg.by_subject_relation(s, r).begin(), kg.by_subject_relation(s, r).end());
      for (std::size_t i = 0; i < kg.size(); ++i)
        if (kg.quadruples()[i].s == s && kg.quadruples()[i].r == r) scan2.insert(i);
      EXPECT_EQ(scan2, idx2);
    }
  }
  std::set<Step> steps;
  for (const auto& q : kg.quadruples()) steps.insert(q.t);
  EXPECT_EQ(kg.n_obs(), steps.size());
  for (Step t : steps) {
    std::vector<Quadruple> scan;
    for (const auto& q : kg.quadruples())
      if (q.t == t) scan.push_back(q);
    EXPECT_EQ(kg.snapshot(t), scan);
  }
}

TEST(IndexProperty, RandomGraphsMatchScan) {
  Rng rng(11);
  for (int round = 0; round < 20; ++round) {
    const auto kg = random_kg(rng, 1 + rng.below(30), 1 + rng.below(5), rng.below(2000), 50);
    std::size_t reached = 0;
    for (EntityId s = 0; s < kg.entities().size(); ++s) {
      reached += kg.by_subject(s).size();
      for (std::size_t i : kg.by_subject(s)) EXPECT_EQ(kg.quadruples()[i].s, s);
    }
    EXPECT_EQ(reached, kg.size());
    std::size_t by_time = 0;
    for (Step t : kg.steps()) by_time += kg.at_step(t).size();
    EXPECT_EQ(by_time, kg.size());
  }
}

TEST(Discretize, YearInterval) {
  const auto kg = parse_tsv("Yossi Benayoun\tplaysFor\tChelsea FC\t2011\t2013\n", Granularity::year);
  ASSERT_EQ(kg.size(), 3u);
  EXPECT_EQ(kg.axis().render(kg.quadruples()[0].t), "2011");
  EXPECT_EQ(kg.axis().render(kg.quadruples()[1].t), "2012");
  EXPECT_EQ(kg.axis().render(kg.quadruples()[2].t), "2013");
}

TEST(Discretize, Enumeration) {
  const TimeAxis unit{Granularity::unit, std::nullopt};
  const auto five = discretize_interval_fact(0, 0, 1, {5, unit}, {9, unit});
  ASSERT_EQ(five.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(five[i].t, static_cast<Step>(5 + i));
  EXPECT_EQ(discretize_interval_fact(0, 0, 1, {4, unit}, {4, unit}).size(), 1u);
  EXPECT_THROW(discretize_interval_fact(0, 0, 1, {5, unit}, {4, unit}), std::invalid_argument);
  Rng rng(2);
  for (int i = 0; i < 50; ++i) {
    const Step a = static_cast<Step>(rng.below(100));
    const Step b = a + static_cast<Step>(rng.below(30));
    EXPECT_EQ(discretize_interval_fact(0, 0, 0, {a, unit}, {b, unit}).size(), static_cast<std::size_t>(b - a + 1));
  }
}

TEST(Reciprocals, SingleFact) {
  const auto kg = parse_tsv("A\tvisit\tB\t3\n", Granularity::unit);
  const auto aug = add_reciprocals(kg);
  ASSERT_EQ(aug.size(), 2u);
  EXPECT_EQ(aug.relations().size(), 2u);
  const auto& inv = aug.quadruples()[1];
  EXPECT_EQ(aug.entities().label(inv.s), "B");
  EXPECT_EQ(aug.relations().label(inv.r), "visit⁻¹");
  EXPECT_EQ(aug.entities().label(inv.o), "A");
  EXPECT_EQ(inv.t, aug.quadruples()[0].t);
  EXPECT_TRUE(aug.is_reciprocal(inv.r));
  EXPECT_EQ(aug.inverse(inv.r), 0u);
  EXPECT_THROW(add_reciprocals(aug), std::logic_error);
}

TEST(Reciprocals, EmptyAndRoundTrip) {
  EXPECT_TRUE(add_reciprocals(parse_tsv("")).empty());
  Rng rng(5);
  const auto kg = random_kg(rng, 10, 3, 50, 9);
  const auto aug = add_reciprocals(kg);
  EXPECT_EQ(aug.size(), 100u);
  EXPECT_EQ(aug.relations().size(), 6u);
  auto a = strip_reciprocals(aug).quadruples();
  auto b = kg.quadruples();
  std::sort(a.begin(), a.end(), ChronologicalLess{});
  std::sort(b.begin(), b.end(), ChronologicalLess{});
  EXPECT_EQ(a, b);
}

TEST(Reciprocals, NamerOverridesLabel) {
  const auto kg = parse_tsv("A\tparent of\tB\t1\n", Granularity::unit);
  const auto aug = add_reciprocals(kg, [](const std::string&) { return std::string("child of"); });
  EXPECT_EQ(aug.relations().label(1), "child of");
}

// Exhaustive search over all boundary pairs, lexicographic in the two errors.
std::pair<std::size_t, std::size_t> brute_force_boundaries(const std::vector<double>& cum, double a, double b) {
  std::pair<std::size_t, std::size_t> best{0, 0};
  double e1 = INFINITY, e2 = INFINITY;
  const std::size_t n = cum.size();
  for (std::size_t i = 0; i + 2 < n; ++i)
    for (std::size_t j = i + 1; j + 1 < n; ++j) {
      const double x = std::abs(cum[i] - a), y = std::abs(cum[j] - b);
      if (x < e1 || (x == e1 && y < e2)) {
        e1 = x;
        e2 = y;
        best = {i, j};
      }
    }
  return best;
}

TEST(Split, TenEvenSteps) {
  std::string text;
  for (int t = 0; t < 10; ++t)
    for (int k = 0; k < 10; ++k) text += "e" + std::to_string(k) + "\tr\te" + std::to_string(k + 1) + "\t" + std::to_string(t) + "\n";
  const auto split = chronological_split(parse_tsv(text, Granularity::unit), {0.8, 0.1, 0.1});
  EXPECT_EQ(split.train_end, 7);
  EXPECT_EQ(split.valid_end, 8);
  EXPECT_EQ(split.train.size(), 80u);
  EXPECT_EQ(split.valid.size(), 10u);
  EXPECT_EQ(split.test.size(), 10u);
  EXPECT_EQ(*split.test.min_step(), 9);
}

TEST(Split, TwoStepsNoValid) {
  const auto split = chronological_split(parse_tsv("a\tr\tb\t0\na\tr\tb\t1\n", Granularity::unit), {0.5, 0.0, 0.5});
  EXPECT_EQ(split.train_end, 0);
  EXPECT_EQ(split.valid_end, 0);
  EXPECT_TRUE(split.valid.empty());
  EXPECT_EQ(split.test.size(), 1u);
}

TEST(Split, SkewedTwoStepsCannotFillThreeParts) {
  std::string text;
  for (int i = 0; i < 90; ++i) text += "a\tr\tb\t0\n";
  for (int i = 0; i < 10; ++i) text += "a\tr\tb\t1\n";
  EXPECT_THROW(chronological_split(parse_tsv(text, Granularity::unit), {0.8, 0.1, 0.1}), std::invalid_argument);
}

TEST(Split, MatchesExhaustiveSearch) {
  Rng rng(17);
  for (int round = 0; round < 200; ++round) {
    const auto kg = random_kg(rng, 5, 2, 3 + rng.below(300), 2 + static_cast<Step>(rng.below(25)));
    const auto steps = kg.steps();
    if (steps.size() < 3) continue;
    std::vector<double> cum;
    std::size_t run = 0;
    for (Step t : steps) cum.push_back(static_cast<double>(run += kg.at_step(t).size()) / static_cast<double>(kg.size()));
    const auto split = chronological_split(kg, {0.8, 0.1, 0.1});
    const auto [i, j] = brute_force_boundaries(cum, 0.8, 0.9);
    EXPECT_EQ(split.train_end, steps[i]);
    EXPECT_EQ(split.valid_end, steps[j]);
    EXPECT_EQ(split.train.size() + split.valid.size() + split.test.size(), kg.size());
    EXPECT_LT(*split.train.max_step(), *split.valid.min_step());
    EXPECT_LT(*split.valid.max_step(), *split.test.min_step());
  }
}

TEST(Inductive, UnseenObjectIncluded) {
  const auto kg = parse_tsv(
      "India\tannounce\treform\t2015-08-01\n"
      "India\tannounce\tnew economic policy\t2015-09-01\n"
      "India\tannounce\treform\t2015-09-01\n");
  const auto split = chronological_split(kg, {0.5, 0.0, 0.5});
  const auto ind = inductive_subset(split.train, split.test);
  ASSERT_EQ(ind.size(), 1u);
  EXPECT_EQ(kg.entities().label(ind[0].o), "new economic policy");
  EXPECT_TRUE(inductive_subset(split.train, split.train).empty());
}

TEST(Inductive, MatchesMembershipScan) {
  Rng rng(23);
  for (int round = 0; round < 30; ++round) {
    const auto kg = random_kg(rng, 40, 3, 200, 20);
    const auto split = chronological_split(kg, {0.5, 0.2, 0.3});
    std::set<EntityId> seen;
    for (const auto& q : split.train.quadruples()) seen.insert(q.s), seen.insert(q.o);
    std::vector<Quadruple> expect;
    for (const auto& q : split.test.quadruples())
      if (!seen.count(q.s) || !seen.count(q.o)) expect.push_back(q);
    EXPECT_EQ(inductive_subset(split.train, split.test), expect);
  }
}

}  // namespace
}  // namespace tkgf
