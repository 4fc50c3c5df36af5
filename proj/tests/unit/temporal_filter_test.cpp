#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "tkgf/rng.hpp"
#include "tkgf/temporal_filter.hpp"

namespace tkgf {
namespace {

CivilDate d(int y, unsigned m, unsigned day) { return {y, m, day}; }

TEST(Sentences, Examples) {
  EXPECT_EQ(tokenize_sentences("A. B? C!"), (std::vector<std::string>{"A.", "B?", "C!"}));
  EXPECT_EQ(tokenize_sentences("Visited the U.S. in May. Then left."),
            (std::vector<std::string>{"Visited the U.S. in May.", "Then left."}));
  EXPECT_TRUE(tokenize_sentences("").empty());
  EXPECT_EQ(tokenize_sentences("Mr. Smith left. He returned.").size(), 2u);
  EXPECT_EQ(tokenize_sentences("lower. case stays").size(), 1u);
}

TEST(Sentences, ReconstructWithSeparators) {
  Rng rng(9);
  const char* pieces[] = {"Obama", "visited", "the", "U.S.", "Dr.", "Smith", "left.", "Then", "?", "!",
                          "India.", "\n", "  ", "It", "rained!", "Really?"};
  for (int round = 0; round < 300; ++round) {
    std::string text;
    const auto n = rng.below(25);
    for (std::uint64_t i = 0; i < n; ++i) {
      text += pieces[rng.below(std::size(pieces))];
      text += rng.below(3) ? " " : "  ";
    }
    const auto spans = sentence_spans(text);
    std::size_t cursor = 0;
    for (const auto& s : spans) {
      ASSERT_LE(cursor, s.begin);
      for (std::size_t k = cursor; k < s.begin; ++k) EXPECT_TRUE(std::isspace(static_cast<unsigned char>(text[k])));
      ASSERT_LT(s.begin, s.end);
      cursor = s.end;
    }
    for (std::size_t k = cursor; k < text.size(); ++k) EXPECT_TRUE(std::isspace(static_cast<unsigned char>(text[k])));
  }
}

TEST(Tagging, Examples) {
  EXPECT_EQ(tag_and_resolve("Obama visited India on January 25, 2015.").resolved_dates,
            std::vector<CivilDate>{d(2015, 1, 25)});
  EXPECT_TRUE(tag_and_resolve("No dates here.").resolved_dates.empty());
  EXPECT_EQ(tag_and_resolve("in July 2015").resolved_dates, std::vector<CivilDate>{d(2015, 7, 1)});
  EXPECT_EQ(tag_and_resolve("in July 2015", std::nullopt, ResolveMode::interval_end).resolved_dates,
            std::vector<CivilDate>{d(2015, 7, 31)});
  EXPECT_EQ(tag_and_resolve("on 2014-06-05").resolved_dates, std::vector<CivilDate>{d(2014, 6, 5)});
  EXPECT_EQ(tag_and_resolve("on 5 June 2014").resolved_dates, std::vector<CivilDate>{d(2014, 6, 5)});
  EXPECT_EQ(tag_and_resolve("in 1999").resolved_dates, std::vector<CivilDate>{d(1999, 1, 1)});
  EXPECT_TRUE(tag_and_resolve("room 2500").resolved_dates.empty());
}

TEST(Tagging, RelativeNeedsReference) {
  const auto unresolved = tag_and_resolve("He will return next year.");
  EXPECT_TRUE(unresolved.resolved_dates.empty());
  ASSERT_EQ(unresolved.mentions.size(), 1u);
  EXPECT_EQ(unresolved.mentions[0].kind, MentionKind::relative);
  EXPECT_FALSE(unresolved.diagnostics.empty());
  EXPECT_EQ(tag_and_resolve("He will return next year.", d(2015, 3, 10)).resolved_dates,
            std::vector<CivilDate>{d(2016, 1, 1)});
  EXPECT_EQ(tag_and_resolve("It happened 3 days ago.", d(2015, 3, 10)).resolved_dates,
            std::vector<CivilDate>{d(2015, 3, 7)});
}

TEST(Tagging, OrdinalDays) {
  EXPECT_EQ(tag_and_resolve("Talks resumed on June 5th, 2014.").resolved_dates, std::vector<CivilDate>{d(2014, 6, 5)});
  EXPECT_EQ(tag_and_resolve("on the 4th of July, 2010").resolved_dates, std::vector<CivilDate>{d(2010, 7, 4)});
  EXPECT_EQ(tag_and_resolve("March 3rd", d(2015, 1, 1)).resolved_dates, std::vector<CivilDate>{d(2015, 3, 3)});
  // glued further it is an identifier again
  EXPECT_TRUE(tag_and_resolve("Unit 5thx of June 2014 staff.").mentions.size() == 1);
}

TEST(Tagging, Pure) {
  const std::string s = "Talks set for March 2016 after meetings last month.";
  const auto a = tag_and_resolve(s, d(2015, 5, 5)), b = tag_and_resolve(s, d(2015, 5, 5));
  EXPECT_EQ(a.resolved_dates, b.resolved_dates);
  EXPECT_EQ(a.diagnostics, b.diagnostics);
}

TEST(Filter, Examples) {
  const RelevancePeriod p{d(2015, 1, 25)};
  const auto future = filter_future({"d", "Obama will visit Kenya in July 2015.", std::nullopt}, p);
  EXPECT_EQ(future.dropped.size(), 1u);
  EXPECT_EQ(future.retained_text, "");
  const auto past = filter_future({"d", "Obama visited France on June 5, 2014.", std::nullopt}, p);
  EXPECT_TRUE(past.dropped.empty());
  EXPECT_EQ(past.retained_text, "Obama visited France on June 5, 2014.");
  const std::string undated = "Leaders met.  They talked.\nNothing else.";
  EXPECT_EQ(filter_future({"d", undated, std::nullopt}, p).retained_text, undated);
  RelevancePeriod drop = p;
  drop.undated = UndatedPolicy::drop;
  EXPECT_TRUE(filter_future({"d", undated, std::nullopt}, drop).retained.empty());
}

TEST(Filter, ThresholdIsInclusive) {
  const RelevancePeriod p{d(2015, 1, 24)};
  EXPECT_EQ(filter_future({"d", "It was 2015-01-24.", std::nullopt}, p).retained.size(), 1u);
  EXPECT_EQ(filter_future({"d", "It was 2015-01-25.", std::nullopt}, p).dropped.size(), 1u);
}

TEST(Filter, PeriodBeforeStep) {
  const TimeAxis day{Granularity::day, d(2015, 1, 1)};
  EXPECT_EQ(relevance_period_before(day, 24, UndatedPolicy::retain).threshold, d(2015, 1, 24));
  const TimeAxis year{Granularity::year, d(2010, 1, 1)};
  EXPECT_EQ(relevance_period_before(year, 5, UndatedPolicy::retain).threshold, d(2014, 12, 31));
  EXPECT_THROW(relevance_period_before(TimeAxis{}, 3, UndatedPolicy::retain), std::invalid_argument);
}

TEST(Filter, NoFutureAndOrderFuzz) {
  Rng rng(77);
  const char* months[] = {"January", "March", "July", "October", "December"};
  for (int round = 0; round < 500; ++round) {
    const CivilDate threshold{2010 + static_cast<int>(rng.below(10)), 1 + static_cast<unsigned>(rng.below(12)), 15};
    std::string text;
    std::vector<std::string> sentences;
    const auto n = 1 + rng.below(8);
    for (std::uint64_t i = 0; i < n; ++i) {
      const int y = 2008 + static_cast<int>(rng.below(14));
      std::string s;
      switch (rng.below(4)) {
        case 0: s = "Event " + std::to_string(i) + " on " + format_iso({y, 1 + static_cast<unsigned>(rng.below(12)), 1 + static_cast<unsigned>(rng.below(28))}) + "."; break;
        case 1: s = "Event " + std::to_string(i) + " in " + months[rng.below(5)] + " " + std::to_string(y) + "."; break;
        case 2: s = "Event " + std::to_string(i) + " during " + std::to_string(y) + "."; break;
        default: s = "Event " + std::to_string(i) + " without a date."; break;
      }
      sentences.push_back(s);
      text += s + " ";
    }
    const auto r = filter_future({"doc", text, std::nullopt}, RelevancePeriod{threshold});
    std::size_t last = 0;
    for (const auto& kept : r.retained) {
      for (const auto& date : kept.resolved_dates) EXPECT_LE(date, threshold) << kept.sentence;
      auto it = std::find(sentences.begin() + static_cast<std::ptrdiff_t>(last), sentences.end(), kept.sentence);
      ASSERT_NE(it, sentences.end());
      last = static_cast<std::size_t>(it - sentences.begin()) + 1;
    }
    for (const auto& gone : r.dropped) {
      EXPECT_TRUE(std::any_of(gone.resolved_dates.begin(), gone.resolved_dates.end(),
                              [&](const CivilDate& x) { return x > threshold; }));
    }
    EXPECT_EQ(r.retained.size() + r.dropped.size(), sentences.size());
  }
}

TEST(Chunks, WindowArithmetic) {
  const HashedEmbedder e(32);
  const auto c = chunk_passages({{"d", "a b c d e f g h i j", std::nullopt}}, e, 4, 0);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c[0].text, "a b c d");
  EXPECT_EQ(c[1].text, "e f g h");
  EXPECT_EQ(c[2].text, "i j");
  EXPECT_EQ(chunk_passages({{"d", "short text", std::nullopt}}, e, 4, 0).size(), 1u);
  EXPECT_THROW(chunk_passages({}, e, 4, 4), std::invalid_argument);
  EXPECT_THROW(chunk_passages({}, e, 0, 0), std::invalid_argument);
}

TEST(Chunks, SentenceBoundariesRespected) {
  const HashedEmbedder e(32);
  const auto c = chunk_passages({{"d", "One two three. Four five. Six seven eight nine.", std::nullopt}}, e, 5, 0);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[0].text, "One two three. Four five.");
  EXPECT_EQ(c[1].text, "Six seven eight nine.");
  const auto d = chunk_passages({{"d", "One two three. Four five six. Seven.", std::nullopt}}, e, 5, 0);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d[0].text, "One two three.");
  EXPECT_EQ(d[1].text, "Four five six. Seven.");
}

std::vector<std::string> words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

TEST(Chunks, CoverageAndOverlapProperty) {
  Rng rng(5);
  const HashedEmbedder e(32);
  for (int round = 0; round < 300; ++round) {
    std::string text;
    const auto n = rng.below(60);
    for (std::uint64_t i = 0; i < n; ++i) {
      text += "w" + std::to_string(i);
      text += rng.below(5) == 0 ? ". " : " ";
      if (rng.below(5) == 0 && i + 1 < n) text += "X" + std::to_string(i) + " ";
    }
    const std::size_t max = 2 + rng.below(10);
    const std::size_t overlap = rng.below(max / 2 + 1);
    const auto chunks = chunk_passages({{"d", text, std::nullopt}}, e, max, overlap);
    const auto all = words(text);
    std::vector<std::string> rebuilt;
    for (std::size_t k = 0; k < chunks.size(); ++k) {
      const auto w = words(chunks[k].text);
      ASSERT_LE(w.size(), max);
      EXPECT_EQ(chunks[k].index, k);
      if (k == 0) {
        rebuilt = w;
        continue;
      }
      ASSERT_GT(w.size(), overlap);
      // Overlap tokens are the tail of the previous chunk, so they sit in exactly two chunks.
      const auto prev = words(chunks[k - 1].text);
      EXPECT_TRUE(std::equal(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(overlap),
                             prev.end() - static_cast<std::ptrdiff_t>(overlap)));
      rebuilt.insert(rebuilt.end(), w.begin() + static_cast<std::ptrdiff_t>(overlap), w.end());
    }
    EXPECT_EQ(rebuilt, all);
  }
}

TEST(Ranking, Examples) {
  const HashedEmbedder e(64);
  const auto chunks = chunk_passages({{"a", "Obama visited India.", std::nullopt},
                                      {"b", "Rain fell on the hills.", std::nullopt}},
                                     e, 16, 0);
  EXPECT_TRUE(rank_chunks(e.embed("x"), chunks, 0).empty());
  const auto top = rank_chunks(e.embed("Obama visited India."), chunks, 5);
  ASSERT_EQ(top.size(), 2u);
  EXPECT_EQ(top[0].chunk.doc_id, "a");
  EXPECT_NEAR(top[0].similarity, 1.0, 1e-12);
}

TEST(Ranking, MatchesFullSort) {
  Rng rng(13);
  const HashedEmbedder e(16);
  for (int round = 0; round < 50; ++round) {
    std::vector<Chunk> chunks;
    for (int i = 0; i < 20; ++i) {
      Chunk c;
      c.doc_id = "d" + std::to_string(rng.below(4));
      c.index = static_cast<std::size_t>(i);
      c.text = "t" + std::to_string(rng.below(6)) + " t" + std::to_string(rng.below(6));
      c.vector = e.embed(c.text);
      chunks.push_back(c);
    }
    const auto q = e.embed("t1 t2");
    const std::size_t k = rng.below(25);
    std::vector<std::size_t> idx(chunks.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      const double sa = cosine(q, chunks[a].vector), sb = cosine(q, chunks[b].vector);
      if (sa != sb) return sa > sb;
      return std::tie(chunks[a].doc_id, chunks[a].index) < std::tie(chunks[b].doc_id, chunks[b].index);
    });
    const auto got = rank_chunks(q, chunks, k);
    ASSERT_EQ(got.size(), std::min(k, chunks.size()));
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_EQ(got[i].chunk.doc_id, chunks[idx[i]].doc_id);
      EXPECT_EQ(got[i].chunk.index, chunks[idx[i]].index);
    }
  }
}

TEST(PassageIo, RoundTrip) {
  std::vector<Passage> ps{{"a", "Obama visited India.", d(2015, 1, 20)}, {"b", "Undated text.", std::nullopt}};
  std::stringstream ss;
  write_passages_jsonl(ss, ps);
  const auto back = read_passages_jsonl(ss);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].retrieved_at, d(2015, 1, 20));
  EXPECT_FALSE(back[1].retrieved_at);
  EXPECT_EQ(back[1].text, "Undated text.");
  std::istringstream bad("{\"doc_id\":\"x\",\"text\":\"\"}\n");
  EXPECT_THROW(read_passages_jsonl(bad), std::runtime_error);
}

}  // namespace
}  // namespace tkgf
