#include "tkgf/temporal_filter.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

namespace tkgf {

// ----------------------------------------------------------------- sentences

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }
bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }
bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }
bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }

const std::unordered_set<std::string>& abbreviations() {
  static const std::unordered_set<std::string> kAbbrev = {
      "mr",   "mrs",  "ms",   "dr",   "prof", "sr",   "jr",   "st",   "gen",  "gov",  "sen",
      "rep",  "lt",   "col",  "capt", "sgt",  "rev",  "hon",  "pres", "vs",   "etc",  "inc",
      "ltd",  "co",   "corp", "no",   "fig",  "approx", "dept", "est", "u.s",  "u.k",  "u.n",
      "e.g",  "i.e",  "a.m",  "p.m",  "jan",  "feb",  "mar",  "apr",  "jun",  "jul",  "aug",
      "sep",  "sept", "oct",  "nov",  "dec",  "mt",   "ft",   "d.c"};
  return kAbbrev;
}

bool abbreviation_before(std::string_view text, std::size_t dot) {
  std::size_t b = dot;
  while (b > 0 && !is_space(text[b - 1])) --b;
  std::string word;
  for (std::size_t i = b; i < dot; ++i) {
    const char c = text[i];
    if (word.empty() && (c == '(' || c == '"' || c == '\'' || c == '[')) continue;
    word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return abbreviations().count(word) > 0;
}

}  // namespace

std::vector<TextSpan> sentence_spans(std::string_view text) {
  std::vector<TextSpan> spans;
  const std::size_t n = text.size();
  std::size_t i = 0;
  auto skip_space = [&](std::size_t p) {
    while (p < n && is_space(text[p])) ++p;
    return p;
  };
  std::size_t start = skip_space(0);
  auto close = [&](std::size_t end) {
    std::size_t e = end;
    while (e > start && is_space(text[e - 1])) --e;
    if (e > start) spans.push_back({start, e});
  };
  i = start;
  while (i < n) {
    const char c = text[i];
    if (c == '\n') {
      close(i);
      start = skip_space(i);
      i = start;
      continue;
    }
    if (!is_terminal(c)) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < n && (is_terminal(text[j]) || is_closer(text[j]))) ++j;
    bool boundary = false;
    if (j >= n) {
      boundary = true;
    } else if (is_space(text[j])) {
      const std::size_t k = skip_space(j);
      boundary = k >= n || is_upper(text[k]);
      if (c == '.' && j == i + 1 && abbreviation_before(text, i)) boundary = false;
    }
    if (boundary) {
      close(j);
      start = skip_space(j);
      i = start;
    } else {
      i = j;
    }
  }
  if (start < n) close(n);
  return spans;
}

std::vector<std::string> tokenize_sentences(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& s : sentence_spans(text)) out.emplace_back(text.substr(s.begin, s.end - s.begin));
  return out;
}

// ------------------------------------------------------------------- tagging

namespace {

enum class TokKind { alpha, digit, punct };

struct Tok {
  std::string_view text;
  std::size_t begin = 0;
  std::size_t end = 0;
  TokKind kind = TokKind::punct;
  std::string lower;
};

bool is_alpha_byte(unsigned char c) { return std::isalpha(c) || c >= 0x80; }

std::vector<Tok> lex(std::string_view s) {
  std::vector<Tok> toks;
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    if (is_space(static_cast<char>(c))) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    TokKind kind = TokKind::punct;
    if (std::isdigit(c)) {
      kind = TokKind::digit;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
    } else if (is_alpha_byte(c)) {
      kind = TokKind::alpha;
      while (j < s.size() && is_alpha_byte(static_cast<unsigned char>(s[j]))) ++j;
    }
    Tok t{s.substr(i, j - i), i, j, kind, {}};
    for (char ch : t.text) t.lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    toks.push_back(std::move(t));
    i = j;
  }
  return toks;
}

std::optional<unsigned> month_number(std::string_view w) {
  static constexpr std::array<std::string_view, 12> kFull = {
      "january", "february", "march",     "april",   "may",      "june",
      "july",    "august",   "september", "october", "november", "december"};
  for (unsigned m = 0; m < 12; ++m) {
    if (w == kFull[m]) return m + 1;
    if (w.size() == 3 && kFull[m].substr(0, 3) == w) return m + 1;
  }
  if (w == "sept") return 9;
  return std::nullopt;
}

std::optional<int> number_word(std::string_view w) {
  static constexpr std::array<std::string_view, 13> kWords = {
      "zero", "one", "two", "three", "four", "five", "six",
      "seven", "eight", "nine", "ten", "eleven", "twelve"};
  for (int i = 0; i < 13; ++i)
    if (w == kWords[static_cast<std::size_t>(i)]) return i;
  if (w == "a" || w == "an") return 1;
  return std::nullopt;
}

int to_int(std::string_view digits) {
  int v = 0;
  std::from_chars(digits.data(), digits.data() + digits.size(), v);
  return v;
}

enum class Unit { day, week, month, year };

std::optional<Unit> unit_word(std::string_view w) {
  if (w == "day" || w == "days") return Unit::day;
  if (w == "week" || w == "weeks") return Unit::week;
  if (w == "month" || w == "months") return Unit::month;
  if (w == "year" || w == "years") return Unit::year;
  return std::nullopt;
}

CivilDate shift(const CivilDate& ref, Unit unit, int n, ResolveMode mode) {
  switch (unit) {
    case Unit::day: return add_days(ref, n);
    case Unit::week: return add_days(ref, 7 * n);
    case Unit::month: {
      const CivilDate first = add_months_first_day(ref, n);
      return mode == ResolveMode::interval_start ? first : last_day_of_month(first.year, first.month);
    }
    case Unit::year:
      return mode == ResolveMode::interval_start ? CivilDate{ref.year + n, 1, 1}
                                                 : CivilDate{ref.year + n, 12, 31};
  }
  return ref;
}

class Tagger {
 public:
  Tagger(std::string_view sentence, std::optional<CivilDate> ref, ResolveMode mode)
      : s_(sentence), toks_(lex(sentence)), ref_(ref), mode_(mode) {}

  DatedSentence run() {
    out_.sentence = std::string(s_);
    std::size_t i = 0;
    while (i < toks_.size()) {
      const std::size_t used = match_at(i);
      i += used > 0 ? used : 1;
    }
    for (const auto& m : out_.mentions)
      if (m.date) out_.resolved_dates.push_back(*m.date);
    return std::move(out_);
  }

 private:
  const Tok* at(std::size_t i) const { return i < toks_.size() ? &toks_[i] : nullptr; }
  bool adjacent(std::size_t a, std::size_t b) const {
    return at(a) && at(b) && toks_[a].end == toks_[b].begin;
  }
  bool is_digits(std::size_t i, std::size_t lo, std::size_t hi) const {
    const Tok* t = at(i);
    return t && t->kind == TokKind::digit && t->text.size() >= lo && t->text.size() <= hi;
  }
  bool is_punct(std::size_t i, char c) const {
    const Tok* t = at(i);
    return t && t->kind == TokKind::punct && t->text.size() == 1 && t->text[0] == c;
  }
  bool is_word(std::size_t i, std::string_view w) const {
    const Tok* t = at(i);
    return t && t->kind == TokKind::alpha && t->lower == w;
  }
  // A digit token glued to letters or digits on either side is part of an
  // identifier, not a date component.
  bool isolated_number(std::size_t i) const {
    if (i > 0 && adjacent(i - 1, i) && toks_[i - 1].kind != TokKind::punct) return false;
    if (adjacent(i, i + 1) && toks_[i + 1].kind != TokKind::punct && !ordinal_suffix(i)) return false;
    return true;
  }
  // "5th": a short number followed directly by st/nd/rd/th and nothing else.
  bool ordinal_suffix(std::size_t i) const {
    static const std::unordered_set<std::string> kSuffix = {"st", "nd", "rd", "th"};
    if (!is_digits(i, 1, 2) || !adjacent(i, i + 1) || toks_[i + 1].kind != TokKind::alpha) return false;
    if (!kSuffix.count(toks_[i + 1].lower)) return false;
    return !adjacent(i + 1, i + 2) || toks_[i + 2].kind == TokKind::punct;
  }

  void emit(std::size_t first, std::size_t last, MentionKind kind, std::optional<CivilDate> date) {
    TemporalMention m;
    m.begin = toks_[first].begin;
    m.end = toks_[last].end;
    m.text = std::string(s_.substr(m.begin, m.end - m.begin));
    m.kind = kind;
    m.date = date;
    if (!date) out_.diagnostics.push_back("unresolved relative expression '" + m.text + "'");
    out_.mentions.push_back(std::move(m));
  }

  // Emits a full date, or records a diagnostic when the calendar rejects it.
  void emit_full(std::size_t first, std::size_t last, int y, unsigned m, unsigned d) {
    const CivilDate date{y, m, d};
    if (!is_valid(date)) {
      out_.diagnostics.push_back("invalid date '" +
                                 std::string(s_.substr(toks_[first].begin, toks_[last].end - toks_[first].begin)) +
                                 "'");
      return;
    }
    emit(first, last, MentionKind::absolute, date);
  }

  void emit_month(std::size_t first, std::size_t last, int y, unsigned m) {
    const CivilDate date = mode_ == ResolveMode::interval_start ? CivilDate{y, m, 1} : last_day_of_month(y, m);
    emit(first, last, MentionKind::partial, date);
  }

  void emit_day_without_year(std::size_t first, std::size_t last, unsigned m, unsigned d) {
    std::optional<CivilDate> date;
    if (ref_) {
      const CivilDate c{ref_->year, m, d};
      if (!is_valid(c)) {
        out_.diagnostics.push_back("invalid date");
        return;
      }
      date = c;
    }
    emit(first, last, MentionKind::relative, date);
  }

  // Skips an ordinal suffix glued to a day number ("25th").
  std::size_t after_day(std::size_t i) const { return ordinal_suffix(i) ? i + 2 : i + 1; }

  bool plausible_year(std::size_t i) const { return is_digits(i, 4, 4) && isolated_number(i); }

  std::size_t match_at(std::size_t i) {
    if (std::size_t n = match_iso(i)) return n;
    if (std::size_t n = match_month_first(i)) return n;
    if (std::size_t n = match_day_first(i)) return n;
    if (std::size_t n = match_relative(i)) return n;
    if (std::size_t n = match_bare_year(i)) return n;
    return 0;
  }

  std::size_t match_iso(std::size_t i) {
    if (!is_digits(i, 4, 4) || !is_punct(i + 1, '-') || !is_digits(i + 2, 1, 2) ||
        !is_punct(i + 3, '-') || !is_digits(i + 4, 1, 2))
      return 0;
    for (std::size_t k = i; k < i + 4; ++k)
      if (!adjacent(k, k + 1)) return 0;
    if (i > 0 && adjacent(i - 1, i) && toks_[i - 1].kind != TokKind::punct) return 0;
    emit_full(i, i + 4, to_int(toks_[i].text), static_cast<unsigned>(to_int(toks_[i + 2].text)),
              static_cast<unsigned>(to_int(toks_[i + 4].text)));
    return 5;
  }

  std::size_t match_month_first(std::size_t i) {
    const Tok* t = at(i);
    if (!t || t->kind != TokKind::alpha) return 0;
    const auto month = month_number(t->lower);
    if (!month) return 0;
    std::size_t j = i + 1;
    if (is_punct(j, '.') && adjacent(i, j) && t->text.size() <= 4) ++j;
    if (is_digits(j, 1, 2) && isolated_number(j)) {
      const unsigned day = static_cast<unsigned>(to_int(toks_[j].text));
      std::size_t k = after_day(j);
      std::size_t y = is_punct(k, ',') ? k + 1 : k;
      if (plausible_year(y)) {
        emit_full(i, y, to_int(toks_[y].text), *month, day);
        return y - i + 1;
      }
      if (day >= 1 && day <= 31) {
        emit_day_without_year(i, k - 1, *month, day);
        return k - i;
      }
      return 0;
    }
    std::size_t y = is_punct(j, ',') ? j + 1 : j;
    if (plausible_year(y)) {
      emit_month(i, y, to_int(toks_[y].text), *month);
      return y - i + 1;
    }
    return 0;
  }

  std::size_t match_day_first(std::size_t i) {
    if (!is_digits(i, 1, 2) || !isolated_number(i)) return 0;
    const unsigned day = static_cast<unsigned>(to_int(toks_[i].text));
    std::size_t j = after_day(i);
    if (is_word(j, "of")) ++j;
    const Tok* t = at(j);
    if (!t || t->kind != TokKind::alpha) return 0;
    const auto month = month_number(t->lower);
    // "may" as a bare word after a number is too ambiguous without a year.
    if (!month) return 0;
    std::size_t k = j + 1;
    if (is_punct(k, '.') && adjacent(j, k) && t->text.size() <= 4) ++k;
    std::size_t y = is_punct(k, ',') ? k + 1 : k;
    if (plausible_year(y)) {
      emit_full(i, y, to_int(toks_[y].text), *month, day);
      return y - i + 1;
    }
    if (t->lower == "may" || day < 1 || day > 31) return 0;
    emit_day_without_year(i, j, *month, day);
    return j - i + 1;
  }

  std::size_t match_relative(std::size_t i) {
    const Tok* t = at(i);
    if (!t) return 0;
    auto resolved = [&](auto fn) -> std::optional<CivilDate> {
      if (!ref_) return std::nullopt;
      return fn(*ref_);
    };
    if (t->kind == TokKind::alpha) {
      if (t->lower == "today" || t->lower == "tonight") {
        emit(i, i, MentionKind::relative, resolved([](CivilDate r) { return r; }));
        return 1;
      }
      if (t->lower == "yesterday" || t->lower == "tomorrow") {
        const int n = t->lower == "tomorrow" ? 1 : -1;
        emit(i, i, MentionKind::relative, resolved([&](CivilDate r) { return add_days(r, n); }));
        return 1;
      }
      static const std::unordered_set<std::string> kNext = {"next", "coming", "following"};
      static const std::unordered_set<std::string> kLast = {"last", "previous", "past"};
      const bool next = kNext.count(t->lower) > 0;
      const bool last = kLast.count(t->lower) > 0;
      const bool cur = t->lower == "this" || t->lower == "current";
      if ((next || last || cur) && at(i + 1) && toks_[i + 1].kind == TokKind::alpha) {
        const auto unit = unit_word(toks_[i + 1].lower);
        if (unit && (toks_[i + 1].lower.back() != 's')) {
          const int n = next ? 1 : last ? -1 : 0;
          emit(i, i + 1, MentionKind::relative,
               resolved([&](CivilDate r) { return shift(r, *unit, n, mode_); }));
          return 2;
        }
      }
      // "in three days", "in 2 weeks"
      if (t->lower == "in" && at(i + 1) && at(i + 2)) {
        std::optional<int> n;
        if (is_digits(i + 1, 1, 3) && isolated_number(i + 1)) n = to_int(toks_[i + 1].text);
        else if (toks_[i + 1].kind == TokKind::alpha) n = number_word(toks_[i + 1].lower);
        const auto unit = toks_[i + 2].kind == TokKind::alpha ? unit_word(toks_[i + 2].lower) : std::nullopt;
        if (n && unit) {
          emit(i, i + 2, MentionKind::relative,
               resolved([&](CivilDate r) { return shift(r, *unit, *n, mode_); }));
          return 3;
        }
      }
    }
    // "three days ago", "2 years ago"
    std::optional<int> n;
    if (is_digits(i, 1, 3) && isolated_number(i)) n = to_int(t->text);
    else if (t->kind == TokKind::alpha) n = number_word(t->lower);
    if (n && at(i + 1) && toks_[i + 1].kind == TokKind::alpha && is_word(i + 2, "ago")) {
      if (const auto unit = unit_word(toks_[i + 1].lower)) {
        emit(i, i + 2, MentionKind::relative,
             resolved([&](CivilDate r) { return shift(r, *unit, -*n, mode_); }));
        return 3;
      }
    }
    return 0;
  }

  std::size_t match_bare_year(std::size_t i) {
    if (!plausible_year(i)) return 0;
    const int y = to_int(toks_[i].text);
    if (y < 1900 || y > 2100) return 0;
    const CivilDate date = mode_ == ResolveMode::interval_start ? CivilDate{y, 1, 1} : CivilDate{y, 12, 31};
    emit(i, i, MentionKind::partial, date);
    return 1;
  }

  std::string_view s_;
  std::vector<Tok> toks_;
  std::optional<CivilDate> ref_;
  ResolveMode mode_;
  DatedSentence out_;
};

}  // namespace

DatedSentence tag_and_resolve(std::string_view sentence, std::optional<CivilDate> reference,
                              ResolveMode mode) {
  return Tagger(sentence, reference, mode).run();
}

// ----------------------------------------------------------------- filtering

RelevancePeriod relevance_period_before(const TimeAxis& axis, Step t_q, UndatedPolicy undated) {
  const auto start = axis.start_date(t_q);
  if (!start) throw std::invalid_argument("relevance period needs a calendar time axis");
  return {add_days(*start, -1), undated, ResolveMode::interval_start};
}

FilterResult filter_future(const Passage& passage, const RelevancePeriod& period) {
  FilterResult result;
  const std::string_view text = passage.text;
  const auto spans = sentence_spans(text);
  std::vector<bool> keep(spans.size(), true);
  for (std::size_t i = 0; i < spans.size(); ++i) {
    DatedSentence ds = tag_and_resolve(text.substr(spans[i].begin, spans[i].end - spans[i].begin),
                                       passage.retrieved_at, period.mode);
    ds.offset = spans[i].begin;
    for (const auto& d : ds.diagnostics) result.diagnostics.push_back({passage.doc_id, ds.sentence, d});
    const auto future = std::find_if(ds.resolved_dates.begin(), ds.resolved_dates.end(),
                                     [&](const CivilDate& d) { return d > period.threshold; });
    if (future != ds.resolved_dates.end()) {
      keep[i] = false;
      result.diagnostics.push_back(
          {passage.doc_id, ds.sentence, "future date " + format_iso(*future) + " after " + format_iso(period.threshold)});
    } else if (!ds.dated() && period.undated == UndatedPolicy::drop) {
      keep[i] = false;
      result.diagnostics.push_back({passage.doc_id, ds.sentence, "undated sentence dropped by policy"});
    }
    (keep[i] ? result.retained : result.dropped).push_back(std::move(ds));
  }

  // Remove each dropped sentence together with the whitespace that follows it,
  // so a fully retained passage comes back byte-identical.
  std::string out;
  std::size_t cursor = 0;
  bool any_dropped = false;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    if (keep[i]) continue;
    any_dropped = true;
    out.append(text.substr(cursor, spans[i].begin - cursor));
    cursor = i + 1 < spans.size() ? spans[i + 1].begin : text.size();
  }
  out.append(text.substr(cursor));
  if (any_dropped) {
    while (!out.empty() && is_space(out.back())) out.pop_back();
  }
  result.retained_text = std::move(out);
  return result;
}

// ------------------------------------------------------------------ chunking

namespace {

std::vector<std::string_view> whitespace_tokens(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && !is_space(s[j])) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

std::vector<Chunk> chunk_passages(const std::vector<Passage>& passages, const Embedder& embedder,
                                  std::size_t max_tokens, std::size_t overlap) {
  if (max_tokens == 0 || overlap >= max_tokens)
    throw std::invalid_argument("chunking needs 0 <= overlap < max_tokens");
  std::vector<Chunk> chunks;
  for (const auto& p : passages) {
    std::vector<std::string_view> tokens;
    std::vector<bool> sentence_end{false};  // sentence_end[k]: a sentence ends before token k
    for (const auto& span : sentence_spans(p.text)) {
      for (auto tok : whitespace_tokens(std::string_view(p.text).substr(span.begin, span.end - span.begin))) {
        tokens.push_back(tok);
        sentence_end.push_back(false);
      }
      sentence_end.back() = true;
    }
    const std::size_t n = tokens.size();
    if (n == 0) continue;
    std::size_t start = 0, prev_end = 0, index = 0;
    while (true) {
      const std::size_t limit = std::min(start + max_tokens, n);
      std::size_t end = limit;
      if (limit < n) {
        // Prefer a sentence end far enough along that the next window's
        // overlap stays inside this one.
        const std::size_t lo = std::max(start + overlap + 1, prev_end + overlap);
        for (std::size_t e = limit; e >= lo && e > start; --e) {
          if (sentence_end[e]) {
            end = e;
            break;
          }
        }
      }
      Chunk c;
      c.doc_id = p.doc_id;
      c.index = index++;
      for (std::size_t k = start; k < end; ++k) {
        if (k > start) c.text.push_back(' ');
        c.text.append(tokens[k]);
      }
      c.vector = embedder.embed(c.text);
      chunks.push_back(std::move(c));
      if (end == n) break;
      prev_end = end;
      start = end - overlap;
    }
  }
  return chunks;
}

std::vector<ScoredChunk> rank_chunks(const EmbeddingVector& query, const std::vector<Chunk>& chunks,
                                     std::size_t k) {
  std::vector<ScoredChunk> scored;
  scored.reserve(chunks.size());
  for (const auto& c : chunks) scored.push_back({c, cosine(query, c.vector)});
  std::sort(scored.begin(), scored.end(), [](const ScoredChunk& a, const ScoredChunk& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    if (a.chunk.doc_id != b.chunk.doc_id) return a.chunk.doc_id < b.chunk.doc_id;
    return a.chunk.index < b.chunk.index;
  });
  if (scored.size() > k) scored.resize(k);
  return scored;
}

// ------------------------------------------------------------------------ io

std::vector<Passage> read_passages_jsonl(std::istream& in) {
  std::vector<Passage> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error("passages line " + std::to_string(lineno) + ": " + e.what());
    }
    Passage p;
    p.doc_id = j.at("doc_id").get<std::string>();
    p.text = j.at("text").get<std::string>();
    if (p.text.empty())
      throw std::runtime_error("passages line " + std::to_string(lineno) + ": empty text");
    if (j.contains("retrieved_at") && !j["retrieved_at"].is_null()) {
      p.retrieved_at = parse_iso(j["retrieved_at"].get<std::string>());
      if (!p.retrieved_at)
        throw std::runtime_error("passages line " + std::to_string(lineno) + ": bad retrieved_at");
    }
    out.push_back(std::move(p));
  }
  return out;
}

void write_passages_jsonl(std::ostream& out, const std::vector<Passage>& passages) {
  for (const auto& p : passages) {
    nlohmann::json j{{"doc_id", p.doc_id}, {"text", p.text}};
    j["retrieved_at"] = p.retrieved_at ? nlohmann::json(format_iso(*p.retrieved_at)) : nlohmann::json(nullptr);
    out << j.dump() << '\n';
  }
}

void write_diagnostics_jsonl(std::ostream& out, const std::vector<Diagnostic>& diagnostics) {
  for (const auto& d : diagnostics)
    out << nlohmann::json{{"doc_id", d.doc_id}, {"sentence", d.sentence}, {"reason", d.reason}}.dump()
        << '\n';
}

}  // namespace tkgf
