#include "tkgf/tokenizer.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>
#include <stdexcept>

#include "tkgf/prompting.hpp"

namespace tkgf {

namespace {

bool is_word_byte(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || (u >= '0' && u <= '9') || (u >= 'a' && u <= 'z') || (u >= 'A' && u <= 'Z');
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v'; }

std::string key_of(TokenKind kind, std::string_view text) {
  std::string key(1, static_cast<char>('0' + static_cast<int>(kind)));
  key += text;
  return key;
}

// Length of a number token run at pos: digits, optionally continued by
// "-digits" groups. Zero when the alphanumeric run contains letters.
std::size_t number_length(std::string_view text, std::size_t pos) {
  std::size_t end = pos;
  while (end < text.size() && is_word_byte(text[end])) ++end;
  for (std::size_t i = pos; i < end; ++i)
    if (!is_digit(text[i])) return 0;
  while (end + 1 < text.size() && text[end] == '-' && is_digit(text[end + 1])) {
    std::size_t next = end + 1;
    while (next < text.size() && is_word_byte(text[next])) ++next;
    bool digits = true;
    for (std::size_t i = end + 1; i < next; ++i) digits = digits && is_digit(text[i]);
    if (!digits) break;
    end = next;
  }
  return end - pos;
}

bool glued_before(std::string_view t) {
  static const std::set<std::string_view> kSet{",", ".", ":", ";", "?", "!", "]", ")", "\n", "'", "-", "/"};
  return kSet.count(t) > 0;
}

bool glued_after(std::string_view t) {
  static const std::set<std::string_view> kSet{"[", "(", "\n", "'", "-", "/"};
  return kSet.count(t) > 0;
}

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '\\') out += "\\\\";
    else if (c == '\n') out += "\\n";
    else if (c == '\t') out += "\\t";
    else out += c;
  }
  return out;
}

std::string unescape(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\' || i + 1 == s.size()) {
      out += s[i];
      continue;
    }
    const char c = s[++i];
    out += c == 'n' ? '\n' : c == 't' ? '\t' : c;
  }
  return out;
}

}  // namespace

TokenVocab::TokenVocab() {
  add(TokenKind::special, "<pad>");
  add(TokenKind::special, "<sep>");
  add(TokenKind::special, "<date>");
  add(TokenKind::special, "<unk>");
}

TokenId TokenVocab::add(TokenKind kind, std::string_view text) {
  const std::string key = key_of(kind, text);
  if (auto it = index_.find(key); it != index_.end()) return it->second;
  const auto id = static_cast<TokenId>(entries_.size());
  entries_.push_back({kind, std::string(text)});
  index_.emplace(key, id);
  if (kind == TokenKind::entity || kind == TokenKind::relation)
    max_label_length_ = std::max(max_label_length_, text.size());
  return id;
}

std::optional<TokenId> TokenVocab::find(TokenKind kind, std::string_view text) const {
  if (auto it = index_.find(key_of(kind, text)); it != index_.end()) return it->second;
  return std::nullopt;
}

TokenVocab TokenVocab::build(const Vocabulary& entities, const Vocabulary& relations,
                             const std::vector<std::string>& corpus) {
  TokenVocab v;
  for (const auto& l : entities.labels())
    if (!l.empty()) v.add(TokenKind::entity, l);
  for (const auto& l : relations.labels())
    if (!l.empty()) v.add(TokenKind::relation, l);
  for (char c = '0'; c <= '9'; ++c) v.add(TokenKind::word, std::string(1, c));
  for (std::string_view p : {"-", "\n", "[", "]", ",", ":", "?", ".", "Q", "History", "Web", "Summary"})
    v.add(TokenKind::word, p);
  for (const auto& text : corpus) v.add_words(text);
  return v;
}

TokenVocab::LabelMatch TokenVocab::match_label(std::string_view text, std::size_t pos) const {
  LabelMatch m;
  if (pos > 0 && is_word_byte(text[pos - 1]) && is_word_byte(text[pos])) return m;
  const std::size_t longest = std::min(max_label_length_, text.size() - pos);
  for (std::size_t len = longest; len > 0; --len) {
    const std::size_t end = pos + len;
    if (end < text.size() && is_word_byte(text[end - 1]) && is_word_byte(text[end])) continue;
    const std::string_view cand = text.substr(pos, len);
    const auto e = find(TokenKind::entity, cand);
    const auto r = find(TokenKind::relation, cand);
    if (!e && !r) continue;
    m.length = len;
    if (e) m.entity = *e, m.has_entity = true;
    if (r) m.relation = *r, m.has_relation = true;
    return m;
  }
  return m;
}

void TokenVocab::add_words(std::string_view text) {
  std::set<std::string> words;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const char c = text[pos];
    if (is_space(c)) {
      ++pos;
      continue;
    }
    if (const auto m = match_label(text, pos); m.length > 0) {
      pos += m.length;
      continue;
    }
    if (text.compare(pos, 3, "###") == 0) {
      pos += 3;
      continue;
    }
    if (const std::size_t n = number_length(text, pos); n > 0) {
      for (std::size_t i = pos; i < pos + n; ++i) words.insert(std::string(1, text[i]));
      pos += n;
      continue;
    }
    if (is_word_byte(c)) {
      std::size_t end = pos;
      while (end < text.size() && is_word_byte(text[end])) ++end;
      words.insert(std::string(text.substr(pos, end - pos)));
      pos = end;
      continue;
    }
    words.insert(std::string(1, c));
    ++pos;
  }
  for (const auto& w : words) add(TokenKind::word, w);
}

std::vector<TokenId> TokenVocab::tokenize(std::string_view text) const {
  std::vector<TokenId> out;
  int slot = -1;  // position inside a "[s, r, o]" triple, -1 outside
  std::size_t pos = 0;
  auto word = [&](std::string_view w) { out.push_back(find(TokenKind::word, w).value_or(kUnk)); };
  while (pos < text.size()) {
    const char c = text[pos];
    if (is_space(c)) {
      ++pos;
      continue;
    }
    if (const auto m = match_label(text, pos); m.length > 0) {
      const bool as_relation = m.has_relation && (!m.has_entity || slot == 1);
      out.push_back(as_relation ? m.relation : m.entity);
      pos += m.length;
      continue;
    }
    if (text.compare(pos, 3, "###") == 0) {
      out.push_back(kSep);
      pos += 3;
      continue;
    }
    if (const std::size_t n = number_length(text, pos); n > 0) {
      out.push_back(kDate);
      for (std::size_t i = pos; i < pos + n; ++i) word(text.substr(i, 1));
      pos += n;
      continue;
    }
    if (is_word_byte(c)) {
      std::size_t end = pos;
      while (end < text.size() && is_word_byte(text[end])) ++end;
      word(text.substr(pos, end - pos));
      pos = end;
      continue;
    }
    if (c == '[') slot = 0;
    else if (c == ']' || c == '\n') slot = -1;
    else if (c == ',' && slot >= 0) ++slot;
    word(text.substr(pos, 1));
    ++pos;
  }
  return out;
}

std::string TokenVocab::detokenize(const std::vector<TokenId>& ids) const {
  std::string out;
  bool glue = true;
  bool in_number = false;
  for (TokenId id : ids) {
    if (id == kPad) continue;
    if (id == kDate) {
      if (!glue) out += ' ';
      glue = true;
      in_number = true;
      continue;
    }
    const Entry& e = entries_.at(id);
    const std::string_view t = id == kSep ? std::string_view("###") : std::string_view(e.text);
    const bool numeric = e.kind == TokenKind::word && t.size() == 1 && (is_digit(t[0]) || t[0] == '-');
    if (in_number && numeric) {
      out += t;
      glue = false;
      continue;
    }
    in_number = false;
    if (!glue && !glued_before(t)) out += ' ';
    out += t;
    glue = glued_after(t);
  }
  return out;
}

void TokenVocab::write(std::ostream& out) const {
  for (const auto& e : entries_) out << static_cast<int>(e.kind) << '\t' << escape(e.text) << '\n';
}

TokenVocab TokenVocab::read(std::istream& in) {
  TokenVocab v;
  v.entries_.clear();
  v.index_.clear();
  std::string line;
  while (std::getline(in, line)) {
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw std::runtime_error("malformed token vocabulary line");
    const int kind = std::stoi(line.substr(0, tab));
    if (kind < 0 || kind > 3) throw std::runtime_error("bad token kind in vocabulary");
    const auto before = v.entries_.size();
    v.add(static_cast<TokenKind>(kind), unescape(line.substr(tab + 1)));
    if (v.entries_.size() == before) throw std::runtime_error("duplicate token in vocabulary");
  }
  if (v.entries_.size() < 4) throw std::runtime_error("token vocabulary lacks special tokens");
  return v;
}

bool TokenVocab::operator==(const TokenVocab& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i)
    if (entries_[i].kind != other.entries_[i].kind || entries_[i].text != other.entries_[i].text) return false;
  return true;
}

std::vector<TokenId> tokenize_prompt(const KnowledgePrompt& prompt, const TokenVocab& vocab,
                                     std::size_t max_len) {
  const std::size_t n = prompt.lines.size();
  std::vector<std::vector<TokenId>> toks(n);
  const TokenId newline = vocab.find(TokenKind::word, "\n").value_or(TokenVocab::kUnk);
  for (std::size_t i = 0; i < n; ++i) {
    toks[i] = vocab.tokenize(prompt.lines[i].text);
    toks[i].push_back(newline);
  }
  std::vector<bool> keep(n, true);

  auto header = [&](Section s) {
    std::vector<TokenId> h{TokenVocab::kSep};
    h.push_back(vocab.find(TokenKind::word, to_string(s)).value_or(TokenVocab::kUnk));
    h.push_back(newline);
    return h;
  };
  auto total = [&] {
    std::size_t sum = 0;
    std::optional<Section> current;
    for (std::size_t i = 0; i < n; ++i) {
      if (!keep[i]) continue;
      const Section s = prompt.lines[i].section;
      if (s == Section::question) sum += 2;  // "Q :"
      else if (current != s) sum += 3, current = s;
      sum += toks[i].size();
    }
    return sum;
  };

  // Drop order over candidate lines.
  std::vector<std::size_t> order;
  std::vector<std::size_t> history;
  for (std::size_t i = 0; i < n; ++i)
    if (prompt.lines[i].section == Section::history) history.push_back(i);
  std::stable_sort(history.begin(), history.end(), [&](std::size_t a, std::size_t b) {
    const auto ta = prompt.lines[a].fact ? prompt.lines[a].fact->t : 0;
    const auto tb = prompt.lines[b].fact ? prompt.lines[b].fact->t : 0;
    return ta < tb;
  });
  order = history;
  for (Section s : {Section::web, Section::summary})
    for (std::size_t i = n; i-- > 0;)
      if (prompt.lines[i].section == s) order.push_back(i);

  std::size_t current = total();
  for (std::size_t idx : order) {
    if (current <= max_len) break;
    keep[idx] = false;
    current = total();
  }

  std::vector<TokenId> out;
  std::optional<Section> section;
  const TokenId q = vocab.find(TokenKind::word, "Q").value_or(TokenVocab::kUnk);
  const TokenId colon = vocab.find(TokenKind::word, ":").value_or(TokenVocab::kUnk);
  for (std::size_t i = 0; i < n; ++i) {
    if (!keep[i]) continue;
    const Section s = prompt.lines[i].section;
    if (s == Section::question) {
      out.push_back(q);
      out.push_back(colon);
    } else if (section != s) {
      const auto h = header(s);
      out.insert(out.end(), h.begin(), h.end());
      section = s;
    }
    out.insert(out.end(), toks[i].begin(), toks[i].end());
  }
  if (out.size() > max_len) out.erase(out.begin(), out.end() - static_cast<std::ptrdiff_t>(max_len));
  return out;
}

}  // namespace tkgf
