#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tkgf/tkg_store.hpp"

namespace tkgf {

struct KnowledgePrompt;

using TokenId = std::uint32_t;

enum class TokenKind : std::uint8_t { special, entity, relation, word };

// Token table. Ids 0..3 are PAD, SEP, DATE, UNK; entity and relation labels
// follow as atomic tokens, then digits, punctuation and corpus words.
class TokenVocab {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kSep = 1;
  static constexpr TokenId kDate = 2;
  static constexpr TokenId kUnk = 3;

  TokenVocab();

  // Labels of both vocabularies plus every word and symbol in `corpus`.
  static TokenVocab build(const Vocabulary& entities, const Vocabulary& relations,
                          const std::vector<std::string>& corpus);

  TokenId add(TokenKind kind, std::string_view text);
  std::optional<TokenId> find(TokenKind kind, std::string_view text) const;
  TokenKind kind(TokenId id) const { return entries_.at(id).kind; }
  const std::string& text(TokenId id) const { return entries_.at(id).text; }
  std::size_t size() const { return entries_.size(); }

  std::vector<TokenId> tokenize(std::string_view text) const;
  std::string detokenize(const std::vector<TokenId>& ids) const;

  // Serialized as one "<kind>\t<text>" line per id, text escaped.
  void write(std::ostream& out) const;
  static TokenVocab read(std::istream& in);

  bool operator==(const TokenVocab& other) const;

 private:
  struct Entry {
    TokenKind kind;
    std::string text;
  };

  struct LabelMatch {
    std::size_t length = 0;
    TokenId entity = 0;
    TokenId relation = 0;
    bool has_entity = false;
    bool has_relation = false;
  };

  LabelMatch match_label(std::string_view text, std::size_t pos) const;
  void add_words(std::string_view text);

  std::vector<Entry> entries_;
  std::unordered_map<std::string, TokenId> index_;  // kind byte + text
  std::size_t max_label_length_ = 0;
};

// Token sequence of a prompt, shortened to at most max_len tokens. Whole lines
// are dropped in order: oldest history facts, then the lowest ranked web
// lines, then trailing summary lines. The question is kept; if it alone is
// too long its leading tokens are cut.
std::vector<TokenId> tokenize_prompt(const KnowledgePrompt& prompt, const TokenVocab& vocab,
                                     std::size_t max_len);

}  // namespace tkgf
