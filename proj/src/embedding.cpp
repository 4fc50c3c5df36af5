#include "tkgf/embedding.hpp"

#include <cctype>
#include <cmath>
#include <map>
#include <stdexcept>

#include "tkgf/hashing.hpp"

namespace tkgf {

EmbeddingVector EmbeddingVector::from_values(std::vector<double> values) {
  double sq = 0.0;
  for (double v : values) sq += v * v;
  return {std::move(values), std::sqrt(sq)};
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim())
    throw std::invalid_argument("cosine: dimension mismatch " + std::to_string(a.dim()) + " vs " +
                                std::to_string(b.dim()));
  if (a.norm == 0.0 || b.norm == 0.0) return 0.0;
  double dot = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) dot += a.values[i] * b.values[i];
  return dot / (a.norm * b.norm);
}

std::vector<std::string> embedding_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : text) {
    const bool word = std::isalnum(c) || c >= 0x80;
    if (word) {
      cur.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

HashedEmbedder::HashedEmbedder(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
  if (dim == 0) throw std::invalid_argument("embedding dimension must be positive");
}

EmbeddingVector HashedEmbedder::embed(std::string_view text) const {
  std::map<std::string, int> tf;
  for (auto& tok : embedding_tokens(text)) ++tf[tok];
  std::vector<double> values(dim_, 0.0);
  for (const auto& [tok, count] : tf)
    values[fnv1a64(tok, seed_) % dim_] += std::log1p(static_cast<double>(count));
  double sq = 0.0;
  for (double v : values) sq += v * v;
  if (sq == 0.0) return {std::move(values), 0.0};
  const double inv = 1.0 / std::sqrt(sq);
  for (double& v : values) v *= inv;
  return EmbeddingVector::from_values(std::move(values));
}

}  // namespace tkgf
