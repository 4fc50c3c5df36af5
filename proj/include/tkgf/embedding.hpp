#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace tkgf {

struct EmbeddingVector {
  std::vector<double> values;
  double norm = 0.0;  // Euclidean norm of values

  static EmbeddingVector from_values(std::vector<double> values);
  std::size_t dim() const { return values.size(); }
};

// a.b / (|a||b|), 0 when either norm is zero. Throws std::invalid_argument on
// dimension mismatch.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual EmbeddingVector embed(std::string_view text) const = 0;
  virtual std::size_t dim() const = 0;
};

// Lowercased alphanumeric runs. Bytes >= 0x80 count as word characters so
// UTF-8 words stay intact.
std::vector<std::string> embedding_tokens(std::string_view text);

// Bag of words hashed into `dim` buckets with FNV-1a; each distinct token adds
// log(1 + tf) to its bucket, then the vector is L2-normalized.
class HashedEmbedder final : public Embedder {
 public:
  explicit HashedEmbedder(std::size_t dim = 256, std::uint64_t seed = 0);

  EmbeddingVector embed(std::string_view text) const override;
  std::size_t dim() const override { return dim_; }
  std::uint64_t seed() const { return seed_; }

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

}  // namespace tkgf
