#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tkgf/tokenizer.hpp"

namespace tkgf {

struct ModelConfig {
  std::size_t d_model = 128;
  std::size_t n_layers = 2;
  std::size_t n_heads = 4;
  std::size_t max_seq_len = 1024;
  std::size_t vocab_size = 0;    // token vocabulary
  std::size_t entity_count = 0;  // scored classes |V|

  std::size_t d_ff() const { return 4 * d_model; }
  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

struct TensorSpec {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t offset = 0;

  std::size_t size() const { return rows * cols; }
  bool operator==(const TensorSpec&) const = default;
};

// Layout of the flat parameter vector. Matrices are row-major with shape
// (input, output).
std::vector<TensorSpec> parameter_manifest(const ModelConfig& cfg);

template <class T>
struct ModelParams {
  ModelConfig config;
  std::vector<TensorSpec> manifest;
  std::vector<T> values;

  // Random weights from `seed`; layer norm gains 1, biases 0.
  static ModelParams init(const ModelConfig& cfg, std::uint64_t seed);
  static ModelParams zeros(const ModelConfig& cfg);

  const TensorSpec& spec(std::string_view name) const;
  std::span<T> tensor(std::string_view name);
  std::span<const T> tensor(std::string_view name) const;
  // Name of the tensor holding flat index i.
  const std::string& owner(std::size_t i) const;
};

// Pre-norm encoder over the non-PAD tokens (each keeps its position id),
// mean-pooled and projected onto entity scores. Throws std::invalid_argument
// when the sequence is longer than max_seq_len or an id is out of range.
template <class T>
std::vector<T> forward(const ModelParams<T>& params, std::span<const TokenId> ids);

// -log softmax(scores)[target], computed with a shifted log-sum-exp.
template <class T>
double cross_entropy(std::span<const T> scores, std::size_t target);

template <class T>
std::vector<double> softmax(std::span<const T> scores);

struct Sample {
  std::vector<TokenId> ids;
  std::uint32_t target = 0;
};

// Gradient of the mean batch loss into `grad` (resized to the parameter
// count); returns the mean loss. Samples are reduced in fixed groups so the
// result does not depend on `jobs`. Throws std::runtime_error naming the
// tensor when a gradient is not finite.
template <class T>
double gradients(const ModelParams<T>& params, std::span<const Sample> batch, std::vector<T>& grad,
                 unsigned jobs = 1);

template <class T>
double mean_loss(const ModelParams<T>& params, std::span<const Sample> batch);

struct Ranking {
  std::vector<std::uint32_t> order;  // entity ids, best first
  std::vector<std::size_t> rank;     // 1-based position of each entity
};

// Descending score, ties by ascending id.
template <class T>
Ranking rank_entities(std::span<const T> scores);

// Rank of one entity without sorting: strictly greater scores plus equal
// scores on smaller ids, plus one.
template <class T>
std::size_t rank_of(std::span<const T> scores, std::size_t entity);

}  // namespace tkgf
