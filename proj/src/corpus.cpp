#include "tkgf/corpus.hpp"

#include <map>
#include <stdexcept>
#include <tuple>

namespace tkgf {

namespace {

using PromptKey = std::tuple<EntityId, RelationId, Step>;

std::map<PromptKey, KnowledgePrompt> assemble_all(const TemporalKG& knowledge, const std::vector<Quadruple>& facts,
                                                  const PromptEnv& env, std::size_t& skipped) {
  std::map<PromptKey, KnowledgePrompt> out;
  for (const auto& f : facts) {
    if (!env.bidirectional && knowledge.is_reciprocal(f.r)) continue;
    const PromptKey key{f.s, f.r, f.t};
    if (out.count(key)) continue;
    try {
      out.emplace(key, assemble(Query{f.s, f.r, f.t, QueryDirection::object_missing, std::nullopt}, knowledge,
                                env.passages, *env.embedder, env.pllm, env.prompt));
    } catch (const std::exception&) {
      ++skipped;
    }
  }
  return out;
}

std::vector<TimedSample> samples(const std::vector<Quadruple>& facts, const std::map<PromptKey, KnowledgePrompt>& prompts,
                                 const TokenVocab& vocab, std::size_t max_len) {
  std::vector<TimedSample> out;
  std::map<PromptKey, std::vector<TokenId>> tokens;
  for (const auto& f : facts) {
    const PromptKey key{f.s, f.r, f.t};
    const auto it = prompts.find(key);
    if (it == prompts.end()) continue;
    auto tok = tokens.find(key);
    if (tok == tokens.end()) tok = tokens.emplace(key, tokenize_prompt(it->second, vocab, max_len)).first;
    out.push_back({Sample{tok->second, f.o}, f.t});
  }
  return out;
}

}  // namespace

Corpus build_corpus(const DatasetSplit& split, const PromptEnv& env, std::size_t max_seq_len) {
  if (!env.embedder) throw std::invalid_argument("corpus needs an embedder");
  Corpus c;
  const auto train_prompts = assemble_all(split.train, split.train.quadruples(), env, c.skipped);
  const TemporalKG observed = split.observed();
  const auto valid_prompts = assemble_all(observed, split.valid.quadruples(), env, c.skipped);

  std::vector<std::string> texts;
  for (const auto& [key, prompt] : train_prompts)
    for (const auto& line : prompt.lines) texts.push_back(line.text);
  c.vocab = TokenVocab::build(split.train.entities(), split.train.relations(), texts);
  c.train = samples(split.train.quadruples(), train_prompts, c.vocab, max_seq_len);
  c.valid = samples(split.valid.quadruples(), valid_prompts, c.vocab, max_seq_len);
  return c;
}

Checkpoint train_checkpoint(const DatasetSplit& split, const PromptEnv& env, ModelConfig model,
                            const TrainConfig& cfg, TrainLog* log, std::string fingerprint) {
  Corpus corpus = build_corpus(split, env, model.max_seq_len);
  model.vocab_size = corpus.vocab.size();
  model.entity_count = split.train.entities().size();
  auto result = train<float>(std::move(corpus.train), std::move(corpus.valid), model, cfg);
  if (log) *log = result.log;
  return Checkpoint{std::move(result.params), std::move(corpus.vocab), std::move(fingerprint)};
}

}  // namespace tkgf
