#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tkgf/checkpoint.hpp"
#include "tkgf/prompting.hpp"
#include "tkgf/trainer.hpp"

namespace tkgf {

struct PromptEnv {
  std::span<const Passage> passages;
  const Embedder* embedder = nullptr;
  PllmClient* pllm = nullptr;
  PromptConfig prompt;
  bool bidirectional = true;
};

// Training prompts see only the training graph; validation prompts see train
// and valid facts before their step. Targets are the held-out objects.
struct Corpus {
  std::vector<TimedSample> train;
  std::vector<TimedSample> valid;
  TokenVocab vocab;
  std::size_t skipped = 0;  // facts whose prompt could not be assembled
};

Corpus build_corpus(const DatasetSplit& split, const PromptEnv& env, std::size_t max_seq_len);

// Builds the corpus, fills vocabulary and entity counts into `model`, trains,
// and packs the best parameters.
Checkpoint train_checkpoint(const DatasetSplit& split, const PromptEnv& env, ModelConfig model,
                            const TrainConfig& cfg, TrainLog* log = nullptr, std::string fingerprint = {});

}  // namespace tkgf
