#pragma once

#include <filesystem>
#include <string>

#include "tkgf/tokenizer.hpp"
#include "tkgf/transformer.hpp"

namespace tkgf {

struct Checkpoint {
  ModelParams<float> params;
  TokenVocab vocab;
  std::string fingerprint;  // config fingerprint of the producing run
};

// Layout: "TKGFCKPT", u32 version, u64 header length, JSON header (config,
// manifest, vocabulary, fingerprint), then the float32 parameters in
// little-endian order.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace tkgf
