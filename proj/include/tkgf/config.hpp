#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tkgf/evaluation.hpp"
#include "tkgf/prompting.hpp"
#include "tkgf/tkg_store.hpp"
#include "tkgf/trainer.hpp"
#include "tkgf/transformer.hpp"

namespace tkgf {

// Flat key=value run configuration. Lines are `key = value`, `# comment` or
// `include <path>`; later assignments win. Every key has a default and
// unknown keys are rejected. Relative paths resolve against the file that
// sets them.
class RunConfig {
 public:
  RunConfig();

  static RunConfig load(const std::filesystem::path& path);
  void merge_file(const std::filesystem::path& path);
  void set(std::string_view key, std::string value);
  // "key=value"
  void apply(std::string_view assignment);

  const std::string& get(std::string_view key) const;
  bool get_bool(std::string_view key) const;
  long long get_int(std::string_view key) const;
  double get_double(std::string_view key) const;
  std::vector<std::string> get_list(std::string_view key) const;

  // Sorted key=value lines of every setting, defaults included.
  std::string canonical() const;
  std::string fingerprint() const;
  std::uint64_t root_seed() const;
  std::uint64_t seed_for(std::string_view component) const;

  static const std::map<std::string, std::string>& defaults();

  ParseOptions parse_options() const;
  SplitRatios split_ratios() const;
  PromptConfig prompt() const;
  ModelConfig model() const;
  TrainConfig train(unsigned jobs) const;
  ForecastSetting setting() const;

 private:
  void merge_file(const std::filesystem::path& path, std::vector<std::filesystem::path>& stack);

  std::map<std::string, std::string, std::less<>> values_;
};

}  // namespace tkgf
