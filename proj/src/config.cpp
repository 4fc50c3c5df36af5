#include "tkgf/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <stdexcept>

#include "tkgf/hashing.hpp"

namespace tkgf {

namespace {

const std::set<std::string, std::less<>> kPathKeys{"dataset.path", "dataset.entity_map", "dataset.relation_map",
                                                   "web.passages", "pllm.fixtures", "pllm.cache_dir"};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

const std::map<std::string, std::string>& RunConfig::defaults() {
  static const std::map<std::string, std::string> kDefaults{
      {"seed", "0"},
      {"dataset.path", ""},
      {"dataset.format", "labels_tsv"},
      {"dataset.entity_map", ""},
      {"dataset.relation_map", ""},
      {"dataset.granularity", "day"},
      {"dataset.origin", ""},
      {"dataset.reciprocals", "false"},
      {"split.train", "0.8"},
      {"split.valid", "0.1"},
      {"split.test", "0.1"},
      {"prompt.use_hkr", "true"},
      {"prompt.use_wsci", "true"},
      {"prompt.use_dtg", "true"},
      {"prompt.with_timestamps", "true"},
      {"prompt.shuffle_facts", "false"},
      {"prompt.knowledge_strategy", "relevant"},
      {"prompt.m", "25"},
      {"prompt.context_mode", "entity_pair_union"},
      {"prompt.max_facts", "0"},
      {"prompt.include_reciprocal_facts", "true"},
      {"prompt.similarity_threshold", "0"},
      {"prompt.popular_relations", "1"},
      {"prompt.web_top_k", "3"},
      {"prompt.chunk_max_tokens", "64"},
      {"prompt.chunk_overlap", "8"},
      {"prompt.undated_policy", "retain"},
      {"prompt.query_templater", "builtin"},
      {"prompt.bidirectional", "true"},
      {"web.passages", ""},
      {"embedding.dim", "256"},
      {"pllm.provider", "mock"},
      {"pllm.fixtures", ""},
      {"pllm.mock_echo", "true"},
      {"pllm.mock_text", ""},
      {"pllm.model", "mock"},
      {"pllm.top_p", "1"},
      {"pllm.temperature", "0"},
      {"pllm.max_tokens", "256"},
      {"pllm.timeout_ms", "30000"},
      {"pllm.cache_dir", ""},
      {"pllm.name_reciprocals", "false"},
      {"model.d_model", "128"},
      {"model.n_layers", "2"},
      {"model.n_heads", "4"},
      {"model.max_seq_len", "1024"},
      {"train.batch_size", "48"},
      {"train.epochs", "30"},
      {"train.lr", "0.001"},
      {"train.lr_halving_patience", "5"},
      {"train.early_stopping_patience", "10"},
      {"train.valid_fraction", "0.1"},
      {"eval.predictor", "model"},
      {"eval.setting", "single"},
      {"eval.dt", "1"},
      {"eval.DT", "1"},
      {"eval.feedback_top_k", "1"},
      {"eval.inductive_only", "false"},
      {"ablate.rows", "full,wo_hkr,wo_wsci,wo_dtg"},
      {"ablate.hl_sweep", ""},
  };
  return kDefaults;
}

RunConfig::RunConfig() {
  for (const auto& [k, v] : defaults()) values_.emplace(k, v);
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  RunConfig cfg;
  cfg.merge_file(path);
  return cfg;
}

void RunConfig::merge_file(const std::filesystem::path& path) {
  std::vector<std::filesystem::path> stack;
  merge_file(path, stack);
}

void RunConfig::merge_file(const std::filesystem::path& path, std::vector<std::filesystem::path>& stack) {
  const auto canonical_path = std::filesystem::weakly_canonical(path);
  if (std::find(stack.begin(), stack.end(), canonical_path) != stack.end())
    throw std::runtime_error(path.string() + ": include cycle");
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  stack.push_back(canonical_path);
  const auto dir = canonical_path.parent_path();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#') continue;
    const std::string where = path.string() + ":" + std::to_string(lineno) + ": ";
    if (text.rfind("include", 0) == 0 && (text.size() == 7 || text[7] == ' ' || text[7] == '\t')) {
      const std::string target = trim(std::string_view(text).substr(7));
      if (target.empty()) throw std::runtime_error(where + "include needs a path");
      std::filesystem::path p(target);
      merge_file(p.is_absolute() ? p : dir / p, stack);
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw std::runtime_error(where + "expected key = value");
    const std::string key = trim(std::string_view(text).substr(0, eq));
    std::string value = trim(std::string_view(text).substr(eq + 1));
    if (kPathKeys.count(key) && !value.empty() && std::filesystem::path(value).is_relative())
      value = (dir / value).lexically_normal().string();
    try {
      set(key, std::move(value));
    } catch (const std::exception& e) {
      throw std::runtime_error(where + e.what());
    }
  }
  stack.pop_back();
}

void RunConfig::set(std::string_view key, std::string value) {
  const auto it = values_.find(key);
  if (it == values_.end()) throw std::invalid_argument("unknown config key '" + std::string(key) + "'");
  it->second = std::move(value);
}

void RunConfig::apply(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw std::invalid_argument("expected key=value, got '" + std::string(assignment) + "'");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

const std::string& RunConfig::get(std::string_view key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw std::invalid_argument("unknown config key '" + std::string(key) + "'");
  return it->second;
}

bool RunConfig::get_bool(std::string_view key) const {
  const auto& v = get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument(std::string(key) + ": expected a boolean, got '" + v + "'");
}

long long RunConfig::get_int(std::string_view key) const {
  const auto& v = get(key);
  std::size_t used = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw std::invalid_argument(std::string(key) + ": expected an integer, got '" + v + "'");
  return out;
}

double RunConfig::get_double(std::string_view key) const {
  const auto& v = get(key);
  std::size_t used = 0;
  double out = 0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw std::invalid_argument(std::string(key) + ": expected a number, got '" + v + "'");
  return out;
}

std::vector<std::string> RunConfig::get_list(std::string_view key) const {
  std::vector<std::string> out;
  const auto& v = get(key);
  std::size_t start = 0;
  while (start <= v.size()) {
    const auto comma = v.find(',', start);
    const std::string item = trim(std::string_view(v).substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string RunConfig::canonical() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + '=' + v + '\n';
  return out;
}

std::string RunConfig::fingerprint() const { return hex64(fnv1a64(canonical())); }

std::uint64_t RunConfig::root_seed() const {
  const auto v = get_int("seed");
  if (v < 0) throw std::invalid_argument("seed must be non-negative");
  return static_cast<std::uint64_t>(v);
}

std::uint64_t RunConfig::seed_for(std::string_view component) const { return derive_seed(root_seed(), component); }

ParseOptions RunConfig::parse_options() const {
  ParseOptions o;
  o.granularity = parse_granularity(get("dataset.granularity"));
  if (const auto& origin = get("dataset.origin"); !origin.empty()) {
    const auto d = parse_iso(origin);
    if (!d) throw std::invalid_argument("dataset.origin must be YYYY-MM-DD");
    o.origin = *d;
  }
  return o;
}

SplitRatios RunConfig::split_ratios() const {
  return {get_double("split.train"), get_double("split.valid"), get_double("split.test")};
}

PromptConfig RunConfig::prompt() const {
  PromptConfig p;
  p.use_hkr = get_bool("prompt.use_hkr");
  p.use_wsci = get_bool("prompt.use_wsci");
  p.use_dtg = get_bool("prompt.use_dtg");
  p.with_timestamps = get_bool("prompt.with_timestamps");
  p.shuffle_facts = get_bool("prompt.shuffle_facts");
  p.shuffle_seed = seed_for("prompt.shuffle");
  p.knowledge_strategy = parse_knowledge_strategy(get("prompt.knowledge_strategy"));
  p.m = static_cast<int>(get_int("prompt.m"));
  p.context_mode = parse_context_mode(get("prompt.context_mode"));
  if (const auto mf = get_int("prompt.max_facts"); mf > 0) p.max_facts = static_cast<std::size_t>(mf);
  p.include_reciprocal_facts = get_bool("prompt.include_reciprocal_facts");
  p.similarity_threshold = get_double("prompt.similarity_threshold");
  p.sample_seed = seed_for("prompt.sample");
  p.popular_relations = static_cast<std::size_t>(get_int("prompt.popular_relations"));
  p.web_top_k = static_cast<std::size_t>(get_int("prompt.web_top_k"));
  p.chunk_max_tokens = static_cast<std::size_t>(get_int("prompt.chunk_max_tokens"));
  p.chunk_overlap = static_cast<std::size_t>(get_int("prompt.chunk_overlap"));
  const auto& undated = get("prompt.undated_policy");
  if (undated == "retain") p.undated_policy = UndatedPolicy::retain;
  else if (undated == "drop") p.undated_policy = UndatedPolicy::drop;
  else throw std::invalid_argument("prompt.undated_policy must be retain or drop");
  const auto& templater = get("prompt.query_templater");
  if (templater == "builtin") p.query_templater = QueryTemplater::builtin_template;
  else if (templater == "pllm") p.query_templater = QueryTemplater::pllm;
  else throw std::invalid_argument("prompt.query_templater must be builtin or pllm");
  p.validate();
  return p;
}

ModelConfig RunConfig::model() const {
  ModelConfig m;
  auto positive = [&](std::string_view key) {
    const auto v = get_int(key);
    if (v <= 0) throw std::invalid_argument(std::string(key) + " must be positive");
    return static_cast<std::size_t>(v);
  };
  m.d_model = positive("model.d_model");
  m.n_layers = positive("model.n_layers");
  m.n_heads = positive("model.n_heads");
  m.max_seq_len = positive("model.max_seq_len");
  if (m.d_model % m.n_heads != 0) throw std::invalid_argument("model.d_model must be divisible by model.n_heads");
  return m;
}

TrainConfig RunConfig::train(unsigned jobs) const {
  TrainConfig t;
  auto count = [&](std::string_view key) {
    const auto v = get_int(key);
    if (v <= 0) throw std::invalid_argument(std::string(key) + " must be positive");
    return static_cast<std::size_t>(v);
  };
  t.batch_size = count("train.batch_size");
  t.epochs = count("train.epochs");
  t.lr = get_double("train.lr");
  t.lr_halving_patience = count("train.lr_halving_patience");
  t.early_stopping_patience = count("train.early_stopping_patience");
  t.valid_fraction = get_double("train.valid_fraction");
  t.seed = seed_for("train");
  t.jobs = jobs;
  t.validate();
  return t;
}

ForecastSetting RunConfig::setting() const {
  ForecastSetting s;
  s.kind = parse_setting_kind(get("eval.setting"));
  s.dt = get_int("eval.dt");
  s.DT = get_int("eval.DT");
  s.validate();
  return s;
}

}  // namespace tkgf
