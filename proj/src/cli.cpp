#include "tkgf/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "tkgf/checkpoint.hpp"
#include "tkgf/config.hpp"
#include "tkgf/corpus.hpp"
#include "tkgf/evaluation.hpp"

namespace fs = std::filesystem;

namespace tkgf {

namespace {

struct CommonArgs {
  std::string config;
  std::vector<std::string> sets;
  std::string out = "out";
  unsigned jobs = 1;
};

void add_common(CLI::App* sub, CommonArgs& a) {
  sub->add_option("--config", a.config, "Run configuration file");
  sub->add_option("--set", a.sets, "Override a config key (key=value), repeatable");
  sub->add_option("--out", a.out, "Output directory")->capture_default_str();
  sub->add_option("--jobs", a.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
}

RunConfig load_config(const CommonArgs& a) {
  RunConfig cfg = a.config.empty() ? RunConfig() : RunConfig::load(a.config);
  for (const auto& s : a.sets) cfg.apply(s);
  return cfg;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::ifstream open_input(const std::string& path, const std::string& what) {
  if (path.empty()) throw std::runtime_error(what + " is not configured");
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + what + " " + path);
  return in;
}

// "line N: msg" from ParseError becomes "path:N: msg".
std::string located(const std::string& path, const ParseError& e) {
  std::string msg = e.what();
  if (const auto colon = msg.find(": "); colon != std::string::npos) msg = msg.substr(colon + 2);
  return path + ":" + std::to_string(e.line()) + ": " + msg;
}

// ------------------------------------------------------------------ PLLM

struct PllmSetup {
  std::shared_ptr<PllmProvider> provider;
  std::unique_ptr<PllmClient> client;
};

PllmSetup make_pllm(const RunConfig& cfg) {
  PllmSetup s;
  const auto& kind = cfg.get("pllm.provider");
  if (kind == "mock") {
    auto mock = std::make_shared<MockProvider>(
        MockProvider::Options{cfg.get_bool("pllm.mock_echo"), cfg.get("pllm.mock_text")});
    if (const auto& fx = cfg.get("pllm.fixtures"); !fx.empty()) {
      auto in = open_input(fx, "PLLM fixture file");
      mock->load_fixtures(in);
    }
    s.provider = mock;
  } else if (kind == "http") {
    s.provider = HttpProvider::from_environment(cfg.get_double("pllm.timeout_ms") / 1000.0);
  } else if (kind == "disabled") {
    s.provider = std::make_shared<DisabledProvider>();
  } else {
    throw std::invalid_argument("pllm.provider must be mock, http or disabled");
  }
  std::optional<fs::path> cache;
  if (const auto& dir = cfg.get("pllm.cache_dir"); !dir.empty()) cache = dir;
  else if (const char* env = std::getenv("TKGF_CACHE_DIR"); env && *env) cache = env;
  PLLMRequest defaults;
  defaults.model_name = cfg.get("pllm.model");
  defaults.top_p = cfg.get_double("pllm.top_p");
  defaults.temperature = cfg.get_double("pllm.temperature");
  defaults.max_tokens = static_cast<int>(cfg.get_int("pllm.max_tokens"));
  defaults.validate();
  s.client = std::make_unique<PllmClient>(s.provider, cache, defaults);
  return s;
}

// ------------------------------------------------------------------ store

struct Store {
  DatasetSplit split;
  std::string fingerprint;
};

nlohmann::ordered_json stats_json(const DatasetSplit& split) {
  const TemporalKG all = split.all();
  nlohmann::ordered_json j;
  j["n_train"] = split.train.size();
  j["n_valid"] = split.valid.size();
  j["n_test"] = split.test.size();
  j["n_entities"] = all.entities().size();
  j["n_relations"] = all.relations().size();
  j["n_obs"] = all.n_obs();
  return j;
}

void write_store(const fs::path& dir, const DatasetSplit& split, const std::string& fingerprint) {
  fs::create_directories(dir);
  const TemporalKG all = split.all();
  const TemporalKG base = strip_reciprocals(all);
  std::ostringstream ents, rels, facts;
  for (std::size_t i = 0; i < all.entities().size(); ++i) ents << all.entities().label(static_cast<EntityId>(i)) << '\t' << i << '\n';
  for (std::size_t i = 0; i < all.base_relation_count(); ++i) rels << all.relations().label(static_cast<RelationId>(i)) << '\t' << i << '\n';
  for (const auto& q : base.quadruples())
    facts << q.s << '\t' << q.r << '\t' << q.o << '\t' << all.axis().render(q.t) << '\n';
  write_file(dir / "entities.tsv", ents.str());
  write_file(dir / "relations.tsv", rels.str());
  write_file(dir / "store.tsv", facts.str());

  nlohmann::ordered_json j;
  j["config_fingerprint"] = fingerprint;
  j["granularity"] = std::string(to_string(all.axis().granularity));
  j["origin"] = all.axis().origin ? nlohmann::ordered_json(format_iso(*all.axis().origin)) : nullptr;
  j["train_end"] = split.train_end;
  j["valid_end"] = split.valid_end;
  j["inverse_relations"] = nlohmann::ordered_json::array();
  for (std::size_t r = all.base_relation_count(); r < all.relations().size(); ++r)
    j["inverse_relations"].push_back(all.relations().label(static_cast<RelationId>(r)));
  j["reciprocals"] = all.has_reciprocals();
  j["stats"] = stats_json(split);
  write_file(dir / "split.json", j.dump(2) + "\n");
}

Store load_store(const fs::path& dir) {
  auto meta_in = open_input((dir / "split.json").string(), "store manifest (run ingest first)");
  const auto meta = nlohmann::json::parse(meta_in);
  ParseOptions opts;
  opts.granularity = parse_granularity(meta.at("granularity").get<std::string>());
  if (!meta.at("origin").is_null()) opts.origin = parse_iso(meta.at("origin").get<std::string>());
  auto facts = open_input((dir / "store.tsv").string(), "store");
  auto ents = open_input((dir / "entities.tsv").string(), "entity map");
  auto rels = open_input((dir / "relations.tsv").string(), "relation map");
  TemporalKG kg = parse_ids_tsv(facts, ents, rels, opts);
  if (meta.at("reciprocals").get<bool>()) {
    const auto inverses = meta.at("inverse_relations").get<std::vector<std::string>>();
    kg = add_reciprocals(kg, [&](const std::string& label) {
      return inverses.at(kg.relations().find(label).value());
    });
  }
  Store s;
  s.fingerprint = meta.value("config_fingerprint", "");
  s.split.train_end = meta.at("train_end").get<Step>();
  s.split.valid_end = meta.at("valid_end").get<Step>();
  std::vector<Quadruple> tr, va, te;
  for (const auto& q : kg.quadruples())
    (q.t <= s.split.train_end ? tr : q.t <= s.split.valid_end ? va : te).push_back(q);
  s.split.train = kg.with_quadruples(std::move(tr));
  s.split.valid = kg.with_quadruples(std::move(va));
  s.split.test = kg.with_quadruples(std::move(te));
  return s;
}

// ------------------------------------------------------------------ prompt inputs

struct PromptInputs {
  std::vector<Passage> passages;
  HashedEmbedder embedder;
  PllmSetup pllm;

  explicit PromptInputs(const RunConfig& cfg)
      : embedder(static_cast<std::size_t>(cfg.get_int("embedding.dim")), cfg.seed_for("embedding")),
        pllm(make_pllm(cfg)) {
    if (const auto& path = cfg.get("web.passages"); !path.empty()) {
      auto in = open_input(path, "passage file");
      try {
        passages = read_passages_jsonl(in);
      } catch (const ParseError& e) {
        throw std::runtime_error(located(path, e));
      }
    }
  }

  PromptEnv env(const RunConfig& cfg, const PromptConfig& prompt) const {
    PromptEnv e;
    e.passages = passages;
    e.embedder = &embedder;
    e.pllm = pllm.client.get();
    e.prompt = prompt;
    e.bidirectional = cfg.get_bool("prompt.bidirectional");
    return e;
  }
};

std::unique_ptr<Predictor> make_predictor(const std::string& kind, const RunConfig& cfg, const DatasetSplit& split,
                                          const fs::path& out_dir) {
  const std::size_t n = split.train.entities().size();
  if (kind == "oracle") return std::make_unique<OraclePredictor>(split.all());
  if (kind == "frequency") return std::make_unique<FrequencyPredictor>(n);
  if (kind == "random") return std::make_unique<UniformRandomPredictor>(n, cfg.seed_for("eval.random"));
  if (kind == "model") {
    const fs::path path = out_dir / "model.ckpt";
    if (!fs::exists(path)) throw std::runtime_error("checkpoint not found: " + path.string() + " (run train first)");
    return std::make_unique<ModelPredictor>(std::make_shared<const Checkpoint>(load_checkpoint(path)));
  }
  throw std::invalid_argument("unknown predictor '" + kind + "' (model, oracle, frequency, random)");
}

EvalContext eval_context(const RunConfig& cfg, const DatasetSplit& split, const PromptInputs& inputs) {
  EvalContext ctx;
  ctx.split = &split;
  ctx.passages = inputs.passages;
  ctx.embedder = &inputs.embedder;
  ctx.pllm = inputs.pllm.client.get();
  ctx.prompt = cfg.prompt();
  ctx.bidirectional = cfg.get_bool("prompt.bidirectional");
  ctx.inductive_only = cfg.get_bool("eval.inductive_only");
  ctx.feedback_top_k = static_cast<std::size_t>(cfg.get_int("eval.feedback_top_k"));
  ctx.fingerprint = cfg.fingerprint();
  return ctx;
}

std::string rank_records_text(const EvaluationResult& r, const std::string& fingerprint) {
  std::ostringstream raw;
  write_rank_records(raw, r);
  std::istringstream in(raw.str());
  std::string out, line;
  while (std::getline(in, line)) {
    auto j = nlohmann::ordered_json::parse(line);
    j["config_fingerprint"] = fingerprint;
    out += j.dump() + '\n';
  }
  return out;
}

// ------------------------------------------------------------------ commands

int cmd_ingest(const CommonArgs& a, std::ostream& out) {
  const RunConfig cfg = load_config(a);
  const std::string fp = cfg.fingerprint();
  const std::string path = cfg.get("dataset.path");
  auto in = open_input(path, "dataset file");
  const ParseOptions opts = cfg.parse_options();
  TemporalKG kg;
  try {
    if (cfg.get("dataset.format") == "labels_tsv") {
      kg = parse_labels_tsv(in, opts);
    } else if (cfg.get("dataset.format") == "ids_tsv") {
      auto ents = open_input(cfg.get("dataset.entity_map"), "entity map");
      auto rels = open_input(cfg.get("dataset.relation_map"), "relation map");
      kg = parse_ids_tsv(in, ents, rels, opts);
    } else {
      throw std::invalid_argument("dataset.format must be labels_tsv or ids_tsv");
    }
  } catch (const ParseError& e) {
    throw std::runtime_error(located(path, e));
  }
  if (cfg.get_bool("dataset.reciprocals")) {
    if (cfg.get_bool("pllm.name_reciprocals")) {
      PllmSetup pllm = make_pllm(cfg);
      kg = add_reciprocals(kg, [&](const std::string& l) { return pllm.client->name_reciprocal(l); });
    } else {
      kg = add_reciprocals(kg);
    }
  }
  const DatasetSplit split = chronological_split(kg, cfg.split_ratios());
  const fs::path dir(a.out);
  write_store(dir, split, fp);
  auto stats = stats_json(split);
  stats["config_fingerprint"] = fp;
  write_file(dir / "stats.json", stats.dump(2) + "\n");
  out << stats.dump(2) << '\n';
  return 0;
}

int cmd_train(const CommonArgs& a, std::ostream& out) {
  const RunConfig cfg = load_config(a);
  const std::string fp = cfg.fingerprint();
  const TrainConfig tc = cfg.train(a.jobs);
  const ModelConfig mc = cfg.model();
  const fs::path dir(a.out);
  const Store store = load_store(dir);
  const PromptInputs inputs(cfg);
  TrainLog log;
  const Checkpoint ckpt = train_checkpoint(store.split, inputs.env(cfg, cfg.prompt()), mc, tc, &log, fp);
  save_checkpoint(dir / "model.ckpt", ckpt);
  std::string lines;
  for (const auto& e : log.epochs) {
    nlohmann::ordered_json j{{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"valid_loss", e.valid_loss},
                             {"lr", e.lr}, {"config_fingerprint", fp}};
    lines += j.dump() + '\n';
  }
  write_file(dir / "train_log.jsonl", lines);
  const auto& best = log.epochs.at(log.best_epoch ? log.best_epoch - 1 : 0);
  out << "best validation loss " << best.valid_loss << " at epoch " << best.epoch << '\n';
  if (log.validation_from_train) out << "validation: latest training steps (no validation split)\n";
  if (log.stopped_early) out << "stopped early after epoch " << log.epochs.back().epoch << '\n';
  out << "checkpoint: " << (dir / "model.ckpt").string() << '\n';
  return 0;
}

struct EvalArgs {
  std::string predictor;
  std::string setting;
  long long dt = 0;
  long long DT = 0;
  bool inductive_only = false;
  std::string tag;
};

void apply_eval_args(RunConfig& cfg, const EvalArgs& e) {
  if (!e.predictor.empty()) cfg.set("eval.predictor", e.predictor);
  if (!e.setting.empty()) cfg.set("eval.setting", e.setting);
  if (e.dt > 0) cfg.set("eval.dt", std::to_string(e.dt));
  if (e.DT > 0) cfg.set("eval.DT", std::to_string(e.DT));
  if (e.dt > 0 && e.DT == 0 && cfg.get_int("eval.DT") < e.dt) cfg.set("eval.DT", std::to_string(e.dt));
  if (e.inductive_only) cfg.set("eval.inductive_only", "true");
}

int cmd_evaluate(const CommonArgs& a, const EvalArgs& e, std::ostream& out, std::ostream& err) {
  RunConfig cfg = load_config(a);
  apply_eval_args(cfg, e);
  const std::string fp = cfg.fingerprint();
  const ForecastSetting setting = cfg.setting();
  const fs::path dir(a.out);
  const Store store = load_store(dir);
  const PromptInputs inputs(cfg);
  const auto predictor = make_predictor(cfg.get("eval.predictor"), cfg, store.split, dir);
  const EvalContext ctx = eval_context(cfg, store.split, inputs);
  const EvaluationResult result = evaluate(*predictor, ctx, setting);
  const std::string stem = e.tag.empty() ? std::string("report") : "report_" + e.tag;
  const std::string ranks = e.tag.empty() ? std::string("ranks") : "ranks_" + e.tag;
  write_file(dir / (ranks + ".jsonl"), rank_records_text(result, fp));
  write_file(dir / (stem + ".json"), result.report.to_json() + "\n");
  for (const auto& n : result.report.notices) err << "notice: " << n << '\n';
  out << result.report.to_json() << '\n';
  return 0;
}

int cmd_ablate(const CommonArgs& a, const EvalArgs& e, const std::string& rows_arg, const std::string& sweep_arg,
               std::ostream& out, std::ostream& err) {
  RunConfig cfg = load_config(a);
  apply_eval_args(cfg, e);
  if (!rows_arg.empty()) cfg.set("ablate.rows", rows_arg);
  if (!sweep_arg.empty()) cfg.set("ablate.hl_sweep", sweep_arg);
  const std::string fp = cfg.fingerprint();
  const ForecastSetting setting = cfg.setting();
  const fs::path dir(a.out);
  const Store store = load_store(dir);
  const PromptInputs inputs(cfg);
  const EvalContext ctx = eval_context(cfg, store.split, inputs);

  std::vector<std::string> names = cfg.get_list("ablate.rows");
  for (const auto& m : cfg.get_list("ablate.hl_sweep")) names.push_back("hl" + m);
  const auto variants = standard_variants(cfg.prompt(), names);
  const std::string kind = cfg.get("eval.predictor");
  const ModelConfig mc = cfg.model();
  const TrainConfig tc = cfg.train(a.jobs);
  PredictorFactory factory = [&](const AblationVariant& v) -> std::unique_ptr<Predictor> {
    if (kind != "model") return make_predictor(kind, cfg, store.split, dir);
    err << "training variant " << v.name << '\n';
    PromptEnv env = inputs.env(cfg, v.prompt);
    env.bidirectional = v.bidirectional;
    return std::make_unique<ModelPredictor>(
        std::make_shared<const Checkpoint>(train_checkpoint(store.split, env, mc, tc, nullptr, fp)));
  };
  const auto rows = run_ablation(variants, factory, ctx, setting);
  const std::string table = ablation_table(rows);
  nlohmann::ordered_json j;
  j["config_fingerprint"] = fp;
  j["setting"] = setting.label();
  j["rows"] = nlohmann::ordered_json::parse(ablation_json(rows));
  write_file(dir / "ablation.txt", "config " + fp + "\n" + table);
  write_file(dir / "ablation.json", j.dump(2) + "\n");
  out << table;
  return 0;
}

struct ForecastArgs {
  std::string subject;
  std::string relation;
  std::string time;
  std::size_t top_k = 10;
};

int cmd_forecast(const CommonArgs& a, const EvalArgs& e, const ForecastArgs& f, std::ostream& out) {
  RunConfig cfg = load_config(a);
  apply_eval_args(cfg, e);
  const std::string fp = cfg.fingerprint();
  const fs::path dir(a.out);
  const Store store = load_store(dir);
  const TemporalKG all = store.split.all();
  const auto s = all.entities().find(f.subject);
  if (!s) throw std::invalid_argument("unknown entity '" + f.subject + "'");
  const auto r = all.relations().find(f.relation);
  if (!r) throw std::invalid_argument("unknown relation '" + f.relation + "'");
  Step t = 0;
  if (all.axis().has_calendar()) {
    std::optional<CivilDate> d = parse_iso(f.time);
    if (!d && all.axis().granularity == Granularity::year && f.time.size() == 4) d = parse_iso(f.time + "-01-01");
    if (!d) throw std::invalid_argument("time must be a date (YYYY-MM-DD)");
    t = all.axis().step_of(*d);
  } else {
    t = std::stoll(f.time);
  }
  std::vector<Quadruple> before;
  for (const auto& q : all.quadruples())
    if (q.t < t) before.push_back(q);
  const TemporalKG knowledge = all.with_quadruples(std::move(before));
  const PromptInputs inputs(cfg);
  const Query q{*s, *r, t, QueryDirection::object_missing, std::nullopt};
  const KnowledgePrompt prompt = assemble(q, knowledge, std::span<const Passage>(inputs.passages), inputs.embedder,
                                          inputs.pllm.client.get(), cfg.prompt());
  const auto predictor = make_predictor(cfg.get("eval.predictor"), cfg, store.split, dir);
  const auto scores = predictor->score(prompt, q);
  const Ranking ranking = rank_entities(std::span<const double>(scores));
  nlohmann::ordered_json j;
  j["query"] = {{"subject", f.subject}, {"relation", f.relation}, {"time", all.axis().render(t)}};
  j["config_fingerprint"] = fp;
  j["predictions"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < std::min(f.top_k, ranking.order.size()); ++i)
    j["predictions"].push_back({{"entity", all.entities().label(ranking.order[i])}, {"score", scores[ranking.order[i]]}});
  j["prompt"] = prompt.to_text();
  write_file(dir / "forecast.json", j.dump(2) + "\n");
  out << j.dump(2) << '\n';
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Temporal knowledge graph forecasting with leakage-safe prompts"};
  app.require_subcommand(1);
  CommonArgs common;
  EvalArgs eval;
  ForecastArgs fc;
  std::string rows, sweep;

  auto* ingest = app.add_subcommand("ingest", "Parse a dataset, split it and write the store");
  add_common(ingest, common);
  auto* train_cmd = app.add_subcommand("train", "Train the scorer on training prompts");
  add_common(train_cmd, common);
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score the test split and write reports");
  add_common(evaluate_cmd, common);
  auto* ablate = app.add_subcommand("ablate", "Compare prompt variants");
  add_common(ablate, common);
  auto* forecast = app.add_subcommand("forecast", "Rank objects for one query");
  add_common(forecast, common);
  for (auto* sub : {evaluate_cmd, ablate, forecast}) {
    sub->add_option("--predictor", eval.predictor, "model, oracle, frequency or random");
  }
  for (auto* sub : {evaluate_cmd, ablate}) {
    sub->add_option("--setting", eval.setting, "single or multi");
    sub->add_option("--dt", eval.dt, "Feedback stride in steps");
    sub->add_option("--DT", eval.DT, "Forecast horizon in steps");
    sub->add_flag("--inductive-only", eval.inductive_only, "Only test facts with entities unseen in training");
  }
  evaluate_cmd->add_option("--tag", eval.tag, "Suffix for report file names");
  ablate->add_option("--rows", rows, "Comma-separated variants");
  ablate->add_option("--hl-sweep", sweep, "Comma-separated history lengths");
  forecast->add_option("--subject", fc.subject)->required();
  forecast->add_option("--relation", fc.relation)->required();
  forecast->add_option("--time", fc.time)->required();
  forecast->add_option("--top-k", fc.top_k)->capture_default_str();

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  if (!argv_rev.empty()) argv_rev.pop_back();
  try {
    app.parse(argv_rev);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*ingest) return cmd_ingest(common, out);
    if (*train_cmd) return cmd_train(common, out);
    if (*evaluate_cmd) return cmd_evaluate(common, eval, out, err);
    if (*ablate) return cmd_ablate(common, eval, rows, sweep, out, err);
    if (*forecast) return cmd_forecast(common, eval, fc, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace tkgf
