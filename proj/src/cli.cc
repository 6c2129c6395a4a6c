#include "brackind/cli.h"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "brackind/data.h"
#include "brackind/eval.h"
#include "brackind/pipeline.h"
#include "brackind/synth.h"
#include "brackind/train.h"

namespace brackind::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string format_double(double v, int precision = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(precision) << v;
  return s.str();
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// JSON run record: command line, configuration, input digests, outputs and
// wall-clock timing.
class Manifest {
 public:
  Manifest(std::string command, const std::vector<std::string>& args)
      : start_(std::chrono::steady_clock::now()) {
    doc_["command"] = std::move(command);
    doc_["argv"] = args;
    doc_["started_at"] = utc_timestamp();
    doc_["inputs"] = json::array();
    doc_["outputs"] = json::array();
  }

  void set(const std::string& key, json value) { doc_[key] = std::move(value); }
  void input(const fs::path& path) {
    doc_["inputs"].push_back({{"path", path.string()}, {"sha256", sha256_file(path)}});
  }
  void output(const fs::path& path) { doc_["outputs"].push_back(path.string()); }

  void write(const fs::path& path) {
    doc_["elapsed_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    std::ofstream out(path);
    if (!out) throw DataError("cannot write manifest " + path.string());
    out << doc_.dump(2) << '\n';
  }

 private:
  json doc_;
  std::chrono::steady_clock::time_point start_;
};

struct ModelConfig {
  int hidden_dim = 256;
  int input_dim = 64;  // lookup mode only
};

json to_json(const TrainConfig& c, const ModelConfig& m) {
  return {{"cost", std::string(to_string(c.cost))},
          {"batch_size", c.batch_size},
          {"total_steps", c.total_steps},
          {"warmup_steps", c.warmup_steps},
          {"peak_lr", c.peak_lr},
          {"adam_beta1", c.adam_beta1},
          {"adam_beta2", c.adam_beta2},
          {"adam_eps", c.adam_eps},
          {"clip_norm", c.clip_norm},
          {"seed", c.seed},
          {"threads", c.threads},
          {"hidden_dim", m.hidden_dim},
          {"input_dim", m.input_dim}};
}

json to_json(const EvalConfig& c) {
  return {{"punctuation_tags", c.punctuation_tags}, {"exclude_empty_gold", c.exclude_empty_gold}};
}

// Applies a JSON config document. Unknown keys are rejected.
void apply_config(const json& doc, TrainConfig& train, ModelConfig& model, EvalConfig& eval) {
  if (!doc.is_object()) throw UsageError("config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (key == "cost") {
      auto kind = parse_cost_kind(value.get<std::string>());
      if (!kind) throw UsageError("config: cost must be 'loose' or 'strict'");
      train.cost = *kind;
    } else if (key == "batch_size") train.batch_size = value.get<int>();
    else if (key == "total_steps") train.total_steps = value.get<int>();
    else if (key == "warmup_steps") train.warmup_steps = value.get<int>();
    else if (key == "peak_lr") train.peak_lr = value.get<double>();
    else if (key == "adam_beta1") train.adam_beta1 = value.get<double>();
    else if (key == "adam_beta2") train.adam_beta2 = value.get<double>();
    else if (key == "adam_eps") train.adam_eps = value.get<double>();
    else if (key == "clip_norm") train.clip_norm = value.get<double>();
    else if (key == "seed") train.seed = value.get<std::uint64_t>();
    else if (key == "threads") train.threads = value.get<int>();
    else if (key == "hidden_dim") model.hidden_dim = value.get<int>();
    else if (key == "input_dim") model.input_dim = value.get<int>();
    else if (key == "punctuation_tags") eval.punctuation_tags = value.get<std::set<std::string>>();
    else if (key == "exclude_empty_gold") eval.exclude_empty_gold = value.get<bool>();
    else throw UsageError("config: unknown key '" + key + "'");
  }
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError("config " + path.string() + ": " + e.what());
  }
}

LoadResult load_corpus_reporting(const fs::path& path, std::ostream& err) {
  LoadResult loaded = load_corpus(path);
  for (const auto& w : loaded.warnings) err << "warning: " << path.string() << ": " << w << '\n';
  if (loaded.skipped > 0) err << "warning: skipped " << loaded.skipped << " record(s)\n";
  return loaded;
}

void attach_gold(std::vector<CorpusRecord>& records, const fs::path& gold_path) {
  auto trees = read_tree_file(gold_path);
  if (trees.size() != records.size())
    throw DataError("gold file has " + std::to_string(trees.size()) + " trees, corpus has " +
                    std::to_string(records.size()) + " records");
  for (std::size_t k = 0; k < records.size(); ++k) {
    auto& rec = records[k];
    if (trees[k].sentence.size() != rec.sentence.size())
      throw DataError("gold tree " + std::to_string(k + 1) + " has " +
                      std::to_string(trees[k].sentence.size()) + " tokens, record '" +
                      rec.sentence.id + "' has " + std::to_string(rec.sentence.size()));
    if (rec.sentence.pos.empty()) rec.sentence.pos = trees[k].sentence.pos;
    rec.gold = std::move(trees[k].tree);
  }
}

void print_report(const EvalReport& report, std::ostream& out) {
  out << "Sentences evaluated: " << report.included << " (excluded " << report.excluded
      << " with no non-trivial gold spans)\n";
  out << "Mean sentence F1: " << format_double(100.0 * report.mean_f1) << '\n';
  if (!report.label_recall.empty()) {
    out << "Recall by label:\n";
    for (const auto& [label, lr] : report.label_recall)
      out << "  " << std::left << std::setw(8) << label << std::right << ' '
          << format_double(100.0 * lr.recall(), 2) << "  (" << lr.found << '/' << lr.total << ")\n";
  }
}

// ---------------------------------------------------------------------------

struct StatsArgs {
  std::string corpus, gold, manifest;
};

int cmd_stats(const StatsArgs& a, const std::vector<std::string>& args, std::ostream& out,
              std::ostream& err) {
  Manifest manifest("stats", args);
  auto loaded = load_corpus_reporting(a.corpus, err);
  manifest.input(a.corpus);
  if (!a.gold.empty()) {
    attach_gold(loaded.records, a.gold);
    manifest.input(a.gold);
  }
  out << format_stats(corpus_stats(loaded.records));
  if (!a.manifest.empty()) manifest.write(a.manifest);
  return kOk;
}

struct TrainArgs {
  std::string corpus, config, embeddings, output;
  std::string cost;
  int steps = 0, warmup = 0, batch = 0, hidden = 0, input_dim = 0, threads = 0, log_every = 0;
  double lr = 0.0;
  std::uint64_t seed = 0;
  CLI::App* app = nullptr;
  bool given(const char* name) const { return app->count(name) > 0; }
};

int cmd_train(const TrainArgs& a, const std::vector<std::string>& args, std::ostream& out,
              std::ostream& err) {
  TrainConfig config;
  ModelConfig model;
  EvalConfig eval;
  if (!a.config.empty()) apply_config(read_json_file(a.config), config, model, eval);
  if (a.given("--cost")) {
    auto kind = parse_cost_kind(a.cost);
    if (!kind) throw UsageError("--cost must be 'loose' or 'strict'");
    config.cost = *kind;
  }
  if (a.given("--steps")) config.total_steps = a.steps;
  if (a.given("--warmup")) config.warmup_steps = a.warmup;
  if (a.given("--batch-size")) config.batch_size = a.batch;
  if (a.given("--lr")) config.peak_lr = a.lr;
  if (a.given("--seed")) config.seed = a.seed;
  if (a.given("--threads")) config.threads = a.threads;
  if (a.given("--hidden-dim")) model.hidden_dim = a.hidden;
  if (a.given("--input-dim")) model.input_dim = a.input_dim;
  try {
    config.validate();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }

  Manifest manifest("train", args);
  auto loaded = load_corpus_reporting(a.corpus, err);
  manifest.input(a.corpus);
  if (loaded.records.empty()) throw DataError("training corpus " + a.corpus + " has no records");

  // Initialisation and batch sampling draw from separate streams.
  const std::uint64_t init_seed = config.seed;
  TrainConfig run_config = config;
  run_config.seed = config.seed + 1;

  std::vector<TrainingSentence> sentences;
  ModelParams init;
  Vocabulary vocab;
  if (!a.embeddings.empty()) {
    const EmbeddingFile file = read_cemb(a.embeddings);
    manifest.input(a.embeddings);
    sentences = embedded_sentences(loaded.records, file);
    init = init_params(static_cast<int>(file.dim), model.hidden_dim, 0, init_seed);
    model.input_dim = static_cast<int>(file.dim);
  } else {
    vocab = build_vocabulary(loaded.records);
    sentences = lookup_sentences(loaded.records, vocab);
    init = init_params(model.input_dim, model.hidden_dim, vocab.size(), init_seed);
  }
  manifest.set("config", to_json(config, model));
  manifest.set("seed", config.seed);

  fs::create_directories(a.output);
  const fs::path ckpt_path = fs::path(a.output) / "model.ckpt";
  const fs::path trace_path = fs::path(a.output) / "loss.csv";

  std::ofstream trace(trace_path);
  if (!trace) throw DataError("cannot write " + trace_path.string());
  trace << "step,lr,mean_loss\n";
  const int log_every = a.log_every;
  TrainResult result = train(sentences, init, run_config, [&](const TraceEntry& e) {
    char line[96];
    std::snprintf(line, sizeof line, "%lld,%.9g,%.9g\n", static_cast<long long>(e.step), e.lr,
                  e.mean_loss);
    trace << line;
    if (log_every > 0 && e.step % log_every == 0)
      err << "step " << e.step << " lr " << e.lr << " loss " << e.mean_loss << '\n';
  });
  trace.close();

  save_checkpoint(ckpt_path, {result.params, result.state, vocab});
  manifest.output(ckpt_path);
  manifest.output(trace_path);
  const fs::path manifest_path = fs::path(a.output) / "manifest.json";
  manifest.write(manifest_path);
  out << "trained " << result.state.step << " steps on " << sentences.size()
      << " sentences; wrote " << ckpt_path.string() << '\n';
  return kOk;
}

struct ParseArgs {
  std::string model, corpus, embeddings, output;
  int threads = 1;
};

int cmd_parse(const ParseArgs& a, const std::vector<std::string>& args, std::ostream& out,
              std::ostream& err) {
  if (a.threads < 1) throw UsageError("--threads must be positive");
  Manifest manifest("parse", args);
  const Checkpoint ckpt = load_checkpoint(a.model);
  manifest.input(a.model);
  auto loaded = load_corpus_reporting(a.corpus, err);
  manifest.input(a.corpus);

  std::vector<TrainingSentence> sentences;
  if (ckpt.params.embeddings) {
    if (!a.embeddings.empty()) throw UsageError("model uses lookup embeddings; drop --embeddings");
    sentences = lookup_sentences(loaded.records, ckpt.vocab);
  } else {
    if (a.embeddings.empty()) throw UsageError("model expects precomputed --embeddings");
    const EmbeddingFile file = read_cemb(a.embeddings);
    manifest.input(a.embeddings);
    sentences = embedded_sentences(loaded.records, file);
  }
  const auto trees = parse_sentences(ckpt.params, sentences, a.threads);

  std::ofstream file(a.output);
  if (!file) throw DataError("cannot write " + a.output);
  for (std::size_t k = 0; k < trees.size(); ++k)
    file << to_bracketed(trees[k], loaded.records[k].sentence.tokens) << '\n';
  file.close();
  manifest.output(a.output);
  manifest.set("threads", a.threads);
  manifest.write(a.output + ".manifest.json");
  out << "parsed " << trees.size() << " sentences into " << a.output << '\n';
  return kOk;
}

struct EvalArgs {
  std::string pred, gold, config, manifest;
};

EvalConfig eval_config_from(const std::string& path) {
  TrainConfig t;
  ModelConfig m;
  EvalConfig e;
  if (!path.empty()) apply_config(read_json_file(path), t, m, e);
  return e;
}

int cmd_eval(const EvalArgs& a, const std::vector<std::string>& args, std::ostream& out) {
  Manifest manifest("eval", args);
  const EvalConfig config = eval_config_from(a.config);
  const auto preds = read_tree_file(a.pred);
  const auto golds = read_tree_file(a.gold);
  manifest.input(a.pred);
  manifest.input(a.gold);
  const EvalReport report = evaluate_trees(preds, golds, config);
  print_report(report, out);
  if (!a.manifest.empty()) {
    manifest.set("config", to_json(config));
    manifest.set("mean_f1", report.mean_f1);
    manifest.write(a.manifest);
  }
  return kOk;
}

struct BaselineArgs {
  std::string kind, gold, config, manifest;
  int seeds = 5;
  std::uint64_t seed = 0;
};

int cmd_baseline(const BaselineArgs& a, const std::vector<std::string>& args, std::ostream& out) {
  const auto kind = parse_baseline_kind(a.kind);
  if (!kind) throw UsageError("--kind must be one of left, right, random, upper");
  if (a.seeds < 1) throw UsageError("--seeds must be positive");
  Manifest manifest("baseline", args);
  const EvalConfig config = eval_config_from(a.config);
  const auto golds = read_tree_file(a.gold);
  manifest.input(a.gold);

  double reported = 0.0;
  if (*kind == BaselineKind::Random) {
    double sum = 0.0, best = 0.0;
    for (int r = 0; r < a.seeds; ++r) {
      const double f1 = baseline_f1(golds, *kind, a.seed + r, config).mean_f1;
      sum += f1;
      best = std::max(best, f1);
    }
    reported = sum / a.seeds;
    out << "random F1: mean " << format_double(100.0 * reported) << " max "
        << format_double(100.0 * best) << " over " << a.seeds << " seeds\n";
  } else {
    const EvalReport report = baseline_f1(golds, *kind, a.seed, config);
    reported = report.mean_f1;
    out << a.kind << " F1: " << format_double(100.0 * reported) << '\n';
  }
  if (!a.manifest.empty()) {
    manifest.set("config", to_json(config));
    manifest.set("seed", a.seed);
    manifest.set("mean_f1", reported);
    manifest.write(a.manifest);
  }
  return kOk;
}

struct ExtractArgs {
  std::string source, input, output;
  int max_length = kMaxWikiSentenceLength;
};

int cmd_extract(const ExtractArgs& a, const std::vector<std::string>& args, std::ostream& out,
                std::ostream& err) {
  Manifest manifest("extract", args);
  std::vector<CorpusRecord> records;
  if (a.source == "qasrl") {
    std::ifstream in(a.input);
    if (!in) throw DataError("cannot open " + a.input);
    AnswerMappingStats stats;
    records = qasrl_to_records(read_qasrl(in), &stats);
    out << "mapped " << stats.answers - stats.discarded << " of " << stats.answers
        << " answers (" << stats.discarded << " discarded)\n";
  } else if (a.source == "wiki") {
    auto loaded = load_corpus_reporting(a.input, err);
    std::vector<std::string> warnings;
    records = extract_hyperlink_brackets(std::move(loaded.records), &warnings);
    for (const auto& w : warnings) err << "warning: " << w << '\n';
    const std::size_t before = records.size();
    records = filter_wiki_sentences(std::move(records), a.max_length);
    out << "kept " << records.size() << " of " << before << " sentences\n";
  } else {
    throw UsageError("extract source must be 'qasrl' or 'wiki'");
  }
  manifest.input(a.input);
  write_corpus(fs::path(a.output), records);
  manifest.output(a.output);
  manifest.write(a.output + ".manifest.json");
  return kOk;
}

struct SynthArgs {
  std::string output, gold_output;
  SyntheticConfig config;
};

int cmd_synth(const SynthArgs& a, const std::vector<std::string>& args, std::ostream& out) {
  Manifest manifest("synth", args);
  const auto records = generate_synthetic(a.config);
  write_corpus(fs::path(a.output), records);
  manifest.output(a.output);
  if (!a.gold_output.empty()) {
    std::ofstream gold(a.gold_output);
    if (!gold) throw DataError("cannot write " + a.gold_output);
    for (const auto& rec : records) gold << to_bracketed(*rec.gold) << '\n';
    manifest.output(a.gold_output);
  }
  manifest.set("seed", a.config.seed);
  manifest.write(a.output + ".manifest.json");
  out << "wrote " << records.size() << " synthetic sentences to " << a.output << '\n';
  return kOk;
}

}  // namespace

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 initialisation failed");
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0)
    EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  std::ostringstream hex;
  for (unsigned int k = 0; k < len; ++k)
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[k]);
  return hex.str();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Induce unlabeled constituency parsers from partial bracketings", "brackind"};
  app.require_subcommand(1);

  StatsArgs stats;
  auto* stats_cmd = app.add_subcommand("stats", "Bracketing statistics of a corpus");
  stats_cmd->add_option("corpus", stats.corpus, "Corpus JSONL")->required()->check(CLI::ExistingFile);
  stats_cmd->add_option("--gold", stats.gold, "Reference trees, one per corpus line")->check(CLI::ExistingFile);
  stats_cmd->add_option("--manifest", stats.manifest, "Write a run manifest here");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train a span scorer with the structured ramp loss");
  tr.app = train_cmd;
  train_cmd->add_option("--corpus", tr.corpus, "Training corpus JSONL")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--config", tr.config, "JSON config file")->check(CLI::ExistingFile);
  train_cmd->add_option("--embeddings", tr.embeddings, "CEMB precomputed embeddings")->check(CLI::ExistingFile);
  train_cmd->add_option("--output", tr.output, "Output directory")->required();
  train_cmd->add_option("--cost", tr.cost, "loose or strict");
  train_cmd->add_option("--steps", tr.steps, "Total training steps");
  train_cmd->add_option("--warmup", tr.warmup, "Warmup steps");
  train_cmd->add_option("--batch-size", tr.batch, "Sentences per step");
  train_cmd->add_option("--lr", tr.lr, "Peak learning rate");
  train_cmd->add_option("--seed", tr.seed, "Random seed");
  train_cmd->add_option("--hidden-dim", tr.hidden, "Boundary MLP width");
  train_cmd->add_option("--input-dim", tr.input_dim, "Lookup embedding width");
  train_cmd->add_option("--threads", tr.threads, "Worker threads");
  train_cmd->add_option("--log-every", tr.log_every, "Print progress every N steps");

  ParseArgs pa;
  auto* parse_cmd = app.add_subcommand("parse", "Decode trees with a trained model");
  parse_cmd->add_option("--model", pa.model, "Checkpoint")->required()->check(CLI::ExistingFile);
  parse_cmd->add_option("--corpus", pa.corpus, "Corpus JSONL")->required()->check(CLI::ExistingFile);
  parse_cmd->add_option("--embeddings", pa.embeddings, "CEMB embeddings")->check(CLI::ExistingFile);
  parse_cmd->add_option("--output", pa.output, "Output trees, one per line")->required();
  parse_cmd->add_option("--threads", pa.threads, "Worker threads");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Sentence-level unlabeled F1");
  eval_cmd->add_option("--pred", ev.pred, "Predicted trees")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--gold", ev.gold, "Gold trees")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--config", ev.config, "JSON config file")->check(CLI::ExistingFile);
  eval_cmd->add_option("--manifest", ev.manifest, "Write a run manifest here");

  BaselineArgs bl;
  auto* baseline_cmd = app.add_subcommand("baseline", "Trivial-structure baselines");
  baseline_cmd->add_option("--kind", bl.kind, "left, right, random or upper")->required();
  baseline_cmd->add_option("--gold", bl.gold, "Gold trees")->required()->check(CLI::ExistingFile);
  baseline_cmd->add_option("--seeds", bl.seeds, "Random runs (random kind)");
  baseline_cmd->add_option("--seed", bl.seed, "First random seed");
  baseline_cmd->add_option("--config", bl.config, "JSON config file")->check(CLI::ExistingFile);
  baseline_cmd->add_option("--manifest", bl.manifest, "Write a run manifest here");

  ExtractArgs ex;
  auto* extract_cmd = app.add_subcommand("extract", "Build a bracket corpus from QA-SRL or hyperlink data");
  extract_cmd->add_option("source", ex.source, "qasrl or wiki")->required();
  extract_cmd->add_option("--input", ex.input, "Source file")->required()->check(CLI::ExistingFile);
  extract_cmd->add_option("--output", ex.output, "Corpus JSONL")->required();
  extract_cmd->add_option("--max-length", ex.max_length, "Longest kept sentence (wiki)");

  SynthArgs sy;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a toy-grammar corpus");
  synth_cmd->add_option("--output", sy.output, "Corpus JSONL")->required();
  synth_cmd->add_option("--gold-output", sy.gold_output, "Also write gold trees here");
  synth_cmd->add_option("--sentences", sy.config.sentences, "Number of sentences");
  synth_cmd->add_option("--seed", sy.config.seed, "Random seed");
  synth_cmd->add_option("--reveal", sy.config.reveal_rate, "Fraction of gold spans revealed");
  synth_cmd->add_option("--corrupt", sy.config.corrupt_rate, "Fraction of revealed spans corrupted");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  try {
    if (*stats_cmd) return cmd_stats(stats, args, out, err);
    if (*train_cmd) return cmd_train(tr, args, out, err);
    if (*parse_cmd) return cmd_parse(pa, args, out, err);
    if (*eval_cmd) return cmd_eval(ev, args, out);
    if (*baseline_cmd) return cmd_baseline(bl, args, out);
    if (*extract_cmd) return cmd_extract(ex, args, out, err);
    if (*synth_cmd) return cmd_synth(sy, args, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsage;
}

}  // namespace brackind::cli
