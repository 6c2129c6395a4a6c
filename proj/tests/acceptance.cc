// Acceptance suite: one PASS/FAIL/SKIP line per criterion. Exit status is
// non-zero when any criterion fails.
//
// Data-gated checks read these environment variables:
//   BRACKIND_QASRL_CORPUS  QA-SRL bracket corpus (JSONL, e.g. from `extract qasrl`)
//   BRACKIND_QASRL_GOLD    reference trees aligned with it (optional when the
//                          corpus records already carry "gold")
//   BRACKIND_PTB_TEST      reference trees of the test section, one per tree

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "brackind/cky.h"
#include "brackind/cli.h"
#include "brackind/cost.h"
#include "brackind/data.h"
#include "brackind/eval.h"
#include "brackind/model.h"
#include "brackind/pipeline.h"
#include "brackind/synth.h"
#include "brackind/train.h"
#include "oracles.h"

namespace {

using namespace brackind;
using namespace brackind::testing;
namespace fs = std::filesystem;

enum class Status { Pass, Fail, Skip };

struct Outcome {
  Status status;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

Outcome cky_oracle() {
  const auto start = Clock::now();
  std::mt19937_64 rng(101);
  double worst = 0.0;
  int charts = 0;
  for (; charts < 500; ++charts) {
    const int n = 2 + static_cast<int>(rng() % 7);
    const auto chart = random_chart(n, rng);
    worst = std::max(worst, std::abs(decode_scored(chart).score - brute_force_max(chart)));
    const auto brackets = random_brackets(n, rng, 5);
    for (auto kind : {CostKind::Loose, CostKind::Strict})
      for (int sign : {1, -1}) {
        const auto d = decode_with_cost(chart, brackets, kind, sign);
        worst = std::max(worst, std::abs(d.score - brute_force_max(chart, brackets, kind, sign)));
        // The returned tree must attain the returned score.
        worst = std::max(worst, std::abs(tree_score(chart, d.tree) + sign * delta(kind, d.tree, brackets) - d.score));
      }
  }
  const double elapsed = seconds_since(start);
  const bool ok = worst < 1e-9 && elapsed < 30.0;
  return {ok ? Status::Pass : Status::Fail,
          fmt("%d charts, n in [2,8], max |diff| %.3g (< 1e-9), %.2f s (< 30 s)", charts, worst, elapsed)};
}

Outcome ramp_loss_properties() {
  std::mt19937_64 rng(202);
  double min_loss = INFINITY, worst = 0.0;
  int bad_grad = 0;
  for (int k = 0; k < 500; ++k) {
    const int n = 2 + static_cast<int>(rng() % 6);
    const auto chart = random_chart(n, rng);
    const auto brackets = random_brackets(n, rng, 5);
    const auto kind = k % 2 == 0 ? CostKind::Strict : CostKind::Loose;
    const auto r = ramp_loss(chart, brackets, kind);
    min_loss = std::min(min_loss, r.loss);
    worst = std::max(worst, std::abs(r.loss - (brute_force_max(chart, brackets, kind, 1) -
                                               brute_force_max(chart, brackets, kind, -1))));
    double sum = 0.0;
    for (Span s : r.chart_grad.spans()) {
      const double g = r.chart_grad.at(s);
      if (g != -1.0 && g != 0.0 && g != 1.0) ++bad_grad;
      sum += g;
    }
    if (sum != 0.0) ++bad_grad;
  }
  const bool ok = min_loss >= 0.0 && worst < 1e-9 && bad_grad == 0;
  return {ok ? Status::Pass : Status::Fail,
          fmt("500 instances, n <= 7, min loss %.3g, max |loss - brute force| %.3g, %d bad gradients",
              min_loss, worst, bad_grad)};
}

Outcome supervised_collapse() {
  std::mt19937_64 rng(303);
  int mismatched_costs = 0, mismatched_delta = 0, trees_checked = 0;
  for (int k = 0; k < 200; ++k) {
    const int n = 2 + static_cast<int>(rng() % 6);
    const auto star = random_binary_tree(n, rng);
    const auto b = preprocess_brackets(BracketSet(spans_of_tree(star)), n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 2; j <= n; ++j)
        if (!(i == 0 && j == n) && span_cost(CostKind::Loose, {i, j}, b) != span_cost(CostKind::Strict, {i, j}, b))
          ++mismatched_costs;
    for_each_tree(n, [&](const BinaryTree& t) {
      ++trees_checked;
      const int h = hamming_half(t, star);
      // Strict also charges the full span, which no preprocessed y~ contains:
      // a constant 1 shared by every tree.
      if (delta(CostKind::Loose, t, b) != h || delta(CostKind::Strict, t, b) != h + 1) ++mismatched_delta;
    });
  }
  const bool ok = mismatched_costs == 0 && mismatched_delta == 0;
  return {ok ? Status::Pass : Status::Fail,
          fmt("200 gold trees, %d candidate trees, %d span-cost mismatches, %d delta mismatches", trees_checked,
              mismatched_costs, mismatched_delta)};
}

// Ramp loss as a function of the parameters. `flipped` is set when either
// loss-augmented argmax differs from the reference trees.
double ramp_objective(const ModelParams& p, const Matrix* inputs, const std::vector<int>* ids,
                      const BracketSet& brackets, CostKind kind, const RampLoss& reference, bool& flipped) {
  const Matrix x = inputs ? *inputs : gather_embeddings(p, *ids);
  const auto r = ramp_loss(score_spans(p, x), brackets, kind);
  if (!(r.y_plus == reference.y_plus) || !(r.y_minus == reference.y_minus)) flipped = true;
  return r.loss;
}

Outcome gradient_check() {
  std::mt19937_64 rng(404);
  int checked = 0, skipped = 0;
  double worst = 0.0;
  for (int attempt = 0; attempt < 80; ++attempt) {
    const int d_in = 1 + static_cast<int>(rng() % 8), d_h = 1 + static_cast<int>(rng() % 8);
    const int n = 2 + static_cast<int>(rng() % 5);
    const bool lookup = attempt % 2 == 0;
    const int vocab = 7;
    ModelParams p = random_params(d_in, d_h, lookup ? vocab : 0, rng);
    // Larger biaffine entries keep scores well separated across trees.
    for (double& w : p.biaffine.data) w *= 3.0;
    Matrix inputs = random_matrix(n, d_in, rng);
    std::vector<int> ids(n);
    for (int& id : ids) id = static_cast<int>(rng() % vocab);
    const auto brackets = random_brackets(n, rng, 3);
    const auto kind = attempt % 4 < 2 ? CostKind::Strict : CostKind::Loose;

    const Matrix x = lookup ? gather_embeddings(p, ids) : inputs;
    const auto reference = ramp_loss(score_spans(p, x), brackets, kind);
    auto g = backward(p, x, reference.chart_grad);
    if (lookup) {
      g.params.embeddings = Matrix(vocab, d_in);
      scatter_embedding_grad(g.input_grad, ids, *g.params.embeddings);
    }

    bool flipped = false;
    const auto errors = finite_difference_check(p, g.params, [&](const ModelParams& q) {
      return ramp_objective(q, lookup ? nullptr : &inputs, lookup ? &ids : nullptr, brackets, kind, reference,
                            flipped);
    });
    if (flipped) {
      ++skipped;
      continue;
    }
    ++checked;
    for (const auto& e : errors) worst = std::max(worst, e.relative_error);
  }
  const bool ok = checked >= 40 && worst < 1e-3;
  return {ok ? Status::Pass : Status::Fail,
          fmt("%d instances checked (%d skipped for argmax flips), d <= 8, n <= 6, worst group rel. err %.3g (< 1e-3)",
              checked, skipped, worst)};
}

std::vector<ParsedTree> gold_views(const std::vector<CorpusRecord>& records) {
  std::vector<ParsedTree> out;
  for (const auto& r : records) out.push_back({*r.gold, r.sentence});
  return out;
}

Outcome synthetic_end_to_end() {
  const auto start = Clock::now();
  SyntheticConfig train_cfg;
  train_cfg.sentences = 500;
  train_cfg.seed = 11;
  SyntheticConfig test_cfg = train_cfg;
  test_cfg.sentences = 100;
  test_cfg.seed = 12;
  const auto train_records = generate_synthetic(train_cfg);
  const auto test_records = generate_synthetic(test_cfg);

  const Vocabulary vocab = build_vocabulary(train_records);
  const auto corpus = lookup_sentences(train_records, vocab);
  TrainConfig config;
  config.cost = CostKind::Strict;
  config.total_steps = 2000;
  config.warmup_steps = 200;
  config.peak_lr = 5e-3;
  config.seed = 2;
  const auto result = train(corpus, init_params(32, 16, vocab.size(), 1), config);

  const auto test_sentences = lookup_sentences(test_records, vocab);
  const auto trees = parse_sentences(result.params, test_sentences);
  const auto golds = gold_views(test_records);
  const double model = corpus_f1(golds, [&](const ParsedTree&, std::size_t k) { return trees[k]; }).mean_f1;
  const double right = baseline_f1(golds, BaselineKind::Right).mean_f1;

  const auto mean_loss = [&](std::size_t from, std::size_t to) {
    double s = 0.0;
    for (std::size_t k = from; k < to; ++k) s += result.trace[k].mean_loss;
    return s / static_cast<double>(to - from);
  };
  const double first = mean_loss(0, 100), last = mean_loss(result.trace.size() - 100, result.trace.size());
  const double elapsed = seconds_since(start);
  const bool ok = model >= right + 0.10 && last < first && elapsed < 300.0;
  return {ok ? Status::Pass : Status::Fail,
          fmt("model F1 %.2f vs right-branching %.2f (need +10.00), loss first/last 100 steps %.3f/%.3f, %.1f s (< 300 s)",
              100 * model, 100 * right, first, last, elapsed)};
}

Outcome overfit_single_sentence() {
  const auto gold = BinaryTree::join(
      BinaryTree::join(BinaryTree::leaf(0), BinaryTree::join(BinaryTree::leaf(1), BinaryTree::leaf(2))),
      BinaryTree::join(BinaryTree::join(BinaryTree::leaf(3), BinaryTree::leaf(4)),
                       BinaryTree::join(BinaryTree::leaf(5), BinaryTree::leaf(6))));
  TrainingSentence s;
  s.token_ids = {1, 2, 3, 4, 5, 6, 7};
  s.brackets = preprocess_brackets(BracketSet(spans_of_tree(gold)), 7);
  const std::vector<TrainingSentence> corpus{s};

  TrainConfig config;
  config.total_steps = 500;
  config.warmup_steps = 20;
  config.peak_lr = 1e-2;
  config.batch_size = 1;
  const auto r = train(corpus, init_params(8, 8, 8, 5), config);
  const bool decoded = decode(score_sentence(r.params, s)) == gold;
  // Plateau: the last 50 losses are constant.
  bool plateau = true;
  for (std::size_t k = r.trace.size() - 50; k < r.trace.size(); ++k)
    plateau &= r.trace[k].mean_loss == r.trace.back().mean_loss;
  const bool ok = decoded && plateau;
  return {ok ? Status::Pass : Status::Fail,
          fmt("500 steps, decode %s gold, final loss %.3f, %s", decoded ? "equals" : "differs from",
              r.trace.back().mean_loss, plateau ? "flat over last 50 steps" : "not yet flat")};
}

Outcome evaluation_fixtures() {
  const fs::path dir = BRACKIND_FIXTURE_DIR;
  const auto golds = read_tree_file(dir / "eval5_gold.txt");
  const auto preds = read_tree_file(dir / "eval5_pred.txt");
  const auto report = evaluate_trees(preds, golds);
  const std::vector<double> expected{1.0, 0.0, 0.5, NAN, 6.0 / 7.0};
  double worst = std::abs(report.mean_f1 - 33.0 / 56.0);
  for (std::size_t k = 0; k < expected.size(); ++k)
    if (!std::isnan(expected[k])) worst = std::max(worst, std::abs(report.sentence_f1[k] - expected[k]));
  const bool excluded_ok = std::isnan(report.sentence_f1[3]) && report.excluded == 1;

  const auto base = read_tree_file(dir / "baseline3_gold.txt");
  worst = std::max(worst, std::abs(baseline_f1(base, BaselineKind::Right).mean_f1 - 17.0 / 28.0));
  worst = std::max(worst, std::abs(baseline_f1(base, BaselineKind::Left).mean_f1 - 29.0 / 84.0));
  worst = std::max(worst, std::abs(baseline_f1(base, BaselineKind::Upper).mean_f1 - 20.0 / 21.0));

  const double self = evaluate_trees(golds, golds).mean_f1;
  std::ostringstream out, err;
  const std::string gold_path = (dir / "eval5_gold.txt").string();
  const int code = cli::run({"eval", "--pred", gold_path, "--gold", gold_path}, out, err);
  const bool cli_self = code == 0 && out.str().find("Mean sentence F1: 100.0000") != std::string::npos;

  const bool ok = worst < 1e-9 && excluded_ok && self == 1.0 && cli_self;
  return {ok ? Status::Pass : Status::Fail,
          fmt("eval5 mean %.10f (expect 33/56), max |diff| %.3g (< 1e-9), self-eval %.4f, CLI self-eval %s",
              report.mean_f1, worst, 100 * self, cli_self ? "100.0000" : "wrong")};
}

const char* env(const char* name) {
  const char* v = std::getenv(name);
  return v && *v ? v : nullptr;
}

Outcome qasrl_table_row() {
  const char* corpus_path = env("BRACKIND_QASRL_CORPUS");
  if (!corpus_path) return {Status::Skip, "set BRACKIND_QASRL_CORPUS (and BRACKIND_QASRL_GOLD) to run"};
  auto records = load_corpus(fs::path(corpus_path)).records;
  if (const char* gold_path = env("BRACKIND_QASRL_GOLD")) {
    const auto trees = read_tree_file(fs::path(gold_path));
    if (trees.size() != records.size()) return {Status::Fail, "gold trees do not align with the corpus"};
    for (std::size_t k = 0; k < records.size(); ++k) records[k].gold = trees[k].tree;
  }
  const auto r = corpus_stats(records);
  if (!r.pct_conflicting) return {Status::Fail, "corpus records lack reference trees"};
  const bool ok = std::abs(r.brackets_per_sentence - 6.26) <= 0.05 && std::abs(r.pct_single_word - 22.4) <= 0.5 &&
                  std::abs(*r.pct_conflicting - 11.8) <= 0.5;
  return {ok ? Status::Pass : Status::Fail,
          fmt("brackets/sentence %.2f (6.26 +/- 0.05), single-word %.1f%% (22.4 +/- 0.5), conflicting %.1f%% (11.8 +/- 0.5)",
              r.brackets_per_sentence, r.pct_single_word, *r.pct_conflicting)};
}

Outcome ptb_baselines() {
  const char* path = env("BRACKIND_PTB_TEST");
  if (!path) return {Status::Skip, "set BRACKIND_PTB_TEST to run"};
  const auto golds = read_tree_file(fs::path(path));
  const double right = 100 * baseline_f1(golds, BaselineKind::Right).mean_f1;
  const double left = 100 * baseline_f1(golds, BaselineKind::Left).mean_f1;
  const double upper = 100 * baseline_f1(golds, BaselineKind::Upper).mean_f1;
  const bool ok = std::abs(right - 39.5) <= 0.5 && std::abs(left - 8.7) <= 0.5 && std::abs(upper - 84.3) <= 0.5;
  return {ok ? Status::Pass : Status::Fail,
          fmt("right %.1f (39.5 +/- 0.5), left %.1f (8.7 +/- 0.5), upper bound %.1f (84.3 +/- 0.5)", right, left,
              upper)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"cky-oracle-equivalence", cky_oracle},
      {"ramp-loss-properties", ramp_loss_properties},
      {"supervised-collapse", supervised_collapse},
      {"gradient-check", gradient_check},
      {"synthetic-end-to-end", synthetic_end_to_end},
      {"overfit-single-sentence", overfit_single_sentence},
      {"evaluation-fixtures", evaluation_fixtures},
      {"qasrl-bracket-statistics", qasrl_table_row},
      {"ptb-baselines", ptb_baselines},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {Status::Fail, std::string("exception: ") + e.what()};
    }
    const char* tag = o.status == Status::Pass ? "PASS" : o.status == Status::Fail ? "FAIL" : "SKIP";
    failures += o.status == Status::Fail;
    std::printf("%s  %-26s %s\n", tag, name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
