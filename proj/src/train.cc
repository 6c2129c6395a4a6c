#include "brackind/train.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "brackind/parallel.h"

namespace brackind {

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("batch_size must be positive");
  if (total_steps < 0) throw ConfigError("total_steps must be non-negative");
  if (warmup_steps < 0 || warmup_steps > total_steps)
    throw ConfigError("warmup_steps must lie in [0, total_steps]");
  if (!(peak_lr > 0.0)) throw ConfigError("peak_lr must be positive");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0))
    throw ConfigError("adam betas must lie in [0, 1)");
  if (!(adam_eps > 0.0)) throw ConfigError("adam_eps must be positive");
  if (!(clip_norm > 0.0)) throw ConfigError("clip_norm must be positive");
  if (threads < 1) throw ConfigError("threads must be positive");
}

OptState OptState::for_params(const ModelParams& params) {
  return {params.zeros_like(), params.zeros_like(), 0};
}

RampLoss ramp_loss(const ScoreChart& chart, const BracketSet& brackets, CostKind kind) {
  Decoded plus = decode_with_cost(chart, brackets, kind, +1);
  Decoded minus = decode_with_cost(chart, brackets, kind, -1);
  ScoreChart grad(chart.size());
  for (Span s : spans_of_tree(plus.tree)) grad.at(s) += 1.0;
  for (Span s : spans_of_tree(minus.tree)) grad.at(s) -= 1.0;
  return {plus.score - minus.score, std::move(grad), std::move(plus.tree),
          std::move(minus.tree)};
}

double lr_at(std::int64_t step, const TrainConfig& config) {
  if (step <= 0) return 0.0;
  if (step >= config.warmup_steps) return config.peak_lr;
  return config.peak_lr * static_cast<double>(step) / config.warmup_steps;
}

double global_norm(const ModelParams& grads) {
  double sq = 0.0;
  grads.for_each_group([&](const std::vector<double>& g) {
    for (double v : g) sq += v * v;
  });
  return std::sqrt(sq);
}

double clip_gradients(ModelParams& grads, double max_norm) {
  const double norm = global_norm(grads);
  if (norm > max_norm) {
    const double scale = max_norm / norm;
    grads.for_each_group([&](std::vector<double>& g) {
      for (double& v : g) v *= scale;
    });
  }
  return norm;
}

namespace {

// Parallel walk over matching parameter groups of several same-shaped params.
template <class Fn>
void zip_groups(ModelParams& params, const ModelParams& grads, ModelParams& m, ModelParams& v,
                Fn&& fn) {
  std::vector<std::vector<double>*> p, mm, vv;
  std::vector<const std::vector<double>*> g;
  params.for_each_group([&](std::vector<double>& x) { p.push_back(&x); });
  m.for_each_group([&](std::vector<double>& x) { mm.push_back(&x); });
  v.for_each_group([&](std::vector<double>& x) { vv.push_back(&x); });
  grads.for_each_group([&](const std::vector<double>& x) { g.push_back(&x); });
  if (p.size() != g.size() || p.size() != mm.size() || p.size() != vv.size())
    throw ConfigError("optimizer state does not match parameter layout");
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k]->size() != g[k]->size() || p[k]->size() != mm[k]->size() ||
        p[k]->size() != vv[k]->size())
      throw ConfigError("optimizer state does not match parameter shapes");
    fn(*p[k], *g[k], *mm[k], *vv[k]);
  }
}

void add_into(ModelParams& total, const ModelParams& part) {
  std::vector<std::vector<double>*> dst;
  total.for_each_group([&](std::vector<double>& x) { dst.push_back(&x); });
  std::size_t k = 0;
  const bool skip_embeddings = total.embeddings.has_value() && !part.embeddings.has_value();
  if (skip_embeddings) k = 1;
  part.for_each_group([&](const std::vector<double>& x) {
    auto& d = *dst[k++];
    for (std::size_t t = 0; t < x.size(); ++t) d[t] += x[t];
  });
}

Matrix sentence_inputs(const ModelParams& params, const TrainingSentence& s) {
  if (!s.token_ids.empty()) return gather_embeddings(params, s.token_ids);
  return s.inputs;
}

void check_corpus(std::span<const TrainingSentence> corpus, const ModelParams& params) {
  if (corpus.empty()) throw ConfigError("training corpus is empty");
  for (std::size_t k = 0; k < corpus.size(); ++k) {
    const auto& s = corpus[k];
    if (s.size() < 1) throw ConfigError("training sentence " + std::to_string(k) + " is empty");
    if (!s.token_ids.empty()) {
      if (!params.embeddings)
        throw ConfigError("token ids given but the model has no lookup table");
      for (int id : s.token_ids)
        if (id < 0 || id >= params.embeddings->rows)
          throw ConfigError("token id out of range in sentence " + std::to_string(k));
    } else if (s.inputs.cols != params.input_dim()) {
      throw ConfigError("sentence " + std::to_string(k) + " has input width " +
                        std::to_string(s.inputs.cols) + ", model expects " +
                        std::to_string(params.input_dim()));
    }
    for (Span b : s.brackets)
      if (!b.valid_for(s.size()))
        throw ConfigError("bracket " + to_string(b) + " out of bounds in sentence " +
                          std::to_string(k));
  }
}

}  // namespace

void adam_step(ModelParams& params, const ModelParams& grads, OptState& state, double lr,
               const TrainConfig& config) {
  state.step += 1;
  const double b1 = config.adam_beta1;
  const double b2 = config.adam_beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  zip_groups(params, grads, state.m, state.v,
             [&](std::vector<double>& p, const std::vector<double>& g, std::vector<double>& m,
                 std::vector<double>& v) {
               for (std::size_t t = 0; t < p.size(); ++t) {
                 m[t] = b1 * m[t] + (1.0 - b1) * g[t];
                 v[t] = b2 * v[t] + (1.0 - b2) * g[t] * g[t];
                 const double m_hat = m[t] / c1;
                 const double v_hat = v[t] / c2;
                 p[t] -= lr * m_hat / (std::sqrt(v_hat) + config.adam_eps);
               }
             });
}

ScoreChart score_sentence(const ModelParams& params, const TrainingSentence& sentence) {
  return score_spans(params, sentence_inputs(params, sentence));
}

TrainResult train(std::span<const TrainingSentence> corpus, ModelParams init,
                  const TrainConfig& config, const StepCallback& on_step) {
  OptState state = OptState::for_params(init);
  return train(corpus, std::move(init), std::move(state), config, on_step);
}

TrainResult train(std::span<const TrainingSentence> corpus, ModelParams init, OptState state,
                  const TrainConfig& config, const StepCallback& on_step) {
  config.validate();
  init.validate();
  check_corpus(corpus, init);

  TrainResult result{std::move(init), std::move(state), {}};
  ModelParams& params = result.params;
  result.trace.reserve(config.total_steps);

  std::mt19937_64 rng(config.seed);
  std::uniform_int_distribution<std::size_t> pick(0, corpus.size() - 1);
  const double scale = 1.0 / config.batch_size;

  struct Slot {
    double loss = 0.0;
    std::optional<ScorerGradients> grads;
  };
  std::vector<std::size_t> batch(config.batch_size);
  std::vector<Slot> slots(config.batch_size);

  for (int step = 0; step < config.total_steps; ++step) {
    for (auto& idx : batch) idx = pick(rng);

    parallel_for(batch.size(), config.threads, [&](std::size_t b) {
      const TrainingSentence& s = corpus[batch[b]];
      Slot& slot = slots[b];
      slot = Slot{};
      if (s.size() < 2) return;
      const Matrix inputs = sentence_inputs(params, s);
      const ScoreChart chart = score_spans(params, inputs);
      RampLoss rl = ramp_loss(chart, s.brackets, config.cost);
      slot.loss = rl.loss;
      for (Span sp : rl.chart_grad.spans()) rl.chart_grad.at(sp) *= scale;
      slot.grads = backward(params, inputs, rl.chart_grad);
    });

    ModelParams grads = params.zeros_like();
    double loss_sum = 0.0;
    for (std::size_t b = 0; b < batch.size(); ++b) {
      loss_sum += slots[b].loss;
      if (!slots[b].grads) continue;
      add_into(grads, slots[b].grads->params);
      if (grads.embeddings)
        scatter_embedding_grad(slots[b].grads->input_grad, corpus[batch[b]].token_ids,
                               *grads.embeddings);
    }

    clip_gradients(grads, config.clip_norm);
    const double lr = lr_at(result.state.step + 1, config);
    adam_step(params, grads, result.state, lr, config);

    TraceEntry entry{result.state.step, lr, loss_sum / config.batch_size};
    result.trace.push_back(entry);
    if (on_step) on_step(entry);
  }
  return result;
}

Vocabulary::Vocabulary() : Vocabulary(std::vector<std::string>{kUnknown}) {}

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  if (tokens_.empty() || tokens_.front() != kUnknown)
    throw ConfigError("vocabulary must start with the unknown token");
  for (std::size_t k = 0; k < tokens_.size(); ++k)
    if (!index_.emplace(tokens_[k], static_cast<int>(k)).second)
      throw ConfigError("duplicate vocabulary entry '" + tokens_[k] + "'");
}

int Vocabulary::add(const std::string& token) {
  auto [it, inserted] = index_.emplace(token, static_cast<int>(tokens_.size()));
  if (inserted) tokens_.push_back(token);
  return it->second;
}

int Vocabulary::id_of(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? 0 : it->second;
}

std::vector<int> Vocabulary::ids_of(std::span<const std::string> tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(id_of(t));
  return ids;
}

// Checkpoint layout (little-endian):
//   "BKCK" u32:version u8:has_embeddings i32:vocab_rows i32:input i32:hidden
//   f64:leaky_slope, then params, m, v as raw f64 groups, i64:step,
//   u32:vocab_size, vocab_size x (u32:len bytes).
namespace {

constexpr char kCheckpointMagic[4] = {'B', 'K', 'C', 'K'};
constexpr std::uint32_t kCheckpointVersion = 1;

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}
  template <class T>
  void put(T value) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                                 std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint8_t>>;
    U bits = std::bit_cast<U>(value);
    for (std::size_t b = 0; b < sizeof(U); ++b) {
      out_.put(static_cast<char>(bits & 0xFF));
      if constexpr (sizeof(U) > 1) bits >>= 8;
    }
  }
  void bytes(const std::string& s) {
    put(static_cast<std::uint32_t>(s.size()));
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}
  template <class T>
  T get() {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                                 std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint8_t>>;
    U bits = 0;
    for (std::size_t b = 0; b < sizeof(U); ++b) {
      const int c = in_.get();
      if (c == EOF) throw ConfigError("checkpoint is truncated");
      bits |= static_cast<U>(static_cast<U>(static_cast<unsigned char>(c)) << (8 * b));
    }
    return std::bit_cast<T>(bits);
  }
  std::string bytes() {
    const auto len = get<std::uint32_t>();
    std::string s(len, '\0');
    if (!in_.read(s.data(), len)) throw ConfigError("checkpoint is truncated");
    return s;
  }

 private:
  std::istream& in_;
};

void write_params(Writer& w, const ModelParams& p) {
  p.for_each_group([&](const std::vector<double>& g) {
    for (double v : g) w.put(v);
  });
}

void read_params(Reader& r, ModelParams& p) {
  p.for_each_group([&](std::vector<double>& g) {
    for (double& v : g) v = r.get<double>();
  });
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write checkpoint " + path.string());
  Writer w(out);
  out.write(kCheckpointMagic, 4);
  const ModelParams& p = ckpt.params;
  w.put(kCheckpointVersion);
  w.put(static_cast<std::uint8_t>(p.embeddings ? 1 : 0));
  w.put(static_cast<std::int32_t>(p.embeddings ? p.embeddings->rows : 0));
  w.put(static_cast<std::int32_t>(p.input_dim()));
  w.put(static_cast<std::int32_t>(p.hidden_dim()));
  w.put(p.leaky_slope);
  write_params(w, p);
  write_params(w, ckpt.state.m);
  write_params(w, ckpt.state.v);
  w.put(static_cast<std::int64_t>(ckpt.state.step));
  w.put(static_cast<std::uint32_t>(ckpt.vocab.size()));
  for (const auto& t : ckpt.vocab.tokens()) w.bytes(t);
  if (!out) throw ConfigError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kCheckpointMagic, 4) != 0)
    throw ConfigError(path.string() + " is not a checkpoint file");
  Reader r(in);
  if (r.get<std::uint32_t>() != kCheckpointVersion)
    throw ConfigError("unsupported checkpoint version in " + path.string());
  const bool has_embeddings = r.get<std::uint8_t>() != 0;
  const auto vocab_rows = r.get<std::int32_t>();
  const auto input = r.get<std::int32_t>();
  const auto hidden = r.get<std::int32_t>();
  if (input < 1 || hidden < 1 || vocab_rows < 0)
    throw ConfigError("corrupt checkpoint header in " + path.string());

  ModelParams shape;
  if (has_embeddings) shape.embeddings = Matrix(vocab_rows, input);
  shape.left = {Matrix(hidden, input), std::vector<double>(hidden, 0.0)};
  shape.right = {Matrix(hidden, input), std::vector<double>(hidden, 0.0)};
  shape.biaffine = Matrix(hidden + 1, hidden + 1);
  shape.leaky_slope = r.get<double>();

  Checkpoint ckpt{shape, {shape, shape, 0}, Vocabulary()};
  read_params(r, ckpt.params);
  read_params(r, ckpt.state.m);
  read_params(r, ckpt.state.v);
  ckpt.state.step = r.get<std::int64_t>();
  const auto vocab_size = r.get<std::uint32_t>();
  std::vector<std::string> tokens;
  tokens.reserve(vocab_size);
  for (std::uint32_t k = 0; k < vocab_size; ++k) tokens.push_back(r.bytes());
  ckpt.vocab = Vocabulary(std::move(tokens));
  ckpt.params.validate();
  return ckpt;
}

}  // namespace brackind
