#ifndef BRACKIND_TRAIN_H_
#define BRACKIND_TRAIN_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "brackind/cky.h"
#include "brackind/cost.h"
#include "brackind/model.h"

namespace brackind {

struct TrainConfig {
  CostKind cost = CostKind::Strict;
  int batch_size = 8;
  int total_steps = 20000;
  int warmup_steps = 2000;
  double peak_lr = 1e-5;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-12;
  double clip_norm = 1.0;
  std::uint64_t seed = 1;
  int threads = 1;

  // Throws ConfigError when an invariant is violated.
  void validate() const;
};

// Adam moments, shaped like the parameters.
struct OptState {
  ModelParams m;
  ModelParams v;
  std::int64_t step = 0;

  static OptState for_params(const ModelParams& params);
  bool operator==(const OptState&) const = default;
};

struct RampLoss {
  double loss = 0.0;
  ScoreChart chart_grad;  // subgradient of loss w.r.t. chart entries
  BinaryTree y_plus;      // cost-augmented argmax
  BinaryTree y_minus;     // cost-diminished argmax
};

// max_y [s(y) + delta] - max_y [s(y) - delta]. Brackets must be preprocessed.
RampLoss ramp_loss(const ScoreChart& chart, const BracketSet& brackets, CostKind kind);

// Linear warmup from 0 to peak_lr over warmup_steps, constant afterwards.
double lr_at(std::int64_t step, const TrainConfig& config);

double global_norm(const ModelParams& grads);

// Rescales grads in place to global L2 norm max_norm when above it. Returns
// the pre-clipping norm.
double clip_gradients(ModelParams& grads, double max_norm);

// One bias-corrected Adam update; increments state.step.
void adam_step(ModelParams& params, const ModelParams& grads, OptState& state, double lr,
               const TrainConfig& config);

// One training sentence. Lookup mode uses token_ids; precomputed mode uses
// inputs (n x input_dim).
struct TrainingSentence {
  std::vector<int> token_ids;
  Matrix inputs;
  BracketSet brackets;  // preprocessed

  int size() const {
    return token_ids.empty() ? inputs.rows : static_cast<int>(token_ids.size());
  }
};

struct TraceEntry {
  std::int64_t step;
  double lr;
  double mean_loss;
};

struct TrainResult {
  ModelParams params;
  OptState state;
  std::vector<TraceEntry> trace;
};

using StepCallback = std::function<void(const TraceEntry&)>;

// Minibatch training with the structured ramp loss. Each step samples
// batch_size sentences uniformly with replacement, averages their losses,
// backpropagates, clips and applies Adam at lr_at(step). Throws ConfigError
// on an empty corpus or sentences incompatible with the parameters.
TrainResult train(std::span<const TrainingSentence> corpus, ModelParams init,
                  const TrainConfig& config, const StepCallback& on_step = {});

// Continues training from a given optimizer state.
TrainResult train(std::span<const TrainingSentence> corpus, ModelParams init, OptState state,
                  const TrainConfig& config, const StepCallback& on_step = {});

// Chart for one sentence under the current parameters.
ScoreChart score_sentence(const ModelParams& params, const TrainingSentence& sentence);

// Token -> row mapping for the lookup table. Row 0 is reserved for unknown
// tokens.
class Vocabulary {
 public:
  static constexpr const char* kUnknown = "<unk>";

  Vocabulary();
  explicit Vocabulary(std::vector<std::string> tokens);  // tokens[0] must be <unk>

  int add(const std::string& token);
  int id_of(const std::string& token) const;  // 0 when unknown
  std::vector<int> ids_of(std::span<const std::string> tokens) const;
  int size() const { return static_cast<int>(tokens_.size()); }
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

struct Checkpoint {
  ModelParams params;
  OptState state;
  Vocabulary vocab;  // size 1 (just <unk>) in precomputed-embedding mode
};

// Binary container; doubles are stored bit-exactly.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace brackind

#endif  // BRACKIND_TRAIN_H_
