#ifndef BRACKIND_MODEL_H_
#define BRACKIND_MODEL_H_

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "brackind/cky.h"

namespace brackind {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dense row-major matrix of doubles.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

  double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
  std::span<double> row(int r) { return {data.data() + static_cast<std::size_t>(r) * cols, static_cast<std::size_t>(cols)}; }
  std::span<const double> row(int r) const { return {data.data() + static_cast<std::size_t>(r) * cols, static_cast<std::size_t>(cols)}; }

  bool operator==(const Matrix&) const = default;
};

// Affine map followed by leaky ReLU: out = act(weight * x + bias).
struct BoundaryMlp {
  Matrix weight;             // hidden x input
  std::vector<double> bias;  // hidden

  bool operator==(const BoundaryMlp&) const = default;
};

// Span scorer parameters. `embeddings` is present for the trainable lookup
// mode (vocab x input) and absent when inputs are precomputed vectors.
//
// The same struct doubles as the gradient and Adam moment container.
struct ModelParams {
  std::optional<Matrix> embeddings;
  BoundaryMlp left;
  BoundaryMlp right;
  Matrix biaffine;  // (hidden+1) x (hidden+1)
  double leaky_slope = 0.01;

  int input_dim() const { return left.weight.cols; }
  int hidden_dim() const { return left.weight.rows; }

  // Zero-valued tensor of identical shape.
  ModelParams zeros_like() const;

  // Visits each parameter group as a flat vector, in a fixed order:
  // embeddings (if any), left weight, left bias, right weight, right bias,
  // biaffine.
  template <class F>
  void for_each_group(F&& f) { visit_groups(*this, f); }
  template <class F>
  void for_each_group(F&& f) const { visit_groups(*this, f); }

  // Throws ConfigError on inconsistent shapes or non-finite values.
  void validate() const;

  bool operator==(const ModelParams&) const = default;

 private:
  template <class Self, class F>
  static void visit_groups(Self& self, F& f) {
    if (self.embeddings) f(self.embeddings->data);
    f(self.left.weight.data);
    f(self.left.bias);
    f(self.right.weight.data);
    f(self.right.bias);
    f(self.biaffine.data);
  }
};

inline constexpr double kDefaultLeakySlope = 0.01;

// Glorot-uniform weights, zero biases; deterministic in seed. vocab_size 0
// selects the precomputed-embedding mode (no lookup table).
ModelParams init_params(int input_dim, int hidden_dim, int vocab_size, std::uint64_t seed);

// Rows of the lookup table for the given token ids.
Matrix gather_embeddings(const ModelParams& params, std::span<const int> token_ids);

struct BoundaryReprs {
  Matrix left;       // n x hidden, post-activation
  Matrix right;      // n x hidden, post-activation
  Matrix left_pre;   // pre-activation, kept for backward
  Matrix right_pre;
};

double leaky_relu(double x, double slope);

BoundaryReprs boundary_reprs(const ModelParams& params, const Matrix& inputs);

// s(i, j) = [l_i; 1]^T W [r_{j-1}; 1] for every span of width >= 2.
ScoreChart score_spans(const ModelParams& params, const Matrix& inputs);

struct ScorerGradients {
  ModelParams params;  // embeddings left empty; see input_grad
  Matrix input_grad;   // n x input
};

// Gradient of sum_s chart_grad[s] * score(s) w.r.t. parameters and inputs.
ScorerGradients backward(const ModelParams& params, const Matrix& inputs,
                         const ScoreChart& chart_grad);

// Adds rows of input_grad into grads.embeddings at the given token ids.
void scatter_embedding_grad(const Matrix& input_grad, std::span<const int> token_ids,
                            Matrix& embedding_grad);

}  // namespace brackind

#endif  // BRACKIND_MODEL_H_
