#include "brackind/model.h"

#include <cmath>
#include <random>
#include <string>

namespace brackind {

namespace {

void glorot_fill(Matrix& m, int fan_in, int fan_out, std::mt19937_64& rng) {
  const double bound = std::sqrt(6.0 / (fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& v : m.data) v = dist(rng);
}

void check_finite(const std::vector<double>& values, const char* what) {
  for (double v : values)
    if (!std::isfinite(v)) throw ConfigError(std::string("non-finite value in ") + what);
}

// Augmented rows [v; 1] for every row of m.
Matrix with_bias_column(const Matrix& m) {
  Matrix out(m.rows, m.cols + 1);
  for (int r = 0; r < m.rows; ++r) {
    for (int c = 0; c < m.cols; ++c) out(r, c) = m(r, c);
    out(r, m.cols) = 1.0;
  }
  return out;
}

void apply_mlp(const BoundaryMlp& mlp, double slope, const Matrix& inputs, Matrix& pre,
               Matrix& post) {
  const int hidden = mlp.weight.rows;
  pre = Matrix(inputs.rows, hidden);
  post = Matrix(inputs.rows, hidden);
  for (int t = 0; t < inputs.rows; ++t) {
    const auto x = inputs.row(t);
    for (int h = 0; h < hidden; ++h) {
      const auto w = mlp.weight.row(h);
      double acc = mlp.bias[h];
      for (int c = 0; c < inputs.cols; ++c) acc += w[c] * x[c];
      pre(t, h) = acc;
      post(t, h) = leaky_relu(acc, slope);
    }
  }
}

// Backprop through act(W x + b) given d(post); accumulates into grads and
// input_grad.
void mlp_backward(const BoundaryMlp& mlp, double slope, const Matrix& inputs, const Matrix& pre,
                  const Matrix& post_grad, BoundaryMlp& grads, Matrix& input_grad) {
  const int hidden = mlp.weight.rows;
  for (int t = 0; t < inputs.rows; ++t) {
    const auto x = inputs.row(t);
    auto dx = input_grad.row(t);
    for (int h = 0; h < hidden; ++h) {
      const double d = post_grad(t, h) * (pre(t, h) > 0.0 ? 1.0 : slope);
      if (d == 0.0) continue;
      grads.bias[h] += d;
      auto gw = grads.weight.row(h);
      const auto w = mlp.weight.row(h);
      for (int c = 0; c < inputs.cols; ++c) {
        gw[c] += d * x[c];
        dx[c] += d * w[c];
      }
    }
  }
}

}  // namespace

ModelParams ModelParams::zeros_like() const {
  ModelParams z = *this;
  z.for_each_group([](std::vector<double>& g) { std::fill(g.begin(), g.end(), 0.0); });
  return z;
}

void ModelParams::validate() const {
  const int in = input_dim();
  const int hidden = hidden_dim();
  if (in < 1 || hidden < 1) throw ConfigError("model dimensions must be positive");
  if (right.weight.rows != hidden || right.weight.cols != in)
    throw ConfigError("right MLP shape does not match left MLP");
  if (static_cast<int>(left.bias.size()) != hidden || static_cast<int>(right.bias.size()) != hidden)
    throw ConfigError("MLP bias size does not match hidden dimension");
  if (biaffine.rows != hidden + 1 || biaffine.cols != hidden + 1)
    throw ConfigError("biaffine matrix must be (hidden+1) x (hidden+1)");
  if (embeddings && embeddings->cols != in)
    throw ConfigError("embedding width does not match MLP input dimension");
  if (!std::isfinite(leaky_slope)) throw ConfigError("non-finite leaky slope");
  check_finite(left.weight.data, "left MLP weight");
  check_finite(left.bias, "left MLP bias");
  check_finite(right.weight.data, "right MLP weight");
  check_finite(right.bias, "right MLP bias");
  check_finite(biaffine.data, "biaffine matrix");
  if (embeddings) check_finite(embeddings->data, "embedding table");
}

ModelParams init_params(int input_dim, int hidden_dim, int vocab_size, std::uint64_t seed) {
  if (input_dim < 1 || hidden_dim < 1 || vocab_size < 0)
    throw ConfigError("init_params: dimensions must be positive");
  std::mt19937_64 rng(seed);
  ModelParams p;
  if (vocab_size > 0) {
    p.embeddings = Matrix(vocab_size, input_dim);
    glorot_fill(*p.embeddings, vocab_size, input_dim, rng);
  }
  p.left = {Matrix(hidden_dim, input_dim), std::vector<double>(hidden_dim, 0.0)};
  p.right = {Matrix(hidden_dim, input_dim), std::vector<double>(hidden_dim, 0.0)};
  glorot_fill(p.left.weight, input_dim, hidden_dim, rng);
  glorot_fill(p.right.weight, input_dim, hidden_dim, rng);
  p.biaffine = Matrix(hidden_dim + 1, hidden_dim + 1);
  glorot_fill(p.biaffine, hidden_dim + 1, hidden_dim + 1, rng);
  p.leaky_slope = kDefaultLeakySlope;
  return p;
}

Matrix gather_embeddings(const ModelParams& params, std::span<const int> token_ids) {
  if (!params.embeddings) throw ConfigError("model has no lookup embedding table");
  const Matrix& table = *params.embeddings;
  Matrix out(static_cast<int>(token_ids.size()), table.cols);
  for (std::size_t t = 0; t < token_ids.size(); ++t) {
    const int id = token_ids[t];
    if (id < 0 || id >= table.rows) throw ConfigError("token id out of vocabulary range");
    const auto src = table.row(id);
    std::copy(src.begin(), src.end(), out.row(static_cast<int>(t)).begin());
  }
  return out;
}

double leaky_relu(double x, double slope) { return x > 0.0 ? x : slope * x; }

BoundaryReprs boundary_reprs(const ModelParams& params, const Matrix& inputs) {
  if (inputs.rows < 1) throw ConfigError("boundary_reprs: empty sentence");
  if (inputs.cols != params.input_dim())
    throw ConfigError("input dimension " + std::to_string(inputs.cols) +
                      " does not match model input dimension " +
                      std::to_string(params.input_dim()));
  BoundaryReprs out;
  apply_mlp(params.left, params.leaky_slope, inputs, out.left_pre, out.left);
  apply_mlp(params.right, params.leaky_slope, inputs, out.right_pre, out.right);
  return out;
}

namespace {

ScoreChart chart_from_reprs(const ModelParams& params, const BoundaryReprs& reprs) {
  const int n = reprs.left.rows;
  const int d = params.hidden_dim() + 1;
  const Matrix a = with_bias_column(reprs.left);
  const Matrix b = with_bias_column(reprs.right);
  // proj = a * W, so s(i, j) = proj_i . b_{j-1}
  Matrix proj(n, d);
  for (int i = 0; i < n; ++i)
    for (int p = 0; p < d; ++p) {
      const double ap = a(i, p);
      if (ap == 0.0) continue;
      const auto w = params.biaffine.row(p);
      auto out = proj.row(i);
      for (int q = 0; q < d; ++q) out[q] += ap * w[q];
    }
  ScoreChart chart(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 2; j <= n; ++j) {
      const auto pi = proj.row(i);
      const auto bk = b.row(j - 1);
      double s = 0.0;
      for (int q = 0; q < d; ++q) s += pi[q] * bk[q];
      chart.at(i, j) = s;
    }
  return chart;
}

}  // namespace

ScoreChart score_spans(const ModelParams& params, const Matrix& inputs) {
  return chart_from_reprs(params, boundary_reprs(params, inputs));
}

ScorerGradients backward(const ModelParams& params, const Matrix& inputs,
                         const ScoreChart& chart_grad) {
  const BoundaryReprs reprs = boundary_reprs(params, inputs);
  const int n = inputs.rows;
  if (chart_grad.size() != n) throw ConfigError("chart gradient length mismatch");
  const int hidden = params.hidden_dim();
  const int d = hidden + 1;
  const Matrix a = with_bias_column(reprs.left);
  const Matrix b = with_bias_column(reprs.right);

  // g(i, k) = chart_grad(i, k+1): weight on the pair (left token i, right token k).
  Matrix g(n, n);
  bool any = false;
  for (int i = 0; i < n; ++i)
    for (int j = i + 2; j <= n; ++j) {
      g(i, j - 1) = chart_grad.at(i, j);
      any = any || g(i, j - 1) != 0.0;
    }

  ScorerGradients out;
  out.params = params.zeros_like();
  out.params.embeddings.reset();
  out.input_grad = Matrix(n, inputs.cols);
  if (!any) return out;

  // dW = a^T g b ; gb = g b (n x d), gta = g^T a (n x d).
  Matrix gb(n, d), gta(n, d);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      const double w = g(i, k);
      if (w == 0.0) continue;
      for (int q = 0; q < d; ++q) {
        gb(i, q) += w * b(k, q);
        gta(k, q) += w * a(i, q);
      }
    }
  Matrix& dW = out.params.biaffine;
  for (int i = 0; i < n; ++i)
    for (int p = 0; p < d; ++p) {
      const double ap = a(i, p);
      if (ap == 0.0) continue;
      auto row = dW.row(p);
      for (int q = 0; q < d; ++q) row[q] += ap * gb(i, q);
    }

  // da_i = W gb_i ; db_k = W^T gta_k. Only the first `hidden` entries matter.
  Matrix dl(n, hidden), dr(n, hidden);
  for (int t = 0; t < n; ++t)
    for (int p = 0; p < hidden; ++p) {
      const auto w = params.biaffine.row(p);
      double acc = 0.0;
      for (int q = 0; q < d; ++q) acc += w[q] * gb(t, q);
      dl(t, p) = acc;
    }
  for (int t = 0; t < n; ++t)
    for (int p = 0; p < d; ++p) {
      const double s = gta(t, p);
      if (s == 0.0) continue;
      const auto w = params.biaffine.row(p);
      for (int q = 0; q < hidden; ++q) dr(t, q) += s * w[q];
    }

  mlp_backward(params.left, params.leaky_slope, inputs, reprs.left_pre, dl, out.params.left,
               out.input_grad);
  mlp_backward(params.right, params.leaky_slope, inputs, reprs.right_pre, dr, out.params.right,
               out.input_grad);
  return out;
}

void scatter_embedding_grad(const Matrix& input_grad, std::span<const int> token_ids,
                            Matrix& embedding_grad) {
  for (std::size_t t = 0; t < token_ids.size(); ++t) {
    const auto src = input_grad.row(static_cast<int>(t));
    auto dst = embedding_grad.row(token_ids[t]);
    for (int c = 0; c < input_grad.cols; ++c) dst[c] += src[c];
  }
}

}  // namespace brackind
