// Copyright 2026 The unlearnlab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Toy conditional autoregressive model.
//
// For answer position i (1-based) the model pools the token embeddings of
// the question followed by the teacher-forced prefix y_{<i}:
//
//   m_i    = mean(E[t] for t in question ++ prefix)
//   h_i    = tanh(P z + A m_i + U[i] + b)
//   logits = O h_i
//   p      = softmax(logits)
//
// where z is the image feature. The id vocab_size - 1 is the reserved
// end-of-answer token.

#ifndef UNLEARNLAB_MODEL_H_
#define UNLEARNLAB_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace unlearnlab {

using TokenId = std::int32_t;
using TokenSeq = std::vector<TokenId>;
using TripleId = std::int64_t;

struct ModelConfig {
  int vocab_size = 64;
  int img_dim = 8;
  int hidden_dim = 16;
  int max_positions = 24;

  // Throws ValidationError if any field is < 1.
  void Validate() const;
  TokenId end_token() const { return vocab_size - 1; }

  bool operator==(const ModelConfig&) const = default;
};

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// The six named tensors shared by parameters, gradients and optimizer
// moments. Field names match the checkpoint format.
struct ParamTensors {
  Matrix E;  // [vocab_size x hidden_dim] token embeddings
  Matrix P;  // [hidden_dim x img_dim] visual projector
  Matrix U;  // [max_positions x hidden_dim] answer-position embeddings
  Matrix A;  // [hidden_dim x hidden_dim] context mixer
  Matrix O;  // [vocab_size x hidden_dim] output projection
  std::vector<double> b;  // [hidden_dim]

  ParamTensors() = default;
  explicit ParamTensors(const ModelConfig& config);

  // Calls fn(name, span) for each tensor in the fixed order E, P, U, A, O, b.
  template <typename Fn>
  void ForEach(Fn&& fn) {
    fn(std::string_view("E"), std::span<double>(E.values()));
    fn(std::string_view("P"), std::span<double>(P.values()));
    fn(std::string_view("U"), std::span<double>(U.values()));
    fn(std::string_view("A"), std::span<double>(A.values()));
    fn(std::string_view("O"), std::span<double>(O.values()));
    fn(std::string_view("b"), std::span<double>(b));
  }
  template <typename Fn>
  void ForEach(Fn&& fn) const {
    fn(std::string_view("E"), std::span<const double>(E.values()));
    fn(std::string_view("P"), std::span<const double>(P.values()));
    fn(std::string_view("U"), std::span<const double>(U.values()));
    fn(std::string_view("A"), std::span<const double>(A.values()));
    fn(std::string_view("O"), std::span<const double>(O.values()));
    fn(std::string_view("b"), std::span<const double>(b));
  }

  std::size_t NumValues() const;
  // Flattened copy in ForEach order.
  std::vector<double> Flatten() const;
  // Mutable view of the i-th value in ForEach order.
  double& At(std::size_t flat_index);

  bool operator==(const ParamTensors&) const = default;
};

// Learnable parameters theta. Instances house the model being unlearned,
// the fine-tuned full model and the pre-fine-tuning origin model.
struct ModelParams : ParamTensors {
  ModelConfig config;

  ModelParams() = default;
  explicit ModelParams(const ModelConfig& c) : ParamTensors(c), config(c) {}

  bool operator==(const ModelParams&) const = default;
};

// d loss / d theta, shape-isomorphic to the ModelParams it differentiates.
struct GradientVector : ParamTensors {
  GradientVector() = default;
  explicit GradientVector(const ModelConfig& c) : ParamTensors(c) {}

  // this += scale * other
  void AddScaled(const GradientVector& other, double scale);
  void Scale(double factor);
  double MaxAbsDiff(const GradientVector& other) const;
  double MaxAbs() const;
};

enum class ImageCategory { kPersona, kPeople, kPets, kScene, kPattern };

std::string_view ImageCategoryName(ImageCategory category);
ImageCategory ParseImageCategory(std::string_view name);

struct ImageFeature {
  std::vector<double> z;
  ImageCategory category = ImageCategory::kPersona;
};

// One visual-question-answer item.
struct Triple {
  TripleId id = 0;
  int persona_id = -1;
  ImageFeature image;
  TokenSeq question;
  TokenSeq answer;
  // Ground-truth key slots; empty when unknown.
  std::vector<bool> key_mask;
};

// Probability simplex over the vocabulary with its log-probabilities.
struct TokenDistribution {
  std::vector<double> probs;
  std::vector<double> log_probs;

  // Numerically stable softmax via max subtraction.
  static TokenDistribution FromLogits(std::span<const double> logits);
  // Takes probabilities as given; zero entries get log_probs = -inf.
  static TokenDistribution FromProbs(std::vector<double> probs);
  static TokenDistribution OneHot(int vocab_size, TokenId token);

  std::size_t size() const { return probs.size(); }
  // Throws SimplexViolation unless entries are non-negative and sum to 1
  // within `tolerance`.
  void ValidateSimplex(double tolerance) const;
};

// Every entry i.i.d. uniform on [-0.1, 0.1] from a seeded mt19937_64.
ModelParams InitParams(const ModelConfig& config, std::uint64_t seed);

// Intermediate values of one forward pass, kept for backpropagation.
struct PositionActivations {
  int position = 0;  // 1-based
  TokenSeq context;  // question ++ prefix
  std::vector<double> mean_embedding;
  std::vector<double> hidden;
  TokenDistribution dist;
};

// Forward pass at a single position without argument validation beyond
// what is needed for memory safety. Most callers want ForwardTokenDist.
PositionActivations ForwardPosition(const ModelParams& params,
                                    const ImageFeature& image,
                                    std::span<const TokenId> question,
                                    std::span<const TokenId> prefix,
                                    int position);

// Accumulates into `grad` the gradient of a scalar whose derivative with
// respect to the logits at this position is `logit_grad`.
void BackwardPosition(const ModelParams& params, const ImageFeature& image,
                      const PositionActivations& act,
                      std::span<const double> logit_grad,
                      GradientVector& grad);

// p_theta(. | image, question, prefix) at 1-based `position`. Requires
// prefix.size() == position - 1.
TokenDistribution ForwardTokenDist(const ModelParams& params,
                                   const ImageFeature& image,
                                   std::span<const TokenId> question,
                                   std::span<const TokenId> prefix,
                                   int position);

// Teacher-forced activations for every answer position of `answer`.
std::vector<PositionActivations> ForwardAnswer(const ModelParams& params,
                                               const ImageFeature& image,
                                               std::span<const TokenId> question,
                                               std::span<const TokenId> answer);

// Throws ValidationError if the triple does not fit the config.
void ValidateTriple(const ModelConfig& config, const Triple& triple);

// sum_i log p_theta(y_i | I, x, i), summed from log-probabilities.
double SequenceLogProb(const ModelParams& params, const ImageFeature& image,
                       std::span<const TokenId> question,
                       std::span<const TokenId> answer);
double AnswerLogProb(const ModelParams& params, const Triple& triple);

// -(1/|D|) sum_s AnswerLogProb(s).
double NllLoss(const ModelParams& params, std::span<const Triple> data);

// Argmax decoding, ties to the lowest id; stops after emitting the end
// token or after max_len tokens.
TokenSeq GreedyDecode(const ModelParams& params, const ImageFeature& image,
                      std::span<const TokenId> question, int max_len);

}  // namespace unlearnlab

#endif  // UNLEARNLAB_MODEL_H_
