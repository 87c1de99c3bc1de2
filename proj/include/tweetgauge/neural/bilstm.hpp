#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tweetgauge/math.hpp"
#include "tweetgauge/neural/training.hpp"
#include "tweetgauge/rng.hpp"

namespace tweetgauge {

template <class Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Parameters of one LSTM cell. Gate blocks are stacked in the order
/// input, forget, output, candidate: W is 4H x D, U is 4H x H, b is 4H.
template <class Scalar>
struct LstmCellRef {
  Eigen::Ref<const MatrixX<Scalar>> input_weights;
  Eigen::Ref<const MatrixX<Scalar>> recurrent_weights;
  Eigen::Ref<const VectorX<Scalar>> bias;

  Eigen::Index hidden_size() const { return recurrent_weights.cols(); }
  Eigen::Index input_size() const { return input_weights.cols(); }
};

/// Gate activations and new state of one step; columns are batch members.
template <class Scalar>
struct LstmStep {
  MatrixX<Scalar> input_gate;
  MatrixX<Scalar> forget_gate;
  MatrixX<Scalar> output_gate;
  MatrixX<Scalar> candidate;
  MatrixX<Scalar> cell;
  MatrixX<Scalar> cell_tanh;
  MatrixX<Scalar> hidden;
};

template <class Scalar>
LstmStep<Scalar> lstm_forward_step(const Eigen::Ref<const MatrixX<Scalar>>& x,
                                   const Eigen::Ref<const MatrixX<Scalar>>& h_prev,
                                   const Eigen::Ref<const MatrixX<Scalar>>& c_prev, const LstmCellRef<Scalar>& cell) {
  const Eigen::Index h = cell.hidden_size();
  if (cell.input_weights.rows() != 4 * h || cell.bias.size() != 4 * h || cell.recurrent_weights.rows() != 4 * h ||
      x.rows() != cell.input_size() || h_prev.rows() != h || c_prev.rows() != h || h_prev.cols() != x.cols() ||
      c_prev.cols() != x.cols()) {
    throw std::invalid_argument("lstm step: inconsistent shapes");
  }
  MatrixX<Scalar> pre = cell.input_weights * x;
  pre.noalias() += cell.recurrent_weights * h_prev;
  pre.colwise() += cell.bias;

  LstmStep<Scalar> step;
  step.input_gate = sigmoid(pre.topRows(h).array()).matrix();
  step.forget_gate = sigmoid(pre.middleRows(h, h).array()).matrix();
  step.output_gate = sigmoid(pre.middleRows(2 * h, h).array()).matrix();
  step.candidate = pre.bottomRows(h).array().tanh().matrix();
  step.cell = (step.forget_gate.array() * c_prev.array() + step.input_gate.array() * step.candidate.array()).matrix();
  step.cell_tanh = step.cell.array().tanh().matrix();
  step.hidden = (step.output_gate.array() * step.cell_tanh.array()).matrix();
  return step;
}

template <class Scalar>
struct LstmState {
  MatrixX<Scalar> hidden;
  MatrixX<Scalar> cell;
};

/// i = s(W_i x + U_i h + b_i), f, o likewise, g = tanh(W_g x + U_g h + b_g),
/// c = f*c_prev + i*g, h = o*tanh(c). Accepts one column per batch member.
template <class Scalar>
LstmState<Scalar> lstm_cell_step(const Eigen::Ref<const MatrixX<Scalar>>& x,
                                 const Eigen::Ref<const MatrixX<Scalar>>& h_prev,
                                 const Eigen::Ref<const MatrixX<Scalar>>& c_prev, const LstmCellRef<Scalar>& cell) {
  auto step = lstm_forward_step<Scalar>(x, h_prev, c_prev, cell);
  return {std::move(step.hidden), std::move(step.cell)};
}

/// Equal-length sequences laid out per time step: steps[t] is D x B.
struct SequenceBatch {
  std::vector<Eigen::MatrixXd> steps;
  Eigen::RowVectorXd targets;

  Eigen::Index size() const { return targets.size(); }
  Eigen::Index length() const { return static_cast<Eigen::Index>(steps.size()); }
};

/// Members must share the same length after truncation to `max_length`.
SequenceBatch make_sequence_batch(std::span<const Eigen::MatrixXf> sequences, std::span<const int> labels,
                                  std::span<const std::size_t> members, std::size_t max_length);

enum class Direction { forward, backward };

/// Bidirectional LSTM with a sigmoid output over [h_forward; h_backward].
///
/// All parameters live in one flat vector: forward cell (W, U, b), backward
/// cell (W, U, b), output weights (2H), output bias. Matrices are column-major.
class BiLstmClassifier {
 public:
  BiLstmClassifier() = default;
  /// Zero parameters.
  BiLstmClassifier(Eigen::Index input_dim, Eigen::Index hidden_size, std::size_t max_sequence_length = 32);
  /// Every parameter from uniform(-1/sqrt(H), 1/sqrt(H)).
  static BiLstmClassifier random_uniform(Eigen::Index input_dim, Eigen::Index hidden_size,
                                         std::size_t max_sequence_length, Rng& rng);

  Eigen::Index input_dim() const { return input_dim_; }
  Eigen::Index hidden_size() const { return hidden_; }
  std::size_t max_sequence_length() const { return max_length_; }
  Eigen::Index parameter_count() const { return parameters_.size(); }

  Eigen::VectorXd& parameters() { return parameters_; }
  const Eigen::VectorXd& parameters() const { return parameters_; }

  LstmCellRef<double> cell(Direction direction) const;
  Eigen::Map<Eigen::MatrixXd> input_weights(Direction direction);
  Eigen::Map<Eigen::MatrixXd> recurrent_weights(Direction direction);
  Eigen::Map<Eigen::VectorXd> bias(Direction direction);
  Eigen::Map<Eigen::VectorXd> output_weights();
  Eigen::Map<const Eigen::VectorXd> output_weights() const;
  double& output_bias() { return parameters_[parameters_.size() - 1]; }
  double output_bias() const { return parameters_[parameters_.size() - 1]; }

  /// Sequence columns are token vectors; only the first
  /// max_sequence_length are read. Throws DataError when empty.
  template <class Derived>
  double score(const Eigen::MatrixBase<Derived>& sequence) const {
    return sigmoid(logit(sequence));
  }

  template <class Derived>
  double logit(const Eigen::MatrixBase<Derived>& sequence) const {
    const Eigen::Index length = std::min<Eigen::Index>(sequence.cols(), static_cast<Eigen::Index>(max_length_));
    if (length == 0) throw DataError("bilstm: empty sequence");
    if (sequence.rows() != input_dim_) {
      throw DataError("bilstm: token dimension " + std::to_string(sequence.rows()) + " does not match model " +
                      std::to_string(input_dim_));
    }
    SequenceBatch batch;
    for (Eigen::Index t = 0; t < length; ++t) batch.steps.emplace_back(sequence.col(t).template cast<double>());
    batch.targets = Eigen::RowVectorXd::Zero(1);
    return logits(batch)[0];
  }

  Eigen::RowVectorXd logits(const SequenceBatch& batch) const;

  /// Mean binary cross-entropy over the batch.
  double loss(const SequenceBatch& batch) const;
  /// Loss plus its gradient by backpropagation through time in both
  /// directions; `gradient` follows the parameter layout.
  double loss_and_gradient(const SequenceBatch& batch, Eigen::VectorXd& gradient) const;

  void save(std::ostream& out) const;
  static BiLstmClassifier load(std::istream& in);

  bool operator==(const BiLstmClassifier& other) const {
    return input_dim_ == other.input_dim_ && hidden_ == other.hidden_ && max_length_ == other.max_length_ &&
           parameters_ == other.parameters_;
  }

 private:
  Eigen::Index direction_offset(Direction direction) const;
  Eigen::Index direction_block() const;

  Eigen::Index input_dim_ = 0;
  Eigen::Index hidden_ = 0;
  std::size_t max_length_ = 32;
  Eigen::VectorXd parameters_;
};

struct BiLstmShape {
  Eigen::Index hidden_size = 128;
  std::size_t max_sequence_length = 32;
};

struct BiLstmTraining {
  BiLstmClassifier model;
  TrainReport report;
};

/// Mini-batch gradient descent over length-bucketed batches with global
/// gradient-norm clipping at 5, early stopping as in train_softmax.
BiLstmTraining train_bilstm(std::span<const Eigen::MatrixXf> sequences, std::span<const int> labels,
                            const TrainConfig& config, const BiLstmShape& shape = {});

/// Mean loss over a whole dataset, evaluated in length-grouped chunks.
double bilstm_dataset_loss(const BiLstmClassifier& model, std::span<const Eigen::MatrixXf> sequences,
                           std::span<const int> labels);

inline constexpr double kGradientClipNorm = 5.0;

}  // namespace tweetgauge
