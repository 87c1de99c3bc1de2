#include "tweetgauge/neural/bilstm.hpp"

#include <cmath>
#include <map>

#include "serial.hpp"
#include "tweetgauge/corpus.hpp"
#include "tweetgauge/error.hpp"

namespace tweetgauge {

SequenceBatch make_sequence_batch(std::span<const Eigen::MatrixXf> sequences, std::span<const int> labels,
                                  std::span<const std::size_t> members, std::size_t max_length) {
  if (members.empty()) throw std::invalid_argument("empty sequence batch");
  const auto length_of = [&](std::size_t i) {
    return std::min<Eigen::Index>(sequences[i].cols(), static_cast<Eigen::Index>(max_length));
  };
  const Eigen::Index length = length_of(members.front());
  const Eigen::Index dim = sequences[members.front()].rows();
  if (length == 0) throw DataError("bilstm: empty sequence");

  SequenceBatch batch;
  const auto size = static_cast<Eigen::Index>(members.size());
  batch.steps.assign(static_cast<std::size_t>(length), Eigen::MatrixXd(dim, size));
  batch.targets.resize(size);
  for (Eigen::Index b = 0; b < size; ++b) {
    const std::size_t i = members[static_cast<std::size_t>(b)];
    if (length_of(i) != length || sequences[i].rows() != dim) {
      throw std::invalid_argument("sequence batch members differ in shape");
    }
    for (Eigen::Index t = 0; t < length; ++t) {
      batch.steps[static_cast<std::size_t>(t)].col(b) = sequences[i].col(t).cast<double>();
    }
    batch.targets[b] = labels[i];
  }
  return batch;
}

BiLstmClassifier::BiLstmClassifier(Eigen::Index input_dim, Eigen::Index hidden_size, std::size_t max_sequence_length)
    : input_dim_(input_dim), hidden_(hidden_size), max_length_(max_sequence_length) {
  if (input_dim < 1 || hidden_size < 1 || max_sequence_length < 1) {
    throw std::invalid_argument("bilstm dimensions must be positive");
  }
  parameters_ = Eigen::VectorXd::Zero(2 * direction_block() + 2 * hidden_ + 1);
}

BiLstmClassifier BiLstmClassifier::random_uniform(Eigen::Index input_dim, Eigen::Index hidden_size,
                                                  std::size_t max_sequence_length, Rng& rng) {
  BiLstmClassifier model(input_dim, hidden_size, max_sequence_length);
  const double half_width = 1.0 / std::sqrt(static_cast<double>(hidden_size));
  for (auto& p : model.parameters_) p = rng.uniform(-half_width, half_width);
  return model;
}

Eigen::Index BiLstmClassifier::direction_block() const {
  return 4 * hidden_ * input_dim_ + 4 * hidden_ * hidden_ + 4 * hidden_;
}

Eigen::Index BiLstmClassifier::direction_offset(Direction direction) const {
  return direction == Direction::forward ? 0 : direction_block();
}

Eigen::Map<Eigen::MatrixXd> BiLstmClassifier::input_weights(Direction direction) {
  return {parameters_.data() + direction_offset(direction), 4 * hidden_, input_dim_};
}

Eigen::Map<Eigen::MatrixXd> BiLstmClassifier::recurrent_weights(Direction direction) {
  return {parameters_.data() + direction_offset(direction) + 4 * hidden_ * input_dim_, 4 * hidden_, hidden_};
}

Eigen::Map<Eigen::VectorXd> BiLstmClassifier::bias(Direction direction) {
  return {parameters_.data() + direction_offset(direction) + 4 * hidden_ * (input_dim_ + hidden_), 4 * hidden_};
}

Eigen::Map<Eigen::VectorXd> BiLstmClassifier::output_weights() {
  return {parameters_.data() + 2 * direction_block(), 2 * hidden_};
}

Eigen::Map<const Eigen::VectorXd> BiLstmClassifier::output_weights() const {
  return {parameters_.data() + 2 * direction_block(), 2 * hidden_};
}

LstmCellRef<double> BiLstmClassifier::cell(Direction direction) const {
  const double* base = parameters_.data() + direction_offset(direction);
  const Eigen::Index h4 = 4 * hidden_;
  return {Eigen::Map<const Eigen::MatrixXd>(base, h4, input_dim_),
          Eigen::Map<const Eigen::MatrixXd>(base + h4 * input_dim_, h4, hidden_),
          Eigen::Map<const Eigen::VectorXd>(base + h4 * (input_dim_ + hidden_), h4)};
}

namespace {

struct DirectionTrace {
  std::vector<LstmStep<double>> steps;  // in processing order
};

/// Runs one direction over the batch; the backward direction visits time
/// steps from last to first.
DirectionTrace run_direction(const SequenceBatch& batch, const LstmCellRef<double>& cell, Direction direction) {
  const Eigen::Index hidden = cell.hidden_size();
  const Eigen::MatrixXd zeros = Eigen::MatrixXd::Zero(hidden, batch.size());
  DirectionTrace trace;
  trace.steps.reserve(batch.steps.size());
  const std::size_t length = batch.steps.size();
  for (std::size_t s = 0; s < length; ++s) {
    const std::size_t t = direction == Direction::forward ? s : length - 1 - s;
    const Eigen::MatrixXd& h_prev = s == 0 ? zeros : trace.steps.back().hidden;
    const Eigen::MatrixXd& c_prev = s == 0 ? zeros : trace.steps.back().cell;
    trace.steps.push_back(lstm_forward_step<double>(batch.steps[t], h_prev, c_prev, cell));
  }
  return trace;
}

/// Accumulates one direction's parameter gradient given dL/dh at its final
/// step. `grad` points at that direction's block in the flat gradient.
void backprop_direction(const SequenceBatch& batch, const LstmCellRef<double>& cell, Direction direction,
                        const DirectionTrace& trace, Eigen::MatrixXd d_hidden, double* grad) {
  const Eigen::Index hidden = cell.hidden_size();
  const Eigen::Index input = cell.input_size();
  const Eigen::Index size = batch.size();
  Eigen::Map<Eigen::MatrixXd> d_input_weights(grad, 4 * hidden, input);
  Eigen::Map<Eigen::MatrixXd> d_recurrent_weights(grad + 4 * hidden * input, 4 * hidden, hidden);
  Eigen::Map<Eigen::VectorXd> d_bias(grad + 4 * hidden * (input + hidden), 4 * hidden);

  const Eigen::MatrixXd zeros = Eigen::MatrixXd::Zero(hidden, size);
  Eigen::MatrixXd d_cell = Eigen::MatrixXd::Zero(hidden, size);
  Eigen::MatrixXd d_pre(4 * hidden, size);
  const std::size_t length = trace.steps.size();

  for (std::size_t s = length; s-- > 0;) {
    const auto& step = trace.steps[s];
    const std::size_t t = direction == Direction::forward ? s : length - 1 - s;
    const Eigen::MatrixXd& h_prev = s == 0 ? zeros : trace.steps[s - 1].hidden;
    const Eigen::MatrixXd& c_prev = s == 0 ? zeros : trace.steps[s - 1].cell;

    const auto i = step.input_gate.array();
    const auto f = step.forget_gate.array();
    const auto o = step.output_gate.array();
    const auto g = step.candidate.array();
    const auto tc = step.cell_tanh.array();
    const auto dh = d_hidden.array();

    d_cell.array() += dh * o * (1.0 - tc.square());
    const auto dc = d_cell.array();
    d_pre.topRows(hidden).array() = dc * g * i * (1.0 - i);
    d_pre.middleRows(hidden, hidden).array() = dc * c_prev.array() * f * (1.0 - f);
    d_pre.middleRows(2 * hidden, hidden).array() = dh * tc * o * (1.0 - o);
    d_pre.bottomRows(hidden).array() = dc * i * (1.0 - g.square());

    d_input_weights.noalias() += d_pre * batch.steps[t].transpose();
    d_recurrent_weights.noalias() += d_pre * h_prev.transpose();
    d_bias += d_pre.rowwise().sum();

    d_hidden.noalias() = cell.recurrent_weights.transpose() * d_pre;
    d_cell.array() *= f;
  }
}

void check_batch(const SequenceBatch& batch, Eigen::Index input_dim) {
  if (batch.steps.empty() || batch.size() == 0) throw DataError("bilstm: empty batch");
  for (const auto& step : batch.steps) {
    if (step.rows() != input_dim || step.cols() != batch.size()) {
      throw DataError("bilstm: batch step has shape " + std::to_string(step.rows()) + "x" +
                      std::to_string(step.cols()) + ", expected " + std::to_string(input_dim) + "x" +
                      std::to_string(batch.size()));
    }
  }
}

}  // namespace

Eigen::RowVectorXd BiLstmClassifier::logits(const SequenceBatch& batch) const {
  check_batch(batch, input_dim_);
  const auto forward = run_direction(batch, cell(Direction::forward), Direction::forward);
  const auto backward = run_direction(batch, cell(Direction::backward), Direction::backward);
  const auto w = output_weights();
  Eigen::RowVectorXd z = w.head(hidden_).transpose() * forward.steps.back().hidden;
  z.noalias() += w.tail(hidden_).transpose() * backward.steps.back().hidden;
  z.array() += output_bias();
  return z;
}

double BiLstmClassifier::loss(const SequenceBatch& batch) const {
  const Eigen::RowVectorXd z = logits(batch);
  double total = 0.0;
  for (Eigen::Index b = 0; b < z.size(); ++b) total += binary_cross_entropy_from_logit(z[b], batch.targets[b]);
  return total / static_cast<double>(z.size());
}

double BiLstmClassifier::loss_and_gradient(const SequenceBatch& batch, Eigen::VectorXd& gradient) const {
  check_batch(batch, input_dim_);
  const auto forward_cell = cell(Direction::forward);
  const auto backward_cell = cell(Direction::backward);
  const auto forward = run_direction(batch, forward_cell, Direction::forward);
  const auto backward = run_direction(batch, backward_cell, Direction::backward);
  const auto w = output_weights();
  const Eigen::MatrixXd& h_forward = forward.steps.back().hidden;
  const Eigen::MatrixXd& h_backward = backward.steps.back().hidden;

  Eigen::RowVectorXd z = w.head(hidden_).transpose() * h_forward;
  z.noalias() += w.tail(hidden_).transpose() * h_backward;
  z.array() += output_bias();

  const auto size = static_cast<double>(batch.size());
  double total = 0.0;
  Eigen::RowVectorXd d_logit(batch.size());
  for (Eigen::Index b = 0; b < batch.size(); ++b) {
    total += binary_cross_entropy_from_logit(z[b], batch.targets[b]);
    d_logit[b] = (sigmoid(z[b]) - batch.targets[b]) / size;
  }

  gradient = Eigen::VectorXd::Zero(parameters_.size());
  const Eigen::Index out = 2 * direction_block();
  gradient.segment(out, hidden_).noalias() = h_forward * d_logit.transpose();
  gradient.segment(out + hidden_, hidden_).noalias() = h_backward * d_logit.transpose();
  gradient[gradient.size() - 1] = d_logit.sum();

  backprop_direction(batch, forward_cell, Direction::forward, forward, w.head(hidden_) * d_logit,
                     gradient.data() + direction_offset(Direction::forward));
  backprop_direction(batch, backward_cell, Direction::backward, backward, w.tail(hidden_) * d_logit,
                     gradient.data() + direction_offset(Direction::backward));
  return total / size;
}

void BiLstmClassifier::save(std::ostream& out) const {
  out << "bilstm v1\n"
      << "input_dim " << input_dim_ << '\n'
      << "hidden_size " << hidden_ << '\n'
      << "max_sequence_length " << max_length_ << '\n'
      << "gate_order input,forget,output,candidate\n"
      << "parameters " << parameters_.size() << '\n';
  // Each matrix block row-major, in layout order.
  auto write_matrix = [&](const Eigen::Ref<const Eigen::MatrixXd>& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) out << format_double(m(r, c)) << '\n';
    }
  };
  for (Direction d : {Direction::forward, Direction::backward}) {
    const auto c = cell(d);
    write_matrix(c.input_weights);
    write_matrix(c.recurrent_weights);
    serial::write_values(out, c.bias);
  }
  serial::write_values(out, output_weights());
  out << format_double(output_bias()) << '\n';
}

BiLstmClassifier BiLstmClassifier::load(std::istream& in) {
  serial::expect_line(in, "bilstm v1");
  const auto input_dim = static_cast<Eigen::Index>(serial::read_uint(in, "input_dim"));
  const auto hidden = static_cast<Eigen::Index>(serial::read_uint(in, "hidden_size"));
  const auto max_length = serial::read_uint(in, "max_sequence_length");
  if (serial::read_field(in, "gate_order") != "input,forget,output,candidate") {
    throw DataError("checkpoint: unsupported bilstm gate order");
  }
  if (input_dim < 1 || hidden < 1 || max_length < 1) throw DataError("checkpoint: bilstm dimensions must be positive");
  BiLstmClassifier model(input_dim, hidden, max_length);
  if (serial::read_uint(in, "parameters") != static_cast<std::uint64_t>(model.parameter_count())) {
    throw DataError("checkpoint: bilstm parameter count does not match its shape");
  }
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  auto read_matrix = [&](Eigen::Map<Eigen::MatrixXd> target) {
    const Eigen::VectorXd values = serial::read_values(in, target.size(), "bilstm weights");
    target = Eigen::Map<const RowMajor>(values.data(), target.rows(), target.cols());
  };
  for (Direction d : {Direction::forward, Direction::backward}) {
    read_matrix(model.input_weights(d));
    read_matrix(model.recurrent_weights(d));
    model.bias(d) = serial::read_values(in, 4 * hidden, "bilstm bias");
  }
  model.output_weights() = serial::read_values(in, 2 * hidden, "bilstm output weights");
  model.output_bias() = serial::read_values(in, 1, "bilstm output bias")[0];
  if (!model.parameters_.allFinite()) throw DataError("checkpoint: bilstm parameters are not finite");
  return model;
}

namespace {

std::vector<std::size_t> truncated_lengths(std::span<const Eigen::MatrixXf> sequences,
                                           std::span<const std::size_t> members, std::size_t max_length) {
  std::vector<std::size_t> lengths;
  lengths.reserve(members.size());
  for (auto i : members) lengths.push_back(std::min<std::size_t>(static_cast<std::size_t>(sequences[i].cols()), max_length));
  return lengths;
}

constexpr std::size_t kEvaluationChunk = 256;

double subset_loss(const BiLstmClassifier& model, std::span<const Eigen::MatrixXf> sequences,
                   std::span<const int> labels, std::span<const std::size_t> members) {
  const auto lengths = truncated_lengths(sequences, members, model.max_sequence_length());
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t k = 0; k < members.size(); ++k) groups[lengths[k]].push_back(members[k]);
  double total = 0.0;
  for (const auto& [length, group] : groups) {
    for (std::size_t start = 0; start < group.size(); start += kEvaluationChunk) {
      const std::size_t end = std::min(group.size(), start + kEvaluationChunk);
      const std::span<const std::size_t> chunk(group.data() + start, end - start);
      const auto batch = make_sequence_batch(sequences, labels, chunk, model.max_sequence_length());
      total += model.loss(batch) * static_cast<double>(chunk.size());
    }
  }
  return total / static_cast<double>(members.size());
}

class BiLstmSession {
 public:
  BiLstmSession(BiLstmClassifier& model, std::span<const Eigen::MatrixXf> sequences, std::span<const int> labels,
                SplitIndices split, const TrainConfig& config)
      : model_(model), sequences_(sequences), labels_(labels), split_(std::move(split)), config_(config) {
    train_lengths_ = truncated_lengths(sequences_, split_.train, model_.max_sequence_length());
  }

  double train_epoch(Rng& rng) {
    double total = 0.0;
    Eigen::VectorXd gradient;
    std::vector<std::size_t> members;
    for (const auto& batch : length_bucketed_batches(train_lengths_, config_.batch_size, rng)) {
      members.clear();
      for (auto k : batch) members.push_back(split_.train[k]);
      const auto data = make_sequence_batch(sequences_, labels_, members, model_.max_sequence_length());
      const double loss = model_.loss_and_gradient(data, gradient);
      total += loss * static_cast<double>(members.size());
      const double norm = gradient.norm();
      if (norm > kGradientClipNorm) gradient *= kGradientClipNorm / norm;
      model_.parameters() -= config_.learning_rate * gradient;
      if (!model_.parameters().allFinite()) {
        throw DivergenceError("bilstm parameters became non-finite; lower the learning rate");
      }
    }
    return total / static_cast<double>(split_.train.size());
  }

  double training_loss() const { return subset_loss(model_, sequences_, labels_, split_.train); }
  double validation_loss() const { return subset_loss(model_, sequences_, labels_, split_.validation); }
  Eigen::VectorXd& parameters() { return model_.parameters(); }

 private:
  BiLstmClassifier& model_;
  std::span<const Eigen::MatrixXf> sequences_;
  std::span<const int> labels_;
  SplitIndices split_;
  TrainConfig config_;
  std::vector<std::size_t> train_lengths_;
};

static_assert(EpochTrainable<BiLstmSession>);

}  // namespace

double bilstm_dataset_loss(const BiLstmClassifier& model, std::span<const Eigen::MatrixXf> sequences,
                           std::span<const int> labels) {
  std::vector<std::size_t> all(sequences.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return subset_loss(model, sequences, labels, all);
}

BiLstmTraining train_bilstm(std::span<const Eigen::MatrixXf> sequences, std::span<const int> labels,
                            const TrainConfig& config, const BiLstmShape& shape) {
  config.validate();
  if (sequences.empty()) throw DataError("cannot train bilstm on an empty dataset");
  if (sequences.size() != labels.size()) throw DataError("one label per sequence required");
  const Eigen::Index dim = sequences.front().rows();
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    if (sequences[i].cols() == 0) throw DataError("bilstm: sequence " + std::to_string(i) + " is empty");
    if (sequences[i].rows() != dim) throw DataError("bilstm: sequences have inconsistent token dimensions");
    if (labels[i] != 0 && labels[i] != 1) throw DataError("labels must be 0 or 1");
  }

  Rng init_rng(derive_seed(config.seed, 0));
  BiLstmTraining result{
      BiLstmClassifier::random_uniform(dim, shape.hidden_size, shape.max_sequence_length, init_rng), {}};
  BiLstmSession session(result.model, sequences, labels,
                        stratified_split(labels, config.validation_fraction, config.seed), config);
  result.report = run_early_stopping(session, config);
  return result;
}

}  // namespace tweetgauge
