#include "tweetgauge/neural/softmax.hpp"

#include <cmath>

#include "serial.hpp"
#include "tweetgauge/corpus.hpp"
#include "tweetgauge/error.hpp"

namespace tweetgauge {

SoftmaxClassifier::SoftmaxClassifier(Eigen::Index input_dim)
    : input_dim_(input_dim), parameters_(Eigen::VectorXd::Zero(kLabels * input_dim)) {
  if (input_dim < 1) throw std::invalid_argument("softmax input dimension must be positive");
}

SoftmaxClassifier SoftmaxClassifier::random_uniform(Eigen::Index input_dim, double half_width, Rng& rng) {
  SoftmaxClassifier model(input_dim);
  for (auto& w : model.parameters_) w = rng.uniform(-half_width, half_width);
  return model;
}

Eigen::Vector2d SoftmaxClassifier::probabilities(const Eigen::Ref<const Eigen::VectorXd>& v) const {
  return softmax_probability(v, weights());
}

namespace {

void check_batch(const Eigen::Ref<const Eigen::MatrixXd>& inputs, std::span<const int> labels, Eigen::Index dim) {
  if (inputs.rows() != dim) {
    throw DataError("softmax input dimension " + std::to_string(inputs.rows()) + " does not match model dimension " +
                    std::to_string(dim));
  }
  if (inputs.cols() == 0 || static_cast<std::size_t>(inputs.cols()) != labels.size()) {
    throw DataError("softmax batch needs one label per column");
  }
}

/// Column-wise log-softmax of a 2 x B logit matrix.
Eigen::MatrixXd log_softmax(const Eigen::MatrixXd& logits) {
  const Eigen::RowVectorXd peak = logits.colwise().maxCoeff();
  Eigen::MatrixXd shifted = logits.rowwise() - peak;
  const Eigen::RowVectorXd log_sum = shifted.array().exp().colwise().sum().log().matrix();
  shifted.rowwise() -= log_sum;
  return shifted;
}

Eigen::Index label_row(int label) { return label == 1 ? SoftmaxClassifier::kPositiveRow : 1; }

}  // namespace

double SoftmaxClassifier::loss(const Eigen::Ref<const Eigen::MatrixXd>& inputs, std::span<const int> labels) const {
  check_batch(inputs, labels, input_dim_);
  const Eigen::MatrixXd log_p = log_softmax(weights() * inputs);
  double total = 0.0;
  for (Eigen::Index b = 0; b < inputs.cols(); ++b) total -= log_p(label_row(labels[static_cast<std::size_t>(b)]), b);
  return total / static_cast<double>(inputs.cols());
}

double SoftmaxClassifier::loss_and_gradient(const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                                            std::span<const int> labels, Eigen::VectorXd& gradient) const {
  check_batch(inputs, labels, input_dim_);
  const Eigen::Index batch = inputs.cols();
  const Eigen::MatrixXd log_p = log_softmax(weights() * inputs);
  Eigen::MatrixXd residual = log_p.array().exp().matrix();  // P - onehot(y)
  double total = 0.0;
  for (Eigen::Index b = 0; b < batch; ++b) {
    const Eigen::Index row = label_row(labels[static_cast<std::size_t>(b)]);
    total -= log_p(row, b);
    residual(row, b) -= 1.0;
  }
  gradient.resize(parameters_.size());
  Eigen::Map<Eigen::MatrixXd>(gradient.data(), kLabels, input_dim_).noalias() =
      residual * inputs.transpose() / static_cast<double>(batch);
  return total / static_cast<double>(batch);
}

void SoftmaxClassifier::save(std::ostream& out) const {
  out << "softmax v1\n"
      << "labels " << kLabels << '\n'
      << "input_dim " << input_dim_ << '\n';
  // Row-major Z.
  const auto z = weights();
  for (Eigen::Index r = 0; r < kLabels; ++r) {
    for (Eigen::Index c = 0; c < input_dim_; ++c) out << format_double(z(r, c)) << '\n';
  }
}

SoftmaxClassifier SoftmaxClassifier::load(std::istream& in) {
  serial::expect_line(in, "softmax v1");
  if (serial::read_uint(in, "labels") != static_cast<std::uint64_t>(kLabels)) {
    throw DataError("checkpoint: softmax must have 2 labels");
  }
  const auto dim = static_cast<Eigen::Index>(serial::read_uint(in, "input_dim"));
  if (dim < 1) throw DataError("checkpoint: softmax input_dim must be positive");
  const Eigen::VectorXd row_major = serial::read_values(in, kLabels * dim, "softmax weights");
  if (!row_major.allFinite()) throw DataError("checkpoint: softmax weights are not finite");
  SoftmaxClassifier model(dim);
  model.weights() = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      row_major.data(), kLabels, dim);
  return model;
}

namespace {

class SoftmaxSession {
 public:
  SoftmaxSession(SoftmaxClassifier& model, Eigen::MatrixXd train_inputs, std::vector<int> train_labels,
                 Eigen::MatrixXd validation_inputs, std::vector<int> validation_labels, const TrainConfig& config)
      : model_(model),
        train_inputs_(std::move(train_inputs)),
        train_labels_(std::move(train_labels)),
        validation_inputs_(std::move(validation_inputs)),
        validation_labels_(std::move(validation_labels)),
        config_(config) {}

  double train_epoch(Rng& rng) {
    double total = 0.0;
    Eigen::VectorXd gradient;
    std::vector<int> batch_labels;
    for (const auto& batch : shuffled_batches(train_labels_.size(), config_.batch_size, rng)) {
      const Eigen::MatrixXd inputs = train_inputs_(Eigen::all, batch);
      batch_labels.clear();
      for (auto i : batch) batch_labels.push_back(train_labels_[i]);
      const double loss = model_.loss_and_gradient(inputs, batch_labels, gradient);
      total += loss * static_cast<double>(batch.size());
      model_.parameters() -= config_.learning_rate * gradient;
    }
    return total / static_cast<double>(train_labels_.size());
  }

  double training_loss() const { return model_.loss(train_inputs_, train_labels_); }
  double validation_loss() const { return model_.loss(validation_inputs_, validation_labels_); }
  Eigen::VectorXd& parameters() { return model_.parameters(); }

 private:
  SoftmaxClassifier& model_;
  Eigen::MatrixXd train_inputs_;
  std::vector<int> train_labels_;
  Eigen::MatrixXd validation_inputs_;
  std::vector<int> validation_labels_;
  TrainConfig config_;
};

static_assert(EpochTrainable<SoftmaxSession>);

}  // namespace

SoftmaxTraining train_softmax(const Eigen::MatrixXd& inputs, std::span<const int> labels,
                              const TrainConfig& config) {
  config.validate();
  if (inputs.cols() == 0) throw DataError("cannot train softmax on an empty dataset");
  if (static_cast<std::size_t>(inputs.cols()) != labels.size()) throw DataError("one label per input vector required");
  for (int label : labels) {
    if (label != 0 && label != 1) throw DataError("labels must be 0 or 1");
  }
  if (!inputs.allFinite()) throw DataError("softmax inputs must be finite");

  const SplitIndices split = stratified_split(labels, config.validation_fraction, config.seed);
  auto gather_labels = [&](const std::vector<std::size_t>& idx) {
    std::vector<int> out;
    for (auto i : idx) out.push_back(labels[i]);
    return out;
  };

  Rng init_rng(derive_seed(config.seed, 0));
  SoftmaxTraining result{SoftmaxClassifier::random_uniform(inputs.rows(), 0.05, init_rng), {}};
  SoftmaxSession session(result.model, inputs(Eigen::all, split.train), gather_labels(split.train),
                         inputs(Eigen::all, split.validation), gather_labels(split.validation), config);
  result.report = run_early_stopping(session, config);
  return result;
}

Eigen::MatrixXd stack_columns(std::span<const TweetEmbedding> vectors) {
  if (vectors.empty()) return {};
  const Eigen::Index dim = vectors.front().vector.size();
  Eigen::MatrixXd stacked(dim, static_cast<Eigen::Index>(vectors.size()));
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].vector.size() != dim) throw DataError("tweet vectors have inconsistent dimensions");
    stacked.col(static_cast<Eigen::Index>(i)) = vectors[i].vector;
  }
  return stacked;
}

SoftmaxTraining train_softmax(std::span<const TweetEmbedding> vectors, std::span<const int> labels,
                              const TrainConfig& config) {
  return train_softmax(stack_columns(vectors), labels, config);
}

}  // namespace tweetgauge
