#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "dlc/semantics.hpp"

namespace dlc {

/// Labelled points: one column per sample. Labels are one-hot.
struct Dataset {
  Eigen::MatrixXd inputs;  // n x count
  Eigen::MatrixXd labels;  // m x count

  std::size_t size() const { return static_cast<std::size_t>(inputs.cols()); }
  Dataset slice(std::size_t begin, std::size_t count) const;
};

/// Two Gaussian blobs in R^2 (unit variance, centres (-1,-1) and (1,1)),
/// class drawn uniformly per point. Requires count >= 10.
Dataset make_dataset(std::uint64_t seed, std::size_t count = 1000);

/// Two-layer perceptron: rectifier hidden layer, softmax output.
struct Network {
  Eigen::MatrixXd w1;
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;
  Eigen::VectorXd b2;

  static Network init(std::uint64_t seed, Eigen::Index inputs = 2, Eigen::Index hidden = 16,
                      Eigen::Index outputs = 2);

  Eigen::Index inputs() const { return w1.cols(); }
  Eigen::Index outputs() const { return w2.rows(); }

  /// Class probabilities, one column per input column.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;

  std::size_t parameter_count() const;
  /// Flattened parameters (w1, b1, w2, b2, column-major) and the inverse.
  Eigen::VectorXd flatten() const;
  void assign(const Eigen::VectorXd& flat);

  /// SHA-256 (hex) of the flattened parameters' bytes.
  std::string checksum() const;
};

inline constexpr double kLogFloor = 1e-12;

/// -sum_i y_i log(max(p_i, 1e-12)). Throws DomainError on size mismatch.
double cross_entropy(const Eigen::VectorXd& probs, const Eigen::VectorXd& onehot);

struct AugmentedLossConfig {
  double alpha = 0.5;
  double beta = 0.5;
  SemanticsId semantics = SemanticsId::DL2;
  SemanticsParams params;
  AtomOracle oracle;
  Formula constraint = parse_formula("y1 <= 0.9");
  double lr = 0.1;
  std::size_t epochs = 200;
  std::uint64_t seed = 0;

  /// Throws ConfigError for alpha/beta outside [0,1], lr <= 0, or a
  /// constraint over names other than x1..xn / y1..ym.
  void validate(Eigen::Index inputs = 2, Eigen::Index outputs = 2) const;
};

/// Penalty minimized by training, from a semantics value: DL2 value as is,
/// fuzzy 1 - value, STL -value. Zero (or below) exactly on the true region
/// for DL2 and fuzzy.
double constraint_penalty(SemanticsId s, double value);

/// Batch mean of the constraint penalty with x1..xn bound to the inputs and
/// y1..ym to the network's outputs.
double constraint_loss(const Network& net, const Dataset& batch, const AugmentedLossConfig& cfg);

/// alpha * mean cross-entropy + beta * constraint_loss.
double augmented_loss(const Network& net, const Dataset& batch, const AugmentedLossConfig& cfg);

struct LossAndGradient {
  double ce_loss = 0.0;
  double constraint_loss = 0.0;
  double loss = 0.0;
  Eigen::VectorXd gradient;  // same layout as Network::flatten()
};

/// Backpropagation through the network, with d(penalty)/d(outputs) taken
/// from forward-mode differentiation of the compiled constraint.
LossAndGradient augmented_loss_gradient(const Network& net, const Dataset& batch,
                                        const AugmentedLossConfig& cfg);

/// Fraction of points at which the constraint holds classically.
double satisfaction_rate(const Network& net, const Dataset& data, const Formula& constraint);

double accuracy(const Network& net, const Dataset& data);

struct EpochRecord {
  std::size_t epoch = 0;
  double ce_loss = 0.0;
  double constraint_loss = 0.0;
  double augmented_loss = 0.0;
  double accuracy = 0.0;
  double satisfaction_rate = 0.0;
};

struct TrainReport {
  AugmentedLossConfig config;
  std::size_t dataset_size = 0;
  double initial_satisfaction_rate = 0.0;
  std::vector<EpochRecord> epochs;  // metrics after each update
  bool diverged = false;
  std::string weights_checksum;
  Network network;
};

/// Full-batch gradient descent on the augmented loss. Stops early, with
/// `diverged` set, if the loss becomes non-finite.
TrainReport train(const AugmentedLossConfig& cfg, const Dataset& data);

nlohmann::json to_json(const TrainReport& r);
std::string to_csv(const TrainReport& r);

}  // namespace dlc
