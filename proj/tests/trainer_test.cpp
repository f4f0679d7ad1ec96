#include <cmath>

#include <gtest/gtest.h>

#include "dlc/errors.hpp"
#include "dlc/trainer.hpp"
#include "support/printers.hpp"

namespace dlc {
namespace {

// A network whose softmax output is `p` for class 0 at every input: zero
// weights, biases set to the logits.
Network constant_network(double p) {
  Network net = Network::init(0);
  net.w1.setZero();
  net.w2.setZero();
  net.b2 << std::log(p), std::log(1.0 - p);
  return net;
}

TEST(Dataset, BalancedAndDeterministic) {
  Dataset d = make_dataset(0);
  ASSERT_EQ(d.size(), 1000u);
  double ones = d.labels.row(1).sum();
  EXPECT_GE(ones / 1000.0, 0.45);
  EXPECT_LE(ones / 1000.0, 0.55);
  EXPECT_EQ(d.labels.colwise().sum(), Eigen::RowVectorXd::Ones(1000));
  Dataset e = make_dataset(0);
  EXPECT_EQ(d.inputs, e.inputs);
  EXPECT_EQ(d.labels, e.labels);
  EXPECT_NE(make_dataset(1).inputs, d.inputs);
  EXPECT_EQ(make_dataset(0, 10).size(), 10u);
  EXPECT_THROW(make_dataset(0, 9), DomainError);
  EXPECT_EQ(d.slice(10, 5).inputs, d.inputs.middleCols(10, 5));
}

TEST(CrossEntropy, HandValues) {
  EXPECT_EQ(cross_entropy(Eigen::Vector2d(1, 0), Eigen::Vector2d(1, 0)), 0.0);
  EXPECT_NEAR(cross_entropy(Eigen::Vector2d(0.5, 0.5), Eigen::Vector2d(1, 0)), std::log(2.0), 1e-15);
  EXPECT_NEAR(cross_entropy(Eigen::Vector2d(0.25, 0.75), Eigen::Vector2d(0, 1)), -std::log(0.75), 1e-15);
  EXPECT_NEAR(cross_entropy(Eigen::Vector2d(0, 1), Eigen::Vector2d(1, 0)), -std::log(kLogFloor), 1e-12);
  EXPECT_THROW(cross_entropy(Eigen::Vector3d(0.2, 0.3, 0.5), Eigen::Vector2d(1, 0)), DomainError);
}

TEST(Network, ForwardIsADistribution) {
  Network net = Network::init(3);
  EXPECT_EQ(net.parameter_count(), 16u * 2 + 16 + 2 * 16 + 2);
  Eigen::MatrixXd p = net.forward(make_dataset(0, 50).inputs);
  EXPECT_GE(p.minCoeff(), 0.0);
  EXPECT_LE(p.maxCoeff(), 1.0);
  for (Eigen::Index c = 0; c < p.cols(); ++c) EXPECT_NEAR(p.col(c).sum(), 1.0, 1e-15);

  Network copy = Network::init(99);
  copy.assign(net.flatten());
  EXPECT_EQ(copy.flatten(), net.flatten());
  EXPECT_EQ(copy.checksum(), net.checksum());
  EXPECT_EQ(net.checksum().size(), 64u);
}

TEST(ConstraintLoss, HandValues) {
  Dataset d = make_dataset(0, 20);
  AugmentedLossConfig cfg;
  EXPECT_NEAR(constraint_loss(constant_network(0.95), d, cfg), 0.05, 1e-12);
  EXPECT_EQ(constraint_loss(constant_network(0.5), d, cfg), 0.0);

  // Fuzzy with the crisp oracle: 1 - [y1 <= 0.9] per point.
  cfg.semantics = SemanticsId::GOEDEL;
  EXPECT_EQ(constraint_loss(constant_network(0.95), d, cfg), 1.0);
  EXPECT_EQ(constraint_loss(constant_network(0.5), d, cfg), 0.0);
  // Input-dependent constraint: half-plane x1 <= 0 holds on some points only.
  cfg.constraint = parse_formula("x1 <= 0");
  double expected = 0.0;
  for (Eigen::Index i = 0; i < d.inputs.cols(); ++i) expected += d.inputs(0, i) <= 0 ? 0.0 : 1.0;
  EXPECT_NEAR(constraint_loss(constant_network(0.5), d, cfg), expected / 20.0, 1e-15);

  cfg.semantics = SemanticsId::STL;
  cfg.oracle = default_oracle(SemanticsId::STL);
  cfg.constraint = parse_formula("y1 <= 0.9");
  EXPECT_NEAR(constraint_loss(constant_network(0.95), d, cfg), 0.05, 1e-12);
}

TEST(Config, Validation) {
  AugmentedLossConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.alpha = 1.5;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.alpha = 0.5;
  cfg.beta = -0.1;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.beta = 0.5;
  cfg.lr = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.lr = 0.1;
  cfg.constraint = parse_formula("y3 <= 0.9");
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.constraint = parse_formula("z <= 0.9");
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.constraint = parse_formula("and(x2 <= 1, y2 != 0.5)");
  EXPECT_NO_THROW(cfg.validate());
}

// Backpropagated gradients of the whole augmented loss against central
// differences over the flattened weights.
class Backprop : public ::testing::TestWithParam<SemanticsId> {};

TEST_P(Backprop, MatchesFiniteDifferences) {
  SemanticsId s = GetParam();
  AugmentedLossConfig cfg;
  cfg.semantics = s;
  cfg.oracle = is_fuzzy(s) ? AtomOracle{OracleMode::GRADED, 0.5} : default_oracle(s);
  // y1 <= 0.2 is mostly violated by an untrained net, inside the graded ramp.
  cfg.constraint = parse_formula("and(y1 <= 0.2, y2 <= 0.9)");
  Dataset batch = make_dataset(4, 10);
  Network net = Network::init(5);

  LossAndGradient lg = augmented_loss_gradient(net, batch, cfg);
  EXPECT_NEAR(lg.loss, augmented_loss(net, batch, cfg), 1e-12);
  AugmentedLossConfig plain = cfg;
  plain.beta = 0.0;
  EXPECT_GT((lg.gradient - augmented_loss_gradient(net, batch, plain).gradient).norm(), 1e-3);

  const double h = 1e-4;
  Eigen::VectorXd w = net.flatten();
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    Network plus = net, minus = net;
    Eigen::VectorXd wp = w, wm = w;
    wp[i] += h;
    wm[i] -= h;
    plus.assign(wp);
    minus.assign(wm);
    double fd = (augmented_loss(plus, batch, cfg) - augmented_loss(minus, batch, cfg)) / (2 * h);
    EXPECT_NEAR(lg.gradient[i], fd, 1e-4 * (1 + std::abs(fd))) << "parameter " << i;
  }
}

INSTANTIATE_TEST_SUITE_P(AllSemantics, Backprop, ::testing::ValuesIn(kAllSemantics),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(Train, ReportShapeAndDeterminism) {
  AugmentedLossConfig cfg;
  cfg.epochs = 20;
  Dataset d = make_dataset(0, 200);
  TrainReport a = train(cfg, d), b = train(cfg, d);
  ASSERT_EQ(a.epochs.size(), 20u);
  EXPECT_FALSE(a.diverged);
  EXPECT_EQ(a.weights_checksum, b.weights_checksum);
  EXPECT_EQ(to_json(a), to_json(b));
  std::string csv = to_csv(a);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 21);
  for (const auto& e : a.epochs) {
    EXPECT_NEAR(e.augmented_loss, 0.5 * e.ce_loss + 0.5 * e.constraint_loss, 1e-12);
  }
  nlohmann::json j = to_json(a);
  EXPECT_EQ(j["config"]["constraint"], "y1 <= 0.90000000000000002");
  EXPECT_EQ(j["epochs"].size(), 20u);
}

TEST(Train, ConstraintAloneIsSatisfied) {
  AugmentedLossConfig cfg;
  cfg.alpha = 0.0;
  cfg.beta = 1.0;
  TrainReport r = train(cfg, make_dataset(0));
  EXPECT_EQ(r.epochs.back().satisfaction_rate, 1.0);
}

TEST(Train, BetaZeroIsPlainCrossEntropy) {
  AugmentedLossConfig cfg;
  cfg.beta = 0.0;
  cfg.epochs = 5;
  Dataset d = make_dataset(0, 100);
  TrainReport a = train(cfg, d);
  cfg.constraint = parse_formula("y2 <= 0.1");
  TrainReport b = train(cfg, d);
  EXPECT_EQ(a.weights_checksum, b.weights_checksum);
}

TEST(Train, ConstraintLossNonIncreasingInBeta) {
  Dataset d = make_dataset(0);
  double previous = INFINITY;
  for (double beta : {0.0, 0.25, 0.5, 1.0}) {
    AugmentedLossConfig cfg;
    cfg.beta = beta;
    double final_loss = train(cfg, d).epochs.back().constraint_loss;
    EXPECT_LE(final_loss, previous) << "beta " << beta;
    previous = final_loss;
  }
}

TEST(Train, Divergence) {
  AugmentedLossConfig cfg;
  cfg.lr = 1e300;
  cfg.epochs = 5;
  TrainReport r = train(cfg, make_dataset(0, 50));
  EXPECT_TRUE(r.diverged);
  EXPECT_LT(r.epochs.size(), 5u);
}

TEST(SatisfactionRate, Bounds) {
  Dataset d = make_dataset(0, 100);
  Network net = Network::init(0);
  EXPECT_EQ(satisfaction_rate(net, d, parse_formula("0 <= 1")), 1.0);
  double r = satisfaction_rate(net, d, parse_formula("y1 <= 0.9"));
  EXPECT_GE(r, 0.0);
  EXPECT_LE(r, 1.0);
  EXPECT_EQ(satisfaction_rate(constant_network(0.95), d, parse_formula("y1 <= 0.9")), 0.0);
}

}  // namespace
}  // namespace dlc
