#include "dlc/trainer.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "dlc/autodiff.hpp"
#include "dlc/version.hpp"
#include "digest.hpp"

namespace dlc {

namespace {

// Where each variable of the compiled constraint takes its value from.
struct Source {
  bool output;
  Eigen::Index index;
};

std::optional<Source> reserved_source(const std::string& name, Eigen::Index inputs, Eigen::Index outputs) {
  if (name.size() < 2 || (name[0] != 'x' && name[0] != 'y')) return std::nullopt;
  for (std::size_t i = 1; i < name.size(); ++i) {
    if (name[i] < '0' || name[i] > '9') return std::nullopt;
  }
  if (name[1] == '0') return std::nullopt;
  long k = std::stol(name.substr(1));
  bool output = name[0] == 'y';
  if (k < 1 || k > (output ? outputs : inputs)) return std::nullopt;
  return Source{output, static_cast<Eigen::Index>(k - 1)};
}

struct BoundConstraint {
  CompiledLoss loss;
  std::vector<Source> sources;

  BoundConstraint(const AugmentedLossConfig& cfg, Eigen::Index inputs, Eigen::Index outputs)
      : loss(compile(cfg.constraint, cfg.semantics, cfg.params, cfg.oracle)) {
    for (const auto& name : loss.variables()) {
      auto src = reserved_source(name, inputs, outputs);
      if (!src) throw UnboundVariable(name);
      sources.push_back(*src);
    }
  }

  std::vector<double> point(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    std::vector<double> p;
    p.reserve(sources.size());
    for (const auto& s : sources) p.push_back(s.output ? y[s.index] : x[s.index]);
    return p;
  }
};

double penalty_sign(SemanticsId s) { return s == SemanticsId::DL2 ? 1.0 : -1.0; }

Env io_env(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  Env env;
  for (Eigen::Index i = 0; i < x.size(); ++i) env.bind("x" + std::to_string(i + 1), x[i]);
  for (Eigen::Index j = 0; j < y.size(); ++j) env.bind("y" + std::to_string(j + 1), y[j]);
  return env;
}

Eigen::MatrixXd softmax_columns(const Eigen::MatrixXd& z) {
  Eigen::MatrixXd p(z.rows(), z.cols());
  for (Eigen::Index c = 0; c < z.cols(); ++c) {
    Eigen::VectorXd e = (z.col(c).array() - z.col(c).maxCoeff()).exp();
    p.col(c) = e / e.sum();
  }
  return p;
}

}  // namespace

Dataset Dataset::slice(std::size_t begin, std::size_t count) const {
  if (begin + count > size()) throw DomainError("dataset slice out of range");
  auto b = static_cast<Eigen::Index>(begin);
  auto n = static_cast<Eigen::Index>(count);
  return {inputs.middleCols(b, n), labels.middleCols(b, n)};
}

Dataset make_dataset(std::uint64_t seed, std::size_t count) {
  if (count < 10) throw DomainError("dataset needs at least 10 points");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::bernoulli_distribution label(0.5);
  Dataset d{Eigen::MatrixXd(2, static_cast<Eigen::Index>(count)),
            Eigen::MatrixXd::Zero(2, static_cast<Eigen::Index>(count))};
  for (Eigen::Index i = 0; i < d.inputs.cols(); ++i) {
    int cls = label(rng) ? 1 : 0;
    double centre = cls == 0 ? -1.0 : 1.0;
    d.inputs(0, i) = centre + noise(rng);
    d.inputs(1, i) = centre + noise(rng);
    d.labels(cls, i) = 1.0;
  }
  return d;
}

Network Network::init(std::uint64_t seed, Eigen::Index inputs, Eigen::Index hidden, Eigen::Index outputs) {
  std::mt19937_64 rng(seed ^ 0x9E3779B97F4A7C15ull);
  auto he = [&](Eigen::Index rows, Eigen::Index cols) {
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(cols)));
    Eigen::MatrixXd w(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c) {
      for (Eigen::Index r = 0; r < rows; ++r) w(r, c) = dist(rng);
    }
    return w;
  };
  Network net;
  net.w1 = he(hidden, inputs);
  net.b1 = Eigen::VectorXd::Zero(hidden);
  net.w2 = he(outputs, hidden);
  net.b2 = Eigen::VectorXd::Zero(outputs);
  return net;
}

Eigen::MatrixXd Network::forward(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd h = ((w1 * x).colwise() + b1).cwiseMax(0.0);
  return softmax_columns((w2 * h).colwise() + b2);
}

std::size_t Network::parameter_count() const {
  return static_cast<std::size_t>(w1.size() + b1.size() + w2.size() + b2.size());
}

Eigen::VectorXd Network::flatten() const {
  Eigen::VectorXd flat(static_cast<Eigen::Index>(parameter_count()));
  flat << w1.reshaped(), b1, w2.reshaped(), b2;
  return flat;
}

void Network::assign(const Eigen::VectorXd& flat) {
  if (static_cast<std::size_t>(flat.size()) != parameter_count()) {
    throw DomainError("parameter vector has the wrong size");
  }
  Eigen::Index at = 0;
  auto take = [&](auto& dst) {
    dst.reshaped() = flat.segment(at, dst.size());
    at += dst.size();
  };
  take(w1);
  take(b1);
  take(w2);
  take(b2);
}

std::string Network::checksum() const {
  Eigen::VectorXd flat = flatten();
  return detail::sha256_hex(flat.data(), static_cast<std::size_t>(flat.size()) * sizeof(double));
}

double cross_entropy(const Eigen::VectorXd& probs, const Eigen::VectorXd& onehot) {
  if (probs.size() != onehot.size()) throw DomainError("cross_entropy: dimension mismatch");
  double loss = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    if (onehot[i] != 0.0) loss -= onehot[i] * std::log(std::max(probs[i], kLogFloor));
  }
  return loss;
}

void AugmentedLossConfig::validate(Eigen::Index inputs, Eigen::Index outputs) const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0,1]");
  if (!(beta >= 0.0 && beta <= 1.0)) throw ConfigError("beta must lie in [0,1]");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("lr must be > 0");
  for (const auto& name : free_vars(constraint)) {
    if (!reserved_source(name, inputs, outputs)) {
      throw ConfigError("constraint variable '" + name + "' is not one of x1..x" +
                        std::to_string(inputs) + ", y1..y" + std::to_string(outputs));
    }
  }
}

double constraint_penalty(SemanticsId s, double value) {
  if (s == SemanticsId::DL2) return value;
  if (s == SemanticsId::STL) return -value;
  return 1.0 - value;
}

double constraint_loss(const Network& net, const Dataset& batch, const AugmentedLossConfig& cfg) {
  BoundConstraint bound(cfg, net.inputs(), net.outputs());
  Eigen::MatrixXd probs = net.forward(batch.inputs);
  double total = 0.0;
  for (Eigen::Index c = 0; c < probs.cols(); ++c) {
    std::vector<double> point = bound.point(batch.inputs.col(c), probs.col(c));
    total += constraint_penalty(cfg.semantics, bound.loss.evaluate<double>(point));
  }
  return total / static_cast<double>(probs.cols());
}

double augmented_loss(const Network& net, const Dataset& batch, const AugmentedLossConfig& cfg) {
  Eigen::MatrixXd probs = net.forward(batch.inputs);
  double ce = 0.0;
  for (Eigen::Index c = 0; c < probs.cols(); ++c) ce += cross_entropy(probs.col(c), batch.labels.col(c));
  ce /= static_cast<double>(probs.cols());
  return cfg.alpha * ce + cfg.beta * constraint_loss(net, batch, cfg);
}

LossAndGradient augmented_loss_gradient(const Network& net, const Dataset& batch,
                                        const AugmentedLossConfig& cfg) {
  BoundConstraint bound(cfg, net.inputs(), net.outputs());
  const double n = static_cast<double>(batch.size());
  const double sign = penalty_sign(cfg.semantics);

  Eigen::MatrixXd z1 = (net.w1 * batch.inputs).colwise() + net.b1;
  Eigen::MatrixXd h = z1.cwiseMax(0.0);
  Eigen::MatrixXd probs = softmax_columns((net.w2 * h).colwise() + net.b2);

  LossAndGradient out;
  Eigen::MatrixXd dprobs = Eigen::MatrixXd::Zero(probs.rows(), probs.cols());
  for (Eigen::Index c = 0; c < probs.cols(); ++c) {
    Eigen::VectorXd p = probs.col(c);
    out.ce_loss += cross_entropy(p, batch.labels.col(c));
    for (Eigen::Index k = 0; k < p.size(); ++k) {
      if (batch.labels(k, c) != 0.0 && p[k] > kLogFloor) {
        dprobs(k, c) -= cfg.alpha * batch.labels(k, c) / p[k] / n;
      }
    }

    std::vector<double> point = bound.point(batch.inputs.col(c), p);
    double value = bound.loss.evaluate<double>(point);
    out.constraint_loss += constraint_penalty(cfg.semantics, value);
    if (cfg.beta == 0.0) continue;
    for (std::size_t v = 0; v < bound.sources.size(); ++v) {
      if (!bound.sources[v].output) continue;
      double d = directional(bound.loss, point, v).derivative;
      dprobs(bound.sources[v].index, c) += cfg.beta * sign * d / n;
    }
  }
  out.ce_loss /= n;
  out.constraint_loss /= n;
  out.loss = cfg.alpha * out.ce_loss + cfg.beta * out.constraint_loss;

  // Softmax Jacobian-vector product: dz = p .* (dp - <p, dp>).
  Eigen::MatrixXd dz2 = probs.cwiseProduct(
      dprobs - Eigen::VectorXd::Ones(probs.rows()) * probs.cwiseProduct(dprobs).colwise().sum());
  Eigen::MatrixXd dz1 = (net.w2.transpose() * dz2).cwiseProduct((z1.array() > 0.0).cast<double>().matrix());

  Network g;
  g.w1 = dz1 * batch.inputs.transpose();
  g.b1 = dz1.rowwise().sum();
  g.w2 = dz2 * h.transpose();
  g.b2 = dz2.rowwise().sum();
  out.gradient = g.flatten();
  return out;
}

double satisfaction_rate(const Network& net, const Dataset& data, const Formula& constraint) {
  if (data.size() == 0) return 0.0;
  Eigen::MatrixXd probs = net.forward(data.inputs);
  std::size_t holds = 0;
  for (Eigen::Index c = 0; c < probs.cols(); ++c) {
    if (interpret_bool(constraint, io_env(data.inputs.col(c), probs.col(c)))) ++holds;
  }
  return static_cast<double>(holds) / static_cast<double>(data.size());
}

double accuracy(const Network& net, const Dataset& data) {
  if (data.size() == 0) return 0.0;
  Eigen::MatrixXd probs = net.forward(data.inputs);
  std::size_t correct = 0;
  for (Eigen::Index c = 0; c < probs.cols(); ++c) {
    Eigen::Index predicted = 0, actual = 0;
    probs.col(c).maxCoeff(&predicted);
    data.labels.col(c).maxCoeff(&actual);
    if (predicted == actual) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

TrainReport train(const AugmentedLossConfig& cfg, const Dataset& data) {
  Network net = Network::init(cfg.seed, data.inputs.rows(), 16, data.labels.rows());
  cfg.validate(net.inputs(), net.outputs());

  TrainReport report;
  report.config = cfg;
  report.dataset_size = data.size();
  report.initial_satisfaction_rate = satisfaction_rate(net, data, cfg.constraint);

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    LossAndGradient lg;
    try {
      lg = augmented_loss_gradient(net, data, cfg);
    } catch (const ArithmeticError&) {
      report.diverged = true;
      break;
    }
    Eigen::VectorXd next = net.flatten() - cfg.lr * lg.gradient;
    if (!std::isfinite(lg.loss) || !next.allFinite()) {
      report.diverged = true;
      break;
    }
    net.assign(next);
    if (!net.forward(data.inputs).allFinite()) {
      report.diverged = true;
      break;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    Eigen::MatrixXd probs = net.forward(data.inputs);
    for (Eigen::Index c = 0; c < probs.cols(); ++c) rec.ce_loss += cross_entropy(probs.col(c), data.labels.col(c));
    rec.ce_loss /= static_cast<double>(data.size());
    rec.constraint_loss = constraint_loss(net, data, cfg);
    rec.augmented_loss = cfg.alpha * rec.ce_loss + cfg.beta * rec.constraint_loss;
    rec.accuracy = accuracy(net, data);
    rec.satisfaction_rate = satisfaction_rate(net, data, cfg.constraint);
    if (!std::isfinite(rec.augmented_loss)) {
      report.diverged = true;
      break;
    }
    report.epochs.push_back(rec);
  }
  report.weights_checksum = net.checksum();
  report.network = std::move(net);
  return report;
}

nlohmann::json to_json(const TrainReport& r) {
  const AugmentedLossConfig& c = r.config;
  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& e : r.epochs) {
    epochs.push_back({{"epoch", e.epoch},
                      {"ce_loss", e.ce_loss},
                      {"constraint_loss", e.constraint_loss},
                      {"augmented_loss", e.augmented_loss},
                      {"accuracy", e.accuracy},
                      {"satisfaction_rate", e.satisfaction_rate}});
  }
  nlohmann::json j = {
      {"tool_version", kToolVersion},
      {"config",
       {{"alpha", c.alpha},
        {"beta", c.beta},
        {"semantics", to_string(c.semantics)},
        {"xi", c.params.xi},
        {"p", c.params.p},
        {"nu", c.params.nu},
        {"stl_variant", c.params.stl_variant == StlVariant::Smooth ? "smooth" : "literal"},
        {"oracle", to_string(c.oracle.mode)},
        {"scale", c.oracle.scale},
        {"constraint", pretty_print(c.constraint)},
        {"lr", c.lr},
        {"epochs", c.epochs},
        {"seed", c.seed}}},
      {"dataset_size", r.dataset_size},
      {"initial_satisfaction_rate", r.initial_satisfaction_rate},
      {"diverged", r.diverged},
      {"weights_checksum", r.weights_checksum},
      {"epochs", epochs},
  };
  if (!r.epochs.empty()) {
    j["final"] = {{"accuracy", r.epochs.back().accuracy},
                  {"satisfaction_rate", r.epochs.back().satisfaction_rate},
                  {"constraint_loss", r.epochs.back().constraint_loss}};
  }
  return j;
}

std::string to_csv(const TrainReport& r) {
  std::ostringstream out;
  out.precision(17);
  out << "epoch,ce_loss,constraint_loss,augmented_loss,accuracy,satisfaction_rate\n";
  for (const auto& e : r.epochs) {
    out << e.epoch << ',' << e.ce_loss << ',' << e.constraint_loss << ',' << e.augmented_loss << ','
        << e.accuracy << ',' << e.satisfaction_rate << '\n';
  }
  return out.str();
}

}  // namespace dlc
