// dlc: evaluate, differentiate, audit and train with logical constraints.
//
// Exit codes: 0 ok, 1 audit mismatch, 2 parse error, 3 configuration error,
// 4 divergence / non-finite value.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dlc/auditor.hpp"
#include "dlc/autodiff.hpp"
#include "dlc/semantics.hpp"
#include "dlc/trainer.hpp"
#include "dlc/version.hpp"

using namespace dlc;

namespace {

enum Exit { kOk = 0, kMismatch = 1, kParse = 2, kConfig = 3, kDiverged = 4 };

constexpr double kKinkWarnMargin = 1e-3;

struct Flags {
  std::string semantics = "dl2";
  double xi = 1.0;
  double p = 2.0;
  double nu = 1.0;
  std::optional<std::string> oracle;
  double scale = 1.0;
  bool stl_literal = false;
  std::string out = "text";

  std::string formula_path;
  std::string env_path;
  bool fd = false;

  std::size_t trials = 10000;
  std::uint64_t seed = 0;
  double tol = 1e-9;
  std::string report = "";

  std::string config_path;
  std::optional<double> alpha, beta, lr;
  std::optional<std::size_t> epochs;
  std::optional<std::string> constraint;
  std::size_t dataset_size = 1000;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << content;
}

SemanticsId parse_semantics(const std::string& name) {
  auto s = semantics_from_string(name);
  if (!s) throw ConfigError("unknown semantics '" + name + "'");
  return *s;
}

SemanticsParams make_params(const Flags& f) {
  SemanticsParams prm;
  prm.xi = f.xi;
  prm.p = f.p;
  prm.nu = f.nu;
  prm.stl_variant = f.stl_literal ? StlVariant::Literal : StlVariant::Smooth;
  try {
    prm.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  return prm;
}

AtomOracle make_oracle(SemanticsId s, const std::optional<std::string>& mode, double scale) {
  AtomOracle o = default_oracle(s);
  if (mode) {
    auto m = oracle_from_string(*mode);
    if (!m) throw ConfigError("unknown oracle '" + *mode + "'");
    o.mode = *m;
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ConfigError("scale must be > 0");
  o.scale = scale;
  return o;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* yes_no(bool b) { return b ? "true" : "false"; }

struct Loaded {
  Formula formula;
  Env env;
  SemanticsId semantics;
  CompiledLoss loss;
};

Loaded load(const Flags& f) {
  Formula formula = parse_formula(read_file(f.formula_path));
  Env env = f.env_path.empty() ? Env{} : parse_env_json(read_file(f.env_path));
  SemanticsId s = parse_semantics(f.semantics);
  CompiledLoss loss = compile(formula, s, make_params(f), make_oracle(s, f.oracle, f.scale));
  return {formula, env, s, std::move(loss)};
}

int cmd_eval(const Flags& f) {
  Loaded in = load(f);
  double value = eval_loss(in.loss, in.env);
  bool in_domain = domain_true(in.semantics, value);
  bool truth = interpret_bool(in.formula, in.env);
  bool sound = in_domain == truth;
  if (f.out == "json") {
    nlohmann::json j = {{"tool_version", kToolVersion},
                        {"semantics", to_string(in.semantics)},
                        {"oracle", to_string(in.loss.oracle().mode)},
                        {"formula", pretty_print(in.formula)},
                        {"value", value},
                        {"domain_true", in_domain},
                        {"interpret_bool", truth},
                        {"sound", sound}};
    std::cout << j.dump(2) << '\n';
  } else if (f.out == "csv") {
    std::cout << "value,domain_true,interpret_bool,sound\n"
              << fmt(value) << ',' << yes_no(in_domain) << ',' << yes_no(truth) << ',' << yes_no(sound) << '\n';
  } else {
    std::cout << "value=" << fmt(value) << " domain_true=" << yes_no(in_domain)
              << " interpret_bool=" << yes_no(truth) << " sound=" << yes_no(sound) << '\n';
  }
  return kOk;
}

int cmd_grad(const Flags& f) {
  Loaded in = load(f);
  ValueAndGradient vg = grad(in.loss, in.env);
  double margin = kink_margin(in.loss, in.env);
  bool near_kink = margin < kKinkWarnMargin;
  Gradient fd;
  double max_dev = 0.0;
  if (f.fd) {
    fd = finite_diff_grad(in.loss, in.env);
    for (const auto& [name, g] : vg.gradient) {
      max_dev = std::max(max_dev, std::abs(g - fd.at(name)) / (1.0 + std::abs(g)));
    }
  }

  if (f.out == "json") {
    nlohmann::json j = {{"tool_version", kToolVersion},
                        {"semantics", to_string(in.semantics)},
                        {"value", vg.value},
                        {"gradient", vg.gradient},
                        {"kink_margin", std::isfinite(margin) ? nlohmann::json(margin) : nlohmann::json(nullptr)},
                        {"near_kink", near_kink}};
    if (f.fd) {
      j["finite_difference"] = fd;
      j["max_relative_deviation"] = max_dev;
    }
    std::cout << j.dump(2) << '\n';
    return kOk;
  }
  if (f.out == "csv") {
    std::cout << (f.fd ? "variable,gradient,finite_difference\n" : "variable,gradient\n");
    for (const auto& [name, g] : vg.gradient) {
      std::cout << name << ',' << fmt(g);
      if (f.fd) std::cout << ',' << fmt(fd.at(name));
      std::cout << '\n';
    }
    return kOk;
  }
  std::cout << "value=" << fmt(vg.value) << '\n';
  for (const auto& [name, g] : vg.gradient) {
    std::cout << "  " << name << ": " << fmt(g);
    if (f.fd) std::cout << "   fd: " << fmt(fd.at(name));
    std::cout << '\n';
  }
  if (f.fd) std::cout << "max relative deviation: " << fmt(max_dev) << '\n';
  if (near_kink) {
    std::cout << "warning: point lies " << fmt(margin)
              << " from a kink; the derivative follows the first-argument tie-break\n";
  }
  return kOk;
}

int cmd_audit(const Flags& f) {
  AuditConfig cfg;
  cfg.trials = f.trials;
  cfg.seed = f.seed;
  cfg.tol = f.tol;
  cfg.params = make_params(f);
  if (cfg.trials == 0) throw ConfigError("trials must be > 0");
  if (!(cfg.tol >= 0.0)) throw ConfigError("tol must be >= 0");

  AuditMatrix m = audit_all(cfg);
  std::vector<CellMismatch> mismatches = compare_to_expected(m);
  std::size_t total = m.cells.size();
  std::size_t matched = total - mismatches.size();

  std::string prefix = f.report.empty() ? "audit" : f.report;
  write_file(prefix + ".json", to_json(m).dump(2) + "\n");
  write_file(prefix + ".csv", to_csv(m));

  if (f.out == "json") {
    std::cout << to_json(m).dump(2) << '\n';
  } else if (f.out == "csv") {
    std::cout << to_csv(m);
  } else {
    std::printf("%-18s", "");
    for (SemanticsId s : kAllSemantics) std::printf("%-13s", std::string(to_string(s)).c_str());
    std::printf("\n");
    for (PropertyId p : kTableProperties) {
      std::printf("%-18s", std::string(to_string(p)).c_str());
      for (SemanticsId s : kAllSemantics) {
        bool observed = m.at(s, p).verdict == Verdict::HOLDS_ON_TRIALS;
        bool ok = observed == expected_holds(s, p);
        std::string cell = std::string(observed ? "yes" : "no") + (ok ? " ✓" : " ✗");
        std::printf("%-15s", cell.c_str());
      }
      std::printf("\n");
    }
    for (const auto& mm : mismatches) {
      std::cout << "mismatch: " << to_string(mm.semantics) << " / " << to_string(mm.property)
                << " expected " << (mm.expected ? "yes" : "no") << ", observed "
                << (mm.observed ? "yes" : "no") << '\n';
    }
    if (m.low_confidence) std::cout << "note: fewer than 10000 trials per cell; verdicts are low-confidence\n";
    std::cout << matched << "/" << total << " cells match Table 1\n";
  }
  std::cerr << "wrote " << prefix << ".json, " << prefix << ".csv\n";
  return mismatches.empty() ? kOk : kMismatch;
}

AugmentedLossConfig train_config(const Flags& f, const CLI::App& app) {
  nlohmann::json j = nlohmann::json::object();
  if (!f.config_path.empty()) {
    try {
      j = nlohmann::json::parse(read_file(f.config_path));
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(e.what(), 1, e.byte);
    }
    if (!j.is_object()) throw ConfigError("train config must be a JSON object");
  }
  // Command-line flags override the config file.
  auto given = [&](const char* flag) { return app.count(flag) > 0; };
  auto num = [&](const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) throw ConfigError(std::string("config key '") + key + "' must be a number");
    return j[key].get<double>();
  };
  auto str = [&](const char* key, const std::string& fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_string()) throw ConfigError(std::string("config key '") + key + "' must be a string");
    return j[key].get<std::string>();
  };

  Flags g = f;
  if (!given("--semantics")) g.semantics = str("semantics", g.semantics);
  if (!given("--xi")) g.xi = num("xi", g.xi);
  if (!given("--p")) g.p = num("p", g.p);
  if (!given("--nu")) g.nu = num("nu", g.nu);
  if (!given("--scale")) g.scale = num("scale", g.scale);
  if (!given("--oracle") && j.contains("oracle")) g.oracle = str("oracle", "");

  AugmentedLossConfig cfg;
  cfg.semantics = parse_semantics(g.semantics);
  cfg.params = make_params(g);
  cfg.oracle = make_oracle(cfg.semantics, g.oracle, g.scale);
  cfg.alpha = f.alpha ? *f.alpha : num("alpha", cfg.alpha);
  cfg.beta = f.beta ? *f.beta : num("beta", cfg.beta);
  cfg.lr = f.lr ? *f.lr : num("lr", cfg.lr);
  double epochs = f.epochs ? static_cast<double>(*f.epochs) : num("epochs", static_cast<double>(cfg.epochs));
  if (!(epochs >= 0.0) || epochs != std::floor(epochs)) throw ConfigError("epochs must be a non-negative integer");
  cfg.epochs = static_cast<std::size_t>(epochs);
  double seed = given("--seed") ? static_cast<double>(f.seed) : num("seed", 0.0);
  if (!(seed >= 0.0) || seed != std::floor(seed)) throw ConfigError("seed must be a non-negative integer");
  cfg.seed = given("--seed") ? f.seed : static_cast<std::uint64_t>(seed);
  std::string constraint = f.constraint ? *f.constraint : str("constraint", "y1 <= 0.9");
  cfg.constraint = parse_formula(constraint);
  cfg.validate();
  return cfg;
}

int cmd_train(const Flags& f, const CLI::App& app) {
  AugmentedLossConfig cfg = train_config(f, app);
  // Fail on the oracle/semantics pairing before spending any epochs.
  (void)compile(cfg.constraint, cfg.semantics, cfg.params, cfg.oracle);
  if (f.dataset_size < 10) throw ConfigError("dataset size must be >= 10");
  Dataset data = make_dataset(cfg.seed, f.dataset_size);
  TrainReport r = train(cfg, data);

  std::string prefix = f.report.empty() ? "train" : f.report;
  write_file(prefix + ".json", to_json(r).dump(2) + "\n");
  write_file(prefix + ".csv", to_csv(r));

  if (f.out == "json") {
    std::cout << to_json(r).dump(2) << '\n';
  } else if (f.out == "csv") {
    std::cout << to_csv(r);
  } else {
    std::cout << "semantics=" << to_string(cfg.semantics) << " alpha=" << fmt(cfg.alpha)
              << " beta=" << fmt(cfg.beta) << " seed=" << cfg.seed << " epochs=" << r.epochs.size() << '\n';
    std::cout << "initial satisfaction_rate=" << fmt(r.initial_satisfaction_rate) << '\n';
    if (!r.epochs.empty()) {
      const EpochRecord& last = r.epochs.back();
      std::cout << "final satisfaction_rate=" << fmt(last.satisfaction_rate) << " accuracy=" << fmt(last.accuracy)
                << " constraint_loss=" << fmt(last.constraint_loss) << '\n';
    }
    std::cout << "weights sha256=" << r.weights_checksum << '\n';
  }
  std::cerr << "wrote " << prefix << ".json, " << prefix << ".csv\n";
  if (r.diverged) {
    std::cerr << "error: training diverged after " << r.epochs.size() << " epochs\n";
    return kDiverged;
  }
  return kOk;
}

void add_semantics_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--semantics", f.semantics, "dl2, goedel, lukasiewicz, yager, product or stl")
      ->check(CLI::IsMember({"dl2", "goedel", "lukasiewicz", "yager", "product", "stl"}));
  cmd->add_option("--xi", f.xi, "DL2 weight of a violated !=");
  cmd->add_option("--p", f.p, "Yager exponent (>= 1)");
  cmd->add_option("--nu", f.nu, "STL smoothing scale (> 0)");
  cmd->add_option("--oracle", f.oracle, "atom oracle: crisp, graded or robustness")
      ->check(CLI::IsMember({"crisp", "graded", "robustness"}));
  cmd->add_option("--scale", f.scale, "ramp width of the graded oracle");
  cmd->add_flag("--stl-literal", f.stl_literal, "use the A_min numerator in the positive STL branch");
  cmd->add_option("--out", f.out, "stdout format: json, csv or text")->check(CLI::IsMember({"json", "csv", "text"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentiable-logic constraint compiler"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);
  Flags f;

  CLI::App* eval = app.add_subcommand("eval", "evaluate a formula under one semantics");
  CLI::App* gradc = app.add_subcommand("grad", "value and gradient of a formula");
  for (CLI::App* cmd : {eval, gradc}) {
    add_semantics_flags(cmd, f);
    cmd->add_option("-f,--formula", f.formula_path, "constraint file")->required();
    cmd->add_option("-e,--env", f.env_path, "variable bindings (JSON object)");
  }
  gradc->add_flag("--fd", f.fd, "add a central-difference column");

  CLI::App* audit = app.add_subcommand("audit", "check every semantics against the property table");
  add_semantics_flags(audit, f);
  audit->add_option("--trials", f.trials, "trials per cell");
  audit->add_option("--seed", f.seed, "random seed");
  audit->add_option("--tol", f.tol, "tolerance for algebraic laws");
  audit->add_option("--report", f.report, "output prefix for .json/.csv (default: audit)");

  CLI::App* trainc = app.add_subcommand("train", "constraint-augmented training of a small classifier");
  add_semantics_flags(trainc, f);
  trainc->add_option("-c,--config", f.config_path, "JSON config; flags override its keys");
  trainc->add_option("--alpha", f.alpha, "weight of cross-entropy");
  trainc->add_option("--beta", f.beta, "weight of the constraint loss");
  trainc->add_option("--lr", f.lr, "learning rate");
  trainc->add_option("--epochs", f.epochs, "full-batch updates");
  trainc->add_option("--seed", f.seed, "seed for data and initialization");
  trainc->add_option("--constraint", f.constraint, "constraint over x1..xn, y1..ym");
  trainc->add_option("--dataset-size", f.dataset_size, "number of training points");
  trainc->add_option("--report", f.report, "output prefix for .json/.csv (default: train)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (*eval) return cmd_eval(f);
    if (*gradc) return cmd_grad(f);
    if (*audit) return cmd_audit(f);
    return cmd_train(f, *trainc);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kParse;
  } catch (const ArithmeticError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDiverged;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfig;
  }
}
