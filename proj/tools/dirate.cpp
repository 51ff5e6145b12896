// dirate: rates, certificates, and example curves for finite-state
// feed-forward/feedback models. See README.md for the file formats.

#include <CLI11.hpp>
#include <chrono>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "dirate/channel.hpp"
#include "dirate/directed_info.hpp"
#include "dirate/gauss.hpp"
#include "dirate/model_io.hpp"
#include "dirate/optimality.hpp"
#include "dirate/output.hpp"
#include "dirate/stock.hpp"

namespace {

using dirate::RatePoint;
using nlohmann::ordered_json;

struct Emitter {
  std::string command;
  std::string out_path;
  std::vector<std::pair<std::string, std::string>> inputs;
  bool has_seed = false;
  std::uint64_t seed = 0;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void add_input(const std::string& path) {
    inputs.emplace_back(path, dirate::hash_file(path));
  }

  void emit(const std::string& text) const {
    if (out_path.empty()) {
      std::cout << text;
      return;
    }
    {
      std::ofstream out(out_path, std::ios::binary);
      if (!out) throw dirate::ValidationError("cannot write '" + out_path + "'");
      out << text;
    }
    dirate::RunManifest manifest;
    manifest.command = command;
    manifest.inputs = inputs;
    manifest.outputs.emplace_back(out_path, dirate::fnv1a64_hex(text));
    manifest.has_seed = has_seed;
    manifest.seed = seed;
    manifest.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                  start)
            .count();
    dirate::write_manifest(manifest, out_path + ".manifest.json");
  }
};

ordered_json rate_point_json(const RatePoint& pt) {
  ordered_json j;
  j["rate_bits"] = dirate::round9(pt.rate_bits);
  j["delay"] = pt.delay;
  j["method"] = dirate::method_name(pt.method);
  if (pt.method == RatePoint::Method::MonteCarlo) {
    j["quantile"] = pt.quantile;
    j["mean"] = dirate::round9(pt.mc_mean);
    j["stddev"] = dirate::round9(pt.mc_stddev);
    j["trials"] = pt.trials;
    j["block_length"] = pt.block_length;
    j["seed"] = pt.seed;
  }
  return j;
}

std::vector<double> parse_grid(const std::string& spec) {
  double lo = 0, hi = 0;
  int steps = 0;
  char c1 = 0, c2 = 0;
  std::istringstream in(spec);
  if (!(in >> lo >> c1 >> hi >> c2 >> steps) || c1 != ':' || c2 != ':' ||
      steps < 1 || !(in >> std::ws).eof())
    throw dirate::ValidationError("bad grid '" + spec + "', expected MIN:MAX:STEPS");
  std::vector<double> grid;
  for (int i = 0; i < steps; ++i)
    grid.push_back(steps == 1 ? lo : lo + (hi - lo) * i / (steps - 1));
  return grid;
}

std::string csv_curve(const std::vector<std::array<double, 2>>& rows,
                      const std::string& header) {
  std::string text = header + "\n";
  for (const auto& row : rows)
    text += dirate::format_g9(row[0]) + "," + dirate::format_g9(row[1]) + "\n";
  return text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"directed-information rates, optimality certificates, and "
               "worked-example curves for finite-state Markov models"};
  app.require_subcommand(1);
  app.set_version_flag("--version", dirate::kToolVersion);

  std::string command_line;
  for (int i = 0; i < argc; ++i) {
    if (i) command_line += ' ';
    command_line += argv[i];
  }

  // ---- rate ----
  auto* rate_cmd =
      app.add_subcommand("rate", "k-delay directed-information rate of a joint model");
  std::string rate_model, rate_out;
  int rate_delay = 1;
  std::int64_t rate_budget = 10'000'000;
  std::vector<double> rate_mc;
  std::uint64_t rate_seed = 0;
  rate_cmd->add_option("model", rate_model, "joint model JSON file")->required();
  rate_cmd->add_option("--delay", rate_delay, "feed-forward delay k")
      ->check(CLI::PositiveNumber);
  rate_cmd->add_option("--budget", rate_budget, "extended-state budget for exact mode");
  auto* rate_mc_opt =
      rate_cmd->add_option("--mc", rate_mc,
                           "Monte-Carlo cross-check: BLOCK_N TRIALS QUANTILE")
          ->expected(3);
  auto* rate_seed_opt = rate_cmd->add_option("--seed", rate_seed, "RNG seed");
  rate_mc_opt->needs(rate_seed_opt);
  rate_cmd->add_option("--out", rate_out, "output file (manifest written beside)");

  rate_cmd->callback([&] {
    Emitter io{command_line, rate_out};
    io.add_input(rate_model);
    auto model = dirate::load_model(rate_model);
    auto* joint = std::get_if<dirate::JointMarkovModel>(&model);
    if (!joint)
      throw dirate::ValidationError("rate expects a model with kind \"joint\"");

    ordered_json doc;
    doc["command"] = "rate";
    doc["model"] = rate_model;
    doc["delay"] = rate_delay;
    std::optional<RatePoint> exact;
    try {
      exact = dirate::rate_delayk(*joint, rate_delay, rate_budget);
    } catch (const dirate::BudgetError&) {
      if (rate_mc.empty()) throw;
    }
    doc["exact"] = exact ? rate_point_json(*exact) : ordered_json(nullptr);
    if (!rate_mc.empty()) {
      io.has_seed = true;
      io.seed = rate_seed;
      RatePoint mc = dirate::spectrum_estimate(
          *joint, rate_delay, static_cast<int>(rate_mc[0]),
          static_cast<int>(rate_mc[1]), rate_mc[2], rate_seed, rate_budget);
      doc["monte_carlo"] = rate_point_json(mc);
    }
    io.emit(doc.dump(2) + "\n");
  });

  // ---- verify ----
  auto* verify_cmd = app.add_subcommand(
      "verify", "solve the (c, d0) optimality certificate for a measure");
  std::string verify_model, verify_measure, verify_policy, verify_out;
  int verify_delay = 1;
  double verify_tol = 1e-9;
  verify_cmd->add_option("model", verify_model, "joint model (distortion) or channel (cost)")
      ->required();
  verify_cmd->add_option("measure", verify_measure, "distortion or cost JSON file")
      ->required();
  verify_cmd->add_option("--delay", verify_delay, "feed-forward delay k")
      ->check(CLI::PositiveNumber);
  verify_cmd->add_option("--policy", verify_policy,
                         "input policy file (required for cost measures)");
  verify_cmd->add_option("--tol", verify_tol, "residual tolerance");
  verify_cmd->add_option("--out", verify_out, "output file");

  verify_cmd->callback([&] {
    Emitter io{command_line, verify_out};
    io.add_input(verify_model);
    io.add_input(verify_measure);
    auto measure = dirate::load_measure(verify_measure);
    std::string text;
    if (auto* dist = std::get_if<dirate::DistortionTable>(&measure)) {
      auto joint = dirate::load_joint(verify_model);
      auto cert = dirate::verify_distortion(joint, verify_delay, *dist, verify_tol);
      text = dirate::certificate_to_json(cert, dist->source);
    } else {
      if (verify_policy.empty())
        throw dirate::ValidationError(
            "cost verification needs --policy with the input policy file");
      io.add_input(verify_policy);
      auto channel = dirate::load_channel(verify_model);
      auto policy = dirate::load_policy(verify_policy);
      const auto& cost = std::get<dirate::CostTable>(measure);
      auto cert = dirate::verify_cost(channel, policy, cost, verify_tol);
      text = dirate::certificate_to_json(cert, cost.output);
    }
    io.emit(text);
  });

  // ---- stock ----
  auto* stock_cmd = app.add_subcommand(
      "stock", "closed-form stock-prediction rate-distortion points");
  std::vector<double> stock_p, stock_q;
  double stock_d = -1.0;
  std::string stock_curve, stock_out;
  stock_cmd->add_option("--p", stock_p, "up-probabilities p_0..p_{K-1}")
      ->required()
      ->delimiter(',');
  stock_cmd->add_option("--q", stock_q, "down-probabilities q_1..q_K")
      ->required()
      ->delimiter(',');
  auto* stock_d_opt = stock_cmd->add_option("--D", stock_d, "distortion target");
  auto* stock_curve_opt =
      stock_cmd->add_option("--curve", stock_curve, "distortion grid MIN:MAX:STEPS");
  stock_d_opt->excludes(stock_curve_opt);
  stock_cmd->add_option("--out", stock_out, "output CSV file");

  stock_cmd->callback([&] {
    Emitter io{command_line, stock_out};
    dirate::stock::BirthDeathChain chain(stock_p, stock_q);
    std::vector<std::array<double, 2>> rows;
    if (!stock_curve.empty()) {
      for (const auto& pt : dirate::stock::rd_curve(chain, parse_grid(stock_curve)))
        rows.push_back({pt.distortion, pt.rate_bits});
    } else if (stock_d_opt->count() > 0) {
      rows.push_back({stock_d, dirate::stock::proposition1_rate(chain, stock_d)});
    } else {
      throw dirate::ValidationError("stock needs --D or --curve");
    }
    io.emit(csv_curve(rows, "D,R_bits"));
  });

  // ---- gauss ----
  auto* gauss_cmd = app.add_subcommand(
      "gauss", "Gauss-Markov closed-form rate, optionally with the "
               "Blahut-Arimoto oracle column");
  dirate::gauss::GaussMarkovParams gp;
  double gauss_d = -1.0;
  std::string gauss_curve, gauss_out;
  bool gauss_oracle = false;
  dirate::gauss::BlahutArimotoOptions ba;
  gauss_cmd->add_option("--var", gp.variance, "source variance sigma^2")->required();
  gauss_cmd->add_option("--rho", gp.rho, "correlation")->required();
  gauss_cmd->add_option("--a", gp.a, "coefficient of x_n");
  gauss_cmd->add_option("--b", gp.b, "coefficient of x_{n-1} (does not enter the rate)");
  auto* gauss_d_opt = gauss_cmd->add_option("--D", gauss_d, "distortion target");
  auto* gauss_curve_opt =
      gauss_cmd->add_option("--curve", gauss_curve, "distortion grid MIN:MAX:STEPS");
  gauss_d_opt->excludes(gauss_curve_opt);
  gauss_cmd->add_flag("--oracle", gauss_oracle, "append a Blahut-Arimoto column");
  gauss_cmd->add_option("--grid", ba.grid, "oracle grid points");
  gauss_cmd->add_option("--width", ba.half_width, "oracle support half-width");
  gauss_cmd->add_option("--out", gauss_out, "output CSV file");

  gauss_cmd->callback([&] {
    Emitter io{command_line, gauss_out};
    std::vector<double> grid;
    if (!gauss_curve.empty())
      grid = parse_grid(gauss_curve);
    else if (gauss_d_opt->count() > 0)
      grid.push_back(gauss_d);
    else
      throw dirate::ValidationError("gauss needs --D or --curve");

    bool clamped_any = false;
    std::string text = gauss_oracle ? "D,R_bits,R_oracle_bits\n" : "D,R_bits\n";
    for (double d : grid) {
      bool clamped = false;
      double r = dirate::gauss::gauss_rate(gp, d, &clamped);
      clamped_any |= clamped;
      text += dirate::format_g9(d) + "," + dirate::format_g9(r);
      if (gauss_oracle) {
        double oracle = dirate::gauss::ba_gaussian_oracle(
            dirate::gauss::innovation_variance(gp), d / (gp.a * gp.a), ba);
        text += "," + dirate::format_g9(oracle);
      }
      text += "\n";
    }
    if (clamped_any)
      std::cerr << "note: closed form negative for some D (above the validity "
                   "range); clamped to 0\n";
    io.emit(text);
  });

  // ---- capacity ----
  auto* cap_cmd = app.add_subcommand(
      "capacity", "directed-information rate of a channel under an input policy");
  std::string cap_channel, cap_policy, cap_cost, cap_out;
  std::vector<double> cap_mc;
  std::uint64_t cap_seed = 0;
  double cap_tol = 1e-9;
  cap_cmd->add_option("channel", cap_channel, "channel JSON file")->required();
  cap_cmd->add_option("policy", cap_policy, "input policy JSON file")->required();
  auto* cap_mc_opt =
      cap_cmd->add_option("--mc", cap_mc, "Monte-Carlo: BLOCK_N TRIALS QUANTILE")
          ->expected(3);
  auto* cap_seed_opt = cap_cmd->add_option("--seed", cap_seed, "RNG seed");
  cap_mc_opt->needs(cap_seed_opt);
  cap_cmd->add_option("--cost-file", cap_cost,
                      "cost table; adds an optimality certificate");
  cap_cmd->add_option("--tol", cap_tol, "certificate residual tolerance");
  cap_cmd->add_option("--out", cap_out, "output file");

  cap_cmd->callback([&] {
    Emitter io{command_line, cap_out};
    io.add_input(cap_channel);
    io.add_input(cap_policy);
    auto channel = dirate::load_channel(cap_channel);
    auto policy = dirate::load_policy(cap_policy);

    ordered_json doc;
    doc["command"] = "capacity";
    std::optional<RatePoint> exact;
    try {
      exact = dirate::feedback_info_rate(channel, policy);
    } catch (const dirate::DomainError&) {
      if (cap_mc.empty()) throw;
    }
    doc["rate"] = exact ? rate_point_json(*exact) : ordered_json(nullptr);
    if (!cap_mc.empty()) {
      io.has_seed = true;
      io.seed = cap_seed;
      RatePoint mc = dirate::channel_spectrum_estimate(
          channel, policy, static_cast<int>(cap_mc[0]), static_cast<int>(cap_mc[1]),
          cap_mc[2], cap_seed);
      doc["monte_carlo"] = rate_point_json(mc);
    }
    if (!cap_cost.empty()) {
      io.add_input(cap_cost);
      auto measure = dirate::load_measure(cap_cost);
      auto* cost = std::get_if<dirate::CostTable>(&measure);
      if (!cost)
        throw dirate::ValidationError("--cost-file must hold a cost measure");
      auto cert = dirate::verify_cost(channel, policy, *cost, cap_tol);
      doc["certificate"] =
          ordered_json::parse(dirate::certificate_to_json(cert, cost->output));
      doc["expected_cost"] =
          dirate::round9(dirate::expected_cost(channel, policy, *cost));
      // the rate is the capacity at this cost only when the certificate holds
      doc["achieves_capacity"] =
          cert.status == dirate::OptimalityCertificate::Status::Optimal;
    }
    io.emit(doc.dump(2) + "\n");
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const dirate::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return 2;
  } catch (const dirate::BudgetError& e) {
    std::cerr << "budget error: " << e.what() << '\n';
    return 3;
  } catch (const dirate::DomainError& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return 4;
  }
  return 0;
}
