#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <string>

#include "auction/feasibility.hpp"
#include "auction/io.hpp"
#include "auction/optimizer.hpp"
#include "auction/verify.hpp"

namespace {

using namespace auction;

struct Options {
  std::uint64_t seed = 0;
  double tolerance = kFeasTol;
  std::string output = "json";
  long long guard = 0;  // 0: keep library defaults
  long long samples = 100000;
  double z_max = 4.0;
  std::string mode = "exact";
  std::string instance_path;
  std::string rule_path;
};

class Timer {
 public:
  long long ms() const {
    auto dt = std::chrono::steady_clock::now() - start_;
    return std::chrono::duration_cast<std::chrono::milliseconds>(dt).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

OutputFormat format_of(const Options& opt) {
  return opt.output == "csv" ? OutputFormat::kCsv : OutputFormat::kJson;
}

void emit(const Json& report, const Options& opt) {
  std::cout << render_report(report, format_of(opt));
}

Json base_report(const std::string& command, const Options& opt) {
  Json report;
  report["command"] = command;
  report["seed"] = opt.seed;
  report["tolerance"] = opt.tolerance;
  report["instance"] = opt.instance_path;
  if (!opt.rule_path.empty()) report["rule"] = opt.rule_path;
  return report;
}

// Expected-rank oracle of the instance's supply over realized type sets.
ExpectedRankOracle<double> rank_oracle(const AuctionInstance& instance) {
  const auto& u = instance.universe;
  ExpectedRankOracle<double> g =
      instance.supply.kind == SupplyKind::kMatroid
          ? make_matroid_oracle<double>(u, instance.mass, *instance.supply.matroid)
          : make_k_unit_oracle<double>(
                u, instance.mass,
                instance.supply.kind == SupplyKind::kKUnit ? instance.supply.k : 1);
  if (u.type_count() <= 16) g = tabulate(g);
  return g;
}

Json certificate_json(const TypeUniverse& u, const ViolationCertificate<double>& cert) {
  Json set = Json::array();
  for (int t = 0; t < u.type_count(); ++t)
    if (cert.set >> t & 1) set.push_back(u.qualified_label(t));
  Json doc;
  doc["set"] = set;
  doc["slack"] = cert.slack;
  return doc;
}

MechanismRunner runner_for(const AuctionInstance& instance, const OptimalAuction& best) {
  const TypeUniverse u = instance.universe;
  if (best.table.has_value()) {
    TransitionTable table = *best.table;
    return [u, table](const TypeProfile& p, Rng& rng) -> TypeMask {
      int winner = run_ssa(u, table, p, rng);
      return winner < 0 ? TypeMask(0) : TypeMask(1) << winner;
    };
  }
  RraMechanism rra = *best.rra;
  return [rra](const TypeProfile& p, Rng& rng) { return rra.run(p, rng); };
}

Json interim_json(const TypeUniverse& u, const InterimReport& r) {
  Json rows = Json::array();
  for (int t = 0; t < u.type_count(); ++t) {
    Json row;
    row["type"] = u.qualified_label(t);
    row["target"] = r.target[t];
    row["measured"] = r.measured[t];
    row["se"] = r.se[t];
    row["z"] = r.z[t];
    rows.push_back(row);
  }
  return rows;
}

int run_check(const Options& opt) {
  Timer timer;
  AuctionInstance instance = load_instance(opt.instance_path);
  VecXd xbar = load_rule(opt.rule_path, instance.universe);

  auto cert = separate(xbar, rank_oracle(instance));
  bool feasible = cert.slack >= -opt.tolerance;

  Json report = base_report("check", opt);
  report["feasible"] = feasible;
  report["certificate"] = certificate_json(instance.universe, cert);
  report["xbar"] = xbar_rows(instance.universe, xbar);
  report["timing_ms"] = timer.ms();
  emit(report, opt);
  return feasible ? 0 : 1;
}

int run_solve(const Options& opt) {
  Timer timer;
  AuctionInstance instance = load_instance(opt.instance_path);
  OptimalAuction best = optimize(instance);

  const auto& u = instance.universe;
  Json report = base_report("solve", opt);
  report["revenue"] = best.revenue;
  Json rows = xbar_rows(u, best.xbar);
  for (int t = 0; t < u.type_count(); ++t) {
    int agent = u.agent_of(t);
    int local = t - u.first_ordinal(agent);
    rows[t]["service"] = best.per_agent[agent - 1].service[local];
    rows[t]["payment"] = best.per_agent[agent - 1].payment[local];
  }
  report["xbar"] = rows;
  report["mechanism"] = mechanism_json(u, best);
  if (best.table.has_value()) {
    VecXd replay = exact_interim<double>(u, instance.mass, *best.table);
    Json check;
    check["kind"] = "exact-replay";
    check["max_abs_error"] = (replay - best.xbar).cwiseAbs().maxCoeff();
    report["verification"] = check;
  } else {
    Json check;
    check["kind"] = "rounding-target";
    check["membership_slack"] = separate(best.xbar, rank_oracle(instance)).slack;
    report["verification"] = check;
  }
  report["timing_ms"] = timer.ms();
  emit(report, opt);
  return 0;
}

int run_implement(const Options& opt) {
  Timer timer;
  AuctionInstance instance = load_instance(opt.instance_path);
  const auto& u = instance.universe;
  VecXd xbar = load_rule(opt.rule_path, instance.universe);

  auto cert = separate(xbar, rank_oracle(instance));
  Json report = base_report("implement", opt);
  report["feasible"] = cert.slack >= -opt.tolerance;
  report["certificate"] = certificate_json(u, cert);
  report["xbar"] = xbar_rows(u, xbar);
  if (cert.slack < -opt.tolerance) {
    report["timing_ms"] = timer.ms();
    emit(report, opt);
    return 1;
  }

  if (instance.supply.kind == SupplyKind::kSingleUnit) {
    auto cover = max_coverage_lp(u, instance.mass, xbar);
    if (cover.achieved < xbar.sum() - std::max(opt.tolerance, kOptTol))
      throw SolverError("coverage LP disagrees with the separation verdict");
    SsaPoint point = eliminate_degenerate(u, instance.mass, cover.point);
    TransitionTable table = extract_table(u, instance.mass, point, 1e-7);
    report["mechanism"] = table_json(u, table);
    VecXd replay = exact_interim<double>(u, instance.mass, table);
    Json check;
    check["kind"] = "exact-replay";
    check["max_abs_error"] = (replay - xbar).cwiseAbs().maxCoeff();
    report["verification"] = check;
  } else {
    RraMechanism rra(rank_oracle(instance), xbar, supply_matroid(instance));
    Json mech;
    mech["kind"] = "priority-rounding";
    mech["supply"] = rra.constraint().kind;
    mech["target"] = xbar_rows(u, rra.target());
    report["mechanism"] = mech;
    Json check;
    check["kind"] = "rounding-target";
    check["membership_slack"] = cert.slack;
    report["verification"] = check;
  }
  report["timing_ms"] = timer.ms();
  emit(report, opt);
  return 0;
}

int run_simulate(const Options& opt) {
  Timer timer;
  AuctionInstance instance = load_instance(opt.instance_path);
  OptimalAuction best = optimize(instance);
  const auto& u = instance.universe;
  Rng rng(opt.seed);

  auto interim =
      monte_carlo_interim(u, instance.mass, runner_for(instance, best), best.xbar, opt.samples,
                          rng, opt.z_max);

  // Same stream continues into the revenue pass, so one seed fixes both.
  double sum = 0.0, sumsq = 0.0;
  for (long long s = 0; s < opt.samples; ++s) {
    TypeProfile profile = sample_profile(u, instance.mass, rng);
    double collected = 0.0;
    for (const AgentOutcome& o : assemble_and_run(instance, best, profile, rng))
      collected += o.payment;
    sum += collected;
    sumsq += collected * collected;
  }
  double n = static_cast<double>(opt.samples);
  double mean = sum / n;
  double var = std::max(sumsq / n - mean * mean, 0.0);
  double se = std::max(std::sqrt(var / n), 1.0 / n);
  double z = (mean - best.revenue) / se;
  bool revenue_ok = std::abs(z) <= opt.z_max;

  Json report = base_report("simulate", opt);
  report["samples"] = opt.samples;
  report["z_max"] = opt.z_max;
  report["revenue"] = best.revenue;
  report["interim"] = interim_json(u, interim);
  Json rev;
  rev["mean"] = mean;
  rev["se"] = se;
  rev["z"] = z;
  report["revenue_mc"] = rev;
  report["pass"] = interim.pass && revenue_ok;
  report["timing_ms"] = timer.ms();
  emit(report, opt);
  return interim.pass && revenue_ok ? 0 : 1;
}

int run_verify(const Options& opt) {
  Timer timer;
  AuctionInstance instance = load_instance(opt.instance_path);
  OptimalAuction best = optimize(instance);
  const auto& u = instance.universe;

  Json report = base_report("verify", opt);
  report["mode"] = opt.mode;
  report["revenue"] = best.revenue;
  bool pass = false;

  if (opt.mode == "exact") {
    if (!best.table.has_value()) {
      std::cerr << "error: exact interim is undefined for rounding mechanisms; use --mode mc\n";
      return 2;
    }
    VecXd replay = exact_interim<double>(u, instance.mass, *best.table);
    double err = (replay - best.xbar).cwiseAbs().maxCoeff();
    pass = err <= std::max(opt.tolerance, kOptTol);
    report["max_abs_error"] = err;
    report["xbar"] = xbar_rows(u, best.xbar);
  } else if (opt.mode == "mc") {
    Rng rng(opt.seed);
    auto interim = monte_carlo_interim(u, instance.mass, runner_for(instance, best), best.xbar,
                                       opt.samples, rng, opt.z_max);
    pass = interim.pass;
    report["samples"] = opt.samples;
    report["z_max"] = opt.z_max;
    report["interim"] = interim_json(u, interim);
  } else {  // flow
    if (instance.supply.kind == SupplyKind::kMatroid) {
      std::cerr << "error: the flow check covers unit supplies only; use --mode mc\n";
      return 2;
    }
    int k = instance.supply.kind == SupplyKind::kKUnit ? instance.supply.k : 1;
    long long guard = opt.guard > 0 ? opt.guard : 100000;
    auto flow = flow_oracle(u, instance.mass, best.xbar, k,
                            std::max(opt.tolerance, kOptTol), guard);
    pass = flow.saturated;
    report["saturated"] = flow.saturated;
    if (!flow.saturated) {
      Json cut = Json::array();
      for (int t = 0; t < u.type_count(); ++t)
        if (flow.cut_set >> t & 1) cut.push_back(u.qualified_label(t));
      report["cut_set"] = cut;
    }
  }
  report["pass"] = pass;
  report["timing_ms"] = timer.ms();
  emit(report, opt);
  return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"revenue-optimal auctions for single-service environments"};
  app.require_subcommand(1);
  Options opt;

  auto add_global = [&](CLI::App* cmd) {
    cmd->add_option("--seed", opt.seed, "rng seed; every random draw derives from it");
    cmd->add_option("--tolerance", opt.tolerance, "feasibility slack tolerance");
    cmd->add_option("--output", opt.output, "report format")
        ->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option("--guard-override", opt.guard, "raise enumeration guards to this size");
  };
  add_global(&app);

  CLI::App* check = app.add_subcommand("check", "feasibility verdict for an interim rule");
  check->add_option("instance", opt.instance_path, "instance document")->required();
  check->add_option("rule", opt.rule_path, "interim rule document")->required();

  CLI::App* solve = app.add_subcommand("solve", "revenue-optimal auction for an instance");
  solve->add_option("instance", opt.instance_path, "instance document")->required();

  CLI::App* implement =
      app.add_subcommand("implement", "executable mechanism for a given feasible rule");
  implement->add_option("instance", opt.instance_path, "instance document")->required();
  implement->add_option("rule", opt.rule_path, "interim rule document")->required();

  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo run of the optimal auction");
  simulate->add_option("instance", opt.instance_path, "instance document")->required();
  simulate->add_option("--samples", opt.samples, "Monte Carlo sample count");
  simulate->add_option("--z-max", opt.z_max, "acceptance band in standard errors");

  CLI::App* verify = app.add_subcommand("verify", "re-derive the solved interim rule");
  verify->add_option("instance", opt.instance_path, "instance document")->required();
  verify->add_option("--mode", opt.mode, "verification engine")
      ->check(CLI::IsMember({"exact", "mc", "flow"}));
  verify->add_option("--samples", opt.samples, "Monte Carlo sample count");
  verify->add_option("--z-max", opt.z_max, "acceptance band in standard errors");

  for (CLI::App* cmd : {check, solve, implement, simulate, verify}) {
    cmd->fallthrough();
    add_global(cmd);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(check)) return run_check(opt);
    if (app.got_subcommand(solve)) return run_solve(opt);
    if (app.got_subcommand(implement)) return run_implement(opt);
    if (app.got_subcommand(simulate)) return run_simulate(opt);
    return run_verify(opt);
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const InstanceTooLargeError& e) {
    std::cerr << "error: " << e.what() << " (see --guard-override)\n";
    return 3;
  } catch (const StructuralError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
