// bsim: command-line front end for the broadcast scheduling workbench.
//
// Exit codes: 0 success, 1 verification failure, 2 usage/config/instance
// error, 3 policy/instance mismatch.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "bsim/engine.hpp"
#include "bsim/generators.hpp"
#include "bsim/io.hpp"
#include "bsim/metrics.hpp"
#include "bsim/oracle.hpp"
#include "bsim/validate.hpp"
#include "bsim/verify.hpp"

using namespace bsim;

namespace {

constexpr int kOk = 0;
constexpr int kVerifyFailed = 1;
constexpr int kUsage = 2;
constexpr int kMismatch = 3;

Rat rat_flag(const std::string& text, const char* flag) {
  try {
    return Rat::parse(text);
  } catch (const std::exception&) {
    throw ConfigError(std::string("--") + flag + ": not a rational: '" + text + "'");
  }
}

void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") std::cout << content;
  else write_file(path, content);
}

// Opens `path` for a CSV report, or returns null when no report was asked for.
std::unique_ptr<std::ofstream> open_report(const std::string& path) {
  if (path.empty()) return nullptr;
  auto out = std::make_unique<std::ofstream>(path);
  if (!*out) throw ConfigError("cannot write report '" + path + "'");
  return out;
}

struct RunArgs {
  std::string instance, policy, c, speed = "1", mode = "nonpreemptive", out, log;
};

int cmd_run(const RunArgs& a) {
  Instance inst = parse_instance(read_file(a.instance));
  SimConfig cfg;
  auto kind = parse_policy_kind(a.policy);
  if (!kind) throw ConfigError("--policy: unknown policy '" + a.policy + "'");
  cfg.policy.kind = *kind;
  if (!a.c.empty()) cfg.policy.c = rat_flag(a.c, "c");
  cfg.speed = rat_flag(a.speed, "speed");
  if (a.mode == "nonpreemptive") cfg.mode = Mode::nonpreemptive;
  else if (a.mode == "preemptive") cfg.mode = Mode::preemptive;
  else throw ConfigError("--mode: unknown mode '" + a.mode + "'");

  std::ofstream log_file;
  SimOptions opts;
  if (!a.log.empty()) {
    log_file.open(a.log);
    if (!log_file) throw ConfigError("cannot write log '" + a.log + "'");
    opts.log = &log_file;
  }
  Transcript tr = simulate(inst, cfg, opts);
  if (!a.out.empty()) write_file(a.out, transcript_to_json(inst, tr).dump(2) + "\n");

  std::cout << "max_response = " << evaluate(inst, tr, MetricKind::max_response) << "\n";
  std::cout << "max_weighted_response = " << evaluate(inst, tr, MetricKind::max_weighted_response) << "\n";
  if (inst.has_deadlines()) {
    std::cout << "max_delay_factor = " << evaluate(inst, tr, MetricKind::max_delay_factor) << "\n";
    std::cout << "max_weighted_delay_factor = " << evaluate(inst, tr, MetricKind::max_weighted_delay_factor) << "\n";
  }
  return kOk;
}

struct VerifyArgs {
  std::string family = "exhaustive", epsilon = "1", report;
  int max_pages = 3, horizon = 5, max_requests = 5, seeds = 500, full_deadline_requests = 4;
  std::uint64_t seed = 0;
  bool varying_sizes = false;
};

FamilySpec family_from(const VerifyArgs& a) {
  FamilySpec fam;
  if (a.family == "exhaustive") fam.kind = FamilyKind::exhaustive;
  else if (a.family == "random") fam.kind = FamilyKind::random;
  else throw ConfigError("--family: expected exhaustive or random, got '" + a.family + "'");
  if (fam.kind == FamilyKind::exhaustive && a.varying_sizes) throw ConfigError("--varying-sizes requires --family random");
  fam.small.max_pages = a.max_pages;
  fam.small.horizon = a.horizon;
  fam.small.max_requests = a.max_requests;
  fam.full_deadline_requests = a.full_deadline_requests;
  fam.seeds = a.seeds;
  fam.first_seed = a.seed;
  fam.varying_sizes = a.varying_sizes;
  return fam;
}

int finish_verify(const VerifyReport& r) {
  write_verify_summary(std::cout, r);
  if (r.passed()) return kOk;
  if (r.first_violation) std::cerr << "violating instance:\n" << serialize_instance(*r.first_violation) << "\n";
  if (r.selection_violations) std::cerr << r.selection_violations << " decisions selected a request outside Q(t)\n";
  return kVerifyFailed;
}

int cmd_verify_fifo(const VerifyArgs& a) {
  FamilySpec fam = family_from(a);
  auto csv = open_report(a.report);
  return finish_verify(verify_fifo(fam, csv.get()));
}

int cmd_verify_ssfw(const VerifyArgs& a) {
  FamilySpec fam = family_from(a);
  auto csv = open_report(a.report);
  return finish_verify(verify_ssfw(fam, rat_flag(a.epsilon, "epsilon"), csv.get()));
}

struct LowerBoundArgs {
  std::int64_t s = 1, c = 2;
  std::optional<int> k;
  bool compressed = false;
};

// Per-job replay is refused beyond this many jobs.
constexpr std::int64_t kPerJobLimit = 2'000'000;

int cmd_lf_lowerbound(const LowerBoundArgs& a) {
  if (!a.compressed) {
    AdversaryPlan plan = make_adversary_plan(a.s, a.c, a.k);
    std::int64_t jobs = 0;
    for (auto m : plan.m) jobs += m;
    if (jobs > kPerJobLimit)
      throw ConfigError("per-job replay of " + std::to_string(jobs) + " jobs is infeasible; use --compressed");
  }
  LowerBoundReport r = lf_lowerbound(a.s, a.c, a.k, a.compressed);
  std::cout << "k = " << r.plan.k << "\n";
  std::cout << "jobs = " << r.jobs << "\n";
  std::cout << "mode = " << (r.compressed ? "compressed" : "per-job") << "\n";
  std::cout << "lf_max_delay_factor = " << r.lf_value << "\n";
  std::cout << "opt_max_delay_factor = " << r.opt_value << "\n";
  std::cout << "ratio = " << r.ratio << "\n";
  for (const auto& f : r.failures) std::cerr << "FAIL " << f << "\n";
  return r.passed() ? kOk : kVerifyFailed;
}

struct MetricsArgs {
  std::string transcript, metric, report;
};

int cmd_metrics(const MetricsArgs& a) {
  auto [inst, tr] = transcript_from_json(parse_json_text(read_file(a.transcript), "transcript"));
  auto kind = parse_metric_kind(a.metric);
  if (!kind) throw ConfigError("--metric: unknown metric '" + a.metric + "'");
  auto problems = validate_transcript(inst, tr);
  if (!problems.empty()) {
    for (const auto& p : problems) std::cerr << p << "\n";
    throw InstanceError("transcript is invalid");
  }
  std::cout << to_string(*kind) << " = " << evaluate(inst, tr, *kind) << "\n";
  if (auto csv = open_report(a.report)) write_report_csv(*csv, per_request_report(inst, tr));
  return kOk;
}

struct OracleArgs {
  std::string instance, metric, speed = "1", out;
  std::optional<int> cap;
};

int cmd_oracle(const OracleArgs& a) {
  Instance inst = parse_instance(read_file(a.instance));
  auto kind = parse_metric_kind(a.metric);
  if (!kind) throw ConfigError("--metric: unknown metric '" + a.metric + "'");
  OracleResult res = optimal_schedule(inst, *kind, rat_flag(a.speed, "speed"), a.cap.value_or(oracle_cap_from_env()));
  emit(a.out, oracle_result_to_json(inst, res).dump(2) + "\n");
  return kOk;
}

struct GenAdversaryArgs {
  std::int64_t s = 1, c = 2;
  std::optional<int> k;
  bool expand = false;
  std::string out, plan_out;
};

int cmd_gen_adversary(const GenAdversaryArgs& a) {
  auto [plan, inst] = build_lf_adversary(a.s, a.c, a.k);
  if (a.expand) {
    std::int64_t jobs = 0;
    for (auto m : plan.m) jobs += m;
    if (jobs > kPerJobLimit) throw ConfigError("--expand would write " + std::to_string(jobs) + " requests");
    inst = expand_multiplicities(inst).instance;
  }
  emit(a.out, serialize_instance(inst) + "\n");
  if (!a.plan_out.empty()) write_file(a.plan_out, plan_to_json(plan).dump(2) + "\n");
  return kOk;
}

struct GenRandomArgs {
  std::uint64_t seed = 0;
  int pages = 3, requests = 5, horizon = 5, max_length = 1;
  bool deadlines = false, continuous = false, unicast = false;
  std::string weights = "unit", out;
};

int cmd_gen_random(const GenRandomArgs& a) {
  RandomParams p;
  p.pages = a.pages;
  p.requests = a.requests;
  p.horizon = a.horizon;
  p.max_length = a.max_length;
  p.slotted = !a.continuous;
  p.setting = a.unicast ? Setting::unicast : Setting::broadcast;
  p.deadlines = a.deadlines ? DeadlineStyle::random : DeadlineStyle::none;
  if (a.weights == "unit") p.weights = WeightStyle::unit;
  else if (a.weights == "random") p.weights = WeightStyle::random;
  else if (a.weights == "inverse-slack") p.weights = WeightStyle::inverse_slack;
  else throw ConfigError("--weights: expected unit, random or inverse-slack, got '" + a.weights + "'");
  emit(a.out, serialize_instance(random_instance(a.seed, p)) + "\n");
  return kOk;
}

void add_family_flags(CLI::App* cmd, VerifyArgs& a) {
  cmd->add_option("--family", a.family, "exhaustive or random")->capture_default_str();
  cmd->add_option("--max-pages", a.max_pages, "exhaustive: number of pages")->capture_default_str();
  cmd->add_option("--horizon", a.horizon, "exhaustive: last arrival slot")->capture_default_str();
  cmd->add_option("--max-requests", a.max_requests, "exhaustive: largest request count")->capture_default_str();
  cmd->add_option("--seeds", a.seeds, "random: number of instances")->capture_default_str();
  cmd->add_option("--seed", a.seed, "random: first seed")->capture_default_str();
  cmd->add_flag("--varying-sizes", a.varying_sizes, "random: page lengths up to 3, continuous time");
  cmd->add_option("--report", a.report, "write a CSV row per instance to this path");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Broadcast scheduling simulation and verification workbench"};
  app.require_subcommand(1);
  int code = kOk;
  std::function<int()> action;

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "simulate a policy on an instance");
  run_cmd->add_option("--instance", run.instance, "instance JSON")->required();
  run_cmd->add_option("--policy", run.policy, "fifo|ssf|ssfw|bwf|srfw|lf")->required();
  run_cmd->add_option("--c", run.c, "waiting parameter for ssfw, bwf, srfw");
  run_cmd->add_option("--speed", run.speed, "server speed")->capture_default_str();
  run_cmd->add_option("--mode", run.mode, "nonpreemptive|preemptive")->capture_default_str();
  run_cmd->add_option("--out", run.out, "transcript JSON output");
  run_cmd->add_option("--log", run.log, "event log output");
  run_cmd->callback([&] { action = [&] { return cmd_run(run); }; });

  VerifyArgs vfifo, vssfw;
  auto* verify = app.add_subcommand("verify", "check a competitive bound over an instance family");
  verify->require_subcommand(1);
  auto* vf = verify->add_subcommand("fifo", "FIFO max response within factor 2 of the optimum");
  add_family_flags(vf, vfifo);
  vf->callback([&] { action = [&] { return cmd_verify_fifo(vfifo); }; });
  auto* vs = verify->add_subcommand("ssfw", "SSF-W max delay factor within c^2 of the optimum");
  add_family_flags(vs, vssfw);
  vs->add_option("--epsilon", vssfw.epsilon, "speed slack; sets speed and c")->capture_default_str();
  vs->add_option("--full-deadline-requests", vssfw.full_deadline_requests,
                 "exhaustive: enumerate every deadline up to this many requests, shared slacks above")
      ->capture_default_str();
  vs->callback([&] { action = [&] { return cmd_verify_ssfw(vssfw); }; });

  LowerBoundArgs lb;
  auto* lb_cmd = app.add_subcommand("lf-lowerbound", "replay the adversarial family against LF");
  lb_cmd->add_option("--s", lb.s, "integer speed")->required();
  lb_cmd->add_option("--c", lb.c, "integer target ratio")->required();
  lb_cmd->add_option("--k", lb.k, "number of groups after the first");
  lb_cmd->add_flag("--compressed", lb.compressed, "simulate groups in batches");
  lb_cmd->callback([&] { action = [&] { return cmd_lf_lowerbound(lb); }; });

  MetricsArgs met;
  auto* met_cmd = app.add_subcommand("metrics", "evaluate a transcript");
  met_cmd->add_option("--transcript", met.transcript, "transcript JSON")->required();
  met_cmd->add_option("--metric", met.metric, "max_response|max_delay_factor|max_weighted_response|max_weighted_delay_factor")
      ->required();
  met_cmd->add_option("--report", met.report, "per-request CSV output");
  met_cmd->callback([&] { action = [&] { return cmd_metrics(met); }; });

  OracleArgs orc;
  auto* orc_cmd = app.add_subcommand("oracle", "exact offline optimum of a small instance");
  orc_cmd->add_option("--instance", orc.instance, "instance JSON")->required();
  orc_cmd->add_option("--metric", orc.metric, "objective")->required();
  orc_cmd->add_option("--speed", orc.speed, "server speed")->capture_default_str();
  orc_cmd->add_option("--cap", orc.cap, "largest total job count (default 8 or BSIM_ORACLE_CAP)");
  orc_cmd->add_option("--out", orc.out, "result JSON output (default stdout)");
  orc_cmd->callback([&] { action = [&] { return cmd_oracle(orc); }; });

  GenAdversaryArgs ga;
  GenRandomArgs gr;
  auto* gen = app.add_subcommand("gen", "generate instances");
  gen->require_subcommand(1);
  auto* ga_cmd = gen->add_subcommand("lf-adversary", "adversarial instance against LF");
  ga_cmd->add_option("--s", ga.s, "integer speed")->required();
  ga_cmd->add_option("--c", ga.c, "integer target ratio")->required();
  ga_cmd->add_option("--k", ga.k, "number of groups after the first");
  ga_cmd->add_flag("--expand", ga.expand, "one request per job instead of multiplicities");
  ga_cmd->add_option("--out", ga.out, "instance JSON output (default stdout)");
  ga_cmd->add_option("--plan-out", ga.plan_out, "plan JSON output");
  ga_cmd->callback([&] { action = [&] { return cmd_gen_adversary(ga); }; });
  auto* gr_cmd = gen->add_subcommand("random", "seeded random instance");
  gr_cmd->add_option("--seed", gr.seed, "random seed")->capture_default_str();
  gr_cmd->add_option("--pages", gr.pages, "number of pages")->capture_default_str();
  gr_cmd->add_option("--requests", gr.requests, "number of requests")->capture_default_str();
  gr_cmd->add_option("--horizon", gr.horizon, "last arrival time")->capture_default_str();
  gr_cmd->add_option("--max-length", gr.max_length, "largest page length (continuous only)")->capture_default_str();
  gr_cmd->add_flag("--deadlines", gr.deadlines, "draw deadlines");
  gr_cmd->add_option("--weights", gr.weights, "unit|random|inverse-slack")->capture_default_str();
  gr_cmd->add_flag("--continuous", gr.continuous, "half-integer times instead of slots");
  gr_cmd->add_flag("--unicast", gr.unicast, "one page per request");
  gr_cmd->add_option("--out", gr.out, "instance JSON output (default stdout)");
  gr_cmd->callback([&] { action = [&] { return cmd_gen_random(gr); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    code = action ? action() : kUsage;
  } catch (const MismatchError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kMismatch;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return code;
}
