#pragma once

// Batch drivers that check the competitive guarantees empirically: run an
// online policy and the offline oracle over a family of instances and track
// the worst ratio with exact arithmetic.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "bsim/engine.hpp"
#include "bsim/generators.hpp"
#include "bsim/grouped.hpp"
#include "bsim/metrics.hpp"
#include "bsim/oracle.hpp"
#include "bsim/validate.hpp"

namespace bsim {

enum class FamilyKind { exhaustive, random };

struct FamilySpec {
  FamilyKind kind = FamilyKind::exhaustive;
  // exhaustive
  SmallFamily small;
  // Request counts above this use one shared slack per instance instead of
  // every deadline combination (only when deadlines are needed).
  int full_deadline_requests = 4;
  std::vector<std::int64_t> shared_slacks{1, 2, 3};
  // random
  int seeds = 500;
  std::uint64_t first_seed = 0;
  int max_requests = 6;
  bool varying_sizes = false;
  int max_length = 3;
  int pages = 3;
  int horizon = 6;
};

struct VerifyReport {
  std::string label;
  Rat speed = 1;
  std::optional<Rat> c;
  Rat bound;
  std::size_t instances = 0;
  Rat max_ratio;
  std::size_t violations = 0;
  std::optional<Instance> first_violation;
  // SSF-W only: decisions whose chosen request was outside Q(t).
  std::size_t selection_violations = 0;

  bool passed() const { return violations == 0 && selection_violations == 0; }
};

inline constexpr const char* kVerifyCsvHeader = "index,family,online,optimum,ratio";

namespace detail {

inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Random family member: 1..max_requests requests on a few pages.
inline Instance family_random_instance(const FamilySpec& fam, std::uint64_t seed, bool deadlines) {
  RandomParams p;
  p.pages = fam.pages;
  p.requests = 1 + static_cast<int>(mix_seed(seed) % static_cast<std::uint64_t>(fam.max_requests));
  p.horizon = fam.horizon;
  p.slotted = !fam.varying_sizes;
  p.max_length = fam.varying_sizes ? fam.max_length : 1;
  p.deadlines = deadlines ? DeadlineStyle::random : DeadlineStyle::none;
  return random_instance(seed, p);
}

inline void for_each_family_instance(const FamilySpec& fam, bool deadlines, const std::function<void(const Instance&)>& visit) {
  if (fam.kind == FamilyKind::random) {
    for (int i = 0; i < fam.seeds; ++i) visit(family_random_instance(fam, fam.first_seed + static_cast<std::uint64_t>(i), deadlines));
    return;
  }
  if (!deadlines) {
    for_each_small_instance(fam.small, visit);
    return;
  }
  SmallFamily full = fam.small;
  full.deadlines = true;
  full.max_requests = std::min(fam.small.max_requests, fam.full_deadline_requests);
  if (full.max_requests >= full.min_requests) for_each_small_instance(full, visit);
  if (fam.small.max_requests <= fam.full_deadline_requests) return;
  SmallFamily rest = fam.small;
  rest.deadlines = false;
  rest.min_requests = std::max(fam.small.min_requests, fam.full_deadline_requests + 1);
  for_each_small_instance(rest, [&](const Instance& base) {
    for (auto slack : fam.shared_slacks) {
      Instance inst = base;
      for (auto& r : inst.requests) r.deadline = r.arrival + Rat(slack);
      visit(inst);
    }
  });
}

inline const char* family_name(const FamilySpec& fam) {
  if (fam.kind == FamilyKind::exhaustive) return "exhaustive";
  return fam.varying_sizes ? "random-varying" : "random-unit";
}

// Runs `online` on every family member and compares with the oracle at speed 1.
inline VerifyReport run_family(VerifyReport report, const FamilySpec& fam, MetricKind kind,
                               const std::function<Rat(const Instance&)>& online, std::ostream* csv) {
  const bool deadlines = needs_deadlines(kind);
  if (csv) *csv << kVerifyCsvHeader << '\n';
  for_each_family_instance(fam, deadlines, [&](const Instance& inst) {
    const Rat on = online(inst);
    const Rat opt = optimal_schedule(inst, kind, 1).objective;
    const Rat ratio = on / opt;
    if (csv) *csv << report.instances << ',' << family_name(fam) << ',' << on << ',' << opt << ',' << ratio << '\n';
    if (report.instances == 0 || ratio > report.max_ratio) report.max_ratio = ratio;
    if (ratio > report.bound) {
      ++report.violations;
      if (!report.first_violation) report.first_violation = inst;
    }
    ++report.instances;
  });
  return report;
}

}  // namespace detail

// FIFO at speed 1 against the optimum, maximum response time, bound 2.
inline VerifyReport verify_fifo(const FamilySpec& fam, std::ostream* csv = nullptr) {
  VerifyReport report;
  report.label = "fifo";
  report.bound = 2;
  SimConfig cfg;
  cfg.policy = {PolicyKind::fifo, std::nullopt};
  return detail::run_family(std::move(report), fam, MetricKind::max_response,
                            [&](const Instance& inst) { return evaluate(inst, simulate(inst, cfg), MetricKind::max_response); }, csv);
}

// Speed and c for SSF-W: unit pages use speed 1+eps and c = 1 + 3/eps,
// varying sizes use preemption, speed 2+eps and c = 1 + 5/eps.
inline SimConfig ssfw_config(const Rat& epsilon, bool varying_sizes) {
  if (epsilon.sign() <= 0) throw ConfigError("epsilon must be positive, got " + epsilon.str());
  SimConfig cfg;
  cfg.speed = (varying_sizes ? Rat(2) : Rat(1)) + epsilon;
  cfg.mode = varying_sizes ? Mode::preemptive : Mode::nonpreemptive;
  cfg.policy = {PolicyKind::ssfw, Rat(1) + Rat(varying_sizes ? 5 : 3) / epsilon};
  return cfg;
}

// SSF-W against the optimum, maximum delay factor, bound c^2. Every
// scheduling decision is also checked to pick a member of Q(t).
inline VerifyReport verify_ssfw(const FamilySpec& fam, const Rat& epsilon, std::ostream* csv = nullptr) {
  const SimConfig cfg = ssfw_config(epsilon, fam.varying_sizes);
  VerifyReport report;
  report.label = "ssfw";
  report.speed = cfg.speed;
  report.c = cfg.policy.c;
  report.bound = *cfg.policy.c * *cfg.policy.c;
  std::size_t outside_q = 0;
  SimOptions opts;
  opts.observer = [&](const QueueView& view, std::size_t chosen) {
    auto q = ssfw_queue(view, *cfg.policy.c);
    if (std::find(q.begin(), q.end(), chosen) == q.end()) ++outside_q;
  };
  report = detail::run_family(std::move(report), fam, MetricKind::max_delay_factor,
                              [&](const Instance& inst) { return evaluate(inst, simulate(inst, cfg, opts), MetricKind::max_delay_factor); },
                              csv);
  report.selection_violations = outside_q;
  return report;
}

inline void write_verify_summary(std::ostream& os, const VerifyReport& r) {
  os << "policy = " << r.label << "\n";
  os << "speed = " << r.speed << "\n";
  if (r.c) os << "c = " << *r.c << "\n";
  os << "instances = " << r.instances << "\n";
  os << "max_ratio = " << r.max_ratio << "\n";
  os << "bound = " << r.bound << "\n";
  os << "violations = " << r.violations << "\n";
  if (r.label == "ssfw") os << "selections_outside_q = " << r.selection_violations << "\n";
}

// Outcome of replaying the adversarial family against LF.
struct LowerBoundReport {
  AdversaryPlan plan;
  bool compressed = false;
  std::int64_t jobs = 0;
  Rat lf_value;
  Rat opt_value;
  Rat ratio;
  std::vector<Rat> measured_ratio;  // per group, before the clamp
  std::vector<std::string> failures;

  bool passed() const { return failures.empty(); }
};

// Builds the plan, runs LF at speed s (one job at a time, or in batches when
// `compressed`), and checks every closed-form quantity exactly.
inline LowerBoundReport lf_lowerbound(std::int64_t s, std::int64_t c, std::optional<int> k_override = std::nullopt,
                                      bool compressed = false) {
  LowerBoundReport out;
  auto [plan, inst] = build_lf_adversary(s, c, k_override);
  out.plan = plan;
  out.compressed = compressed;
  for (const auto& r : inst.requests) out.jobs += r.multiplicity;
  const std::size_t groups = inst.requests.size();

  auto expect = [&](const std::string& what, const Rat& want, const Rat& got) {
    if (want != got) out.failures.push_back(what + ": expected " + want.str() + ", got " + got.str());
  };

  SimConfig cfg;
  cfg.speed = Rat(s);
  cfg.policy = {PolicyKind::lf, std::nullopt};

  // Per group: first start and last end of its attempts, in plan coordinates.
  std::vector<std::optional<Rat>> first(groups), last(groups);
  std::vector<std::size_t> order;  // group of each run, in time order
  auto note = [&](std::size_t g, const Rat& from, const Rat& to) {
    const Rat f = from - plan.shift, t = to - plan.shift;
    if (!first[g] || f < *first[g]) first[g] = f;
    if (!last[g] || t > *last[g]) last[g] = t;
    if (order.empty() || order.back() != g) order.push_back(g);
  };

  if (compressed) {
    GroupedResult res = simulate_grouped_unicast(inst, cfg);
    for (const auto& a : res.transcript.attempts) note(a.forcing_request, a.start, *a.end);
    out.lf_value = evaluate(inst, res.transcript, MetricKind::max_delay_factor);
    for (std::size_t g = 0; g < groups; ++g) out.measured_ratio.push_back(res.max_wait_ratio[g].value_or(Rat(0)));
  } else {
    Expansion ex = expand_multiplicities(inst);
    Transcript tr = simulate(ex.instance, cfg);
    out.measured_ratio.assign(groups, Rat(0));
    for (const auto& a : tr.attempts) note(ex.origin[a.forcing_request], a.start, *a.end);
    for (RequestId r = 0; r < ex.instance.requests.size(); ++r) {
      const auto& req = ex.instance.requests[r];
      Rat ratio = (*tr.finish[r] - req.arrival) / *req.slack();
      out.measured_ratio[ex.origin[r]] = max(out.measured_ratio[ex.origin[r]], ratio);
    }
    out.lf_value = evaluate(ex.instance, tr, MetricKind::max_delay_factor);
  }

  std::vector<std::size_t> want_order(groups);
  for (std::size_t g = 0; g < groups; ++g) want_order[g] = g;
  if (order != want_order) out.failures.push_back("groups are not processed contiguously in order 0..k");
  for (std::size_t g = 0; g < groups; ++g) {
    const std::string tag = "group " + std::to_string(g);
    if (!first[g] || !last[g]) {
      out.failures.push_back(tag + ": never transmitted");
      continue;
    }
    expect(tag + " start", g == 0 ? plan.A[0] : plan.F[g - 1], *first[g]);
    expect(tag + " end", plan.F[g], *last[g]);
    expect(tag + " wait ratio", plan.R[g], out.measured_ratio[g]);
  }
  // When group i finishes, the next group has caught up with its ratio.
  for (std::size_t g = 0; g + 1 < groups; ++g)
    expect("ratio of group " + std::to_string(g + 1) + " at F_" + std::to_string(g), (plan.F[g] - plan.A[g]) / plan.S[g],
           (plan.F[g] - plan.A[g + 1]) / plan.S[g + 1]);
  expect("LF max delay factor", Rat(c), out.lf_value);

  Transcript ref = reference_opt_schedule(plan);
  for (const auto& v : validate_transcript(inst, ref)) out.failures.push_back("reference schedule: " + v);
  out.opt_value = evaluate(inst, ref, MetricKind::max_delay_factor);
  expect("reference max delay factor", Rat(1), out.opt_value);
  out.ratio = out.lf_value / out.opt_value;
  return out;
}

}  // namespace bsim
