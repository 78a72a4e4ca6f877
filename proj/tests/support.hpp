#pragma once

// Test helpers: terse instance builders and a deliberately naive reference
// simulator used as an independent oracle for the non-preemptive engine.

#include <algorithm>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "bsim/engine.hpp"
#include "bsim/model.hpp"

namespace testing_support {

using bsim::Rat;

struct Req {
  std::string page;
  Rat arrival;
  std::optional<Rat> deadline = std::nullopt;
  Rat weight = 1;
  std::int64_t multiplicity = 1;
};

inline bsim::Instance make_instance(const std::vector<std::pair<std::string, Rat>>& pages, const std::vector<Req>& reqs,
                                    bsim::TimeModel tm = bsim::TimeModel::continuous,
                                    bsim::Setting setting = bsim::Setting::broadcast) {
  bsim::Instance inst;
  inst.time_model = tm;
  inst.setting = setting;
  for (const auto& [id, len] : pages) inst.pages.push_back({id, len});
  for (const auto& r : reqs) {
    bsim::Request req;
    req.page = *inst.find_page(r.page);
    req.arrival = r.arrival;
    req.deadline = r.deadline;
    req.weight = r.weight;
    req.multiplicity = r.multiplicity;
    inst.requests.push_back(req);
  }
  bsim::assign_request_indices(inst);
  bsim::validate_instance(inst);
  return inst;
}

inline Rat R(std::int64_t n, std::int64_t d = 1) { return Rat(n, d); }

// Chooses the next request straight from the policy definitions, without the
// library's queue views or selectors.
inline std::size_t reference_pick(const bsim::Instance& inst, const Rat& now, const std::vector<std::size_t>& pending,
                                  const bsim::PolicyConfig& policy) {
  using bsim::PolicyKind;
  auto tail = [&](std::size_t r) {
    const auto& q = inst.requests[r];
    return std::make_tuple(q.arrival, inst.pages[q.page].id, q.index);
  };
  auto slack = [&](std::size_t r) { return inst.requests[r].deadline.value() - inst.requests[r].arrival; };
  auto wait = [&](std::size_t r) { return now - inst.requests[r].arrival; };
  auto w = [&](std::size_t r) { return inst.requests[r].weight; };
  auto ratio = [&](std::size_t r) { return wait(r) / slack(r); };

  std::vector<std::size_t> cand = pending;
  auto keep_if = [&](auto pred) {
    std::vector<std::size_t> out;
    for (auto r : cand)
      if (pred(r)) out.push_back(r);
    cand = out;
  };
  const Rat c = policy.c.value_or(Rat(1));
  switch (policy.kind) {
    case PolicyKind::fifo:
      return *std::min_element(cand.begin(), cand.end(), [&](auto a, auto b) { return tail(a) < tail(b); });
    case PolicyKind::ssf:
      return *std::min_element(cand.begin(), cand.end(),
                               [&](auto a, auto b) { return std::tuple(slack(a), tail(a)) < std::tuple(slack(b), tail(b)); });
    case PolicyKind::lf:
    case PolicyKind::ssfw: {
      Rat top = ratio(cand[0]);
      for (auto r : cand) top = bsim::max(top, ratio(r));
      keep_if([&](auto r) { return c * ratio(r) >= top; });
      return *std::min_element(cand.begin(), cand.end(),
                               [&](auto a, auto b) { return std::tuple(slack(a), tail(a)) < std::tuple(slack(b), tail(b)); });
    }
    case PolicyKind::bwf: {
      Rat top = w(cand[0]) * wait(cand[0]);
      for (auto r : cand) top = bsim::max(top, w(r) * wait(r));
      keep_if([&](auto r) { return c * w(r) * wait(r) >= top; });
      return *std::min_element(cand.begin(), cand.end(),
                               [&](auto a, auto b) { return std::tuple(-w(a), tail(a)) < std::tuple(-w(b), tail(b)); });
    }
    case PolicyKind::srfw: {
      Rat top = w(cand[0]) * ratio(cand[0]);
      for (auto r : cand) top = bsim::max(top, w(r) * ratio(r));
      keep_if([&](auto r) { return c * w(r) * ratio(r) >= top; });
      return *std::min_element(cand.begin(), cand.end(), [&](auto a, auto b) {
        return std::tuple(slack(a) / w(a), tail(a)) < std::tuple(slack(b) / w(b), tail(b));
      });
    }
  }
  return cand[0];
}

struct ReferenceRun {
  std::vector<std::tuple<std::size_t, Rat, Rat>> attempts;  // page, start, end
  std::vector<Rat> finish;
};

// Non-preemptive event loop written from scratch: idle until the next
// arrival, otherwise transmit the chosen page to completion.
inline ReferenceRun reference_simulate(const bsim::Instance& inst, const Rat& speed, const bsim::PolicyConfig& policy) {
  const std::size_t n = inst.requests.size();
  std::vector<std::int64_t> left(n);
  for (std::size_t r = 0; r < n; ++r) left[r] = inst.requests[r].multiplicity;
  ReferenceRun run;
  run.finish.assign(n, Rat(-1));
  Rat now = 0;
  for (;;) {
    std::vector<std::size_t> pending;
    std::optional<Rat> next;
    for (std::size_t r = 0; r < n; ++r) {
      if (left[r] == 0) continue;
      if (inst.requests[r].arrival <= now) pending.push_back(r);
      else if (!next || inst.requests[r].arrival < *next) next = inst.requests[r].arrival;
    }
    if (pending.empty()) {
      if (!next) break;
      now = *next;
      continue;
    }
    std::size_t pick = reference_pick(inst, now, pending, policy);
    std::size_t page = inst.requests[pick].page;
    Rat end = now + inst.pages[page].length / speed;
    run.attempts.emplace_back(page, now, end);
    if (inst.setting == bsim::Setting::unicast) {
      if (--left[pick] == 0) run.finish[pick] = end;
    } else {
      for (auto r : pending)
        if (inst.requests[r].page == page) {
          left[r] = 0;
          run.finish[r] = end;
        }
    }
    now = end;
  }
  return run;
}

}  // namespace testing_support
