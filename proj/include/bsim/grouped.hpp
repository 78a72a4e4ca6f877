#pragma once

// Fast-forward simulation of unicast instances whose requests carry large
// multiplicities. Decisions are identical to running simulate() on the same
// instance one job at a time; consecutive jobs of the winning group are
// emitted as one batched attempt until another group would take over.

#include <optional>
#include <vector>

#include "bsim/engine.hpp"

namespace bsim {

struct GroupedResult {
  Transcript transcript;
  // Per request: (last completion - arrival) / slack, when it has a deadline.
  std::vector<std::optional<Rat>> max_wait_ratio;
};

namespace detail {

// Smallest j in [1, limit) such that h is released at t + j*step and
// `h_wins(tau)` holds there; `h_wins` is described by the sign of the linear
// function slope*tau + offset (>= 0 when `ties_to_h`, > 0 otherwise).
inline std::optional<std::int64_t> first_takeover(const Rat& t, const Rat& step, const Rat& h_arrival, const Rat& slope,
                                                  const Rat& offset, bool ties_to_h, std::int64_t limit) {
  auto as_step = [&](const Rat& j) -> std::optional<std::int64_t> {
    if (j >= Rat(limit)) return std::nullopt;
    return j.to_int64();
  };
  Rat j_release = max(Rat(1), ((h_arrival - t) / step).ceil());
  auto holds = [&](const Rat& tau) {
    int s = (slope * tau + offset).sign();
    return s > 0 || (s == 0 && ties_to_h);
  };
  if (slope.is_zero()) {
    if (!holds(t)) return std::nullopt;
    return as_step(j_release);
  }
  Rat root = -offset / slope;
  if (slope.sign() > 0) {
    Rat x = (root - t) / step;
    Rat j_cross = ties_to_h ? x.ceil() : x.floor() + Rat(1);
    return as_step(max(j_release, j_cross));
  }
  if (holds(t + j_release * step)) return as_step(j_release);
  return std::nullopt;
}

}  // namespace detail

inline GroupedResult simulate_grouped_unicast(const Instance& inst, const SimConfig& config) {
  validate_instance(inst);
  config.validate(inst);
  if (inst.setting != Setting::unicast) throw ConfigError("grouped simulation requires the unicast setting");
  if (config.mode != Mode::nonpreemptive) throw ConfigError("grouped simulation requires nonpreemptive mode");
  if (config.policy.kind != PolicyKind::lf && config.policy.kind != PolicyKind::fifo)
    throw ConfigError(std::string("grouped simulation supports lf and fifo, got ") + to_string(config.policy.kind));

  const std::size_t n = inst.requests.size();
  GroupedResult out;
  out.transcript.speed = config.speed;
  out.transcript.finish.assign(n, std::nullopt);
  out.max_wait_ratio.assign(n, std::nullopt);
  std::vector<std::int64_t> remaining(n);
  for (RequestId r = 0; r < n; ++r) remaining[r] = inst.requests[r].multiplicity;

  Rat now;
  for (;;) {
    std::vector<RequestId> present;
    std::optional<Rat> next_arrival;
    for (RequestId r = 0; r < n; ++r) {
      if (remaining[r] == 0) continue;
      const Rat& a = inst.requests[r].arrival;
      if (a <= now) present.push_back(r);
      else next_arrival = next_arrival ? min(*next_arrival, a) : a;
    }
    if (present.empty()) {
      if (!next_arrival) break;
      now = *next_arrival;
      continue;
    }
    QueueView view = make_view(inst, now, present);
    const QueueEntry& g = view.entries[select(view, config.policy)];
    const Request& greq = inst.requests[g.request];
    const Rat step = inst.pages[greq.page].length / config.speed;

    std::int64_t run = remaining[g.request];
    for (RequestId h = 0; h < n; ++h) {
      if (h == g.request || remaining[h] == 0) continue;
      QueueEntry he = make_entry(inst, h, now);
      std::optional<std::int64_t> j;
      if (config.policy.kind == PolicyKind::fifo) {
        bool h_first = detail::tail_key(he) < detail::tail_key(g);
        j = detail::first_takeover(now, step, he.arrival, Rat(0), h_first ? Rat(1) : Rat(-1), false, run);
      } else {
        // ratio_h(tau) - ratio_g(tau)
        Rat slope = Rat(1) / *he.slack - Rat(1) / *g.slack;
        Rat offset = g.arrival / *g.slack - he.arrival / *he.slack;
        bool ties_to_h = detail::slack_then_tail(he, g);
        j = detail::first_takeover(now, step, he.arrival, slope, offset, ties_to_h, run);
      }
      if (j) run = std::min(run, *j);
    }

    TransmissionAttempt a;
    a.page = greq.page;
    a.start = now;
    a.end = now + step * Rat(run);
    a.segments.push_back({now, *a.end});
    a.forcing_request = g.request;
    a.count = run;
    now = *a.end;
    remaining[g.request] -= run;
    if (remaining[g.request] == 0) {
      out.transcript.finish[g.request] = now;
      if (greq.deadline) out.max_wait_ratio[g.request] = (now - greq.arrival) / *greq.slack();
    }
    out.transcript.attempts.push_back(std::move(a));
  }
  return out;
}

// Splits every batched attempt into `count` unit attempts.
inline Transcript expand_batches(const Instance& inst, const Transcript& tr) {
  Transcript out;
  out.speed = tr.speed;
  out.finish = tr.finish;
  for (const auto& a : tr.attempts) {
    if (a.count == 1) {
      out.attempts.push_back(a);
      continue;
    }
    const Rat step = inst.pages[a.page].length / tr.speed;
    for (std::int64_t j = 0; j < a.count; ++j) {
      TransmissionAttempt unit = a;
      unit.count = 1;
      unit.start = a.start + step * Rat(j);
      unit.end = unit.start + step;
      unit.segments = {{unit.start, *unit.end}};
      out.attempts.push_back(std::move(unit));
    }
  }
  return out;
}

}  // namespace bsim
