#pragma once

// Single-server discrete-event simulator for the sequential transmission
// model. Non-preemptive mode runs every attempt to completion; preemptive
// mode (SSF-W only) pauses, resumes and restarts transmissions when a
// smaller-slack request enters Q(t).
//
// Event log (one line per event, written when SimOptions::log is set):
//   t=<rat> arrive request=<id> page=<page>
//   t=<rat> start attempt=<n> page=<page> forcing=<id>
//   t=<rat> resume attempt=<n> page=<page> forcing=<id> work=<rat>
//   t=<rat> preempt attempt=<n> page=<page> work=<rat>
//   t=<rat> abandon attempt=<n> page=<page> work=<rat>
//   t=<rat> handover attempt=<n> forcing=<id>
//   t=<rat> complete attempt=<n> page=<page> satisfied=<count>

#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "bsim/model.hpp"
#include "bsim/policies.hpp"

namespace bsim {

enum class Mode { nonpreemptive, preemptive };

inline const char* to_string(Mode m) { return m == Mode::nonpreemptive ? "nonpreemptive" : "preemptive"; }

struct SimConfig {
  Rat speed = 1;
  Mode mode = Mode::nonpreemptive;
  PolicyConfig policy;

  // Throws ConfigError for invalid combinations and MismatchError when the
  // policy needs deadlines the instance lacks.
  void validate(const Instance& inst) const {
    if (speed < Rat(1)) throw ConfigError("speed " + speed.str() + " must be at least 1");
    policy.validate();
    if (mode == Mode::preemptive && policy.kind != PolicyKind::ssfw)
      throw ConfigError(std::string("preemptive mode requires policy ssfw, got ") + to_string(policy.kind));
    if (mode == Mode::preemptive && inst.time_model == TimeModel::slotted)
      throw ConfigError("slotted requires nonpreemptive");
    if (needs_deadlines(policy.kind)) {
      for (RequestId r = 0; r < inst.requests.size(); ++r)
        if (!inst.requests[r].deadline)
          throw MismatchError(std::string("policy ") + to_string(policy.kind) + " requires deadlines; " + request_label(inst, r) +
                              " has none");
    }
  }
};

// Called at every dispatch decision with the view and the chosen entry.
using DecisionObserver = std::function<void(const QueueView&, std::size_t chosen)>;

struct SimOptions {
  std::ostream* log = nullptr;
  DecisionObserver observer;
};

struct RatioLine {
  RequestId request = 0;
  Rat arrival;
  Rat slack;
};

struct QEntryCrossing {
  Rat time;
  RequestId request = 0;

  friend bool operator==(const QEntryCrossing&, const QEntryCrossing&) = default;
};

// Earliest t > now at which a request outside Q(now) satisfies
// c (t - a_j)/S_j >= max_i (t - a_i)/S_i over the fixed released set.
// Returns nothing when no such t exists before `horizon`. Equal times go to
// the request listed first.
inline std::optional<QEntryCrossing> next_q_entry_crossing(std::span<const RatioLine> released, const Rat& now, const Rat& c,
                                                          const std::optional<Rat>& horizon = std::nullopt) {
  if (released.size() < 2) return std::nullopt;
  Rat alpha;
  bool first = true;
  for (const auto& line : released) {
    Rat r = (now - line.arrival) / line.slack;
    if (first || r > alpha) alpha = r;
    first = false;
  }
  std::optional<QEntryCrossing> best;
  for (const auto& j : released) {
    if (c * ((now - j.arrival) / j.slack) >= alpha) continue;  // already in Q
    Rat lower = now;
    std::optional<Rat> upper;
    bool feasible = true;
    const Rat cj = c / j.slack;
    const Rat bj = cj * j.arrival;
    for (const auto& i : released) {
      if (&i == &j) continue;
      // c (t - a_j)/S_j - (t - a_i)/S_i = slope t + offset >= 0
      Rat slope = cj - Rat(1) / i.slack;
      Rat offset = i.arrival / i.slack - bj;
      if (slope.is_zero()) {
        if (offset.sign() < 0) {
          feasible = false;
          break;
        }
        continue;
      }
      Rat root = -offset / slope;
      if (slope.sign() > 0) {
        lower = max(lower, root);
      } else {
        upper = upper ? min(*upper, root) : root;
      }
    }
    if (!feasible || (upper && lower > *upper)) continue;
    if (horizon && lower >= *horizon) continue;
    if (!best || lower < best->time) best = QEntryCrossing{lower, j.request};
  }
  return best;
}

namespace detail {

class Simulator {
 public:
  Simulator(const Instance& inst, const SimConfig& cfg, const SimOptions& opt) : inst_(inst), cfg_(cfg), opt_(opt) {
    tr_.speed = cfg.speed;
    tr_.finish.assign(inst.requests.size(), std::nullopt);
    remaining_.resize(inst.requests.size());
    arrivals_.resize(inst.requests.size());
    for (RequestId r = 0; r < inst.requests.size(); ++r) {
      arrivals_[r] = r;
      remaining_[r] = inst.setting == Setting::unicast ? inst.requests[r].multiplicity : 1;
    }
    std::stable_sort(arrivals_.begin(), arrivals_.end(),
                     [&](RequestId a, RequestId b) { return inst.requests[a].arrival < inst.requests[b].arrival; });
    paused_.resize(inst.pages.size());
  }

  Transcript run() {
    for (;;) {
      release();
      if (!cur_) {
        if (pending_.empty()) {
          if (next_arrival_ == arrivals_.size()) break;
          now_ = arrival(arrivals_[next_arrival_]);
          continue;
        }
        QueueView view = make_view(inst_, now_, pending_);
        std::size_t chosen = select(view, cfg_.policy);
        if (opt_.observer) opt_.observer(view, chosen);
        dispatch(view.entries[chosen].request);
        continue;
      }
      const Rat& length = inst_.pages[tr_.attempts[cur_->attempt].page].length;
      Rat completion = now_ + (length - cur_->work) / cfg_.speed;
      if (cfg_.mode == Mode::nonpreemptive) {
        cur_->work = length;
        now_ = completion;
        complete();
        continue;
      }
      Rat next = completion;
      if (next_arrival_ < arrivals_.size()) next = min(next, arrival(arrivals_[next_arrival_]));
      std::vector<RatioLine> lines;
      lines.reserve(pending_.size());
      for (RequestId r : pending_) lines.push_back({r, arrival(r), *inst_.requests[r].slack()});
      if (auto cross = next_q_entry_crossing(lines, now_, *cfg_.policy.c, next)) next = cross->time;
      cur_->work += (next - now_) * cfg_.speed;
      now_ = next;
      if (now_ == completion) {
        cur_->work = length;
        complete();
        continue;
      }
      release();
      check_preemption();
    }
    for (auto& p : paused_)
      if (p) tr_.attempts[p->attempt].status = AttemptStatus::abandoned;
    return std::move(tr_);
  }

 private:
  struct Running {
    std::size_t attempt;
    RequestId forcing;
    Rat work;
    Rat segment_from;
  };
  struct Paused {
    std::size_t attempt;
    Rat work;
  };

  const Rat& arrival(RequestId r) const { return inst_.requests[r].arrival; }
  const std::string& page_name(PageId p) const { return inst_.pages[p].id; }

  void log_line(const std::string& text) {
    if (opt_.log) *opt_.log << "t=" << now_ << ' ' << text << '\n';
  }

  void release() {
    while (next_arrival_ < arrivals_.size() && arrival(arrivals_[next_arrival_]) <= now_) {
      RequestId r = arrivals_[next_arrival_++];
      pending_.push_back(r);
      if (opt_.log) log_line("arrive request=" + std::to_string(r) + " page=" + page_name(inst_.requests[r].page));
    }
  }

  void dispatch(RequestId r) {
    PageId p = inst_.requests[r].page;
    if (paused_[p]) {
      auto& a = tr_.attempts[paused_[p]->attempt];
      if (arrival(r) <= a.start) {
        cur_ = Running{paused_[p]->attempt, r, paused_[p]->work, now_};
        a.forcing_request = r;
        paused_[p].reset();
        if (opt_.log)
          log_line("resume attempt=" + std::to_string(cur_->attempt) + " page=" + page_name(p) + " forcing=" + std::to_string(r) +
                   " work=" + cur_->work.str());
        return;
      }
      a.status = AttemptStatus::abandoned;
      if (opt_.log)
        log_line("abandon attempt=" + std::to_string(paused_[p]->attempt) + " page=" + page_name(p) + " work=" + paused_[p]->work.str());
      paused_[p].reset();
    }
    TransmissionAttempt a;
    a.page = p;
    a.start = now_;
    a.forcing_request = r;
    tr_.attempts.push_back(std::move(a));
    cur_ = Running{tr_.attempts.size() - 1, r, Rat(0), now_};
    if (opt_.log) log_line("start attempt=" + std::to_string(cur_->attempt) + " page=" + page_name(p) + " forcing=" + std::to_string(r));
  }

  void complete() {
    auto& a = tr_.attempts[cur_->attempt];
    a.segments.push_back({cur_->segment_from, now_});
    a.end = now_;
    a.status = AttemptStatus::completed;
    std::size_t satisfied = 0;
    if (inst_.setting == Setting::broadcast) {
      std::erase_if(pending_, [&](RequestId r) {
        if (inst_.requests[r].page != a.page || arrival(r) > a.start) return false;
        tr_.finish[r] = now_;
        ++satisfied;
        return true;
      });
    } else {
      RequestId r = cur_->forcing;
      if (--remaining_[r] == 0) {
        tr_.finish[r] = now_;
        std::erase(pending_, r);
      }
      satisfied = 1;
    }
    if (opt_.log)
      log_line("complete attempt=" + std::to_string(cur_->attempt) + " page=" + page_name(a.page) + " satisfied=" + std::to_string(satisfied));
    cur_.reset();
  }

  void check_preemption() {
    QueueView view = make_view(inst_, now_, pending_);
    std::size_t chosen = ssfw_select(view, *cfg_.policy.c);
    RequestId cand = view.entries[chosen].request;
    const Rat cand_slack = *inst_.requests[cand].slack();
    if (!(cand_slack < *inst_.requests[cur_->forcing].slack())) return;

    auto& a = tr_.attempts[cur_->attempt];
    if (inst_.requests[cand].page == a.page && arrival(cand) <= a.start) {
      // The challenger is already covered by this transmission.
      cur_->forcing = cand;
      a.forcing_request = cand;
      if (opt_.log) log_line("handover attempt=" + std::to_string(cur_->attempt) + " forcing=" + std::to_string(cand));
      return;
    }
    if (opt_.observer) opt_.observer(view, chosen);
    a.segments.push_back({cur_->segment_from, now_});
    if (opt_.log) log_line("preempt attempt=" + std::to_string(cur_->attempt) + " page=" + page_name(a.page) + " work=" + cur_->work.str());
    if (inst_.requests[cand].page == a.page) {
      a.status = AttemptStatus::abandoned;
      if (opt_.log) log_line("abandon attempt=" + std::to_string(cur_->attempt) + " page=" + page_name(a.page) + " work=" + cur_->work.str());
    } else {
      paused_[a.page] = Paused{cur_->attempt, cur_->work};
    }
    cur_.reset();
    dispatch(cand);
  }

  const Instance& inst_;
  const SimConfig& cfg_;
  const SimOptions& opt_;
  Transcript tr_;
  std::vector<RequestId> arrivals_;
  std::size_t next_arrival_ = 0;
  std::vector<RequestId> pending_;
  std::vector<std::int64_t> remaining_;
  Rat now_;
  std::optional<Running> cur_;
  std::vector<std::optional<Paused>> paused_;
};

}  // namespace detail

// Runs `config.policy` over the instance until every request is satisfied.
// Deterministic: equal inputs give equal transcripts.
inline Transcript simulate(const Instance& inst, const SimConfig& config, const SimOptions& options = {}) {
  validate_instance(inst);
  config.validate(inst);
  return detail::Simulator(inst, config, options).run();
}

}  // namespace bsim
