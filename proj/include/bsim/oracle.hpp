#pragma once

// Exact offline optima for small instances.
//
// The merge/order search covers the canonical schedule class: each page's
// requests are partitioned into merge groups, the groups are totally
// ordered, and group g starts at max(previous end, latest arrival in g) and
// runs for length/speed. Any sequential-model schedule can be rewritten into
// this left-shifted form group by group without delaying any finish time,
// and every objective here is a maximum of per-request terms monotone in the
// finish time, so the class contains an optimum. Idling, preemption and
// abandoned partial transmissions never help such objectives.
//
// The slot search is an independent check for slotted unit instances: it
// decides which page to broadcast in each unit slot.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bsim/io.hpp"
#include "bsim/metrics.hpp"
#include "bsim/validate.hpp"

namespace bsim {

inline constexpr int kDefaultOracleCap = 8;

// The oracle size guard: BSIM_ORACLE_CAP when set, otherwise `fallback`.
inline int oracle_cap_from_env(int fallback = kDefaultOracleCap) {
  if (const char* v = std::getenv("BSIM_ORACLE_CAP")) {
    try {
      int cap = std::stoi(v);
      if (cap > 0) return cap;
    } catch (const std::exception&) {
    }
    throw ConfigError(std::string("BSIM_ORACLE_CAP must be a positive integer, got '") + v + "'");
  }
  return fallback;
}

struct OracleResult {
  Rat objective;
  Transcript witness;
  std::int64_t nodes_explored = 0;
};

namespace detail {

class MergeOrderSearch {
 public:
  MergeOrderSearch(const Instance& inst, MetricKind kind, const Rat& speed) : inst_(inst), kind_(kind), speed_(speed) {
    by_page_.resize(inst.pages.size());
    for (RequestId r = 0; r < inst.requests.size(); ++r) by_page_[inst.requests[r].page].push_back(r);
    for (const auto& list : by_page_)
      if (list.size() > 62) throw ConfigError("oracle: too many requests on one page");
    copies_.resize(inst.requests.size());
    for (RequestId r = 0; r < inst.requests.size(); ++r) copies_[r] = inst.setting == Setting::unicast ? inst.requests[r].multiplicity : 1;
    mask_.resize(inst.pages.size());
    for (PageId p = 0; p < inst.pages.size(); ++p) mask_[p] = (std::uint64_t{1} << by_page_[p].size()) - 1;
    for (auto c : copies_) units_left_ += c;
  }

  OracleResult run() {
    // Root bound: every request served the moment it arrives.
    floor_ = metric_floor(kind_);
    for (RequestId r = 0; r < inst_.requests.size(); ++r)
      floor_ = max(floor_, term(r, inst_.requests[r].arrival + duration(r)));
    dfs(Rat(0), metric_floor(kind_));
    if (!best_) throw std::logic_error("oracle found no schedule");
    return build_result();
  }

 private:
  struct Step {
    PageId page;
    std::uint64_t group;  // bitmask over by_page_[page]; unicast: bit of the request
    Rat start;
    Rat end;
  };
  struct Child {
    Step step;
    Rat value;
  };

  Rat duration(RequestId r) const { return inst_.pages[inst_.requests[r].page].length / speed_; }
  Rat term(RequestId r, const Rat& finish) const { return request_metric(inst_.requests[r], finish, kind_); }

  bool done() const { return units_left_ == 0; }

  void dfs(const Rat& t, const Rat& run) {
    ++nodes_;
    if (stop_) return;
    if (done()) {
      if (!best_ || run < *best_) {
        best_ = run;
        best_path_ = path_;
        if (*best_ == floor_) stop_ = true;
      }
      return;
    }
    Rat bound = run;
    for (RequestId r = 0; r < inst_.requests.size(); ++r)
      if (copies_[r] > 0) bound = max(bound, term(r, max(t, inst_.requests[r].arrival) + duration(r)));
    if (best_ && bound >= *best_) return;

    std::vector<Child> children;
    for (PageId p = 0; p < inst_.pages.size(); ++p) {
      const auto& list = by_page_[p];
      if (inst_.setting == Setting::unicast) {
        for (std::size_t b = 0; b < list.size(); ++b) {
          RequestId r = list[b];
          if (copies_[r] == 0) continue;
          Rat start = max(t, inst_.requests[r].arrival);
          Rat end = start + duration(r);
          children.push_back({{p, std::uint64_t{1} << b, start, end}, max(run, term(r, end))});
        }
        continue;
      }
      const std::uint64_t avail = mask_[p];
      for (std::uint64_t g = avail; g != 0; g = (g - 1) & avail) {
        Rat start = t;
        for (std::size_t b = 0; b < list.size(); ++b)
          if (g >> b & 1u) start = max(start, inst_.requests[list[b]].arrival);
        Rat end = start + inst_.pages[p].length / speed_;
        Rat value = run;
        for (std::size_t b = 0; b < list.size(); ++b)
          if (g >> b & 1u) value = max(value, term(list[b], end));
        children.push_back({{p, g, start, end}, value});
      }
    }
    std::stable_sort(children.begin(), children.end(), [](const Child& a, const Child& b) {
      if (a.value != b.value) return a.value < b.value;
      return a.step.end < b.step.end;
    });
    for (const auto& child : children) {
      if (stop_) return;
      if (best_ && child.value >= *best_) continue;
      apply(child.step, +1);
      path_.push_back(child.step);
      dfs(child.step.end, child.value);
      path_.pop_back();
      apply(child.step, -1);
    }
  }

  void apply(const Step& step, int dir) {
    const auto& list = by_page_[step.page];
    if (inst_.setting == Setting::unicast) {
      for (std::size_t b = 0; b < list.size(); ++b)
        if (step.group >> b & 1u) {
          copies_[list[b]] -= dir;
          units_left_ -= dir;
        }
      return;
    }
    if (dir > 0) mask_[step.page] &= ~step.group;
    else mask_[step.page] |= step.group;
    for (std::size_t b = 0; b < list.size(); ++b)
      if (step.group >> b & 1u) {
        copies_[list[b]] -= dir;
        units_left_ -= dir;
      }
  }

  OracleResult build_result() const {
    OracleResult res;
    res.nodes_explored = nodes_;
    res.witness.speed = speed_;
    for (const auto& step : best_path_) {
      TransmissionAttempt a;
      a.page = step.page;
      a.start = step.start;
      a.end = step.end;
      a.segments.push_back({step.start, step.end});
      const auto& list = by_page_[step.page];
      for (std::size_t b = 0; b < list.size(); ++b)
        if (step.group >> b & 1u) {
          a.forcing_request = list[b];
          break;
        }
      res.witness.attempts.push_back(std::move(a));
    }
    res.witness.finish = derive_finish_times(inst_, res.witness);
    res.objective = evaluate(inst_, res.witness, kind_);
    if (res.objective != *best_) throw std::logic_error("oracle witness value " + res.objective.str() + " differs from search value " + best_->str());
    return res;
  }

  const Instance& inst_;
  MetricKind kind_;
  Rat speed_;
  std::vector<std::vector<RequestId>> by_page_;
  std::vector<std::uint64_t> mask_;
  std::vector<std::int64_t> copies_;
  std::int64_t units_left_ = 0;
  Rat floor_;
  std::optional<Rat> best_;
  std::vector<Step> path_, best_path_;
  std::int64_t nodes_ = 0;
  bool stop_ = false;
};

}  // namespace detail

inline OracleResult optimal_schedule(const Instance& inst, MetricKind kind, const Rat& speed = 1, int cap = kDefaultOracleCap) {
  validate_instance(inst);
  require_metric_fields(inst, kind);
  if (speed < Rat(1)) throw ConfigError("oracle speed must be at least 1");
  if (inst.total_jobs() > cap)
    throw ConfigError("instance has " + std::to_string(inst.total_jobs()) + " jobs; the oracle cap is " + std::to_string(cap) +
                      " (raise with --cap or BSIM_ORACLE_CAP)");
  if (inst.requests.empty()) {
    OracleResult empty;
    empty.objective = metric_floor(kind);
    empty.witness.speed = speed;
    return empty;
  }
  return detail::MergeOrderSearch(inst, kind, speed).run();
}

// Independent optimum for slotted unit instances at speed 1: depth-first
// over the page broadcast in each slot, never idling while a released
// request waits.
inline Rat slot_dfs_optimum(const Instance& inst, MetricKind kind) {
  validate_instance(inst);
  require_metric_fields(inst, kind);
  if (inst.time_model != TimeModel::slotted) throw ConfigError("slot search requires a slotted instance");
  const std::size_t n = inst.requests.size();
  std::vector<std::int64_t> left(n);
  std::int64_t total = 0;
  for (std::size_t r = 0; r < n; ++r) {
    left[r] = inst.setting == Setting::unicast ? inst.requests[r].multiplicity : 1;
    total += left[r];
  }
  std::optional<Rat> best;

  std::function<void(std::int64_t, const Rat&, std::int64_t)> slot = [&](std::int64_t t, const Rat& worst, std::int64_t open) {
    if (open == 0) {
      if (!best || worst < *best) best = worst;
      return;
    }
    std::vector<bool> ready(inst.pages.size(), false);
    bool any = false;
    std::optional<std::int64_t> next;
    for (std::size_t r = 0; r < n; ++r) {
      if (left[r] == 0) continue;
      std::int64_t a = *inst.requests[r].arrival.to_int64();
      if (a <= t) {
        ready[inst.requests[r].page] = true;
        any = true;
      } else if (!next || a < *next) {
        next = a;
      }
    }
    if (!any) {
      slot(*next, worst, open);
      return;
    }
    const Rat finish(t + 1);
    for (PageId p = 0; p < inst.pages.size(); ++p) {
      if (!ready[p]) continue;
      std::vector<std::size_t> served;
      Rat value = worst;
      for (std::size_t r = 0; r < n; ++r) {
        if (left[r] == 0 || inst.requests[r].page != p || *inst.requests[r].arrival.to_int64() > t) continue;
        served.push_back(r);
        value = max(value, request_metric(inst.requests[r], finish, kind));
        if (inst.setting == Setting::unicast) break;
      }
      if (best && value >= *best) continue;
      for (auto r : served) --left[r];
      slot(t + 1, value, open - static_cast<std::int64_t>(served.size()));
      for (auto r : served) ++left[r];
    }
  };
  slot(0, metric_floor(kind), total);
  return *best;
}

struct SmallFamily {
  int max_pages = 3;
  int horizon = 5;
  int max_requests = 5;
  int min_requests = 1;
  bool deadlines = false;
};

// Visits every slotted unit broadcast instance with arrivals in
// {0..horizon}, each (page, arrival) pair used at most once, and (when
// enabled) every deadline in {arrival+1 .. horizon+2}. Deterministic order:
// by request count, then lexicographic pair combination, then deadline
// odometer. Returns the number of instances visited.
inline std::size_t for_each_small_instance(const SmallFamily& fam, const std::function<void(const Instance&)>& visit) {
  struct Slot {
    PageId page;
    std::int64_t arrival;
  };
  std::vector<Slot> slots;
  for (int p = 0; p < fam.max_pages; ++p)
    for (int a = 0; a <= fam.horizon; ++a) slots.push_back({static_cast<PageId>(p), a});

  Instance base;
  base.time_model = TimeModel::slotted;
  base.setting = Setting::broadcast;
  for (int p = 0; p < fam.max_pages; ++p) base.pages.push_back({std::string(1, static_cast<char>('a' + p)), Rat(1)});

  std::size_t visited = 0;
  const int lo = std::max(fam.min_requests, 1);
  for (int size = lo; size <= fam.max_requests && size <= static_cast<int>(slots.size()); ++size) {
    std::vector<std::size_t> pick(static_cast<std::size_t>(size));
    for (int i = 0; i < size; ++i) pick[i] = static_cast<std::size_t>(i);
    for (;;) {
      Instance inst = base;
      for (auto idx : pick) {
        Request r;
        r.page = slots[idx].page;
        r.arrival = Rat(slots[idx].arrival);
        inst.requests.push_back(std::move(r));
      }
      assign_request_indices(inst);
      if (!fam.deadlines) {
        visit(inst);
        ++visited;
      } else {
        std::vector<std::int64_t> slack(static_cast<std::size_t>(size), 1);
        for (;;) {
          for (int i = 0; i < size; ++i) inst.requests[i].deadline = inst.requests[i].arrival + Rat(slack[i]);
          visit(inst);
          ++visited;
          int i = size - 1;
          for (; i >= 0; --i) {
            if (slots[pick[i]].arrival + slack[i] < fam.horizon + 2) {
              ++slack[i];
              break;
            }
            slack[i] = 1;
          }
          if (i < 0) break;
        }
      }
      int i = size - 1;
      while (i >= 0 && pick[i] == slots.size() - static_cast<std::size_t>(size - i)) --i;
      if (i < 0) break;
      ++pick[i];
      for (int j = i + 1; j < size; ++j) pick[j] = pick[j - 1] + 1;
    }
  }
  return visited;
}

inline std::vector<Instance> enumerate_small_instances(const SmallFamily& fam) {
  std::vector<Instance> out;
  for_each_small_instance(fam, [&](const Instance& inst) { out.push_back(inst); });
  return out;
}

inline nlohmann::json oracle_result_to_json(const Instance& inst, const OracleResult& res) {
  return {{"objective", res.objective.str()}, {"witness", transcript_to_json(inst, res.witness)}, {"nodes_explored", res.nodes_explored}};
}

}  // namespace bsim
