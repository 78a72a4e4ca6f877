#pragma once

// Selection rules. Each maps the released, unsatisfied requests at the
// current time to the request that forces the next transmission. All rules
// are pure functions of the view.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "bsim/model.hpp"

namespace bsim {

enum class PolicyKind { fifo, ssf, ssfw, bwf, srfw, lf };

inline const char* to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::fifo: return "fifo";
    case PolicyKind::ssf: return "ssf";
    case PolicyKind::ssfw: return "ssfw";
    case PolicyKind::bwf: return "bwf";
    case PolicyKind::srfw: return "srfw";
    case PolicyKind::lf: return "lf";
  }
  return "?";
}

inline std::optional<PolicyKind> parse_policy_kind(std::string_view name) {
  for (auto k : {PolicyKind::fifo, PolicyKind::ssf, PolicyKind::ssfw, PolicyKind::bwf, PolicyKind::srfw, PolicyKind::lf})
    if (name == to_string(k)) return k;
  return std::nullopt;
}

inline bool uses_waiting(PolicyKind k) { return k == PolicyKind::ssfw || k == PolicyKind::bwf || k == PolicyKind::srfw; }

inline bool needs_deadlines(PolicyKind k) {
  return k == PolicyKind::ssf || k == PolicyKind::ssfw || k == PolicyKind::srfw || k == PolicyKind::lf;
}

struct PolicyConfig {
  PolicyKind kind = PolicyKind::fifo;
  // Waiting parameter, required by SSF-W, BWF and SRF-W. c = 1 is admitted;
  // it removes the waiting filter down to the current maximizers.
  std::optional<Rat> c;

  void validate() const {
    if (uses_waiting(kind)) {
      if (!c) throw ConfigError(std::string("policy ") + to_string(kind) + " requires --c");
      if (*c < Rat(1)) throw ConfigError("waiting parameter c = " + c->str() + " must be at least 1");
    } else if (c) {
      throw ConfigError(std::string("policy ") + to_string(kind) + " takes no waiting parameter");
    }
  }
};

struct QueueEntry {
  RequestId request = 0;
  Rat arrival;
  std::optional<Rat> slack;
  Rat weight = 1;
  std::string_view page_id;
  std::size_t index = 0;
  std::optional<Rat> ratio;           // (t - a) / S
  Rat weighted_wait;                  // w (t - a)
  std::optional<Rat> weighted_ratio;  // w (t - a) / S
};

struct QueueView {
  Rat now;
  std::vector<QueueEntry> entries;
};

inline QueueEntry make_entry(const Instance& inst, RequestId r, const Rat& now) {
  const auto& req = inst.requests[r];
  QueueEntry e;
  e.request = r;
  e.arrival = req.arrival;
  e.slack = req.slack();
  e.weight = req.weight;
  e.page_id = inst.pages[req.page].id;
  e.index = req.index;
  Rat wait = now - req.arrival;
  e.weighted_wait = req.weight * wait;
  if (e.slack) {
    e.ratio = wait / *e.slack;
    e.weighted_ratio = req.weight * *e.ratio;
  }
  return e;
}

inline QueueView make_view(const Instance& inst, const Rat& now, std::span<const RequestId> pending) {
  QueueView view{now, {}};
  view.entries.reserve(pending.size());
  for (RequestId r : pending) view.entries.push_back(make_entry(inst, r, now));
  return view;
}

namespace detail {

inline auto tail_key(const QueueEntry& e) { return std::tie(e.arrival, e.page_id, e.index); }

inline const Rat& need_slack(const QueueEntry& e) {
  if (!e.slack) throw MismatchError("request #" + std::to_string(e.request) + " (page '" + std::string(e.page_id) + "') has no deadline");
  return *e.slack;
}

inline const Rat& need_ratio(const QueueEntry& e) {
  need_slack(e);
  return *e.ratio;
}

inline void require_nonempty(const QueueView& view) {
  if (view.entries.empty()) throw std::logic_error("selection over an empty queue");
}

inline void require_slacks(const QueueView& view) {
  require_nonempty(view);
  for (const auto& e : view.entries) need_slack(e);
}

// Index of the entry minimizing `less`-order.
template <typename Less>
std::size_t argbest(const QueueView& view, std::span<const std::size_t> candidates, Less less) {
  std::size_t best = candidates.front();
  for (std::size_t i : candidates.subspan(1))
    if (less(view.entries[i], view.entries[best])) best = i;
  return best;
}

inline std::vector<std::size_t> all_indices(const QueueView& view) {
  std::vector<std::size_t> idx(view.entries.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  return idx;
}

inline bool slack_then_tail(const QueueEntry& a, const QueueEntry& b) {
  const Rat& sa = need_slack(a);
  const Rat& sb = need_slack(b);
  if (sa != sb) return sa < sb;
  return tail_key(a) < tail_key(b);
}

}  // namespace detail

// Earliest arrival; ties by (page id, request index).
inline std::size_t fifo_select(const QueueView& view) {
  detail::require_nonempty(view);
  auto idx = detail::all_indices(view);
  return detail::argbest(view, idx, [](const QueueEntry& a, const QueueEntry& b) { return detail::tail_key(a) < detail::tail_key(b); });
}

// Smallest slack; ties by (arrival, page id, index).
inline std::size_t ssf_select(const QueueView& view) {
  detail::require_slacks(view);
  auto idx = detail::all_indices(view);
  return detail::argbest(view, idx, detail::slack_then_tail);
}

// Largest current wait ratio. Among equal ratios the smallest slack wins,
// then (arrival, page id, index); this makes LF coincide with SSF-W at c = 1.
inline std::size_t lf_select(const QueueView& view) {
  detail::require_slacks(view);
  auto idx = detail::all_indices(view);
  return detail::argbest(view, idx, [](const QueueEntry& a, const QueueEntry& b) {
    const Rat& ra = detail::need_ratio(a);
    const Rat& rb = detail::need_ratio(b);
    if (ra != rb) return ra > rb;
    return detail::slack_then_tail(a, b);
  });
}

// Maximum raw wait ratio over the view (no clamp at 1).
inline Rat max_ratio(const QueueView& view) {
  Rat alpha = detail::need_ratio(view.entries.front());
  for (const auto& e : view.entries) alpha = max(alpha, detail::need_ratio(e));
  return alpha;
}

// Q(t) for SSF-W: entries whose ratio is at least alpha_t / c.
inline std::vector<std::size_t> ssfw_queue(const QueueView& view, const Rat& c) {
  detail::require_nonempty(view);
  Rat alpha = max_ratio(view);
  std::vector<std::size_t> q;
  for (std::size_t i = 0; i < view.entries.size(); ++i)
    if (c * *view.entries[i].ratio >= alpha) q.push_back(i);
  return q;
}

// Smallest slack within Q(t); ties by (arrival, page id, index).
inline std::size_t ssfw_select(const QueueView& view, const Rat& c) {
  auto q = ssfw_queue(view, c);
  return detail::argbest(view, q, detail::slack_then_tail);
}

// Largest weight among entries whose weighted wait is at least rho_t / c.
inline std::size_t bwf_select(const QueueView& view, const Rat& c) {
  detail::require_nonempty(view);
  Rat rho = view.entries.front().weighted_wait;
  for (const auto& e : view.entries) rho = max(rho, e.weighted_wait);
  std::vector<std::size_t> q;
  for (std::size_t i = 0; i < view.entries.size(); ++i)
    if (c * view.entries[i].weighted_wait >= rho) q.push_back(i);
  return detail::argbest(view, q, [](const QueueEntry& a, const QueueEntry& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    return detail::tail_key(a) < detail::tail_key(b);
  });
}

// Smallest slack-over-weight among entries whose weighted ratio is at least
// alpha^w_t / c.
inline std::size_t srfw_select(const QueueView& view, const Rat& c) {
  detail::require_nonempty(view);
  for (const auto& e : view.entries) detail::need_slack(e);
  Rat alpha_w = *view.entries.front().weighted_ratio;
  for (const auto& e : view.entries) alpha_w = max(alpha_w, *e.weighted_ratio);
  std::vector<std::size_t> q;
  for (std::size_t i = 0; i < view.entries.size(); ++i)
    if (c * *view.entries[i].weighted_ratio >= alpha_w) q.push_back(i);
  return detail::argbest(view, q, [](const QueueEntry& a, const QueueEntry& b) {
    Rat ka = *a.slack / a.weight;
    Rat kb = *b.slack / b.weight;
    if (ka != kb) return ka < kb;
    return detail::tail_key(a) < detail::tail_key(b);
  });
}

inline std::size_t select(const QueueView& view, const PolicyConfig& policy) {
  switch (policy.kind) {
    case PolicyKind::fifo: return fifo_select(view);
    case PolicyKind::ssf: return ssf_select(view);
    case PolicyKind::ssfw: return ssfw_select(view, *policy.c);
    case PolicyKind::bwf: return bwf_select(view, *policy.c);
    case PolicyKind::srfw: return srfw_select(view, *policy.c);
    case PolicyKind::lf: return lf_select(view);
  }
  throw std::logic_error("unknown policy");
}

}  // namespace bsim
