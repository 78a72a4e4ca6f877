#pragma once

// Transcript checker. Used on engine output as a cross-check and on
// externally supplied schedules (oracle witnesses, reference schedules).

#include <algorithm>
#include <string>
#include <tuple>
#include <vector>

#include "bsim/model.hpp"

namespace bsim {

namespace detail {

struct Eligible {
  Rat first_end;        // end of the first copy starting at or after the arrival
  Rat step;             // duration of one copy
  std::int64_t copies;  // number of eligible copies in this attempt
};

// Copies of a (possibly batched) completed attempt that start at or after
// `arrival`.
inline std::optional<Eligible> eligible_copies(const TransmissionAttempt& a, const Rat& duration, const Rat& arrival) {
  // A single copy may have been preempted and resumed, so its end is taken
  // from the attempt rather than from the start.
  if (a.count == 1) {
    if (a.start < arrival) return std::nullopt;
    return Eligible{*a.end, duration, 1};
  }
  std::int64_t skip = 0;
  if (a.start < arrival) {
    auto j = ((arrival - a.start) / duration).ceil().to_int64();
    if (!j || *j >= a.count) return std::nullopt;
    skip = *j;
  }
  return Eligible{a.start + duration * Rat(skip + 1), duration, a.count - skip};
}

// Earliest time each request is satisfied by the usable completed attempts:
// the first eligible copy in the broadcast setting, the m-th in unicast.
inline std::vector<std::optional<Rat>> earliest_finish(const Instance& inst, const Transcript& tr, const std::vector<bool>& usable) {
  std::vector<std::optional<Rat>> out(inst.requests.size());
  for (RequestId r = 0; r < inst.requests.size(); ++r) {
    const auto& req = inst.requests[r];
    const Rat duration = inst.pages[req.page].length / tr.speed;
    std::vector<Eligible> eligible;
    for (std::size_t i = 0; i < tr.attempts.size(); ++i) {
      if (!usable[i] || tr.attempts[i].page != req.page) continue;
      if (auto e = eligible_copies(tr.attempts[i], duration, req.arrival)) eligible.push_back(*e);
    }
    std::sort(eligible.begin(), eligible.end(), [](const auto& x, const auto& y) { return x.first_end < y.first_end; });
    if (inst.setting == Setting::broadcast) {
      if (!eligible.empty()) out[r] = eligible.front().first_end;
      continue;
    }
    std::int64_t needed = req.multiplicity;
    for (const auto& e : eligible) {
      if (e.copies >= needed) {
        out[r] = e.first_end + e.step * Rat(needed - 1);
        break;
      }
      needed -= e.copies;
    }
  }
  return out;
}

}  // namespace detail

// Finish times implied by the completed attempts of a transcript.
inline std::vector<std::optional<Rat>> derive_finish_times(const Instance& inst, const Transcript& tr) {
  std::vector<bool> usable(tr.attempts.size());
  for (std::size_t i = 0; i < tr.attempts.size(); ++i)
    usable[i] = tr.attempts[i].status == AttemptStatus::completed && tr.attempts[i].end.has_value();
  return detail::earliest_finish(inst, tr, usable);
}

// Returns one message per violated transcript invariant; empty iff valid.
inline std::vector<std::string> validate_transcript(const Instance& inst, const Transcript& tr) {
  std::vector<std::string> out;
  if (tr.speed < Rat(1)) out.push_back("speed " + tr.speed.str() + " < 1");
  if (tr.finish.size() != inst.requests.size()) {
    out.push_back("finish table has " + std::to_string(tr.finish.size()) + " entries for " +
                  std::to_string(inst.requests.size()) + " requests");
    return out;
  }

  struct Span {
    Rat from, to;
    std::size_t attempt;
  };
  std::vector<Span> spans;
  std::vector<bool> usable(tr.attempts.size(), false);

  for (std::size_t i = 0; i < tr.attempts.size(); ++i) {
    const auto& a = tr.attempts[i];
    const std::string who = "attempt #" + std::to_string(i);
    if (a.page >= inst.pages.size()) {
      out.push_back(who + ": unknown page");
      continue;
    }
    if (a.forcing_request >= inst.requests.size()) {
      out.push_back(who + ": unknown forcing request");
    } else {
      const auto& forcing = inst.requests[a.forcing_request];
      if (forcing.page != a.page) out.push_back(who + ": forcing request is for a different page");
      if (forcing.arrival > a.start) out.push_back(who + ": forcing request arrives after the attempt starts");
    }
    if (a.count < 1) {
      out.push_back(who + ": count < 1");
      continue;
    }
    if (a.segments.empty()) {
      out.push_back(who + ": no work segments");
      continue;
    }
    bool segments_ok = true;
    Rat work;
    for (std::size_t s = 0; s < a.segments.size(); ++s) {
      const auto& seg = a.segments[s];
      if (seg.to <= seg.from) {
        out.push_back(who + ": empty or reversed segment");
        segments_ok = false;
      }
      if (s > 0 && seg.from < a.segments[s - 1].to) {
        out.push_back(who + ": segments overlap or are out of order");
        segments_ok = false;
      }
      work += (seg.to - seg.from) * tr.speed;
      spans.push_back({seg.from, seg.to, i});
    }
    if (a.start != a.segments.front().from) out.push_back(who + ": start differs from the first segment");
    const Rat& length = inst.pages[a.page].length;
    if (a.status == AttemptStatus::completed) {
      if (work != length * Rat(a.count))
        out.push_back(who + ": completed with work " + work.str() + " but needs " + (length * Rat(a.count)).str());
      if (!a.end || *a.end != a.segments.back().to) out.push_back(who + ": end differs from the last segment");
      if (segments_ok && a.count > 1 && a.segments.size() != 1) out.push_back(who + ": batched attempt must be a single segment");
      usable[i] = segments_ok && a.end && work == length * Rat(a.count);
    } else {
      if (a.end) out.push_back(who + ": abandoned attempt has an end time");
      if (a.count != 1) out.push_back(who + ": abandoned attempt is batched");
      if (work >= length) out.push_back(who + ": abandoned with full work " + work.str());
    }
  }

  std::sort(spans.begin(), spans.end(), [](const Span& x, const Span& y) {
    return std::tie(x.from, x.to, x.attempt) < std::tie(y.from, y.to, y.attempt);
  });
  for (std::size_t s = 1; s < spans.size(); ++s)
    if (spans[s].from < spans[s - 1].to)
      out.push_back("server conflict between attempt #" + std::to_string(spans[s - 1].attempt) + " and attempt #" +
                    std::to_string(spans[s].attempt));

  const auto expected_finish = detail::earliest_finish(inst, tr, usable);
  for (RequestId r = 0; r < inst.requests.size(); ++r) {
    const auto& req = inst.requests[r];
    const std::string who = request_label(inst, r);
    const auto& expected = expected_finish[r];
    const auto& f = tr.finish[r];
    if (!f) {
      out.push_back(who + ": unsatisfied");
      continue;
    }
    if (expected && *expected == *f) continue;

    // Diagnose the claimed satisfying attempt, if one ends at f.
    bool early_match = false;
    for (std::size_t i = 0; i < tr.attempts.size(); ++i) {
      const auto& a = tr.attempts[i];
      if (usable[i] && a.page == req.page && a.end && *a.end == *f && a.start < req.arrival) early_match = true;
    }
    if (early_match) {
      out.push_back(who + ": satisfying attempt starts before arrival");
    } else if (!expected) {
      out.push_back(who + ": no completed transmission satisfies it");
    } else {
      out.push_back(who + ": finish " + f->str() + " is not the earliest eligible completion " + expected->str());
    }
  }
  return out;
}

}  // namespace bsim
