#pragma once

// Runtime checks for engine transcripts that go beyond schedule validity.

#include <algorithm>
#include <string>
#include <vector>

#include "bsim/model.hpp"

namespace bsim {

// Maximal intervals during which the server transmits something.
inline std::vector<Segment> busy_intervals(const Transcript& tr) {
  std::vector<Segment> all;
  for (const auto& a : tr.attempts)
    for (const auto& s : a.segments) all.push_back(s);
  std::sort(all.begin(), all.end(), [](const Segment& x, const Segment& y) { return x.from < y.from; });
  std::vector<Segment> merged;
  for (const auto& s : all) {
    if (!merged.empty() && s.from <= merged.back().to) merged.back().to = max(merged.back().to, s.to);
    else merged.push_back(s);
  }
  return merged;
}

// Requests that waited while the server was idle: [arrival, finish] must
// lie inside one busy interval.
inline std::vector<std::string> work_conservation_violations(const Instance& inst, const Transcript& tr) {
  std::vector<std::string> out;
  const auto busy = busy_intervals(tr);
  for (RequestId r = 0; r < inst.requests.size(); ++r) {
    if (!tr.finish.at(r)) {
      out.push_back(request_label(inst, r) + " is unsatisfied");
      continue;
    }
    const Rat& a = inst.requests[r].arrival;
    const Rat& f = *tr.finish[r];
    auto it = std::upper_bound(busy.begin(), busy.end(), a, [](const Rat& t, const Segment& s) { return t < s.from; });
    if (it == busy.begin() || std::prev(it)->to < f)
      out.push_back(request_label(inst, r) + " waits while the server is idle");
  }
  return out;
}

struct Volume {
  Rat transmitted;  // page-length units over all attempts
  Rat abandoned;    // part of `transmitted` spent on abandoned attempts
};

inline Volume transmitted_volume(const Transcript& tr) {
  Volume v;
  for (const auto& a : tr.attempts) {
    Rat work;
    for (const auto& s : a.segments) work += (s.to - s.from) * tr.speed;
    v.transmitted += work;
    if (a.status == AttemptStatus::abandoned) v.abandoned += work;
  }
  return v;
}

}  // namespace bsim
