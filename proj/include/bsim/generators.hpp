#pragma once

// Instance generators: the adversarial group family against LF together with
// its reference offline schedule, multiplicity expansion, and seeded random
// instances for fuzzing.

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bsim/model.hpp"

namespace bsim {

// Group i in 0..k: all m[i] unit jobs arrive at A[i] (before the shift) with
// slack S[i]; LF at speed s finishes the group at F[i] with maximum wait
// ratio R[i].
struct AdversaryPlan {
  std::int64_t s = 1;
  std::int64_t c = 2;
  int k = 0;
  std::vector<Rat> A;
  std::vector<Rat> S;
  std::vector<std::int64_t> m;
  std::vector<Rat> F;
  std::vector<Rat> R;
  Rat shift;  // added to every time so the earliest arrival is 0
};

// Smallest k with (1 - 1/sc)^k * c <= 1/(3s).
inline int minimal_adversary_k(std::int64_t s, std::int64_t c) {
  const Rat decay = Rat(1) - Rat(1, s * c);
  const Rat target = Rat(1, 3 * s);
  Rat value = Rat(c);
  int k = 0;
  while (value > target) {
    value *= decay;
    ++k;
  }
  return k;
}

inline std::string group_page_id(int i, int k) {
  std::string digits = std::to_string(i);
  std::size_t width = std::to_string(k).size();
  return "J" + std::string(width > digits.size() ? width - digits.size() : 0, '0') + digits;
}

namespace detail {

inline std::int64_t checked_int(const Rat& v, const char* what) {
  auto n = v.to_int64();
  if (!n) throw ConfigError(std::string(what) + " " + v.str() + " does not fit a 64-bit job count");
  return *n;
}

}  // namespace detail

inline AdversaryPlan make_adversary_plan(std::int64_t s, std::int64_t c, std::optional<int> k_override = std::nullopt) {
  if (s < 1) throw ConfigError("adversary speed s must be an integer >= 1");
  if (c < 2) throw ConfigError("adversary parameter c must be an integer >= 2");
  const int k_min = minimal_adversary_k(s, c);
  AdversaryPlan plan;
  plan.s = s;
  plan.c = c;
  plan.k = k_override.value_or(k_min);
  const Rat sc = Rat(s) * Rat(c);
  const Rat decay = Rat(1) - Rat(1) / sc;
  if (plan.k < k_min) {
    Rat r0 = Rat(c) * pow(decay, static_cast<unsigned>(std::max(plan.k, 0)));
    throw ConfigError("k = " + std::to_string(plan.k) + " is below the minimal k = " + std::to_string(k_min) + " (R_0 = " + r0.str() +
                      " > 1/" + std::to_string(3 * s) + ")");
  }
  const int k = plan.k;
  for (int i = 0; i <= k; ++i) {
    const auto e = static_cast<unsigned>(k - i);
    Rat geometric;  // sum_{j=0}^{k-i-1} (sc)^j
    for (unsigned j = 0; j < e; ++j) geometric += pow(sc, j);
    Rat a = -pow(sc, e + 1) - geometric;
    plan.A.push_back(a);
    plan.F.push_back(a + pow(sc, e + 1));
    plan.S.push_back(Rat(s) * pow(sc, e) / pow(decay, e));
    plan.R.push_back(Rat(c) * pow(decay, e));
    plan.m.push_back(detail::checked_int(i == 0 ? Rat(s) * pow(sc, e + 1) : Rat(s) * pow(sc, e), "group size"));
  }
  plan.shift = -plan.A.front();
  return plan;
}

// Unicast instance with one unit page per group; group sizes are carried as
// multiplicities.
inline Instance adversary_instance(const AdversaryPlan& plan) {
  Instance inst;
  inst.time_model = TimeModel::continuous;
  inst.setting = Setting::unicast;
  for (int i = 0; i <= plan.k; ++i) {
    inst.pages.push_back({group_page_id(i, plan.k), Rat(1)});
    Request r;
    r.page = static_cast<PageId>(i);
    r.arrival = plan.A[i] + plan.shift;
    r.deadline = r.arrival + plan.S[i];
    r.multiplicity = plan.m[i];
    inst.requests.push_back(std::move(r));
  }
  assign_request_indices(inst);
  validate_instance(inst);
  return inst;
}

inline std::pair<AdversaryPlan, Instance> build_lf_adversary(std::int64_t s, std::int64_t c, std::optional<int> k_override = std::nullopt) {
  AdversaryPlan plan = make_adversary_plan(s, c, k_override);
  Instance inst = adversary_instance(plan);
  return {std::move(plan), std::move(inst)};
}

// Offline schedule at speed 1: group 0 runs during [F_k, F_k + m_0] and
// group i >= 1 during [A_i, A_i + m_i], all shifted. Each group is one
// batched attempt.
inline Transcript reference_opt_schedule(const AdversaryPlan& plan) {
  Transcript tr;
  tr.speed = 1;
  tr.finish.assign(static_cast<std::size_t>(plan.k) + 1, std::nullopt);
  auto block = [&](int i, const Rat& from) {
    TransmissionAttempt a;
    a.page = static_cast<PageId>(i);
    a.start = from;
    a.end = from + Rat(plan.m[i]);
    a.segments.push_back({from, *a.end});
    a.forcing_request = static_cast<RequestId>(i);
    a.count = plan.m[i];
    tr.finish[i] = a.end;
    tr.attempts.push_back(std::move(a));
  };
  for (int i = 1; i <= plan.k; ++i) block(i, plan.A[i] + plan.shift);
  block(0, plan.F[plan.k] + plan.shift);
  return tr;
}

inline nlohmann::json plan_to_json(const AdversaryPlan& plan) {
  auto rats = [](const std::vector<Rat>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& x : v) a.push_back(x.str());
    return a;
  };
  nlohmann::json m = nlohmann::json::array();
  for (auto x : plan.m) m.push_back(std::to_string(x));
  return {{"s", std::to_string(plan.s)}, {"c", std::to_string(plan.c)}, {"k", std::to_string(plan.k)},
          {"A", rats(plan.A)},           {"S", rats(plan.S)},           {"m", m},
          {"F", rats(plan.F)},           {"R", rats(plan.R)},           {"shift", plan.shift.str()}};
}

struct Expansion {
  Instance instance;
  std::vector<RequestId> origin;  // expanded request -> original request
};

// One request per copy. Unicast copies get their own pages, named
// "<page>.<copy>"; broadcast copies stay on the original page.
inline Expansion expand_multiplicities(const Instance& inst) {
  Expansion out;
  out.instance.time_model = inst.time_model;
  out.instance.setting = inst.setting;
  if (inst.setting == Setting::broadcast) out.instance.pages = inst.pages;
  for (RequestId r = 0; r < inst.requests.size(); ++r) {
    const auto& req = inst.requests[r];
    const std::size_t width = std::to_string(req.multiplicity - 1).size();
    for (std::int64_t j = 0; j < req.multiplicity; ++j) {
      Request copy = req;
      copy.multiplicity = 1;
      if (inst.setting == Setting::unicast) {
        std::string digits = std::to_string(j);
        std::string id = inst.pages[req.page].id + "." + std::string(width - digits.size(), '0') + digits;
        out.instance.pages.push_back({std::move(id), inst.pages[req.page].length});
        copy.page = out.instance.pages.size() - 1;
      }
      out.instance.requests.push_back(std::move(copy));
      out.origin.push_back(r);
    }
  }
  assign_request_indices(out.instance);
  return out;
}

enum class DeadlineStyle { none, random };
enum class WeightStyle { unit, random, inverse_slack };

struct RandomParams {
  int pages = 3;
  int requests = 5;
  int horizon = 5;
  int max_length = 1;
  DeadlineStyle deadlines = DeadlineStyle::none;
  WeightStyle weights = WeightStyle::unit;
  bool slotted = true;
  Setting setting = Setting::broadcast;
};

// Deterministic in `seed`. Slotted instances use integer times; continuous
// ones use half-integers. Deadlines always leave slack >= page length.
inline Instance random_instance(std::uint64_t seed, const RandomParams& params) {
  if (params.requests < 0 || params.horizon < 0) throw ConfigError("random instance: negative size parameter");
  if (params.max_length < 1) throw ConfigError("random instance: max length must be at least 1");
  if (params.slotted && params.max_length != 1) throw ConfigError("random instance: slotted instances need unit lengths");
  if (params.setting == Setting::broadcast && params.pages < 1 && params.requests > 0)
    throw ConfigError("random instance: requests need at least one page");
  if (params.weights == WeightStyle::inverse_slack && params.deadlines == DeadlineStyle::none)
    throw ConfigError("random instance: inverse-slack weights need deadlines");

  std::mt19937_64 rng(seed);
  auto draw = [&](std::uint64_t bound) { return static_cast<std::int64_t>(rng() % bound); };
  auto time_value = [&](int limit) {
    if (params.slotted) return Rat(draw(static_cast<std::uint64_t>(limit) + 1));
    return Rat(draw(2 * static_cast<std::uint64_t>(limit) + 1), 2);
  };
  auto page_name = [](int i) { return i < 26 ? std::string(1, static_cast<char>('a' + i)) : "p" + std::to_string(i); };

  Instance inst;
  inst.time_model = params.slotted ? TimeModel::slotted : TimeModel::continuous;
  inst.setting = params.setting;
  const int page_count = params.setting == Setting::unicast ? params.requests : params.pages;
  for (int p = 0; p < page_count; ++p)
    inst.pages.push_back({page_name(p), params.slotted ? Rat(1) : Rat(1 + draw(static_cast<std::uint64_t>(params.max_length)))});
  for (int i = 0; i < params.requests; ++i) {
    Request r;
    r.page = params.setting == Setting::unicast ? static_cast<PageId>(i) : static_cast<PageId>(draw(static_cast<std::uint64_t>(page_count)));
    r.arrival = time_value(params.horizon);
    if (params.deadlines == DeadlineStyle::random) r.deadline = r.arrival + inst.pages[r.page].length + time_value(params.horizon);
    switch (params.weights) {
      case WeightStyle::unit: break;
      case WeightStyle::random: {
        static const Rat choices[] = {Rat(1, 2), Rat(1), Rat(2), Rat(3)};
        r.weight = choices[draw(4)];
        break;
      }
      case WeightStyle::inverse_slack: r.weight = Rat(1) / *r.slack(); break;
    }
    inst.requests.push_back(std::move(r));
  }
  assign_request_indices(inst);
  validate_instance(inst);
  return inst;
}

}  // namespace bsim
