#include <gtest/gtest.h>

#include <sstream>

#include "bsim/engine.hpp"
#include "bsim/generators.hpp"
#include "bsim/grouped.hpp"
#include "bsim/invariants.hpp"
#include "bsim/validate.hpp"
#include "support.hpp"

using namespace bsim;
using testing_support::make_instance;
using testing_support::R;

namespace {

SimConfig config(PolicyKind kind, std::optional<Rat> c = std::nullopt, Mode mode = Mode::nonpreemptive, Rat speed = 1) {
  SimConfig cfg;
  cfg.policy = {kind, c};
  cfg.mode = mode;
  cfg.speed = speed;
  return cfg;
}

Instance preempt_resume_instance() {
  return make_instance({{"a", R(3)}, {"b", R(1)}}, {{"a", R(0), R(10)}, {"b", R(1), R(2)}});
}

// Same-page restart. Slacks 30 and 3 put the Q-entry at 20/19 exactly as
// slacks 10 and 1 would, while keeping slack >= page length.
Instance restart_instance() { return make_instance({{"a", R(3)}}, {{"a", R(0), R(30)}, {"a", R(1), R(4)}}); }

}  // namespace

TEST(Simulate, FifoHandTrace) {
  auto inst = make_instance({{"a", R(2)}, {"b", R(1)}}, {{"a", R(0)}, {"b", R(0)}, {"b", R(1)}});
  Transcript tr = simulate(inst, config(PolicyKind::fifo));
  ASSERT_EQ(tr.attempts.size(), 2u);
  EXPECT_EQ(tr.attempts[0].page, 0u);
  EXPECT_EQ(tr.attempts[0].start, R(0));
  EXPECT_EQ(tr.attempts[0].end, R(2));
  EXPECT_EQ(tr.attempts[1].page, 1u);
  EXPECT_EQ(tr.attempts[1].start, R(2));
  EXPECT_EQ(tr.attempts[1].end, R(3));
  EXPECT_EQ(tr.finish, (std::vector<std::optional<Rat>>{R(2), R(3), R(3)}));
  EXPECT_TRUE(validate_transcript(inst, tr).empty());
}

TEST(Simulate, ArrivalAtStartIsServed) {
  auto inst = make_instance({{"a", R(1)}, {"b", R(1)}}, {{"b", R(0)}, {"a", R(1)}, {"a", R(1)}});
  Transcript tr = simulate(inst, config(PolicyKind::fifo));
  EXPECT_EQ(tr.attempts.size(), 2u);
  EXPECT_EQ(tr.finish[1], R(2));
  EXPECT_EQ(tr.finish[2], R(2));
}

TEST(Simulate, PreemptAndResumeGolden) {
  auto inst = preempt_resume_instance();
  std::ostringstream log;
  SimOptions opts;
  opts.log = &log;
  Transcript tr = simulate(inst, config(PolicyKind::ssfw, R(2), Mode::preemptive), opts);
  ASSERT_EQ(tr.attempts.size(), 2u);
  const auto& a = tr.attempts[0];
  EXPECT_EQ(a.status, AttemptStatus::completed);
  EXPECT_EQ(a.segments, (std::vector<Segment>{{R(0), R(20, 19)}, {R(39, 19), R(4)}}));
  EXPECT_EQ(tr.attempts[1].segments, (std::vector<Segment>{{R(20, 19), R(39, 19)}}));
  EXPECT_EQ(tr.finish[1], R(39, 19));
  EXPECT_EQ(tr.finish[0], R(76, 19));
  EXPECT_EQ(tr.finish[0], R(4));
  EXPECT_TRUE(validate_transcript(inst, tr).empty());
  EXPECT_EQ(log.str(),
            "t=0 arrive request=0 page=a\n"
            "t=0 start attempt=0 page=a forcing=0\n"
            "t=1 arrive request=1 page=b\n"
            "t=20/19 preempt attempt=0 page=a work=20/19\n"
            "t=20/19 start attempt=1 page=b forcing=1\n"
            "t=39/19 complete attempt=1 page=b satisfied=1\n"
            "t=39/19 resume attempt=0 page=a forcing=0 work=20/19\n"
            "t=4 complete attempt=0 page=a satisfied=1\n");
}

TEST(Simulate, SamePageRestartGolden) {
  auto inst = restart_instance();
  Transcript tr = simulate(inst, config(PolicyKind::ssfw, R(2), Mode::preemptive));
  ASSERT_EQ(tr.attempts.size(), 2u);
  EXPECT_EQ(tr.attempts[0].status, AttemptStatus::abandoned);
  EXPECT_EQ(tr.attempts[0].segments, (std::vector<Segment>{{R(0), R(20, 19)}}));
  EXPECT_FALSE(tr.attempts[0].end);
  EXPECT_EQ(tr.attempts[1].start, R(20, 19));
  EXPECT_EQ(tr.attempts[1].end, R(77, 19));
  EXPECT_EQ(tr.finish, (std::vector<std::optional<Rat>>{R(77, 19), R(77, 19)}));
  EXPECT_TRUE(validate_transcript(inst, tr).empty());
}

TEST(Simulate, NoPreemptionOnEqualSlack) {
  auto inst = make_instance({{"a", R(3)}, {"b", R(1)}}, {{"a", R(0), R(4)}, {"b", R(1), R(5)}});
  Transcript tr = simulate(inst, config(PolicyKind::ssfw, R(2), Mode::preemptive));
  ASSERT_EQ(tr.attempts.size(), 2u);
  EXPECT_EQ(tr.attempts[0].segments.size(), 1u);
}

// The Q-entry time of the golden example, found on a grid with step 1/190
// straight from the inequality c (t - 1)/1 >= (t - 0)/10.
TEST(NextQEntryCrossing, MatchesGridScan) {
  std::optional<Rat> first;
  for (int j = 190; j <= 380 && !first; ++j) {
    Rat t = R(j, 190);
    if (R(2) * (t - R(1)) >= t / R(10)) first = t;
  }
  ASSERT_TRUE(first);
  std::vector<RatioLine> lines{{0, R(0), R(10)}, {1, R(1), R(1)}};
  auto x = next_q_entry_crossing(lines, R(1), R(2));
  ASSERT_TRUE(x);
  EXPECT_EQ(x->time, *first);
  EXPECT_EQ(*x, (QEntryCrossing{R(20, 19), 1}));
  EXPECT_FALSE(next_q_entry_crossing(lines, R(1), R(2), R(20, 19)));
  EXPECT_TRUE(next_q_entry_crossing(lines, R(1), R(2), R(21, 19)));
}

TEST(NextQEntryCrossing, SingleRequestNeverCrosses) {
  std::vector<RatioLine> one{{0, R(0), R(3)}};
  EXPECT_FALSE(next_q_entry_crossing(one, R(5), R(2)));
}

TEST(NextQEntryCrossing, EqualSlackLaterArrival) {
  // a' = 0 (maximizer), a = 3, equal slack 4, c = 2: enters at t = 2a - a' = 6.
  std::vector<RatioLine> lines{{0, R(0), R(4)}, {1, R(3), R(4)}};
  auto x = next_q_entry_crossing(lines, R(3), R(2));
  ASSERT_TRUE(x);
  EXPECT_EQ(x->time, R(6));
  EXPECT_FALSE(next_q_entry_crossing(lines, R(3), R(2), R(5)));
}

TEST(SimConfig, Errors) {
  auto slotted = make_instance({{"a", R(1)}}, {{"a", R(0), R(2)}}, TimeModel::slotted);
  try {
    simulate(slotted, config(PolicyKind::ssfw, R(2), Mode::preemptive));
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("slotted requires nonpreemptive"), std::string::npos);
  }
  EXPECT_THROW(simulate(slotted, config(PolicyKind::ssfw)), ConfigError);
  EXPECT_THROW(simulate(slotted, config(PolicyKind::fifo, std::nullopt, Mode::nonpreemptive, R(1, 2))), ConfigError);
  auto cont = make_instance({{"a", R(1)}}, {{"a", R(0), R(2)}});
  EXPECT_THROW(simulate(cont, config(PolicyKind::lf, std::nullopt, Mode::preemptive)), ConfigError);
  auto nodl = make_instance({{"a", R(1)}}, {{"a", R(0)}});
  EXPECT_THROW(simulate(nodl, config(PolicyKind::ssfw, R(2))), MismatchError);
}

// The engine against the naive reference loop in support.hpp, every policy,
// both settings, several speeds.
TEST(Simulate, MatchesReferenceLoop) {
  const PolicyKind kinds[] = {PolicyKind::fifo, PolicyKind::ssf, PolicyKind::ssfw, PolicyKind::bwf, PolicyKind::srfw, PolicyKind::lf};
  for (std::uint64_t seed = 0; seed < 1500; ++seed) {
    RandomParams p;
    p.requests = 1 + static_cast<int>(seed % 7);
    p.slotted = seed % 3 == 0;
    p.max_length = p.slotted ? 1 : 3;
    p.deadlines = DeadlineStyle::random;
    p.weights = seed % 2 ? WeightStyle::random : WeightStyle::unit;
    p.setting = seed % 4 == 0 ? Setting::unicast : Setting::broadcast;
    Instance inst = random_instance(seed, p);
    const PolicyKind kind = kinds[seed % 6];
    SimConfig cfg = config(kind, uses_waiting(kind) ? std::optional<Rat>(R(3, 2) + R(static_cast<std::int64_t>(seed % 3))) : std::nullopt,
                           Mode::nonpreemptive, R(1) + R(static_cast<std::int64_t>(seed % 3), 2));
    Transcript tr = simulate(inst, cfg);
    auto ref = testing_support::reference_simulate(inst, cfg.speed, cfg.policy);
    ASSERT_EQ(tr.attempts.size(), ref.attempts.size()) << "seed " << seed;
    for (std::size_t i = 0; i < ref.attempts.size(); ++i) {
      EXPECT_EQ(tr.attempts[i].page, std::get<0>(ref.attempts[i])) << "seed " << seed;
      EXPECT_EQ(tr.attempts[i].start, std::get<1>(ref.attempts[i])) << "seed " << seed;
      EXPECT_EQ(tr.attempts[i].end, std::get<2>(ref.attempts[i])) << "seed " << seed;
    }
    for (std::size_t r = 0; r < inst.requests.size(); ++r) EXPECT_EQ(tr.finish[r], ref.finish[r]) << "seed " << seed;
    EXPECT_TRUE(validate_transcript(inst, tr).empty()) << "seed " << seed;
  }
}

namespace {

void expect_work_conserving(const Instance& inst, const Transcript& tr, std::uint64_t seed) {
  auto v = work_conservation_violations(inst, tr);
  EXPECT_TRUE(v.empty()) << "seed " << seed << ": " << ::testing::PrintToString(v);
}

}  // namespace

TEST(Simulate, PreemptiveInvariants) {
  for (std::uint64_t seed = 0; seed < 1500; ++seed) {
    RandomParams p;
    p.requests = 1 + static_cast<int>(seed % 7);
    p.slotted = false;
    p.max_length = 4;
    p.deadlines = DeadlineStyle::random;
    Instance inst = random_instance(seed, p);
    SimConfig cfg = config(PolicyKind::ssfw, R(1) + R(static_cast<std::int64_t>(1 + seed % 5), 2), Mode::preemptive,
                           R(1) + R(static_cast<std::int64_t>(seed % 4), 2));
    std::size_t outside = 0;
    SimOptions opts;
    opts.observer = [&](const QueueView& v, std::size_t chosen) {
      auto q = ssfw_queue(v, *cfg.policy.c);
      if (std::find(q.begin(), q.end(), chosen) == q.end()) ++outside;
    };
    Transcript tr = simulate(inst, cfg, opts);
    EXPECT_EQ(outside, 0u);
    EXPECT_TRUE(validate_transcript(inst, tr).empty()) << "seed " << seed;
    EXPECT_EQ(simulate(inst, cfg), tr);
    expect_work_conserving(inst, tr, seed);
    Volume vol = transmitted_volume(tr);
    EXPECT_LE(vol.abandoned, vol.transmitted);
  }
}

TEST(Simulate, NonpreemptiveNeverSplits) {
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    RandomParams p;
    p.slotted = false;
    p.max_length = 3;
    p.deadlines = DeadlineStyle::random;
    Instance inst = random_instance(seed, p);
    Transcript tr = simulate(inst, config(PolicyKind::ssfw, R(2)));
    for (const auto& a : tr.attempts) {
      EXPECT_EQ(a.status, AttemptStatus::completed);
      EXPECT_EQ(a.segments.size(), 1u);
    }
    expect_work_conserving(inst, tr, seed);
  }
}

TEST(Grouped, AdversaryIntervalsAndRatios) {
  auto [plan, inst] = build_lf_adversary(1, 2);
  GroupedResult res = simulate_grouped_unicast(inst, config(PolicyKind::lf));
  ASSERT_EQ(res.transcript.attempts.size(), 4u);
  const std::vector<std::pair<Rat, Rat>> want{{R(-23), R(-7)}, {R(-7), R(-3)}, {R(-3), R(-1)}, {R(-1), R(0)}};
  for (std::size_t g = 0; g < 4; ++g) {
    const auto& a = res.transcript.attempts[g];
    EXPECT_EQ(a.forcing_request, g);
    EXPECT_EQ(a.start - plan.shift, want[g].first);
    EXPECT_EQ(*a.end - plan.shift, want[g].second);
  }
  std::vector<std::optional<Rat>> ratios{R(1, 4), R(1, 2), R(1), R(2)};
  EXPECT_EQ(res.max_wait_ratio, ratios);
  EXPECT_TRUE(validate_transcript(inst, res.transcript).empty());
}

TEST(Grouped, UnitMultiplicitiesMatchSimulate) {
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    RandomParams p;
    p.requests = 1 + static_cast<int>(seed % 8);
    p.slotted = false;
    p.deadlines = DeadlineStyle::random;
    p.setting = Setting::unicast;
    Instance inst = random_instance(seed, p);
    for (auto kind : {PolicyKind::lf, PolicyKind::fifo}) {
      SimConfig cfg = config(kind, std::nullopt, Mode::nonpreemptive, R(1) + R(static_cast<std::int64_t>(seed % 2)));
      EXPECT_EQ(simulate_grouped_unicast(inst, cfg).transcript, simulate(inst, cfg)) << "seed " << seed;
    }
  }
}

TEST(Grouped, Rejections) {
  auto bc = make_instance({{"a", R(1)}}, {{"a", R(0), R(2)}});
  EXPECT_THROW(simulate_grouped_unicast(bc, config(PolicyKind::lf)), ConfigError);
  auto uc = make_instance({{"a", R(1)}}, {{"a", R(0), R(2)}}, TimeModel::continuous, Setting::unicast);
  EXPECT_THROW(simulate_grouped_unicast(uc, config(PolicyKind::ssf)), ConfigError);
}

TEST(Invariants, IdleGapDetected) {
  auto inst = make_instance({{"a", R(1)}}, {{"a", R(0)}});
  Transcript tr;
  TransmissionAttempt a;
  a.page = 0;
  a.start = 1;
  a.segments = {{R(1), R(2)}};
  a.end = R(2);
  tr.attempts.push_back(a);
  tr.finish = {R(2)};
  EXPECT_EQ(work_conservation_violations(inst, tr).size(), 1u);
  tr.attempts[0].start = 0;
  tr.attempts[0].segments = {{R(0), R(1)}};
  tr.attempts[0].end = R(1);
  tr.finish = {R(1)};
  EXPECT_TRUE(work_conservation_violations(inst, tr).empty());
  EXPECT_EQ(transmitted_volume(tr).transmitted, R(1));
}
