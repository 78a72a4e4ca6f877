#include <gtest/gtest.h>

#include <sstream>

#include "bsim/verify.hpp"

using namespace bsim;

TEST(VerifyFifo, SingleRequestRatioIsOne) {
  FamilySpec fam;
  fam.small = {2, 3, 1, 1, false};
  VerifyReport r = verify_fifo(fam);
  EXPECT_EQ(r.instances, 8u);
  EXPECT_EQ(r.max_ratio, Rat(1));
  EXPECT_TRUE(r.passed());
}

TEST(VerifyFifo, CsvReport) {
  FamilySpec fam;
  fam.kind = FamilyKind::random;
  fam.seeds = 3;
  fam.varying_sizes = true;
  std::ostringstream csv;
  VerifyReport r = verify_fifo(fam, &csv);
  EXPECT_EQ(r.instances, 3u);
  std::istringstream in(csv.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "index,family,online,optimum,ratio");
  int rows = 0;
  while (std::getline(in, line)) {
    EXPECT_EQ(line.rfind(std::to_string(rows) + ",random-varying,", 0), 0u);
    ++rows;
  }
  EXPECT_EQ(rows, 3);
}

TEST(VerifySsfw, ParametersFromEpsilon) {
  SimConfig unit = ssfw_config(Rat(1), false);
  EXPECT_EQ(unit.speed, Rat(2));
  EXPECT_EQ(unit.policy.c, Rat(4));
  EXPECT_EQ(unit.mode, Mode::nonpreemptive);
  SimConfig varying = ssfw_config(Rat(1), true);
  EXPECT_EQ(varying.speed, Rat(3));
  EXPECT_EQ(varying.policy.c, Rat(6));
  EXPECT_EQ(varying.mode, Mode::preemptive);
  EXPECT_EQ(ssfw_config(Rat(1, 2), false).policy.c, Rat(7));
  EXPECT_THROW(ssfw_config(Rat(0), false), ConfigError);
}

TEST(VerifySsfw, SingleRequestWithinBound) {
  FamilySpec fam;
  fam.small = {2, 2, 1, 1, false};
  VerifyReport r = verify_ssfw(fam, Rat(1));
  EXPECT_EQ(r.max_ratio, Rat(1));
  EXPECT_EQ(r.bound, Rat(16));
  EXPECT_TRUE(r.passed());
}

TEST(VerifySsfw, SharedSlackFamilyAboveFullDeadlineSize) {
  FamilySpec fam;
  fam.small = {2, 1, 3, 1, false};
  fam.full_deadline_requests = 2;
  std::size_t n = 0;
  detail::for_each_family_instance(fam, true, [&](const Instance& inst) {
    EXPECT_TRUE(inst.has_deadlines());
    ++n;
  });
  // Up to 2 requests with every deadline, then 4 three-request patterns x 3 slacks.
  std::size_t full = for_each_small_instance({2, 1, 2, 1, true}, [](const Instance&) {});
  EXPECT_EQ(n, full + 4 * 3);
}

TEST(LfLowerBound, ExactForSmallPlan) {
  LowerBoundReport r = lf_lowerbound(1, 2);
  EXPECT_TRUE(r.passed()) << ::testing::PrintToString(r.failures);
  EXPECT_EQ(r.lf_value, Rat(2));
  EXPECT_EQ(r.opt_value, Rat(1));
  EXPECT_EQ(r.jobs, 23);
  LowerBoundReport g = lf_lowerbound(1, 2, std::nullopt, true);
  EXPECT_TRUE(g.passed());
  EXPECT_EQ(g.measured_ratio, r.measured_ratio);
  EXPECT_TRUE(lf_lowerbound(1, 2, 4).passed());
}
