#include <gtest/gtest.h>

#include <limits>
#include <random>

#include "bsim/rational.hpp"

using bsim::Rat;

TEST(Rat, CanonicalForm) {
  EXPECT_EQ(Rat(6, -4).str(), "-3/2");
  EXPECT_EQ(Rat(0, 7).str(), "0");
  EXPECT_EQ(Rat(20, 19) * Rat(19), Rat(20));
  EXPECT_EQ(Rat(1, 3) + Rat(1, 6), Rat(1, 2));
}

TEST(Rat, ParseAndPrint) {
  EXPECT_EQ(Rat::parse("20/19"), Rat(20, 19));
  EXPECT_EQ(Rat::parse("-7"), Rat(-7));
  EXPECT_EQ(Rat::parse("4/2").str(), "2");
  for (const char* bad : {"", "1/", "/2", "1/0", "1.5", "a", "--1", "1/-2", " 1"})
    EXPECT_THROW(Rat::parse(bad), std::invalid_argument) << bad;
}

TEST(Rat, LargeValuesPromoteAndDemote) {
  const std::string huge = "123456789012345678901234567891/2";
  Rat h = Rat::parse(huge);
  EXPECT_FALSE(h.is_small());
  EXPECT_EQ(h.str(), huge);
  EXPECT_EQ(h - h, Rat(0));
  EXPECT_TRUE((h - h).is_small());
  Rat max = std::numeric_limits<std::int64_t>::max();
  Rat over = max + Rat(1);
  EXPECT_FALSE(over.is_small());
  EXPECT_EQ((over - Rat(1)).str(), std::to_string(std::numeric_limits<std::int64_t>::max()));
  EXPECT_TRUE((over - Rat(1)).is_small());
  EXPECT_EQ(Rat(std::numeric_limits<std::int64_t>::min()).str(), std::to_string(std::numeric_limits<std::int64_t>::min()));
  EXPECT_EQ(bsim::pow(Rat(6), 17).str(), "16926659444736");
  EXPECT_EQ(bsim::pow(Rat(10), 30) / bsim::pow(Rat(10), 29), Rat(10));
}

TEST(Rat, FloorCeilOrdering) {
  EXPECT_EQ(Rat(7, 2).floor(), Rat(3));
  EXPECT_EQ(Rat(7, 2).ceil(), Rat(4));
  EXPECT_EQ(Rat(-7, 2).floor(), Rat(-4));
  EXPECT_EQ(Rat(-7, 2).ceil(), Rat(-3));
  EXPECT_EQ(Rat(3).ceil(), Rat(3));
  EXPECT_LT(Rat(1, 3), Rat(1, 2));
  EXPECT_LT(Rat(-1, 2), Rat(-1, 3));
  EXPECT_LT(Rat(5), Rat::parse("100000000000000000000000"));
  EXPECT_THROW(Rat(1) / Rat(0), std::domain_error);
}

// For random x, y: (x + y) - y == x and (x * y) / y == x, across both
// representations.
TEST(Rat, RandomFieldIdentities) {
  std::mt19937_64 rng(2024);
  auto draw = [&]() -> Rat {
    std::int64_t num = static_cast<std::int64_t>(rng() % 2000001) - 1000000;
    std::int64_t den = static_cast<std::int64_t>(rng() % 1000) + 1;
    Rat v(num, den);
    if (rng() % 4 == 0) v *= bsim::pow(Rat(1000003), 3);  // beyond 64 bits
    return v;
  };
  for (int i = 0; i < 1000; ++i) {
    Rat x = draw(), y = draw();
    EXPECT_EQ((x + y) - y, x);
    if (!y.is_zero()) {
      EXPECT_EQ((x * y) / y, x);
    }
    EXPECT_EQ(Rat::parse(x.str()), x);
    EXPECT_EQ(x.to_mpq(), Rat(x.to_mpq()).to_mpq());
    EXPECT_EQ(x < y, x.to_mpq() < y.to_mpq());
  }
}
