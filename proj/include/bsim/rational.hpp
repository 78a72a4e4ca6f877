#pragma once

// Exact rational numbers.
//
// Values that fit in a pair of int64 stay in the small representation and
// use 128-bit intermediates; anything larger is promoted to a GMP rational.
// Every value is kept canonical (lowest terms, positive denominator, small
// whenever it fits), so equality is structural.

#include <gmpxx.h>

#include <compare>
#include <concepts>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace bsim {

class Rat {
 public:
  Rat() = default;

  template <std::integral I>
  Rat(I value) {  // NOLINT(google-explicit-constructor)
    if constexpr (std::is_signed_v<I>) {
      if (static_cast<std::int64_t>(value) == kMin) {
        assign_big(mpq_class(mpz_class(static_cast<long>(value))));
        return;
      }
      num_ = static_cast<std::int64_t>(value);
    } else {
      if (static_cast<std::uint64_t>(value) > static_cast<std::uint64_t>(kMax)) {
        assign_big(mpq_class(mpz_class(static_cast<unsigned long>(value))));
        return;
      }
      num_ = static_cast<std::int64_t>(value);
    }
  }

  Rat(std::int64_t num, std::int64_t den) {
    if (den == 0) throw std::domain_error("rational with zero denominator");
    assign_wide(static_cast<i128>(num), static_cast<i128>(den));
  }

  explicit Rat(const mpq_class& q) { assign_big(mpq_class(q)); }

  // Accepts "7", "-7", "20/19", "-20/19" with arbitrarily many digits.
  static Rat parse(std::string_view text) {
    auto bad = [&]() -> std::invalid_argument {
      return std::invalid_argument("malformed rational '" + std::string(text) + "'");
    };
    auto slash = text.find('/');
    std::string_view num_part = text.substr(0, slash);
    std::string_view den_part = slash == std::string_view::npos ? std::string_view{"1"} : text.substr(slash + 1);
    auto digits_ok = [](std::string_view s, bool allow_sign) {
      if (allow_sign && !s.empty() && s.front() == '-') s.remove_prefix(1);
      if (s.empty()) return false;
      for (char ch : s)
        if (ch < '0' || ch > '9') return false;
      return true;
    };
    if (!digits_ok(num_part, true) || !digits_ok(den_part, false)) throw bad();
    mpz_class n(std::string(num_part), 10);
    mpz_class d(std::string(den_part), 10);
    if (d == 0) throw bad();
    mpq_class q(n, d);
    q.canonicalize();
    return Rat(q);
  }

  std::string str() const {
    if (!big_) {
      if (den_ == 1) return std::to_string(num_);
      return std::to_string(num_) + "/" + std::to_string(den_);
    }
    return big_->get_str(10);
  }

  mpq_class to_mpq() const {
    if (big_) return *big_;
    return mpq_class(mpz_class(static_cast<long>(num_)), mpz_class(static_cast<long>(den_)));
  }

  int sign() const {
    if (big_) return sgn(*big_);
    return (num_ > 0) - (num_ < 0);
  }
  bool is_zero() const { return sign() == 0; }
  bool is_integer() const { return big_ ? big_->get_den() == 1 : den_ == 1; }
  bool is_small() const { return !big_; }

  Rat floor() const {
    if (!big_) {
      std::int64_t q = num_ / den_;
      if (num_ % den_ != 0 && num_ < 0) --q;
      return Rat(q);
    }
    mpz_class q;
    mpz_fdiv_q(q.get_mpz_t(), big_->get_num_mpz_t(), big_->get_den_mpz_t());
    return Rat(mpq_class(q));
  }

  Rat ceil() const { return -((-*this).floor()); }

  // The value as int64 when it is an integer that fits.
  std::optional<std::int64_t> to_int64() const {
    if (!big_) {
      if (den_ != 1) return std::nullopt;
      return num_;
    }
    return std::nullopt;
  }

  Rat operator-() const {
    if (!big_) {
      Rat r;
      r.num_ = -num_;
      r.den_ = den_;
      return r;
    }
    return Rat(mpq_class(-*big_));
  }

  friend Rat operator+(const Rat& a, const Rat& b) {
    if (!a.big_ && !b.big_) {
      Rat r;
      if (a.den_ == b.den_) {
        r.assign_wide(static_cast<i128>(a.num_) + b.num_, a.den_);
      } else {
        r.assign_wide(static_cast<i128>(a.num_) * b.den_ + static_cast<i128>(b.num_) * a.den_,
                      static_cast<i128>(a.den_) * b.den_);
      }
      return r;
    }
    return Rat(mpq_class(a.to_mpq() + b.to_mpq()));
  }

  friend Rat operator-(const Rat& a, const Rat& b) {
    if (!a.big_ && !b.big_) {
      Rat r;
      if (a.den_ == b.den_) {
        r.assign_wide(static_cast<i128>(a.num_) - b.num_, a.den_);
      } else {
        r.assign_wide(static_cast<i128>(a.num_) * b.den_ - static_cast<i128>(b.num_) * a.den_,
                      static_cast<i128>(a.den_) * b.den_);
      }
      return r;
    }
    return Rat(mpq_class(a.to_mpq() - b.to_mpq()));
  }

  friend Rat operator*(const Rat& a, const Rat& b) {
    if (!a.big_ && !b.big_) {
      if (a.num_ == 0 || b.num_ == 0) return Rat();
      std::int64_t g1 = std::gcd(a.num_, b.den_);
      std::int64_t g2 = std::gcd(b.num_, a.den_);
      i128 n = static_cast<i128>(a.num_ / g1) * (b.num_ / g2);
      i128 d = static_cast<i128>(a.den_ / g2) * (b.den_ / g1);
      Rat r;
      r.assign_reduced(n, d);
      return r;
    }
    return Rat(mpq_class(a.to_mpq() * b.to_mpq()));
  }

  friend Rat operator/(const Rat& a, const Rat& b) {
    if (b.is_zero()) throw std::domain_error("rational division by zero");
    if (!a.big_ && !b.big_) {
      Rat inv;
      // b.num_ != INT64_MIN by the canonical-small invariant
      inv.num_ = b.num_ < 0 ? -b.den_ : b.den_;
      inv.den_ = b.num_ < 0 ? -b.num_ : b.num_;
      return a * inv;
    }
    return Rat(mpq_class(a.to_mpq() / b.to_mpq()));
  }

  Rat& operator+=(const Rat& o) { return *this = *this + o; }
  Rat& operator-=(const Rat& o) { return *this = *this - o; }
  Rat& operator*=(const Rat& o) { return *this = *this * o; }
  Rat& operator/=(const Rat& o) { return *this = *this / o; }

  friend bool operator==(const Rat& a, const Rat& b) {
    if (!a.big_ && !b.big_) return a.num_ == b.num_ && a.den_ == b.den_;
    if (a.big_ && b.big_) return *a.big_ == *b.big_;
    return false;
  }

  friend std::strong_ordering operator<=>(const Rat& a, const Rat& b) {
    if (!a.big_ && !b.big_) {
      i128 lhs = static_cast<i128>(a.num_) * b.den_;
      i128 rhs = static_cast<i128>(b.num_) * a.den_;
      return lhs <=> rhs;
    }
    int c = cmp(a.to_mpq(), b.to_mpq());
    return c <=> 0;
  }

  friend std::ostream& operator<<(std::ostream& os, const Rat& r) { return os << r.str(); }

 private:
  __extension__ typedef __int128 i128;
  __extension__ typedef unsigned __int128 u128;
  static constexpr std::int64_t kMax = std::numeric_limits<std::int64_t>::max();
  static constexpr std::int64_t kMin = std::numeric_limits<std::int64_t>::min();

  static u128 gcd128(u128 a, u128 b) {
    while (b != 0) {
      if (a <= std::numeric_limits<std::uint64_t>::max() && b <= std::numeric_limits<std::uint64_t>::max())
        return std::gcd(static_cast<std::uint64_t>(a), static_cast<std::uint64_t>(b));
      u128 t = a % b;
      a = b;
      b = t;
    }
    return a;
  }

  static mpz_class to_mpz(i128 v) {
    bool neg = v < 0;
    u128 mag = neg ? static_cast<u128>(-(v + 1)) + 1 : static_cast<u128>(v);
    std::uint64_t words[2] = {static_cast<std::uint64_t>(mag), static_cast<std::uint64_t>(mag >> 64)};
    mpz_class z;
    mpz_import(z.get_mpz_t(), 2, -1, sizeof(std::uint64_t), 0, 0, words);
    if (neg) z = -z;
    return z;
  }

  static bool fits(i128 v) { return v <= kMax && v > kMin; }

  // n/d with d != 0, not necessarily reduced.
  void assign_wide(i128 n, i128 d) {
    if (d < 0) {
      n = -n;
      d = -d;
    }
    if (n == 0) {
      num_ = 0;
      den_ = 1;
      big_.reset();
      return;
    }
    u128 g = gcd128(n < 0 ? static_cast<u128>(-n) : static_cast<u128>(n), static_cast<u128>(d));
    assign_reduced(n / static_cast<i128>(g), d / static_cast<i128>(g));
  }

  // n/d already in lowest terms; d > 0.
  void assign_reduced(i128 n, i128 d) {
    if (fits(n) && fits(d)) {
      num_ = static_cast<std::int64_t>(n);
      den_ = static_cast<std::int64_t>(d);
      big_.reset();
      return;
    }
    mpq_class q(to_mpz(n), to_mpz(d));
    assign_big(std::move(q));
  }

  void assign_big(mpq_class q) {
    q.canonicalize();
    const mpz_class& n = q.get_num();
    const mpz_class& d = q.get_den();
    if (n.fits_slong_p() && d.fits_slong_p() && n.get_si() != kMin) {
      num_ = n.get_si();
      den_ = d.get_si();
      big_.reset();
      return;
    }
    num_ = 0;
    den_ = 1;
    big_ = std::make_shared<const mpq_class>(std::move(q));
  }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
  std::shared_ptr<const mpq_class> big_;
};

inline Rat min(const Rat& a, const Rat& b) { return b < a ? b : a; }
inline Rat max(const Rat& a, const Rat& b) { return a < b ? b : a; }

// base^exp for a non-negative integer exponent.
inline Rat pow(Rat base, unsigned exp) {
  Rat result = 1;
  while (exp != 0) {
    if (exp & 1u) result *= base;
    base *= base;
    exp >>= 1u;
  }
  return result;
}

}  // namespace bsim
