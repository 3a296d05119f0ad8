#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace harperlab {

using BigInt = boost::multiprecision::cpp_int;

// alpha = [a_1, a_2, ...] = 1/(a_1 + 1/(a_2 + ...)), optionally with an
// eventually periodic tail [a_1..a_j; (b_1..b_m)].  Immutable value type.
class ContinuedFraction {
 public:
  ContinuedFraction(std::vector<std::uint64_t> prefix,
                    std::vector<std::uint64_t> period = {});

  // Text form "[a1,...,aj;(b1,...,bm)]", "[(b1,...,bm)]" or "[a1,...,aj]".
  static ContinuedFraction parse(std::string_view text);
  std::string str() const;

  const std::vector<std::uint64_t>& prefix() const noexcept { return prefix_; }
  const std::vector<std::uint64_t>& period() const noexcept { return period_; }
  bool is_periodic() const noexcept { return !period_.empty(); }

  // Number of quotients available; SIZE_MAX for periodic expansions.
  std::size_t length() const noexcept;
  bool has_quotient(std::size_t n) const noexcept;
  // a_n, 1-based.
  std::uint64_t quotient(std::size_t n) const;

  // First n quotients as a finite expansion.
  ContinuedFraction truncated(std::size_t n) const;

  // Numeric value, evaluated backwards in extended precision.  Periodic
  // tails are unrolled until the truncation error is below 1e-30.
  long double value_ld() const;
  double value() const { return static_cast<double>(value_ld()); }

  friend bool operator==(const ContinuedFraction&,
                         const ContinuedFraction&) = default;

 private:
  std::vector<std::uint64_t> prefix_;
  std::vector<std::uint64_t> period_;
};

// Lazily evaluated quotient sequence; used by the frequency families, whose
// members need not be eventually periodic.
class QuotientStream {
 public:
  explicit QuotientStream(std::function<std::uint64_t(std::size_t)> at)
      : at_(std::move(at)) {}
  std::uint64_t operator()(std::size_t n) const { return at_(n); }
  ContinuedFraction take(std::size_t n) const;

 private:
  std::function<std::uint64_t(std::size_t)> at_;
};

struct Convergent {
  BigInt p;
  BigInt q;
  std::size_t index = 0;
};

// p_1/q_1 .. p_n/q_n from q_{-1}=0, q_0=1, q_{k+1} = a_{k+1} q_k + q_{k-1}.
std::vector<Convergent> convergents(const ContinuedFraction& cf, std::size_t n);

// [a_{k+1}, a_{k+2}, ...]: the k-th iterate of the Gauss map.
ContinuedFraction gauss_shift(const ContinuedFraction& cf, std::size_t k);

// 2 pi [a_n, a_{n+1}, ...].
double semiclassical_h(const ContinuedFraction& cf, std::size_t n);

// Running maximum of log(q_{k+1})/q_k over 1 <= k < depth; a lower
// approximation of the Liouville exponent at every finite depth.
double beta_estimate(const ContinuedFraction& cf, std::size_t depth);

// log of a positive big integer, accurate to double precision.
double log_big(const BigInt& x);

struct OddAnchor {
  ContinuedFraction cf;
  std::size_t index = 0;
};

// Returns (cf, m) when q_m is odd, otherwise cf with a quotient 1 inserted
// at position m+1 and index m+1 (then q_{m+1} = q_m + q_{m-1} is odd).
OddAnchor ensure_odd_anchor(const ContinuedFraction& cf, std::size_t m);

enum class FamilyKind { F, FNOdd, FNEven };

struct FamilyParams {
  FamilyKind kind = FamilyKind::F;
  std::uint64_t L = 2;      // F: quotients a_n in [L, 10L] for n >= 3
  std::uint64_t N = 2;      // F_N: prefix bound a_n <= N for n <= N
  std::uint64_t L_hat = 2;  // F_N: constant tail
  std::uint64_t seed = 0;
};

// Deterministic generator of expansions from the frequency families
//   F      = {[1, 2, a_3, ...] : L <= a_n <= 10L}
//   F_N^o  = {a_n <= N (n <= N), q_N odd, a_n = L_hat (n > N)}
//   F_N^e  = {a_n <= N (n <= N), q_N even, a_{N+1} = 1, a_n = L_hat (n > N+1)}
class FrequencyFamily {
 public:
  explicit FrequencyFamily(FamilyParams params);

  const FamilyParams& params() const noexcept { return params_; }

  // Quotient stream of the i-th member (F members are not periodic).
  QuotientStream stream(std::uint64_t member) const;
  // The i-th member as an exact expansion: F members are truncated to
  // `length` quotients, F_N members carry their periodic tail.
  ContinuedFraction member(std::uint64_t member, std::size_t length = 64) const;

 private:
  std::vector<std::uint64_t> fn_prefix(std::uint64_t member) const;

  FamilyParams params_;
};

}  // namespace harperlab
