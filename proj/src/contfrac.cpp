#include "harperlab/contfrac.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>

#include "harperlab/errors.hpp"
#include "harperlab/random.hpp"

namespace harperlab {

namespace {

void check_quotients(const std::vector<std::uint64_t>& v) {
  for (auto a : v)
    if (a < 1) throw ValidationError("continued fraction quotients must be >= 1");
}

class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  ContinuedFraction run() {
    expect('[');
    std::vector<std::uint64_t> prefix, period;
    if (peek() == '(') {
      period = group();
    } else if (peek() != ']') {
      if (peek() != ';') prefix = list();
      if (peek() == ';') {
        ++pos_;
        period = group();
      }
    }
    expect(']');
    if (pos_ != s_.size()) fail("trailing characters");
    if (prefix.empty() && period.empty()) fail("empty expansion");
    return ContinuedFraction(std::move(prefix), std::move(period));
  }

 private:
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::vector<std::uint64_t> group() {
    expect('(');
    auto v = list();
    expect(')');
    return v;
  }

  std::vector<std::uint64_t> list() {
    std::vector<std::uint64_t> v{number()};
    while (peek() == ',') {
      ++pos_;
      v.push_back(number());
    }
    return v;
  }

  std::uint64_t number() {
    std::uint64_t x = 0;
    const char* first = s_.data() + pos_;
    const char* last = s_.data() + s_.size();
    if (first == last || *first < '0' || *first > '9') fail("expected a quotient");
    auto [ptr, ec] = std::from_chars(first, last, x);
    if (ec != std::errc()) fail("quotient out of range");
    pos_ += static_cast<std::size_t>(ptr - first);
    if (x == 0) fail("quotients must be >= 1");
    return x;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ValidationError("malformed continued fraction '" + std::string(s_) +
                          "' at offset " + std::to_string(pos_) + ": " + what);
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

void append_list(std::string& out, const std::vector<std::uint64_t>& v) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
}

}  // namespace

ContinuedFraction::ContinuedFraction(std::vector<std::uint64_t> prefix,
                                     std::vector<std::uint64_t> period)
    : prefix_(std::move(prefix)), period_(std::move(period)) {
  check_quotients(prefix_);
  check_quotients(period_);
}

ContinuedFraction ContinuedFraction::parse(std::string_view text) {
  return Parser(text).run();
}

std::string ContinuedFraction::str() const {
  std::string out = "[";
  append_list(out, prefix_);
  if (!period_.empty()) {
    if (!prefix_.empty()) out += ';';
    out += '(';
    append_list(out, period_);
    out += ')';
  }
  out += ']';
  return out;
}

std::size_t ContinuedFraction::length() const noexcept {
  return period_.empty() ? prefix_.size() : std::numeric_limits<std::size_t>::max();
}

bool ContinuedFraction::has_quotient(std::size_t n) const noexcept {
  return n >= 1 && n <= length();
}

std::uint64_t ContinuedFraction::quotient(std::size_t n) const {
  if (!has_quotient(n))
    throw InsufficientExpansionError("quotient a_" + std::to_string(n) +
                                     " not available in " + str());
  if (n <= prefix_.size()) return prefix_[n - 1];
  return period_[(n - 1 - prefix_.size()) % period_.size()];
}

ContinuedFraction ContinuedFraction::truncated(std::size_t n) const {
  if (n == 0 || !has_quotient(n))
    throw InsufficientExpansionError("cannot truncate " + str() + " to " +
                                     std::to_string(n) + " quotients");
  std::vector<std::uint64_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = quotient(i + 1);
  return ContinuedFraction(std::move(out));
}

long double ContinuedFraction::value_ld() const {
  std::size_t n = prefix_.size();
  if (!period_.empty()) {
    // |alpha - p_n/q_n| < 1/q_n^2 and q_n grows at least like the Fibonacci
    // numbers, so 160 extra quotients are far below long double resolution.
    const std::size_t reps = (160 + period_.size() - 1) / period_.size();
    n += reps * period_.size();
  }
  long double x = 0.0L;
  for (std::size_t k = n; k >= 1; --k)
    x = 1.0L / (static_cast<long double>(quotient(k)) + x);
  return x;
}

ContinuedFraction QuotientStream::take(std::size_t n) const {
  std::vector<std::uint64_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = at_(i + 1);
  return ContinuedFraction(std::move(v));
}

std::vector<Convergent> convergents(const ContinuedFraction& cf, std::size_t n) {
  if (n < 1) throw ValidationError("convergents: n must be >= 1");
  if (!cf.has_quotient(n))
    throw InsufficientExpansionError("convergents: expansion " + cf.str() +
                                     " has fewer than " + std::to_string(n) +
                                     " quotients");
  std::vector<Convergent> out;
  out.reserve(n);
  BigInt p_prev = 1, p = 0;  // p_{-1}, p_0
  BigInt q_prev = 0, q = 1;  // q_{-1}, q_0
  for (std::size_t k = 1; k <= n; ++k) {
    const BigInt a = cf.quotient(k);
    BigInt p_next = a * p + p_prev;
    BigInt q_next = a * q + q_prev;
    p_prev = std::move(p);
    q_prev = std::move(q);
    p = std::move(p_next);
    q = std::move(q_next);
    out.push_back({p, q, k});
  }
  return out;
}

ContinuedFraction gauss_shift(const ContinuedFraction& cf, std::size_t k) {
  const auto& pre = cf.prefix();
  const auto& per = cf.period();
  if (k <= pre.size()) {
    if (!cf.is_periodic() && k >= pre.size())
      throw InsufficientExpansionError("gauss_shift: shifting " + cf.str() +
                                       " by " + std::to_string(k) +
                                       " exhausts the expansion");
    return ContinuedFraction(std::vector<std::uint64_t>(pre.begin() + k, pre.end()),
                             per);
  }
  if (!cf.is_periodic())
    throw InsufficientExpansionError("gauss_shift: shifting " + cf.str() + " by " +
                                     std::to_string(k) + " exhausts the expansion");
  const std::size_t rot = (k - pre.size()) % per.size();
  std::vector<std::uint64_t> rotated(per.begin() + rot, per.end());
  rotated.insert(rotated.end(), per.begin(), per.begin() + rot);
  return ContinuedFraction({}, std::move(rotated));
}

double semiclassical_h(const ContinuedFraction& cf, std::size_t n) {
  if (n < 1) throw ValidationError("h_n: index must be >= 1");
  if (!cf.has_quotient(n))
    throw InsufficientExpansionError("h_n: expansion " + cf.str() +
                                     " does not reach index " + std::to_string(n));
  return static_cast<double>(2.0L * std::numbers::pi_v<long double> *
                             gauss_shift(cf, n - 1).value_ld());
}

double log_big(const BigInt& x) {
  if (x <= 0) throw ValidationError("log_big: argument must be positive");
  const std::size_t bits = boost::multiprecision::msb(x) + 1;
  if (bits <= 60) return std::log(static_cast<double>(x.convert_to<std::uint64_t>()));
  const std::size_t shift = bits - 60;
  const BigInt top = x >> shift;
  return std::log(static_cast<double>(top.convert_to<std::uint64_t>())) +
         static_cast<double>(shift) * std::numbers::ln2;
}

double beta_estimate(const ContinuedFraction& cf, std::size_t depth) {
  if (depth < 2) throw ValidationError("beta_estimate: depth must be >= 2");
  const auto conv = convergents(cf, depth);
  double best = 0.0;
  for (std::size_t k = 0; k + 1 < conv.size(); ++k) {
    // log(q_{k+1}) / q_k, with q_k possibly beyond double range.
    const double num = log_big(conv[k + 1].q);
    const double ratio = std::exp(std::log(num) - log_big(conv[k].q));
    best = std::max(best, ratio);
  }
  return best;
}

OddAnchor ensure_odd_anchor(const ContinuedFraction& cf, std::size_t m) {
  if (m == 0) return {cf, 0};
  const auto conv = convergents(cf, m);
  if (boost::multiprecision::bit_test(conv.back().q, 0)) return {cf, m};
  std::vector<std::uint64_t> prefix(m);
  for (std::size_t i = 0; i < m; ++i) prefix[i] = cf.quotient(i + 1);
  prefix.push_back(1);
  std::vector<std::uint64_t> period;
  if (cf.has_quotient(m + 1)) {
    const auto rest = gauss_shift(cf, m);
    prefix.insert(prefix.end(), rest.prefix().begin(), rest.prefix().end());
    period = rest.period();
  }
  return {ContinuedFraction(std::move(prefix), std::move(period)), m + 1};
}

FrequencyFamily::FrequencyFamily(FamilyParams params) : params_(params) {
  switch (params_.kind) {
    case FamilyKind::F:
      if (params_.L < 2) throw ValidationError("family F requires L >= 2");
      if (params_.L > UINT64_MAX / 10) throw ValidationError("family F: L too large");
      break;
    case FamilyKind::FNOdd:
    case FamilyKind::FNEven:
      if (params_.N < 2) throw ValidationError("family F_N requires N >= 2");
      if (params_.L_hat < 2) throw ValidationError("family F_N requires L_hat >= 2");
      break;
  }
}

std::vector<std::uint64_t> FrequencyFamily::fn_prefix(std::uint64_t member) const {
  const bool want_odd = params_.kind == FamilyKind::FNOdd;
  for (std::uint64_t attempt = 0; attempt < 4096; ++attempt) {
    Rng rng(derive_seed(params_.seed, {member, attempt}));
    std::vector<std::uint64_t> a(params_.N);
    BigInt q_prev = 0, q = 1;
    for (auto& x : a) {
      x = rng.integer(1, params_.N);
      BigInt next = x * q + q_prev;
      q_prev = std::move(q);
      q = std::move(next);
    }
    if (boost::multiprecision::bit_test(q, 0) == want_odd) return a;
  }
  throw GenerationInfeasibleError("F_N: no prefix with the requested parity of q_N");
}

QuotientStream FrequencyFamily::stream(std::uint64_t index) const {
  if (params_.kind == FamilyKind::F) {
    const auto p = params_;
    return QuotientStream([p, index](std::size_t n) -> std::uint64_t {
      if (n == 1) return 1;
      if (n == 2) return 2;
      Rng rng(derive_seed(p.seed, {index, static_cast<std::uint64_t>(n)}));
      return rng.integer(p.L, 10 * p.L);
    });
  }
  const auto cf = member(index, 0);
  return QuotientStream([cf](std::size_t n) { return cf.quotient(n); });
}

ContinuedFraction FrequencyFamily::member(std::uint64_t index, std::size_t length) const {
  if (params_.kind == FamilyKind::F) {
    if (length < 2) throw ValidationError("family F members need length >= 2");
    return stream(index).take(length);
  }
  auto prefix = fn_prefix(index);
  if (params_.kind == FamilyKind::FNEven) prefix.push_back(1);
  return ContinuedFraction(std::move(prefix), {params_.L_hat});
}

}  // namespace harperlab
