#include "harperlab/chambers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

#include "harperlab/cyclic_jacobi.hpp"
#include "harperlab/errors.hpp"

namespace harperlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// 2cos(2 pi (theta + j p / q)) with the phase reduced exactly in integers.
double potential(const RationalFrequency& f, double theta, std::int64_t j) {
  const std::int64_t r = (j % f.q) * f.p % f.q;
  return 2.0 * std::cos(kTwoPi * (theta + static_cast<double>(r) / static_cast<double>(f.q)));
}

std::vector<double> diagonal(const RationalFrequency& f, double theta) {
  std::vector<double> d(static_cast<std::size_t>(f.q));
  for (std::int64_t j = 0; j < f.q; ++j) d[static_cast<std::size_t>(j)] = potential(f, theta, j);
  return d;
}

// The two real phase pairs. Pair A: theta = 0, k = 0 (corner +1).
// Pair B: theta = 1/(2q), k = pi/q (corner -1).
struct PhasePair {
  double theta;
  double corner;
};

PhasePair pair_a(const RationalFrequency&) { return {0.0, 1.0}; }
PhasePair pair_b(const RationalFrequency& f) {
  return {0.5 / static_cast<double>(f.q), -1.0};
}

struct EdgeSets {
  std::vector<double> plus;   // roots of Delta = +4 (pair A), ascending
  std::vector<double> minus;  // roots of Delta = -4 (pair B), ascending
};

template <class Solver>
EdgeSets edge_sets(const RationalFrequency& f, Solver solve) {
  const auto a = pair_a(f), b = pair_b(f);
  try {
    return {solve(diagonal(f, a.theta), a.corner), solve(diagonal(f, b.theta), b.corner)};
  } catch (const EigenSolverError& err) {
    throw EigenSolverError(f.p, f.q, err.what());
  }
}

template <class Solver>
std::vector<double> edges_with(const RationalFrequency& f, Solver solve) {
  auto s = edge_sets(f, solve);
  s.plus.insert(s.plus.end(), s.minus.begin(), s.minus.end());
  std::sort(s.plus.begin(), s.plus.end());
  return s.plus;
}

ConventionReport run_convention_check() {
  // Closed forms: 0/1 -> {-4, 4}; 1/2 -> {-2 sqrt2, 0, 0, 2 sqrt2};
  // 1/3 -> roots of E^3 - 6E = +-4.
  const double s2 = std::numbers::sqrt2, s3 = std::numbers::sqrt3;
  const std::vector<std::pair<RationalFrequency, std::vector<double>>> cases = {
      {{0, 1}, {-4.0, 4.0}},
      {{1, 2}, {-2 * s2, 0.0, 0.0, 2 * s2}},
      {{1, 3}, {-1 - s3, -2.0, 1 - s3, s3 - 1, 2.0, 1 + s3}},
  };
  // Each pair must produce roots of Delta = +4 (pair A) and -4 (pair B).
  ConventionReport rep;
  int votes_swapped = 0;
  for (const auto& [f, expect] : cases) {
    const auto e = edges_with(f, [](const std::vector<double>& d, double c) {
      return cyclic_jacobi_eigenvalues(d, c);
    });
    for (std::size_t i = 0; i < e.size(); ++i)
      rep.max_error = std::max(rep.max_error, std::abs(e[i] - expect[i]));
    const auto a = cyclic_jacobi_eigenvalues(diagonal(f, pair_a(f).theta), pair_a(f).corner);
    if (std::abs(discriminant(f, a.front()) - 4.0) > 1e-8) ++votes_swapped;
  }
  rep.swapped = votes_swapped == static_cast<int>(cases.size());
  if (rep.max_error > 1e-10 || (votes_swapped != 0 && !rep.swapped))
    throw NumericalError("band-edge sign convention self-test failed (max error " +
                         std::to_string(rep.max_error) + ")");
  return rep;
}

}  // namespace

RationalFrequency::RationalFrequency(std::int64_t p_, std::int64_t q_) {
  if (q_ < 1) throw ValidationError("frequency denominator must be >= 1");
  p_ %= q_;
  if (p_ < 0) p_ += q_;
  if (std::gcd(p_, q_) != 1)
    throw ValidationError("frequency " + std::to_string(p_) + "/" + std::to_string(q_) +
                          " is not in lowest terms");
  p = p_;
  q = q_;
}

double transfer_trace(const RationalFrequency& f, double E, double theta) {
  // Running product M = [[m00, m01], [m10, m11]]; multiply T_j on the left.
  double m00 = 1, m01 = 0, m10 = 0, m11 = 1;
  double log_scale = 0.0;
  for (std::int64_t j = 1; j <= f.q; ++j) {
    const double a = E - potential(f, theta, j);
    const double n00 = a * m00 - m10, n01 = a * m01 - m11;
    m10 = m00;
    m11 = m01;
    m00 = n00;
    m01 = n01;
    const double norm = std::max({std::abs(m00), std::abs(m01), std::abs(m10), std::abs(m11)});
    if (norm > 1e150) {
      m00 /= norm;
      m01 /= norm;
      m10 /= norm;
      m11 /= norm;
      log_scale += std::log(norm);
    }
  }
  const double tr = m00 + m11;
  if (log_scale == 0.0) return tr;
  if (tr == 0.0) return 0.0;
  const double lg = std::log(std::abs(tr)) + log_scale;
  return std::copysign(lg > 709.0 ? INFINITY : std::exp(lg), tr);
}

double discriminant(const RationalFrequency& f, double E) {
  return transfer_trace(f, E, 0.25 / static_cast<double>(f.q));
}

Eigen::MatrixXcd bloch_matrix(const RationalFrequency& f, double theta, double k) {
  const auto q = static_cast<Eigen::Index>(f.q);
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(q, q);
  const std::complex<double> phase = std::polar(1.0, static_cast<double>(f.q) * k);
  if (q == 1) {
    h(0, 0) = potential(f, theta, 0) + 2.0 * std::cos(k);
    return h;
  }
  for (Eigen::Index j = 0; j < q; ++j) h(j, j) = potential(f, theta, j);
  for (Eigen::Index j = 0; j + 1 < q; ++j) h(j, j + 1) = h(j + 1, j) = 1.0;
  h(q - 1, 0) += phase;
  h(0, q - 1) += std::conj(phase);
  return h;
}

std::vector<double> bloch_eigenvalues(const RationalFrequency& f, double theta, double k) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(bloch_matrix(f, theta, k),
                                                    Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw EigenSolverError(f.p, f.q, "dense Hermitian solver did not converge");
  const auto& v = es.eigenvalues();
  return {v.data(), v.data() + v.size()};
}

const ConventionReport& edge_convention() {
  static const ConventionReport rep = run_convention_check();
  return rep;
}

std::vector<double> band_edges(const RationalFrequency& f) {
  edge_convention();
  return edges_with(f, [](const std::vector<double>& d, double c) {
    return cyclic_jacobi_eigenvalues(d, c);
  });
}

std::vector<double> band_edges_reference(const RationalFrequency& f) {
  edge_convention();
  return edges_with(f, [](const std::vector<double>& d, double c) {
    return cyclic_jacobi_eigenvalues_sturm(d, c);
  });
}

std::vector<Interval> bands_by_index(const RationalFrequency& f) {
  edge_convention();
  const auto s = edge_sets(f, [](const std::vector<double>& d, double c) {
    return cyclic_jacobi_eigenvalues(d, c);
  });
  std::vector<Interval> bands(s.plus.size());
  for (std::size_t l = 0; l < bands.size(); ++l)
    bands[l] = {std::min(s.plus[l], s.minus[l]), std::max(s.plus[l], s.minus[l])};
  return bands;
}

bool upper_edge_is_plus(const RationalFrequency& f, std::size_t l) {
  const bool natural = (static_cast<std::size_t>(f.q) - 1 - l) % 2 == 0;
  return natural != edge_convention().swapped;
}

BandSet spectrum_rational(const RationalFrequency& f) {
  // Bands pair the l-th roots of Delta = +4 and Delta = -4. Pairing by
  // index stays correct when outer bands are thinner than the rounding
  // error, where sorting the union of edges could interleave them.
  return BandSet::normalize(bands_by_index(f));
}

double error_radius(const ContinuedFraction& cf, const Convergent& c) {
  // |alpha - p/q| = 1 / (q (q alpha' + q_prev)) is tiny; evaluate it
  // through the exact convergent rather than by cancellation.
  const long double alpha = cf.value_ld();
  const long double p = static_cast<long double>(c.p.convert_to<double>());
  const long double q = static_cast<long double>(c.q.convert_to<double>());
  const long double diff = std::abs(alpha - p / q);
  return 6.0 * std::sqrt(2.0 * static_cast<double>(diff));
}

std::size_t deepest_convergent(const ContinuedFraction& cf, std::int64_t q_cap) {
  std::size_t n = 1;
  BigInt q_prev = 0, q = 1;
  for (std::size_t k = 1; cf.has_quotient(k); ++k) {
    BigInt next = BigInt(cf.quotient(k)) * q + q_prev;
    if (next > q_cap) break;
    n = k;
    q_prev = std::move(q);
    q = std::move(next);
  }
  return n;
}

ApproxSpectrum spectrum_approx(const ContinuedFraction& cf, std::size_t n, std::int64_t max_q) {
  const auto conv = convergents(cf, n).back();
  if (conv.q > max_q)
    throw ValidationError("convergent denominator " + conv.q.str() + " exceeds the limit " +
                          std::to_string(max_q));
  const auto q = conv.q.convert_to<std::int64_t>();
  const auto p = conv.p.convert_to<std::int64_t>();
  RationalFrequency f(p % q, q);
  return {spectrum_rational(f), f, error_radius(cf, conv)};
}

namespace {

std::vector<RationalFrequency> reduced_frequencies(std::int64_t q_max) {
  if (q_max < 1) throw ValidationError("q_max must be >= 1");
  std::vector<RationalFrequency> out;
  for (std::int64_t q = 1; q <= q_max; ++q)
    for (std::int64_t p = 0; p < q; ++p)
      if (std::gcd(p, q) == 1) out.emplace_back(p, q);
  return out;
}

}  // namespace

std::vector<ButterflyEntry> butterfly_serial(std::int64_t q_max) {
  std::vector<ButterflyEntry> out;
  for (const auto& f : reduced_frequencies(q_max)) out.push_back({f, spectrum_rational(f)});
  return out;
}

std::vector<ButterflyEntry> butterfly(std::int64_t q_max) {
  edge_convention();
  const auto freqs = reduced_frequencies(q_max);
  std::vector<ButterflyEntry> out(freqs.size());
  // Exceptions cannot cross the parallel region; keep the first by index.
  std::vector<std::string> errors(freqs.size());
  bool failed = false;
#pragma omp parallel for schedule(dynamic, 4) reduction(|| : failed)
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    try {
      out[i] = {freqs[i], spectrum_rational(freqs[i])};
    } catch (const std::exception& e) {
      errors[i] = e.what();
      failed = true;
    }
  }
  if (failed)
    for (std::size_t i = 0; i < freqs.size(); ++i)
      if (!errors[i].empty()) throw EigenSolverError(freqs[i].p, freqs[i].q, errors[i]);
  return out;
}

}  // namespace harperlab
