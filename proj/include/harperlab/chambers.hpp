#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "harperlab/bandset.hpp"
#include "harperlab/contfrac.hpp"

namespace harperlab {

// Frequency p/q in lowest terms with 0 <= p < q. The constructor reduces
// p mod q and rejects non-coprime pairs.
struct RationalFrequency {
  std::int64_t p = 0;
  std::int64_t q = 1;

  RationalFrequency() = default;
  RationalFrequency(std::int64_t p_, std::int64_t q_);
  friend bool operator==(const RationalFrequency&, const RationalFrequency&) = default;
};

// Critical almost Mathieu operator, potential 2cos(2pi(theta + n p/q)).
// Trace of T_q ... T_1 with T_j = [[E - 2cos(2pi(theta + j p/q)), -1], [1, 0]].
// The product is rescaled as it grows, so the result overflows to +-inf
// only when the trace itself is not representable.
double transfer_trace(const RationalFrequency& f, double E, double theta);

// The discriminant: transfer_trace at theta = 1/(4q), where the phase term
// 2cos(2 pi q theta) vanishes. Monic of degree q in E.
double discriminant(const RationalFrequency& f, double E);

// Complex Bloch matrix H(theta, k): diagonal 2cos(2pi(theta + j p/q)),
// unit off-diagonals, corner e^{+-iqk}.
Eigen::MatrixXcd bloch_matrix(const RationalFrequency& f, double theta, double k);
// Eigenvalues of bloch_matrix via a dense Hermitian solver (test oracle).
std::vector<double> bloch_eigenvalues(const RationalFrequency& f, double theta, double k);

// 2q band edges, ascending; band l is [e_{2l}, e_{2l+1}]. Computed from the
// real Bloch matrices at the two phase pairs where the discriminant equals
// +4 and -4.
std::vector<double> band_edges(const RationalFrequency& f);
// Same edges, with every eigenproblem solved by Sturm bisection.
std::vector<double> band_edges_reference(const RationalFrequency& f);

// Band l is the interval between the l-th root of Delta = +4 and the l-th
// root of Delta = -4 (ascending order in each set).
std::vector<Interval> bands_by_index(const RationalFrequency& f);
// Whether band l ends at a root of Delta = +4; alternates with l.
bool upper_edge_is_plus(const RationalFrequency& f, std::size_t l);

BandSet spectrum_rational(const RationalFrequency& f);

struct ApproxSpectrum {
  BandSet bands;
  RationalFrequency convergent;
  // Heuristic Hausdorff-continuity radius 6 (2 |alpha - p/q|)^{1/2}.
  double error_radius = 0.0;
};

// Spectrum at the n-th convergent. Throws ValidationError when q_n does
// not fit the eigen-solver (q_n > max_q).
ApproxSpectrum spectrum_approx(const ContinuedFraction& cf, std::size_t n,
                               std::int64_t max_q = 200000);
double error_radius(const ContinuedFraction& cf, const Convergent& c);

// Deepest convergent index with q_n <= q_cap (at least 1).
std::size_t deepest_convergent(const ContinuedFraction& cf, std::int64_t q_cap);

struct ButterflyEntry {
  RationalFrequency freq;
  BandSet bands;
};

// All reduced p/q with q <= q_max, ordered by (q, p). The parallel version
// distributes frequencies over threads and returns the identical list.
std::vector<ButterflyEntry> butterfly(std::int64_t q_max);
std::vector<ButterflyEntry> butterfly_serial(std::int64_t q_max);

// Width of the gap between band l and band l+1. Gaps narrower than
// `threshold` in double precision are recomputed by inertia-count bisection
// in MPFR arithmetic at 256 and then 448 bits; gaps at
// the 2q-th root of unity scale near E = 0 reach 1e-49 at q = 99. A gap
// that stays unresolved at the highest precision is reported as touching
// (resolved = false, width = the resolution bound).
struct GapReport {
  std::size_t after_band = 0;
  double width = 0.0;
  int bits = 53;
  bool resolved = true;
};
std::vector<GapReport> certified_gaps(const RationalFrequency& f, double threshold = 1e-9);

// Sign-convention check against the closed forms at q = 1, 2, 3. Runs once
// (thread-safe static) on first use of band_edges; exposed for tests.
struct ConventionReport {
  bool swapped = false;  // true if the +-4 phase pairs had to be exchanged
  double max_error = 0.0;
};
const ConventionReport& edge_convention();

}  // namespace harperlab
