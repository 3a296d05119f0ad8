#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "harperlab/bandset.hpp"

namespace harperlab {

// (varsigma, epsilon, M, C, h) with
//   varsigma in (0,4), epsilon in (0, varsigma/100), M > C > 1,
//   0 < h < (1/C) ^ (epsilon/M) ^ e^{-1/C}.
struct ConfigParams {
  double varsigma = 3.5;
  double epsilon = 0.03;
  double M = 8.0;
  double C = 2.0;
  double h = 1e-3;

  // Throws ValidationError naming the first violated link of the chain.
  void validate() const;
  // Same chain without the condition on h.
  void validate_shape() const;
  // Upper end of the admissible h range, (1/C) ^ (epsilon/M) ^ e^{-1/C}.
  double h_chain() const;
};

// `count` bands of common length e^{log_len}, left ends lo + j*step.
// Lengths are kept as logarithms because outer bands are as short as
// e^{-C/h}, far below the smallest double for the h values of interest.
struct BandRun {
  double lo = 0.0;
  double log_len = 0.0;
  double step = 0.0;
  std::uint64_t count = 1;

  double len() const;
  double band_lo(std::uint64_t j) const { return lo + static_cast<double>(j) * step; }
  double band_hi(std::uint64_t j) const { return band_lo(j) + len(); }
  double last_hi() const { return band_hi(count - 1); }
  // Gap between consecutive bands of the run.
  double gap() const { return step - len(); }
};

// A sub-configuration: the runs [run_begin, run_end) inside the block
// interval `hull`, with central band index `central` (global index).
struct Block {
  std::size_t run_begin = 0;
  std::size_t run_end = 0;
  Interval hull;
  std::uint64_t central = 0;
};

// An interval I with ordered disjoint subintervals J, stored as runs, and a
// partition into blocks. A plain [r,s]-configuration has one block.
class Configuration {
 public:
  Configuration() = default;
  Configuration(Interval hull, std::vector<BandRun> runs, std::vector<Block> blocks);

  // Explicit bands (one run each). `central` defaults to the band nearest
  // the midpoint of the hull.
  static Configuration from_intervals(Interval hull, const std::vector<Interval>& bands,
                                      std::optional<std::uint64_t> central = std::nullopt);

  const Interval& hull() const noexcept { return hull_; }
  const std::vector<BandRun>& runs() const noexcept { return runs_; }
  const std::vector<Block>& blocks() const noexcept { return blocks_; }
  std::uint64_t count() const noexcept { return offsets_.empty() ? 0 : offsets_.back(); }
  // Global index of the first band of run k.
  std::uint64_t run_offset(std::size_t k) const { return offsets_[k]; }
  // Run holding global band index i.
  std::size_t run_of(std::uint64_t i) const;
  Interval band(std::uint64_t i) const;
  double band_log_len(std::uint64_t i) const;

  // Image under x -> scale * x + shift with scale > 0.
  Configuration affine(double scale, double shift) const;
  // Single block [block], re-indexed.
  Configuration block(std::size_t b) const;

  // Bands as a BandSet; throws ValidationError beyond `max_bands` bands.
  BandSet bands(std::uint64_t max_bands = 10'000'000) const;

 private:
  void index();

  Interval hull_;
  std::vector<BandRun> runs_;
  std::vector<Block> blocks_;
  std::vector<std::uint64_t> offsets_;  // size runs_ + 1
};

struct AffineMap {
  double scale = 1.0;
  double shift = 0.0;
  double operator()(double x) const { return scale * x + shift; }
  bool is_identity() const { return scale == 1.0 && shift == 0.0; }
};

// Brings a single-block configuration into the standard frame. Returns the
// identity when the central band already contains 0 and
// [-varsigma, varsigma] ⊂ I ⊂ [-4, 4]. Otherwise T(x) = s (x - t) with t the
// centre of the central band and s = varsigma / min(t - eta, xi - t), the
// smallest scale whose image of I covers [-varsigma, varsigma].
struct Standardized {
  Configuration cfg;
  AffineMap map;
};
Standardized normalize_to_standard(const Configuration& cfg, double varsigma);

enum class Zone : std::uint8_t { Inner, OuterMinus, OuterPlus, Middle };
const char* zone_name(Zone z);

// Band index range [first, last] (global indices) of one zone inside one run.
struct ZoneRange {
  Zone zone;
  std::size_t run;
  std::uint64_t first;
  std::uint64_t last;
  std::uint64_t size() const { return last - first + 1; }
};

struct ZoneClassification {
  std::vector<ZoneRange> ranges;  // ordered by band index
  std::uint64_t central = 0;
  std::uint64_t r = 0;  // bands left of the central band
  std::uint64_t s = 0;  // bands right of the central band
  std::uint64_t r1 = 0;  // inner reach to the left
  std::uint64_t s1 = 0;  // inner reach to the right
  std::uint64_t count(Zone z) const;
};

// Zones of a single-block configuration in the standard frame. A band
// meeting both [-Mh, Mh] and an outer interval counts as inner. Throws
// NotStandardizableError if the central band does not contain 0.
ZoneClassification classify(const Configuration& cfg, const ConfigParams& p);

struct AuditItem {
  std::string id;      // "i", "ii", "iii-a", "iii-b", "iv", "v", "vi"
  bool pass = true;
  // Smallest constant for which the item holds (1 if it holds for every
  // C > 1; +inf for conditions that do not involve C and fail).
  double required_C = 1.0;
  std::string detail;
};

struct AuditReport {
  std::vector<AuditItem> items;
  bool all_pass = true;
  // max(C, every required_C); equals C exactly when all items pass.
  double effective_constant = 0.0;
  // max over items of required_C alone, for configurations whose C is
  // not known in advance.
  double measured_constant = 1.0;
  const AuditItem& item(const std::string& id) const;
};

// Items (i)-(vi) of the standard-configuration definition. The
// configuration must already be in the standard frame.
AuditReport audit_standard(const Configuration& cfg, const ConfigParams& p);

// (k, rho) audit: block hull ratios rho/k <= |I_i|/|I| <= 1/(rho k) as item
// "i", then audit_standard on each normalized block, reported as
// "block<i>:<item>". Blocks come from the configuration when it carries k
// of them, otherwise from the k-1 widest gaps, with the longest band of
// each block as its central band; near-ties among those gaps raise
// RequiresExplicitGroupingError.
AuditReport audit_k_rho(const Configuration& cfg, std::size_t k, double rho,
                        const ConfigParams& p);

struct DeltaSum {
  double total = 0.0;
  double in = 0.0;
  double out = 0.0;
  double mid = 0.0;
};
// Sum over J of (|J|/|I|)^delta, split by zone (standard frame).
DeltaSum delta_sum(const Configuration& cfg, const ConfigParams& p, double delta);
// Same total without zones; any configuration.
double delta_sum_total(const Configuration& cfg, double delta);
// Smallest and largest log(|J| / |I|).
std::pair<double, double> log_ratio_range(const Configuration& cfg);

// h-hat: the largest h with e^{-1/(Ch)} <= Ch and
// e^{-C/h} <= e^{-C/(10h)} h / (-C log h) on all of (0, h].
double h_hat(double C);
// min(h-hat, 2 rho varsigma / (10 C)).
double h_tilde(const ConfigParams& p, double rho);

struct Majorants {
  double in = 0.0;
  double out = 0.0;
  double mid = 0.0;
  double target = 0.0;  // (2 varsigma rho)^delta / (3 kappa)
  bool holds() const { return in <= target && out <= target && mid <= target; }
  const char* binding() const;
};
Majorants zone_majorants(double delta, unsigned kappa, double rho, const ConfigParams& p,
                         double h);

struct Threshold {
  double h = 0.0;
  double h_max = 0.0;  // upper end of the search range
  Majorants at_h;
};
// Largest h <= min(h-tilde, chain bound) at which the three zone majorants
// are below target: a descending log grid finds the first admissible
// point, then bisection refines to relative 1e-3. Throws InfeasibleError.
Threshold h_threshold(double delta, unsigned kappa, double rho, const ConfigParams& p);

// Synthetic standard configuration, deterministic in seed. Zone
// parameters are drawn log-uniformly inside the admissible windows shrunk
// by min(2, (hi/lo)^{1/4}) at each end; one side of the hull sits at
// exactly +-varsigma so the standard frame is canonical. Retries with
// derived seeds; throws GenerationInfeasibleError when every attempt fails
// the audit.
Configuration gen_standard(const ConfigParams& p, std::uint64_t seed);

// (k, rho)-configuration inside `hull`: k standard blocks mapped into
// disjoint subintervals with ratios drawn inside [rho/k, 1/(rho k)].
Configuration gen_k_rho(const ConfigParams& p, std::size_t k, double rho, Interval hull,
                        std::uint64_t seed);

// Configuration seen by one coarse band across two convergents: the fine
// bands whose midpoints fall in coarse band `index`, inside their hull.
Configuration config_from_spectra(const BandSet& coarse, const BandSet& fine, std::size_t index);

}  // namespace harperlab
