#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "harperlab/bandset.hpp"
#include "harperlab/config.hpp"

namespace harperlab {

// Child letter: type 2 exactly for local index 0 of each block.
struct Letter {
  std::uint32_t global = 1;  // block number, from 1
  std::int64_t local = 0;    // band index relative to the block's central band
  std::uint8_t type() const { return local == 0 ? 2 : 1; }
  friend bool operator==(const Letter&, const Letter&) = default;
  // Sibling order: by global index, then local index.
  friend bool operator<(const Letter& a, const Letter& b) {
    return a.global < b.global || (a.global == b.global && a.local < b.local);
  }
};

struct Word {
  std::uint8_t root_type = 2;
  std::vector<Letter> letters;

  std::size_t size() const { return letters.size(); }
  std::uint8_t type() const { return letters.empty() ? root_type : letters.back().type(); }
  bool is_prefix_of(const Word& other) const;
  // "2" for the root of type 2, then "/global:local" per letter.
  std::string str() const;
  friend bool operator==(const Word&, const Word&) = default;
};

// Child configuration of one node, on the unit interval [0, 1]: runs and
// blocks exactly as in Configuration. Validated by the builder.
struct Expansion {
  std::vector<BandRun> runs;
  std::vector<Block> blocks;
  double h = 0.0;  // scale parameter of this node, 0 if not meaningful
};

struct ExpansionRule {
  enum class Sharing {
    // One layout per (depth, type); the callback sees an empty word of
    // that type. Needed when node counts explode.
    PerLevelType,
    // One layout per word; the tree is materialized.
    PerWord,
  };
  std::function<Expansion(const Word& w, Interval I, std::size_t depth, std::uint64_t seed)> expand;
  Sharing sharing = Sharing::PerWord;
  unsigned kappa = 1;
  // Block ratio and scale constant behind the per-node cover bound
  // 16 k e^{C/h} / rho; 0 when not applicable.
  double rho = 0.0;
  double C = 0.0;
};

// Validated child layout.
struct Layout {
  Configuration cfg;  // on [0, 1]
  double h = 0.0;
  std::size_t k = 1;
  double min_child_log_len = 0.0;
  double max_child_log_len = 0.0;
  std::vector<std::uint32_t> run_block;  // block index of each run
  // Letter of the child with global band index g in run q.
  Letter letter(std::size_t q, std::uint64_t g) const;
  // Sum of (|J|/|I|)^delta over children of each type.
  std::pair<double, double> child_sums(double delta) const;
};

class NestedCovering {
 public:
  // Builds layouts for nodes of depth 0..depth-1, so that Ω_depth are the
  // leaves. Throws StructureViolationError naming the word when a rule
  // produces overlapping, unordered or escaping children, a type-1 node
  // with k != 1, or k > kappa; ValidationError when a materialized tree
  // exceeds max_nodes.
  static NestedCovering build(const ExpansionRule& rule, std::size_t depth, std::uint64_t seed,
                              Interval root = {0.0, 1.0}, std::uint8_t root_type = 2,
                              std::uint64_t max_nodes = 2'000'000);

  std::size_t depth() const noexcept { return depth_; }
  const Interval& root() const noexcept { return root_; }
  std::uint8_t root_type() const noexcept { return root_type_; }
  const ExpansionRule& rule() const noexcept { return rule_; }
  bool shared() const noexcept { return rule_.sharing == ExpansionRule::Sharing::PerLevelType; }

  // Layout of the node w at depth |w| (< depth()).
  const Layout& layout(const Word& w) const;
  const Layout& layout(std::size_t depth, std::uint8_t type, const std::string& key) const;

  // Number of words at each level 0..depth (long double: counts reach
  // (C/h)^depth).
  const std::vector<long double>& level_counts() const noexcept { return counts_; }
  // Largest child/parent length ratio over all layouts.
  double max_ratio() const noexcept { return max_ratio_; }

 private:
  ExpansionRule rule_;
  std::size_t depth_ = 0;
  Interval root_;
  std::uint8_t root_type_ = 2;
  std::vector<std::array<std::shared_ptr<const Layout>, 2>> by_level_;  // [depth][type-1]
  std::map<std::string, std::shared_ptr<const Layout>> by_word_;
  std::vector<long double> counts_;
  double max_ratio_ = 0.0;
};

// Node of the covering, as seen by traversals.
struct NodeView {
  Word word;
  double lo = 0.0;
  double len = 0.0;
  double log_len = 0.0;
  Interval interval() const { return {lo, lo + len}; }
};

// Union of I_w over Ω_n. Nodes shorter than `resolution` are emitted whole
// instead of expanded. Throws ValidationError beyond max_intervals pieces.
BandSet prefractal(const NestedCovering& nc, std::size_t n, double resolution = 0.0,
                   std::uint64_t max_intervals = 20'000'000);

// Greedy box count N_r of prefractal(n) without materializing it: the sweep
// asks the tree for the next point beyond the covered prefix. Nodes shorter
// than prune_factor * r are treated as solid.
std::uint64_t prefractal_box_count(const NestedCovering& nc, std::size_t n, double r,
                                   double prune_factor = 1e-6);

struct HausdorffCertificate {
  bool holds = false;
  double delta = 0.0;
  // sum over Ω_n of |I_w|^delta, n = 0..depth.
  std::vector<double> level_sums;
  // Largest child delta-sum of any node (relative lengths).
  double max_child_sum = 0.0;
  std::string worst_node;
};
HausdorffCertificate hausdorff_certificate(const NestedCovering& nc, double delta);

struct CoverElement {
  Word word;
  Interval interval;
  double log_len = 0.0;
  double min_child_log_len = 0.0;
  std::size_t k = 1;
  double h = 0.0;
};
// The prefixes u = w|_{m_w} with |I_u| > r and (J_u)_min <= r, in order.
// Throws DepthInsufficientError when r >= |I_root| or some branch reaches
// the built depth without meeting the condition, and ValidationError past
// max_elements.
std::vector<CoverElement> adapted_cover(const NestedCovering& nc, double r,
                                        std::uint64_t max_elements = 5'000'000);

struct BoxBound {
  std::uint64_t cover_size = 0;
  std::uint64_t box_count = 0;     // N_r of prefractal(depth)
  std::uint64_t direct_bound = 0;  // sum over the cover of N_r(I_u)
  // log of sum over the cover of 16 k_u e^{C/h_u} / rho, or NaN without
  // metadata.
  double log_lemma_bound = 0.0;
  // |I_root|^delta r^{-delta}, the cap on the cover size.
  double cover_cap = 0.0;
  bool holds = false;
};
BoxBound box_bound(const NestedCovering& nc, double delta, double r);

// Nodes of depth <= max_depth with |I_w| >= min_len, in depth-first
// order; throws ValidationError past max_nodes.
struct NodeRecord {
  std::string word;
  std::uint8_t type = 2;
  std::size_t depth = 0;
  std::size_t k = 0;  // 0 for leaves of the built tree
  double h = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};
std::vector<NodeRecord> list_nodes(const NestedCovering& nc, std::size_t max_depth,
                                   double min_len = 0.0, std::uint64_t max_nodes = 1'000'000);

// ---- rules

// Every node: `children` children of ratio `ratio`, spread symmetrically
// with the two outer children at the ends. Block structure: a single
// block whose middle child (or first, for an even count) is type 2.
ExpansionRule toy_rule(std::size_t children, double ratio);

// Nodes expanded by gen_k_rho with parameters p and h from `h_of_depth`;
// type-2 nodes draw k in [1, kappa], type-1 nodes use k = 1.
ExpansionRule standard_rule(const ConfigParams& p, unsigned kappa, double rho,
                            std::function<double(std::size_t)> h_of_depth);

// Random small layouts, one per word, for property tests: 1 to max_children
// children with ratios in [min_ratio, 1/10], gaps drawn at random.
ExpansionRule random_rule(std::size_t max_children, double min_ratio);

}  // namespace harperlab
