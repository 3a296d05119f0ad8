#include "harperlab/moran.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>

#include "harperlab/errors.hpp"
#include "harperlab/random.hpp"

namespace harperlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSumTol = 1e-12;

double log_sum_exp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

std::shared_ptr<const Layout> make_layout(const Expansion& e, const Word& w, unsigned kappa) {
  const std::string name = w.str();
  auto bad = [&](const std::string& what) { throw StructureViolationError(name, what); };
  Configuration cfg;
  try {
    cfg = Configuration({0.0, 1.0}, e.runs, e.blocks);
  } catch (const ValidationError& err) {
    bad(err.what());
  }
  std::size_t next = 0;
  for (const auto& b : cfg.blocks()) {
    if (b.run_begin != next) bad("blocks must partition the runs in order");
    next = b.run_end;
  }
  if (next != cfg.runs().size()) bad("blocks must partition the runs in order");
  const std::size_t k = cfg.blocks().size();
  if (w.type() == 1 && k != 1) bad("type-1 node with " + std::to_string(k) + " blocks");
  if (k > kappa) bad(std::to_string(k) + " blocks exceed kappa = " + std::to_string(kappa));
  if (cfg.runs().front().lo < 0.0 || cfg.runs().back().last_hi() > 1.0 + 1e-12)
    bad("children leave the parent interval");

  auto L = std::make_shared<Layout>();
  L->h = e.h;
  L->k = k;
  L->min_child_log_len = kInf;
  L->max_child_log_len = -kInf;
  for (std::uint32_t b = 0; b < k; ++b)
    for (std::size_t q = cfg.blocks()[b].run_begin; q < cfg.blocks()[b].run_end; ++q)
      L->run_block.push_back(b);
  for (const auto& u : cfg.runs()) {
    L->min_child_log_len = std::min(L->min_child_log_len, u.log_len);
    L->max_child_log_len = std::max(L->max_child_log_len, u.log_len);
  }
  L->cfg = std::move(cfg);
  return L;
}

// Depth-first traversal state shared by the tree walks.
struct Walker {
  const NestedCovering& nc;
  Word path;
  std::size_t depth = 0;

  explicit Walker(const NestedCovering& c) : nc(c) { path.root_type = c.root_type(); }

  const Layout& layout() const {
    if (nc.shared()) return nc.layout(depth, path.type(), {});
    return nc.layout(path);
  }
  void push(const Letter& l) {
    path.letters.push_back(l);
    ++depth;
  }
  void pop() {
    path.letters.pop_back();
    --depth;
  }
};

struct Node {
  double lo, len, log_len;
  double hi() const { return lo + len; }
};

Node child_node(const Node& parent, const BandRun& u, std::uint64_t j) {
  const double log_len = parent.log_len + u.log_len;
  return {parent.lo + parent.len * u.band_lo(j), std::exp(log_len), log_len};
}

Node root_node(const NestedCovering& nc) {
  const double len = nc.root().length();
  return {nc.root().lo, len, std::log(len)};
}

}  // namespace

// ---------------------------------------------------------------- words

bool Word::is_prefix_of(const Word& other) const {
  return root_type == other.root_type && letters.size() <= other.letters.size() &&
         std::equal(letters.begin(), letters.end(), other.letters.begin());
}

std::string Word::str() const {
  std::string s = std::to_string(root_type);
  for (const auto& l : letters) s += "/" + std::to_string(l.global) + ":" + std::to_string(l.local);
  return s;
}

Letter Layout::letter(std::size_t q, std::uint64_t g) const {
  const std::uint32_t b = run_block[q];
  return {b + 1, static_cast<std::int64_t>(g) - static_cast<std::int64_t>(cfg.blocks()[b].central)};
}

std::pair<double, double> Layout::child_sums(double delta) const {
  std::vector<std::uint64_t> centrals(cfg.runs().size(), 0);
  double s2 = 0.0;
  for (const auto& b : cfg.blocks()) {
    ++centrals[cfg.run_of(b.central)];
    s2 += std::exp(delta * cfg.band_log_len(b.central));
  }
  double s1 = 0.0;
  for (std::size_t q = 0; q < cfg.runs().size(); ++q) {
    const auto& u = cfg.runs()[q];
    s1 += static_cast<double>(u.count - centrals[q]) * std::exp(delta * u.log_len);
  }
  return {s1, s2};
}

// ---------------------------------------------------------------- build

NestedCovering NestedCovering::build(const ExpansionRule& rule, std::size_t depth,
                                     std::uint64_t seed, Interval root, std::uint8_t root_type,
                                     std::uint64_t max_nodes) {
  if (!rule.expand) throw ValidationError("expansion rule without callback");
  if (!(root.lo < root.hi) || !std::isfinite(root.lo) || !std::isfinite(root.hi))
    throw InvalidIntervalError("nested covering root must have lo < hi");
  if (root_type != 1 && root_type != 2) throw ValidationError("root type must be 1 or 2");
  if (rule.kappa < 1) throw ValidationError("kappa must be >= 1");

  NestedCovering nc;
  nc.rule_ = rule;
  nc.depth_ = depth;
  nc.root_ = root;
  nc.root_type_ = root_type;
  nc.counts_.assign(depth + 1, 0.0L);
  nc.counts_[0] = 1.0L;

  auto note_ratio = [&](const Layout& L) {
    nc.max_ratio_ = std::max(nc.max_ratio_, std::exp(L.max_child_log_len));
  };

  if (nc.shared()) {
    nc.by_level_.resize(depth);
    std::array<long double, 2> by_type{0.0L, 0.0L};
    by_type[root_type - 1] = 1.0L;
    for (std::size_t d = 0; d < depth; ++d) {
      std::array<long double, 2> next{0.0L, 0.0L};
      for (std::uint8_t t = 1; t <= 2; ++t) {
        if (by_type[t - 1] == 0.0L) continue;
        Word w;
        w.root_type = t;
        auto L = make_layout(rule.expand(w, {0.0, 1.0}, d, derive_seed(seed, {d, t})), w,
                             rule.kappa);
        const auto total = static_cast<long double>(L->cfg.count());
        const auto k = static_cast<long double>(L->k);
        next[0] += by_type[t - 1] * (total - k);
        next[1] += by_type[t - 1] * k;
        note_ratio(*L);
        nc.by_level_[d][t - 1] = std::move(L);
      }
      by_type = next;
      nc.counts_[d + 1] = next[0] + next[1];
    }
    return nc;
  }

  struct Pending {
    Word word;
    Node node;
  };
  std::vector<Pending> level{{Word{root_type, {}}, root_node(nc)}};
  std::uint64_t total_nodes = 1;
  for (std::size_t d = 0; d < depth; ++d) {
    const auto n = static_cast<std::int64_t>(level.size());
    std::vector<std::shared_ptr<const Layout>> made(level.size());
    std::vector<std::exception_ptr> errors(level.size());
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < n; ++i) {
      try {
        const auto& pw = level[static_cast<std::size_t>(i)];
        const auto s = derive_seed(seed, {d, static_cast<std::uint64_t>(i)});
        made[static_cast<std::size_t>(i)] = make_layout(
            rule.expand(pw.word, {pw.node.lo, pw.node.hi()}, d, s), pw.word, rule.kappa);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);

    std::vector<Pending> next;
    for (std::size_t i = 0; i < level.size(); ++i) {
      const Layout& L = *made[i];
      note_ratio(L);
      total_nodes += L.cfg.count();
      if (total_nodes > max_nodes)
        throw ValidationError("nested covering exceeds " + std::to_string(max_nodes) + " nodes");
      const auto& runs = L.cfg.runs();
      for (std::size_t q = 0; q < runs.size(); ++q)
        for (std::uint64_t j = 0; j < runs[q].count; ++j) {
          Pending c{level[i].word, child_node(level[i].node, runs[q], j)};
          c.word.letters.push_back(L.letter(q, L.cfg.run_offset(q) + j));
          next.push_back(std::move(c));
        }
      nc.by_word_.emplace(level[i].word.str(), made[i]);
    }
    nc.counts_[d + 1] = static_cast<long double>(next.size());
    level = std::move(next);
  }
  return nc;
}

const Layout& NestedCovering::layout(const Word& w) const {
  return layout(w.size(), w.type(), shared() ? std::string() : w.str());
}

const Layout& NestedCovering::layout(std::size_t d, std::uint8_t type, const std::string& key) const {
  if (d >= depth_) throw DepthInsufficientError("no layout below the built depth");
  if (shared()) {
    const auto& L = by_level_[d][type - 1];
    if (!L) throw ValidationError("no layout for this level and type");
    return *L;
  }
  const auto it = by_word_.find(key);
  if (it == by_word_.end()) throw ValidationError("unknown word " + key);
  return *it->second;
}

// ---------------------------------------------------------------- prefractal

BandSet prefractal(const NestedCovering& nc, std::size_t n, double resolution,
                   std::uint64_t max_intervals) {
  if (n > nc.depth()) throw DepthInsufficientError("prefractal level beyond the built depth");
  std::vector<Interval> out;
  Walker wk(nc);
  auto rec = [&](auto&& self, const Node& v) -> void {
    if (wk.depth == n || v.len <= resolution) {
      if (out.size() >= max_intervals)
        throw ValidationError("prefractal exceeds " + std::to_string(max_intervals) +
                              " intervals; raise the resolution");
      out.push_back({v.lo, v.hi()});
      return;
    }
    const Layout& L = wk.layout();
    const auto& runs = L.cfg.runs();
    for (std::size_t q = 0; q < runs.size(); ++q)
      for (std::uint64_t j = 0; j < runs[q].count; ++j) {
        wk.push(L.letter(q, L.cfg.run_offset(q) + j));
        self(self, child_node(v, runs[q], j));
        wk.pop();
      }
  };
  rec(rec, root_node(nc));
  return BandSet::from_sorted(out, 0.0);
}

namespace {

// inf { y in S : y > x } for the part of S inside v, or x itself when S
// meets (x, x + eps) for every eps; nullopt when S has no point above x.
std::optional<double> next_point(Walker& wk, std::size_t n, const Node& v, double x,
                                 double res) {
  if (v.hi() <= x) return std::nullopt;
  if (wk.depth == n || v.len <= res) return std::max(v.lo, x);
  const Layout& L = wk.layout();
  const auto& runs = L.cfg.runs();
  const double rel = (x - v.lo) / v.len;
  std::size_t q = static_cast<std::size_t>(
      std::partition_point(runs.begin(), runs.end(),
                           [&](const BandRun& u) { return u.last_hi() <= rel - 1e-12; }) -
      runs.begin());
  for (; q < runs.size(); ++q) {
    const auto& u = runs[q];
    std::uint64_t j = 0;
    if (u.count > 1 && rel > u.lo) {
      const double t = std::floor((rel - u.lo - u.len()) / u.step) - 1.0;
      if (t > 0) j = std::min<std::uint64_t>(static_cast<std::uint64_t>(t), u.count - 1);
    }
    for (; j < u.count; ++j) {
      const Node c = child_node(v, u, j);
      if (c.hi() <= x) continue;
      wk.push(L.letter(q, L.cfg.run_offset(q) + j));
      const auto y = next_point(wk, n, c, x, res);
      wk.pop();
      if (y) return y;
    }
  }
  return std::nullopt;
}

}  // namespace

std::uint64_t prefractal_box_count(const NestedCovering& nc, std::size_t n, double r,
                                   double prune_factor) {
  if (!(r > 0)) throw ValidationError("box size must be positive");
  if (n > nc.depth()) throw DepthInsufficientError("prefractal level beyond the built depth");
  Walker wk(nc);
  const Node root = root_node(nc);
  const double res = prune_factor * r;
  std::uint64_t count = 0;
  double covered = -kInf;
  while (auto y = next_point(wk, n, root, covered, res)) {
    ++count;
    covered = *y + r;
  }
  return count;
}

// ---------------------------------------------------------------- certificate

HausdorffCertificate hausdorff_certificate(const NestedCovering& nc, double delta) {
  if (!(delta > 0 && delta <= 1)) throw ValidationError("delta must lie in (0, 1]");
  HausdorffCertificate hc;
  hc.delta = delta;
  hc.level_sums.assign(nc.depth() + 1, 0.0);
  hc.level_sums[0] = std::pow(nc.root().length(), delta);

  auto consider = [&](const Layout& L, const std::string& name) {
    const auto [s1, s2] = L.child_sums(delta);
    if (hc.worst_node.empty() || s1 + s2 > hc.max_child_sum) {
      hc.max_child_sum = s1 + s2;
      hc.worst_node = name;
    }
    return std::pair{s1, s2};
  };

  if (nc.shared()) {
    std::array<double, 2> a{0.0, 0.0};
    a[nc.root_type() - 1] = hc.level_sums[0];
    for (std::size_t d = 0; d < nc.depth(); ++d) {
      std::array<double, 2> next{0.0, 0.0};
      for (std::uint8_t t = 1; t <= 2; ++t) {
        if (a[t - 1] == 0.0) continue;
        const auto [s1, s2] = consider(nc.layout(d, t, {}),
                                       "depth " + std::to_string(d) + " type " + std::to_string(t));
        next[0] += a[t - 1] * s1;
        next[1] += a[t - 1] * s2;
      }
      a = next;
      hc.level_sums[d + 1] = a[0] + a[1];
    }
  } else {
    Walker wk(nc);
    auto rec = [&](auto&& self, const Node& v) -> void {
      hc.level_sums[wk.depth] += std::exp(delta * v.log_len);
      if (wk.depth == nc.depth()) return;
      const Layout& L = wk.layout();
      consider(L, wk.path.str());
      const auto& runs = L.cfg.runs();
      for (std::size_t q = 0; q < runs.size(); ++q)
        for (std::uint64_t j = 0; j < runs[q].count; ++j) {
          wk.push(L.letter(q, L.cfg.run_offset(q) + j));
          self(self, child_node(v, runs[q], j));
          wk.pop();
        }
    };
    rec(rec, root_node(nc));
  }
  hc.holds = hc.max_child_sum <= 1.0 + kSumTol;
  return hc;
}

// ---------------------------------------------------------------- covers

std::vector<CoverElement> adapted_cover(const NestedCovering& nc, double r,
                                        std::uint64_t max_elements) {
  if (!(r > 0) || !std::isfinite(r)) throw ValidationError("cover scale must be positive");
  if (r >= nc.root().length())
    throw DepthInsufficientError("cover scale is not below the root length");
  const double log_r = std::log(r);
  std::vector<CoverElement> out;
  Walker wk(nc);
  auto rec = [&](auto&& self, const Node& v) -> void {
    if (wk.depth == nc.depth())
      throw DepthInsufficientError("word " + wk.path.str() +
                                   " reaches the built depth with all children above r");
    const Layout& L = wk.layout();
    const double min_child = v.log_len + L.min_child_log_len;
    if (min_child <= log_r) {
      if (out.size() >= max_elements)
        throw ValidationError("adapted cover exceeds " + std::to_string(max_elements) +
                              " elements");
      out.push_back({wk.path, {v.lo, v.hi()}, v.log_len, min_child, L.k, L.h});
      return;
    }
    const auto& runs = L.cfg.runs();
    for (std::size_t q = 0; q < runs.size(); ++q)
      for (std::uint64_t j = 0; j < runs[q].count; ++j) {
        wk.push(L.letter(q, L.cfg.run_offset(q) + j));
        self(self, child_node(v, runs[q], j));
        wk.pop();
      }
  };
  rec(rec, root_node(nc));
  return out;
}

BoxBound box_bound(const NestedCovering& nc, double delta, double r) {
  if (!(delta > 0 && delta <= 1)) throw ValidationError("delta must lie in (0, 1]");
  const auto cover = adapted_cover(nc, r);
  BoxBound b;
  b.cover_size = cover.size();
  b.box_count = prefractal_box_count(nc, nc.depth(), r);
  const auto& rule = nc.rule();
  const bool lemma = rule.rho > 0 && rule.C > 0;
  double log_bound = -kInf;
  for (const auto& u : cover) {
    const double boxes = std::max(1.0, std::ceil(u.interval.length() / r * (1 - 1e-12)));
    b.direct_bound += static_cast<std::uint64_t>(boxes);
    if (lemma && u.h > 0)
      log_bound = log_sum_exp(log_bound, std::log(16.0 * static_cast<double>(u.k) / rule.rho) +
                                             rule.C / u.h);
    else
      log_bound = std::numeric_limits<double>::quiet_NaN();
  }
  b.log_lemma_bound = lemma ? log_bound : std::numeric_limits<double>::quiet_NaN();
  b.cover_cap = std::exp(delta * (std::log(nc.root().length()) - std::log(r)));
  b.holds = b.box_count <= b.direct_bound &&
            static_cast<double>(b.cover_size) <= b.cover_cap * (1 + 1e-9) &&
            (std::isnan(b.log_lemma_bound) ||
             std::log(static_cast<double>(b.box_count)) <= b.log_lemma_bound);
  return b;
}

std::vector<NodeRecord> list_nodes(const NestedCovering& nc, std::size_t max_depth,
                                   double min_len, std::uint64_t max_nodes) {
  max_depth = std::min(max_depth, nc.depth());
  std::vector<NodeRecord> out;
  Walker wk(nc);
  auto rec = [&](auto&& self, const Node& v) -> void {
    if (v.len < min_len) return;
    if (out.size() >= max_nodes)
      throw ValidationError("node listing exceeds " + std::to_string(max_nodes) + " nodes");
    NodeRecord rec{wk.path.str(), wk.path.type(), wk.depth, 0, 0.0, v.lo, v.hi()};
    const Layout* L = wk.depth < nc.depth() ? &wk.layout() : nullptr;
    if (L) {
      rec.k = L->k;
      rec.h = L->h;
    }
    out.push_back(std::move(rec));
    if (!L || wk.depth == max_depth) return;
    const auto& runs = L->cfg.runs();
    for (std::size_t q = 0; q < runs.size(); ++q) {
      if (runs[q].log_len + v.log_len < std::log(min_len)) continue;
      for (std::uint64_t j = 0; j < runs[q].count; ++j) {
        wk.push(L->letter(q, L->cfg.run_offset(q) + j));
        self(self, child_node(v, runs[q], j));
        wk.pop();
      }
    }
  };
  rec(rec, root_node(nc));
  return out;
}

// ---------------------------------------------------------------- rules

ExpansionRule toy_rule(std::size_t children, double ratio) {
  if (children < 1) throw ValidationError("toy rule needs at least one child");
  if (!(ratio > 0 && static_cast<double>(children) * ratio < 1))
    throw ValidationError("toy rule children must fit disjointly");
  ExpansionRule rule;
  rule.sharing = ExpansionRule::Sharing::PerLevelType;
  rule.expand = [children, ratio](const Word&, Interval, std::size_t, std::uint64_t) {
    const auto m = static_cast<double>(children);
    BandRun u{children == 1 ? (1 - ratio) / 2 : 0.0, std::log(ratio),
              children == 1 ? 0.0 : (1 - ratio) / (m - 1), children};
    Expansion e;
    e.runs = {u};
    e.blocks = {Block{0, 1, {0.0, 1.0}, (children - 1) / 2}};
    return e;
  };
  return rule;
}

ExpansionRule standard_rule(const ConfigParams& p, unsigned kappa, double rho,
                            std::function<double(std::size_t)> h_of_depth) {
  if (kappa < 1) throw ValidationError("kappa must be >= 1");
  if (!(rho > 0 && rho < 1)) throw ValidationError("rho must lie in (0, 1)");
  ExpansionRule rule;
  rule.sharing = ExpansionRule::Sharing::PerLevelType;
  rule.kappa = kappa;
  rule.rho = rho;
  rule.C = p.C;
  rule.expand = [p, kappa, rho, h_of_depth](const Word& w, Interval, std::size_t d,
                                            std::uint64_t seed) {
    ConfigParams q = p;
    q.h = h_of_depth(d);
    std::size_t k = 1;
    if (w.type() == 2 && kappa > 1) k = Rng(derive_seed(seed, {0x6b})).integer(1, kappa);
    const auto cfg = gen_k_rho(q, k, rho, {0.0, 1.0}, seed);
    return Expansion{cfg.runs(), cfg.blocks(), q.h};
  };
  return rule;
}

ExpansionRule random_rule(std::size_t max_children, double min_ratio) {
  if (max_children < 1 || max_children > 9)
    throw ValidationError("random rule allows 1 to 9 children");
  if (!(min_ratio > 0 && min_ratio <= 0.1)) throw ValidationError("min_ratio must lie in (0, 0.1]");
  ExpansionRule rule;
  rule.sharing = ExpansionRule::Sharing::PerWord;
  rule.expand = [max_children, min_ratio](const Word&, Interval, std::size_t, std::uint64_t seed) {
    Rng rng(seed);
    const auto m = static_cast<std::size_t>(rng.integer(1, max_children));
    std::vector<double> len(m), gap(m + 1);
    double used = 0, wsum = 0;
    for (auto& x : len) used += (x = rng.log_uniform(min_ratio, 0.1));
    for (auto& g : gap) wsum += (g = rng.uniform(0.1, 1.0));
    Expansion e;
    double cursor = 0;
    std::uint64_t longest = 0;
    for (std::size_t i = 0; i < m; ++i) {
      cursor += gap[i] * (1 - used) / wsum;
      e.runs.push_back({cursor, std::log(len[i]), 0.0, 1});
      cursor += len[i];
      if (len[i] > len[longest]) longest = i;
    }
    e.blocks = {Block{0, m, {0.0, 1.0}, longest}};
    return e;
  };
  return rule;
}

}  // namespace harperlab
