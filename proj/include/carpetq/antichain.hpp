// Stopping-set anti-chains and the separated families built from them:
//   Lambda_{n,r}: stop the Psi descent at E_r(sigma) < eta_low^n
//   Gamma_{n,r}:  same descent in the cylinder order Phi
//   Bar (B_{n,r}):  insert ((1,j0),(n_j0,j0)) after sigma_L, re-extend the tail
//   Star (F_{n,r}): promote 2 A2 y-letters to x, append 1, m, m, ...
// plus certification (windows, disjointness, maximality/tiling, separation).
#pragma once

#include "carpetq/pressure.hpp"
#include "carpetq/words.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace carpetq {

enum class FamilyKind { LambdaPsi, GammaPhi, Bar, Star };

struct AntiChain {
  FamilyKind kind;
  int n = 0;
  double r = 0;
  std::vector<SplitWord> words;
  int l_min = 0;  // min |sigma_L| over the family
  DerivedConstants consts;
  std::map<std::string, bool> certified;
};

namespace detail {

inline bool use_exact_e(const CarpetSpec& spec, double r) {
  return spec.exact() && r > 0 && r == std::floor(r) && r <= 64;
}

struct StopRule {
  double log_eta_n;      // n log eta_low
  Rational eta_n_ex;     // eta_low^n, exact mode only
  bool exact = false;
  long r_int = 0;

  // true iff eta_low^n > E_r(sigma) (the strict stopping inequality).
  bool stopped(const CarpetSpec& spec, const SplitWord& w, double r,
               const ExactCaches& ex) const {
    if (exact) return eta_n_ex > ex.mu * rational_pow(ex.a, r_int);
    return log_gt(log_eta_n, log_e_r(spec, w, r));
  }
};

inline StopRule make_stop_rule(const CarpetSpec& spec, int n, double r,
                               const DerivedConstants& d) {
  StopRule rule;
  rule.exact = use_exact_e(spec, r);
  rule.log_eta_n = n * d.log_eta_low;
  if (rule.exact) {
    rule.r_int = static_cast<long>(r);
    rule.eta_n_ex = rational_pow(eta_low_exact(spec, rule.r_int, d.A1), n);
  }
  return rule;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Stopping sets.

inline AntiChain build_lambda(const CarpetSpec& spec, int n, double r,
                              const Budget& budget = {}) {
  if (n < 1) throw PreconditionError("need n >= 1");
  AntiChain out;
  out.kind = FamilyKind::LambdaPsi;
  out.n = n;
  out.r = r;
  out.consts = derived_constants(spec, r);
  const detail::StopRule rule = detail::make_stop_rule(spec, n, r, out.consts);

  std::uint64_t count = 0;
  std::function<void(const SplitWord&, const ExactCaches&)> visit =
      [&](const SplitWord& w, const ExactCaches& ex) {
        if (rule.stopped(spec, w, r, ex)) {
          if (++count > budget.max_words) throw BudgetExceeded(count - 1);
          out.words.push_back(w);
          return;
        }
        children_psi_ex(spec, w, ex,
                        [&](SplitWord child, const ExactCaches& cex) { visit(child, cex); });
      };

  enumerate_psi_cb(spec, 1, budget, [&](SplitWord w) {
    ExactCaches ex;
    if (rule.exact) {
      ex.a = exact_a(spec, w);
      ex.by = exact_by(spec, w);
      ex.mu = exact_mu(spec, w);
    }
    visit(w, ex);
  });

  out.l_min = out.words.empty() ? 0 : static_cast<int>(out.words.front().x.size());
  for (const auto& w : out.words) out.l_min = std::min(out.l_min, static_cast<int>(w.x.size()));
  out.certified["stop_window"] = true;
  return out;
}

inline AntiChain build_gamma(const CarpetSpec& spec, int n, double r,
                             const Budget& budget = {}) {
  if (n < 1) throw PreconditionError("need n >= 1");
  AntiChain out;
  out.kind = FamilyKind::GammaPhi;
  out.n = n;
  out.r = r;
  out.consts = derived_constants(spec, r);
  const detail::StopRule rule = detail::make_stop_rule(spec, n, r, out.consts);

  std::uint64_t count = 0;
  std::function<void(const SplitWord&, const ExactCaches&)> visit =
      [&](const SplitWord& w, const ExactCaches& ex) {
        if (rule.stopped(spec, w, r, ex)) {
          if (++count > budget.max_words) throw BudgetExceeded(count - 1);
          out.words.push_back(w);
          return;
        }
        children_phi_ex(spec, w, ex,
                        [&](SplitWord child, const ExactCaches& cex) { visit(child, cex); });
      };

  enumerate_psi_cb(spec, 1, budget, [&](SplitWord w) {
    ExactCaches ex;
    if (rule.exact) {
      ex.a = exact_a(spec, w);
      ex.by = exact_by(spec, w);
      ex.mu = exact_mu(spec, w);
    }
    visit(w, ex);
  });

  out.l_min = out.words.empty() ? 0 : static_cast<int>(out.words.front().x.size());
  for (const auto& w : out.words) out.l_min = std::min(out.l_min, static_cast<int>(w.x.size()));
  out.certified["stop_window"] = true;
  return out;
}

// ---------------------------------------------------------------------------
// The separated families.

namespace detail {

// Appends the extension tail (fixed head letters, then repeats of the filler)
// until the window for log_a_new crosses. Returns the number of letters used.
inline void extend_until_crossed(const CarpetSpec& spec, SplitWord& w,
                                 const std::vector<ColId>& head, ColId filler) {
  std::size_t head_pos = 0;
  while (!log_gt(w.log_a, w.log_by)) {
    const ColId j = head_pos < head.size() ? head[head_pos++] : filler;
    const Column& col = spec.column(j);
    w.r.push_back(j);
    w.log_by += col.log_b;
    w.log_mu += col.log_q;
  }
  if (head_pos < head.size())
    throw NumericError("window crossed before the mandatory tail letters");
}

}  // namespace detail

// B_{n,r}: words indexed like the Lambda family they came from.
inline AntiChain build_bar(const CarpetSpec& spec, const AntiChain& lambda, double r,
                           bool enforce_thresholds = true) {
  if (lambda.kind != FamilyKind::LambdaPsi)
    throw PreconditionError("build_bar expects a Lambda family");
  auto j0opt = spec.first_multicell_column();
  if (!j0opt)
    throw PreconditionError("all columns have a single cell; use the degenerate star path");
  const DerivedConstants& d = lambda.consts;
  if (enforce_thresholds && lambda.n <= d.T1)
    throw PreconditionError("need n > T1 = " + std::to_string(d.T1));

  const ColId j0 = *j0opt;
  const Column& colj = spec.column(j0);
  const CellId lo = spec.cell_id(j0, 0);
  const CellId hi = spec.cell_id(j0, static_cast<std::uint16_t>(colj.ncells - 1));
  const ColId last_col = static_cast<ColId>(spec.column_count() - 1);

  AntiChain out;
  out.kind = FamilyKind::Bar;
  out.n = lambda.n;
  out.r = r;
  out.consts = d;
  out.words.reserve(lambda.words.size());
  for (const auto& sigma : lambda.words) {
    SplitWord w;
    w.x = sigma.x;
    w.x.push_back(lo);
    w.x.push_back(hi);
    w.r = sigma.r;
    w.log_a = sigma.log_a + spec.cell(lo).log_a + spec.cell(hi).log_a;
    w.log_by = sigma.log_by + 2 * colj.log_b;
    w.log_mu = sigma.log_mu + spec.cell(lo).log_p + spec.cell(hi).log_p;
    detail::extend_until_crossed(spec, w, {}, last_col);
    if (!is_in_psi(spec, w)) throw NumericError("bar word left Psi");
    out.words.push_back(std::move(w));
  }
  out.l_min = lambda.l_min + 2;
  out.certified["above_threshold"] = lambda.n > d.T1;
  return out;
}

// F_{n,r}: from Bar words in the general case, or directly from Lambda when
// every column has a single cell. Promoted x-letters use row 1 of the column;
// the appended y-tail is 1, m, m, ... until the window closes.
inline AntiChain build_star(const CarpetSpec& spec, const AntiChain& base, double r,
                            bool enforce_thresholds = true) {
  const bool degenerate = spec.all_single_cell_columns();
  if (degenerate && base.kind != FamilyKind::LambdaPsi)
    throw PreconditionError("degenerate star construction starts from Lambda");
  if (!degenerate && base.kind != FamilyKind::Bar)
    throw PreconditionError("general star construction starts from Bar");
  const DerivedConstants& d = base.consts;
  if (enforce_thresholds) {
    if (degenerate) {
      if (static_cast<double>(base.n) <= 2.0 * d.A2 / d.A4)
        throw PreconditionError("need n > 2 A2 / A4 = " + std::to_string(2.0 * d.A2 / d.A4));
    } else if (base.n <= d.T2) {
      throw PreconditionError("need n > T2 = " + std::to_string(d.T2));
    }
  }

  const std::size_t promote = 2 * static_cast<std::size_t>(d.A2);
  const ColId first_col = 0;
  const ColId last_col = static_cast<ColId>(spec.column_count() - 1);

  AntiChain out;
  out.kind = FamilyKind::Star;
  out.n = base.n;
  out.r = r;
  out.consts = d;
  out.words.reserve(base.words.size());
  for (const auto& sigma : base.words) {
    if (sigma.r.size() < promote)
      throw PreconditionError("y-part shorter than 2 A2; n is too small for the construction");
    SplitWord w;
    w.x = sigma.x;
    w.log_a = sigma.log_a;
    w.log_mu = sigma.log_mu;
    w.log_by = sigma.log_by;  // the y-word is unchanged by promotion
    for (std::size_t h = 0; h < promote; ++h) {
      const ColId j = sigma.r[h];
      const CellId f = spec.cell_id(j, 0);
      w.x.push_back(f);
      w.log_a += spec.cell(f).log_a;
      w.log_mu += spec.cell(f).log_p - spec.column(j).log_q;
    }
    w.r.assign(sigma.r.begin() + static_cast<std::ptrdiff_t>(promote), sigma.r.end());
    detail::extend_until_crossed(spec, w, {first_col, last_col}, last_col);
    if (!is_in_psi(spec, w)) throw NumericError("star word left Psi");
    out.words.push_back(std::move(w));
  }
  out.l_min = base.l_min + static_cast<int>(promote);
  out.certified["above_threshold"] =
      degenerate ? static_cast<double>(base.n) > 2.0 * d.A2 / d.A4 : base.n > d.T2;
  return out;
}

// ---------------------------------------------------------------------------
// Certification.

namespace detail {

// Index members by their exact x-sequence; containment probes walk prefixes.
struct PrefixIndex {
  std::map<std::vector<CellId>, std::vector<std::size_t>> by_x;
  std::size_t max_xlen = 0, max_rlen = 0;

  explicit PrefixIndex(const std::vector<SplitWord>& words) {
    for (std::size_t i = 0; i < words.size(); ++i) {
      by_x[words[i].x].push_back(i);
      max_xlen = std::max(max_xlen, words[i].x.size());
      max_rlen = std::max(max_rlen, words[i].r.size());
    }
  }

  // Counts members preceding `probe` in the square (use_y) or cylinder order.
  template <class Pred>
  std::size_t count_containing(const std::vector<SplitWord>& words, const SplitWord& probe,
                               Pred&& pred) const {
    std::size_t hits = 0;
    std::vector<CellId> prefix;
    prefix.reserve(probe.x.size());
    for (std::size_t la = 1; la <= probe.x.size(); ++la) {
      prefix.push_back(probe.x[la - 1]);
      auto it = by_x.find(prefix);
      if (it == by_x.end()) continue;
      for (std::size_t idx : it->second)
        if (pred(words[idx], probe)) ++hits;
    }
    return hits;
  }
};

}  // namespace detail

struct CertificationReport {
  bool window_ok = true;
  bool pairwise_ok = true;
  bool mass_ok = true;
  bool probes_ok = true;
  double mass_sum = 0;
  std::uint64_t probes = 0;
  std::string detail;
  bool all() const { return window_ok && pairwise_ok && mass_ok && probes_ok; }
};

// Lambda: E_r window, pairwise square-disjointness, unit mass, maximality.
inline CertificationReport certify_lambda(const CarpetSpec& spec, const AntiChain& fam,
                                          std::uint64_t probes = 10000,
                                          std::uint64_t seed = 1) {
  CertificationReport rep;
  const DerivedConstants& d = fam.consts;
  const bool exact = detail::use_exact_e(spec, fam.r);
  Rational eta_ex, eta_n_ex, eta_n1_ex;
  if (exact) {
    eta_ex = eta_low_exact(spec, static_cast<long>(fam.r), d.A1);
    eta_n_ex = rational_pow(eta_ex, fam.n);
    eta_n1_ex = rational_pow(eta_ex, fam.n + 1);
  }

  double mass = 0;
  for (const auto& w : fam.words) {
    mass += measure(spec, w);
    if (exact) {
      const Rational e = exact_e(spec, w, static_cast<long>(fam.r));
      if (!(e >= eta_n1_ex && e < eta_n_ex)) rep.window_ok = false;
    } else {
      const double le = log_e_r(spec, w, fam.r);
      if (!(log_geq(le, (fam.n + 1) * d.log_eta_low) && log_lt(le, fam.n * d.log_eta_low)))
        rep.window_ok = false;
    }
  }
  rep.mass_sum = mass;
  rep.mass_ok = std::abs(mass - 1.0) <= 1e-9;

  detail::PrefixIndex index(fam.words);
  auto square_pred = [&](const SplitWord& u, const SplitWord& v) { return y_prefix(spec, u, v); };
  // pairwise: no member may contain another (count_containing counts v itself
  // when probing with a member, so expect exactly 1)
  for (const auto& w : fam.words)
    if (index.count_containing(fam.words, w, square_pred) != 1) {
      rep.pairwise_ok = false;
      break;
    }

  CounterRng rng(seed);
  rep.probes = probes;
  for (std::uint64_t it = 0; it < probes; ++it) {
    SplitWord probe = random_psi_word(spec, rng, index.max_xlen + 2);
    if (index.count_containing(fam.words, probe, square_pred) != 1) {
      rep.probes_ok = false;
      rep.detail = "probe " + word_to_string(spec, probe) + " not covered exactly once";
      break;
    }
  }
  return rep;
}

// Gamma: E_r window w.r.t. the Phi predecessor, pairwise cylinder
// disjointness, and tiling of the full product space.
inline CertificationReport certify_gamma(const CarpetSpec& spec, const AntiChain& fam,
                                         std::uint64_t probes = 10000,
                                         std::uint64_t seed = 1) {
  CertificationReport rep;
  const DerivedConstants& d = fam.consts;
  const bool exact = detail::use_exact_e(spec, fam.r);
  Rational eta_ex, eta_n_ex;
  if (exact) {
    eta_ex = eta_low_exact(spec, static_cast<long>(fam.r), d.A1);
    eta_n_ex = rational_pow(eta_ex, fam.n);
  }

  for (const auto& w : fam.words) {
    SplitWord pre = phi_predecessor(spec, w);
    if (exact) {
      const Rational e = exact_e(spec, w, static_cast<long>(fam.r));
      const Rational ep = pre.empty() ? Rational(1) : exact_e(spec, pre, static_cast<long>(fam.r));
      if (!(ep >= eta_n_ex && eta_n_ex > e)) rep.window_ok = false;
    } else {
      const double le = log_e_r(spec, w, fam.r);
      const double lp = pre.empty() ? 0.0 : log_e_r(spec, pre, fam.r);
      if (!(log_geq(lp, fam.n * d.log_eta_low) && log_gt(fam.n * d.log_eta_low, le)))
        rep.window_ok = false;
    }
  }
  rep.mass_ok = true;  // no geometric mass statement in the cylinder order

  detail::PrefixIndex index(fam.words);
  auto cyl_pred = [&](const SplitWord& u, const SplitWord& v) { return is_prefix(u.r, v.r); };
  for (const auto& w : fam.words)
    if (index.count_containing(fam.words, w, cyl_pred) != 1) {
      rep.pairwise_ok = false;
      break;
    }

  CounterRng rng(seed);
  rep.probes = probes;
  for (std::uint64_t it = 0; it < probes; ++it) {
    SplitWord probe = random_phi_pair(spec, rng, index.max_xlen + 2, index.max_rlen + 2);
    if (index.count_containing(fam.words, probe, cyl_pred) != 1) {
      rep.probes_ok = false;
      rep.detail = "cylinder probe not covered exactly once";
      break;
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Separation.

struct SeparationReport {
  double min_ratio = std::numeric_limits<double>::infinity();
  std::size_t witness_i = 0, witness_j = 0;
  std::size_t pairs = 0;
};

namespace detail {

inline double rect_gap2(const Rect& u, const Rect& v) {
  const double dx = std::max({0.0, u.x_lo - v.x_hi, v.x_lo - u.x_hi});
  const double dy = std::max({0.0, u.y_lo - v.y_hi, v.y_lo - u.y_hi});
  return dx * dx + dy * dy;
}

inline Rational rect_gap2_ex(const RectEx& u, const RectEx& v) {
  Rational dx = 0, dy = 0;
  if (u.x_lo - v.x_hi > dx) dx = u.x_lo - v.x_hi;
  if (v.x_lo - u.x_hi > dx) dx = v.x_lo - u.x_hi;
  if (u.y_lo - v.y_hi > dy) dy = u.y_lo - v.y_hi;
  if (v.y_lo - u.y_hi > dy) dy = v.y_lo - u.y_hi;
  return dx * dx + dy * dy;
}

inline Rational rect_diam2_ex(const RectEx& u) {
  const Rational w = u.x_hi - u.x_lo, h = u.y_hi - u.y_lo;
  return w * w + h * h;
}

}  // namespace detail

// min over pairs of d(F, F') / max(diam, diam'). Float-valued report.
inline SeparationReport check_separation(const CarpetSpec& spec, const AntiChain& fam) {
  SeparationReport rep;
  std::vector<Rect> rects;
  rects.reserve(fam.words.size());
  for (const auto& w : fam.words) rects.push_back(rectangle(spec, w));
  for (std::size_t i = 0; i < rects.size(); ++i)
    for (std::size_t j = i + 1; j < rects.size(); ++j) {
      ++rep.pairs;
      const double md = std::max(rects[i].diam(), rects[j].diam());
      const double ratio = std::sqrt(detail::rect_gap2(rects[i], rects[j])) / md;
      if (ratio < rep.min_ratio) {
        rep.min_ratio = ratio;
        rep.witness_i = i;
        rep.witness_j = j;
      }
    }
  return rep;
}

// Star-family separation constant (1 + b_min^{-2})^{-1} b_min^2 = b_min^4/(1 + b_min^2).
inline double star_separation_constant(const CarpetSpec& spec) {
  const double b2 = spec.b_min * spec.b_min;
  return b2 / (1.0 + 1.0 / b2);
}
inline Rational star_separation_constant_ex(const CarpetSpec& spec) {
  const Rational b2 = spec.b_min_ex * spec.b_min_ex;
  return b2 * b2 / (1 + b2);
}

// Exact certificate that every pair satisfies d >= rho * max(diam, diam').
// Pairs far from the boundary are screened in floating point with a
// conservative slack; only near-boundary pairs pay for exact arithmetic.
inline bool verify_separation_exact(const CarpetSpec& spec, const AntiChain& fam,
                                    const Rational& rho, std::size_t* exact_checks = nullptr) {
  if (!spec.exact()) throw PreconditionError("exact separation needs an exact-mode spec");
  const double rho_d = to_double(rho);
  const double rho2_d = rho_d * rho_d;
  std::vector<Rect> rects;
  rects.reserve(fam.words.size());
  for (const auto& w : fam.words) rects.push_back(rectangle(spec, w));
  std::size_t exact_count = 0;
  const Rational rho2 = rho * rho;
  for (std::size_t i = 0; i < rects.size(); ++i)
    for (std::size_t j = i + 1; j < rects.size(); ++j) {
      const double d2 = detail::rect_gap2(rects[i], rects[j]);
      const double w1 = rects[i].diam(), w2 = rects[j].diam();
      const double md2 = std::max(w1 * w1, w2 * w2);
      const double margin = 1e-9 * md2;
      if (d2 - rho2_d * md2 > margin) continue;  // certified in float
      ++exact_count;
      const RectEx ui = rectangle_exact(spec, fam.words[i]);
      const RectEx uj = rectangle_exact(spec, fam.words[j]);
      const Rational g2 = detail::rect_gap2_ex(ui, uj);
      Rational m2 = detail::rect_diam2_ex(ui);
      const Rational m2b = detail::rect_diam2_ex(uj);
      if (m2b > m2) m2 = m2b;
      if (g2 < rho2 * m2) {
        if (exact_checks) *exact_checks = exact_count;
        return false;
      }
    }
  if (exact_checks) *exact_checks = exact_count;
  return true;
}

// log sum of E_r(sigma)^t over the family.
inline double sum_e_t(const CarpetSpec& spec, const AntiChain& fam, double t) {
  LogSumExp acc;
  for (const auto& w : fam.words) acc.add(t * log_e_r(spec, w, fam.r));
  return acc.value();
}

}  // namespace carpetq
