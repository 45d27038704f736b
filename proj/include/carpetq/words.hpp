// Word combinatorics over the carpet alphabet: split words sigma_L * sigma_R,
// the approximate-square window b_{sigma_y^-} >= a_{sigma_L} > b_{sigma_y},
// enumeration of Psi_l / Phi_l, predecessors, partial orders and geometry.
//
// Two partial orders share the same carrier type:
//   square order (Psi): containment of approximate squares, i.e. prefix on
//     sigma_L and prefix on the full y-word sigma_y;
//   cylinder order (Phi): coordinatewise prefix on (sigma_L, sigma_R).
#pragma once

#include "carpetq/carpet.hpp"

#include <cstdint>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

namespace carpetq {

struct SplitWord {
  std::vector<CellId> x;  // sigma_L
  std::vector<ColId> r;   // sigma_R
  // Cached log-products, filled by the producers (enumeration keeps them
  // incrementally; recompute_caches rebuilds them from scratch).
  double log_a = 0;   // log a_{sigma_L}
  double log_mu = 0;  // log (p_{sigma_L} q_{sigma_R})
  double log_by = 0;  // log b_{sigma_y}

  bool empty() const { return x.empty() && r.empty(); }
  std::size_t y_len() const { return x.size() + r.size(); }
  std::size_t len() const { return x.size() + r.size(); }  // |sigma| = |sigma_L| + |sigma_R|

  friend bool operator==(const SplitWord& u, const SplitWord& v) {
    return u.x == v.x && u.r == v.r;
  }
  friend bool operator<(const SplitWord& u, const SplitWord& v) {
    if (u.x != v.x) return u.x < v.x;
    return u.r < v.r;
  }
};

inline ColId y_at(const CarpetSpec& spec, const SplitWord& w, std::size_t k) {
  return k < w.x.size() ? spec.cell(w.x[k]).col : w.r[k - w.x.size()];
}

inline void recompute_caches(const CarpetSpec& spec, SplitWord& w) {
  w.log_a = w.log_mu = w.log_by = 0;
  for (CellId f : w.x) {
    const Cell& cl = spec.cell(f);
    w.log_a += cl.log_a;
    w.log_mu += cl.log_p;
    w.log_by += spec.column(cl.col).log_b;
  }
  for (ColId j : w.r) {
    w.log_mu += spec.column(j).log_q;
    w.log_by += spec.column(j).log_b;
  }
}

// --- exact-mode recomputation (products of the parameter rationals) --------

inline Rational exact_a(const CarpetSpec& spec, const SplitWord& w) {
  Rational v = 1;
  for (CellId f : w.x) v *= spec.cell(f).a_ex;
  return v;
}
inline Rational exact_by(const CarpetSpec& spec, const SplitWord& w) {
  Rational v = 1;
  for (std::size_t k = 0; k < w.y_len(); ++k) v *= spec.column(y_at(spec, w, k)).b_ex;
  return v;
}
inline Rational exact_mu(const CarpetSpec& spec, const SplitWord& w) {
  Rational v = 1;
  for (CellId f : w.x) v *= spec.cell(f).p_ex;
  for (ColId j : w.r) v *= spec.column(j).q_ex;
  return v;
}
inline Rational exact_e(const CarpetSpec& spec, const SplitWord& w, long r) {
  return exact_mu(spec, w) * rational_pow(exact_a(spec, w), r);
}

// --- measure and the stopping quantity E_r ---------------------------------

inline double log_measure(const CarpetSpec&, const SplitWord& w) { return w.log_mu; }
inline double measure(const CarpetSpec& spec, const SplitWord& w) {
  return std::exp(log_measure(spec, w));
}
// E_r(sigma) = mu(F_sigma) a_{sigma_L}^r, with E_r(theta) = 1.
inline double log_e_r(const CarpetSpec&, const SplitWord& w, double r) {
  return w.log_mu + r * w.log_a;
}
inline double e_r(const CarpetSpec& spec, const SplitWord& w, double r) {
  return std::exp(log_e_r(spec, w, r));
}

// --- the Psi window ---------------------------------------------------------

inline bool is_in_psi(const CarpetSpec& spec, const SplitWord& w) {
  if (w.x.empty() || w.y_len() == 0) return false;
  const ColId last = y_at(spec, w, w.y_len() - 1);
  const double log_by_minus = w.log_by - spec.column(last).log_b;
  return log_geq(log_by_minus, w.log_a) && log_gt(w.log_a, w.log_by);
}

inline bool is_in_psi_exact(const CarpetSpec& spec, const SplitWord& w) {
  if (w.x.empty() || w.y_len() == 0) return false;
  const Rational a = exact_a(spec, w);
  const Rational by = exact_by(spec, w);
  const Rational by_minus = by / spec.column(y_at(spec, w, w.y_len() - 1)).b_ex;
  return by_minus >= a && a > by;
}

// ---------------------------------------------------------------------------
// Completion machinery. complete_y extends the y-word letter by letter until
// the first crossing b_{sigma_y} < a (unique stopping: products only shrink),
// emitting every completion in ascending column order. The caller guarantees
// the entry state is not yet crossed.

namespace detail {

struct YThreshold {
  double log_a;
  Rational a_ex;   // used only when exact
  bool exact = false;
};

struct YState {
  double log_b;
  double log_q;  // q-product of letters appended by the completion DFS only
  Rational b_ex;
  Rational q_ex = 1;
};

inline bool crossed(const YThreshold& th, const YState& st) {
  return th.exact ? th.a_ex > st.b_ex : log_gt(th.log_a, st.log_b);
}

template <class F>
void complete_y(const CarpetSpec& spec, const YThreshold& th, YState st,
                std::vector<ColId>& tail, F&& emit) {
  for (ColId j = 0; j < spec.column_count(); ++j) {
    const Column& col = spec.column(j);
    YState nx;
    nx.log_b = st.log_b + col.log_b;
    nx.log_q = st.log_q + col.log_q;
    if (th.exact) {
      nx.b_ex = st.b_ex * col.b_ex;
      nx.q_ex = st.q_ex * col.q_ex;
    }
    tail.push_back(j);
    if (crossed(th, nx)) {
      emit(tail, nx);
    } else {
      complete_y(spec, th, nx, tail, emit);
    }
    tail.pop_back();
  }
}

// Base-crossing wrapper: if the entry state is already past the threshold the
// unique completion is the empty tail.
template <class F>
void complete_from(const CarpetSpec& spec, const YThreshold& th, const YState& st,
                   std::vector<ColId>& tail, F&& emit) {
  if (crossed(th, st)) {
    emit(tail, st);
    return;
  }
  complete_y(spec, th, st, tail, emit);
}

}  // namespace detail

// Omega(omega): the prefix-free set of y-words tau with
// b_{tau^-} >= a_omega / b_{omega_y} > b_tau.
inline std::vector<std::vector<ColId>> omega_completions(const CarpetSpec& spec,
                                                         const std::vector<CellId>& omega) {
  if (omega.empty()) throw PreconditionError("omega must be non-empty");
  detail::YThreshold th;
  th.exact = spec.exact();
  th.log_a = 0;
  double log_byw = 0;
  Rational a_ex = 1, b_ex = 1;
  for (CellId f : omega) {
    const Cell& cl = spec.cell(f);
    th.log_a += cl.log_a;
    log_byw += spec.column(cl.col).log_b;
    if (th.exact) {
      a_ex *= cl.a_ex;
      b_ex *= spec.column(cl.col).b_ex;
    }
  }
  if (th.exact) th.a_ex = a_ex;
  detail::YState st{log_byw, 0.0, b_ex};
  std::vector<std::vector<ColId>> out;
  std::vector<ColId> tail;
  // a_omega < b_{omega_y} holds letterwise, so the base is never crossed.
  detail::complete_y(spec, th, st, tail,
                     [&](const std::vector<ColId>& t, const detail::YState&) { out.push_back(t); });
  return out;
}

// ---------------------------------------------------------------------------
// Enumeration of Psi_l: all omega in G^l in cell-id (column-major) order, each
// followed by its completions in ascending y-order. Deterministic.

template <class F>
void enumerate_psi_cb(const CarpetSpec& spec, int l, const Budget& budget, F&& emit) {
  if (l < 1) throw PreconditionError("need l >= 1");
  const bool exact = spec.exact();
  std::vector<CellId> xs;
  std::uint64_t count = 0;

  struct Frame {
    double log_a, log_p, log_by;
    Rational a_ex, b_ex;
  };
  std::vector<Frame> stack;
  stack.reserve(static_cast<std::size_t>(l) + 1);  // frames are referenced across push_back
  stack.push_back({0, 0, 0, Rational(1), Rational(1)});

  std::function<void()> descend = [&]() {
    const Frame& top = stack.back();
    if (static_cast<int>(xs.size()) == l) {
      detail::YThreshold th{top.log_a, top.a_ex, exact};
      detail::YState st{top.log_by, 0.0, top.b_ex};
      std::vector<ColId> tail;
      detail::complete_y(spec, th, st, tail, [&](const std::vector<ColId>& t, const detail::YState& y) {
        if (++count > budget.max_words) throw BudgetExceeded(count - 1);
        SplitWord w;
        w.x = xs;
        w.r = t;
        w.log_a = top.log_a;
        w.log_mu = top.log_p + y.log_q;
        w.log_by = y.log_b;
        emit(std::move(w));
      });
      return;
    }
    for (CellId f = 0; f < spec.cell_count(); ++f) {
      const Cell& cl = spec.cell(f);
      const Column& col = spec.column(cl.col);
      Frame nx;
      nx.log_a = top.log_a + cl.log_a;
      nx.log_p = top.log_p + cl.log_p;
      nx.log_by = top.log_by + col.log_b;
      if (exact) {
        nx.a_ex = top.a_ex * cl.a_ex;
        nx.b_ex = top.b_ex * col.b_ex;
      }
      xs.push_back(f);
      stack.push_back(nx);
      descend();
      stack.pop_back();
      xs.pop_back();
    }
  };
  descend();
}

inline std::vector<SplitWord> enumerate_psi(const CarpetSpec& spec, int l,
                                            const Budget& budget = {}) {
  std::vector<SplitWord> out;
  enumerate_psi_cb(spec, l, budget, [&](SplitWord w) { out.push_back(std::move(w)); });
  return out;
}

// ---------------------------------------------------------------------------
// Children steps. children_psi(sigma) yields the omega in Psi_{l+1} with
// F_omega inside F_sigma (the x-letter's column is forced to sigma_R[0]);
// children_phi(sigma) yields Lambda_1(sigma) in the cylinder order. In both
// cases the emitted word's unique predecessor (flat resp. minus) is sigma.

// Exact caches of a word, carried alongside the float logs when the DFS
// runs in exact mode. Unused (all 1) in float mode.
struct ExactCaches {
  Rational a = 1, by = 1, mu = 1;
};

// emit(child, ExactCaches of child)
template <class F>
void children_psi_ex(const CarpetSpec& spec, const SplitWord& w, const ExactCaches& wex,
                     F&& emit) {
  if (w.r.empty()) throw PreconditionError("Psi word must have a y-part");
  const bool exact = spec.exact();
  const ColId jstar = w.r[0];
  const Column& colj = spec.column(jstar);
  for (std::uint16_t row = 0; row < colj.ncells; ++row) {
    const CellId f = spec.cell_id(jstar, row);
    const Cell& cl = spec.cell(f);
    detail::YThreshold th{w.log_a + cl.log_a, exact ? wex.a * cl.a_ex : Rational(1), exact};
    // The child's y-word extends sigma_y; entry state is the full sigma_y.
    detail::YState st{w.log_by, 0.0, wex.by, Rational(1)};
    std::vector<ColId> tail(w.r.begin() + 1, w.r.end());
    detail::complete_from(spec, th, st, tail, [&](const std::vector<ColId>& t, const detail::YState& y) {
      SplitWord child;
      child.x = w.x;
      child.x.push_back(f);
      child.r = t;
      child.log_a = th.log_a;
      child.log_mu = w.log_mu - colj.log_q + cl.log_p + y.log_q;
      child.log_by = y.log_b;
      ExactCaches cex;
      if (exact) {
        cex.a = th.a_ex;
        cex.by = y.b_ex;
        cex.mu = wex.mu / colj.q_ex * cl.p_ex * y.q_ex;
      }
      emit(std::move(child), cex);
    });
  }
}

template <class F>
void children_psi(const CarpetSpec& spec, const SplitWord& w, F&& emit) {
  ExactCaches wex;
  if (spec.exact()) {
    wex.a = exact_a(spec, w);
    wex.by = exact_by(spec, w);
    wex.mu = exact_mu(spec, w);
  }
  children_psi_ex(spec, w, wex, [&](SplitWord child, const ExactCaches&) { emit(std::move(child)); });
}

template <class F>
void children_phi_ex(const CarpetSpec& spec, const SplitWord& w, const ExactCaches& wex,
                     F&& emit) {
  const bool exact = spec.exact();
  for (CellId f = 0; f < spec.cell_count(); ++f) {
    const Cell& cl = spec.cell(f);
    const Column& colg = spec.column(cl.col);
    detail::YThreshold th{w.log_a + cl.log_a, exact ? wex.a * cl.a_ex : Rational(1), exact};
    detail::YState st{w.log_by + colg.log_b, 0.0, exact ? wex.by * colg.b_ex : Rational(1),
                      Rational(1)};
    std::vector<ColId> tail = w.r;
    detail::complete_from(spec, th, st, tail, [&](const std::vector<ColId>& t, const detail::YState& y) {
      SplitWord child;
      child.x = w.x;
      child.x.push_back(f);
      child.r = t;
      child.log_a = th.log_a;
      child.log_mu = w.log_mu + cl.log_p + y.log_q;
      child.log_by = y.log_b;
      ExactCaches cex;
      if (exact) {
        cex.a = th.a_ex;
        cex.by = y.b_ex;
        cex.mu = wex.mu * cl.p_ex * y.q_ex;
      }
      emit(std::move(child), cex);
    });
  }
}

template <class F>
void children_phi(const CarpetSpec& spec, const SplitWord& w, F&& emit) {
  ExactCaches wex;
  if (spec.exact()) {
    wex.a = exact_a(spec, w);
    wex.by = exact_by(spec, w);
    wex.mu = exact_mu(spec, w);
  }
  children_phi_ex(spec, w, wex, [&](SplitWord child, const ExactCaches&) { emit(std::move(child)); });
}

// Lambda_h(sigma): all rho in Phi_{l+h} extending sigma coordinatewise.
template <class F>
void descendants_cb(const CarpetSpec& spec, const SplitWord& w, int h, const Budget& budget,
                    F&& emit) {
  if (h < 1) throw PreconditionError("need h >= 1");
  std::uint64_t count = 0;
  std::function<void(const SplitWord&, int)> rec = [&](const SplitWord& cur, int depth) {
    if (depth == 0) {
      if (++count > budget.max_words) throw BudgetExceeded(count - 1);
      emit(cur);
      return;
    }
    children_phi(spec, cur, [&](SplitWord child) { rec(child, depth - 1); });
  };
  rec(w, h);
}

inline std::vector<SplitWord> descendants(const CarpetSpec& spec, const SplitWord& w, int h,
                                          const Budget& budget = {}) {
  std::vector<SplitWord> out;
  descendants_cb(spec, w, h, budget, [&](const SplitWord& d) { out.push_back(d); });
  return out;
}

// ---------------------------------------------------------------------------
// Predecessors.

// sigma^flat: drop the last x-letter and trim the y-word at the unique
// crossing of a_{sigma_L^-}. Returns theta for l = 1.
inline SplitWord flat_predecessor(const CarpetSpec& spec, const SplitWord& w) {
  if (w.x.size() <= 1) return SplitWord{};
  const bool exact = spec.exact();
  SplitWord out;
  out.x.assign(w.x.begin(), w.x.end() - 1);

  const double th = w.log_a - spec.cell(w.x.back()).log_a;
  Rational th_ex = 1;
  if (exact) th_ex = exact_a(spec, w) / spec.cell(w.x.back()).a_ex;

  // Find the first y-prefix length L with b_{sigma_y|L} < threshold.
  double cum = 0;
  Rational cum_ex = 1;
  std::size_t L = w.y_len();
  for (std::size_t t = 1; t <= w.y_len(); ++t) {
    const Column& col = spec.column(y_at(spec, w, t - 1));
    cum += col.log_b;
    if (exact) cum_ex *= col.b_ex;
    const bool cross = exact ? th_ex > cum_ex : log_gt(th, cum);
    if (cross) {
      L = t;
      break;
    }
  }
  // sigma^flat_R = y-letters at positions l..L (1-based), i.e. from the
  // column of the dropped x-letter onward.
  for (std::size_t t = w.x.size(); t <= L; ++t) out.r.push_back(y_at(spec, w, t - 1));
  recompute_caches(spec, out);
  return out;
}

// sigma^-: the Phi predecessor; sigma_R keeps its head and is trimmed at the
// unique crossing of a_{sigma_L^-} over b_{(sigma_L^-)_y} b_{sigma_R|t}.
inline SplitWord phi_predecessor(const CarpetSpec& spec, const SplitWord& w) {
  if (w.x.size() <= 1) return SplitWord{};
  const bool exact = spec.exact();
  SplitWord out;
  out.x.assign(w.x.begin(), w.x.end() - 1);

  const Cell& dropped = spec.cell(w.x.back());
  const double th = w.log_a - dropped.log_a;
  double cum = 0;
  for (CellId f : out.x) cum += spec.column(spec.cell(f).col).log_b;
  Rational th_ex = 1, cum_ex = 1;
  if (exact) {
    th_ex = exact_a(spec, w) / dropped.a_ex;
    for (CellId f : out.x) cum_ex *= spec.column(spec.cell(f).col).b_ex;
  }
  for (std::size_t t = 0; t < w.r.size(); ++t) {
    const Column& col = spec.column(w.r[t]);
    cum += col.log_b;
    if (exact) cum_ex *= col.b_ex;
    out.r.push_back(w.r[t]);
    const bool cross = exact ? th_ex > cum_ex : log_gt(th, cum);
    if (cross) break;
  }
  recompute_caches(spec, out);
  return out;
}

// ---------------------------------------------------------------------------
// Partial orders.

template <class T>
bool is_prefix(const std::vector<T>& u, const std::vector<T>& v) {
  if (u.size() > v.size()) return false;
  return std::equal(u.begin(), u.end(), v.begin());
}

// sigma_y <= omega_y in the prefix order on full y-words.
inline bool y_prefix(const CarpetSpec& spec, const SplitWord& u, const SplitWord& v) {
  if (u.y_len() > v.y_len()) return false;
  for (std::size_t k = 0; k < u.y_len(); ++k)
    if (y_at(spec, u, k) != y_at(spec, v, k)) return false;
  return true;
}

enum class SquareRel { Equal, Contains, ContainedIn, DisjointInteriors };
enum class CylinderRel { Equal, Contains, ContainedIn, Disjoint };

inline SquareRel square_compare(const CarpetSpec& spec, const SplitWord& s1, const SplitWord& s2) {
  const bool x12 = is_prefix(s1.x, s2.x), x21 = is_prefix(s2.x, s1.x);
  const bool y12 = y_prefix(spec, s1, s2), y21 = y_prefix(spec, s2, s1);
  if (x12 && x21 && y12 && y21) return SquareRel::Equal;
  if (x12 && y12) return SquareRel::Contains;
  if (x21 && y21) return SquareRel::ContainedIn;
  return SquareRel::DisjointInteriors;
}

inline CylinderRel cylinder_compare(const CarpetSpec&, const SplitWord& s1, const SplitWord& s2) {
  const bool x12 = is_prefix(s1.x, s2.x), x21 = is_prefix(s2.x, s1.x);
  const bool r12 = is_prefix(s1.r, s2.r), r21 = is_prefix(s2.r, s1.r);
  if (x12 && x21 && r12 && r21) return CylinderRel::Equal;
  if (x12 && r12) return CylinderRel::Contains;
  if (x21 && r21) return CylinderRel::ContainedIn;
  return CylinderRel::Disjoint;
}

// ---------------------------------------------------------------------------
// Geometry.

struct Rect {
  double x_lo = 0, x_hi = 0, y_lo = 0, y_hi = 0;
  double width() const { return x_hi - x_lo; }
  double height() const { return y_hi - y_lo; }
  double diam() const { return std::hypot(width(), height()); }
};

struct RectEx {
  Rational x_lo, x_hi, y_lo, y_hi;
};

inline Rect rectangle(const CarpetSpec& spec, const SplitWord& w) {
  Rect rc;
  double scale = 1;
  for (CellId f : w.x) {
    const Cell& cl = spec.cell(f);
    rc.x_lo += scale * cl.c;
    scale *= cl.a;
  }
  rc.x_hi = rc.x_lo + scale;
  double yscale = 1;
  for (std::size_t k = 0; k < w.y_len(); ++k) {
    const Column& col = spec.column(y_at(spec, w, k));
    rc.y_lo += yscale * col.d;
    yscale *= col.b;
  }
  rc.y_hi = rc.y_lo + yscale;
  return rc;
}

inline RectEx rectangle_exact(const CarpetSpec& spec, const SplitWord& w) {
  RectEx rc{0, 0, 0, 0};
  Rational scale = 1;
  for (CellId f : w.x) {
    const Cell& cl = spec.cell(f);
    rc.x_lo += scale * cl.c_ex;
    scale *= cl.a_ex;
  }
  rc.x_hi = rc.x_lo + scale;
  Rational yscale = 1;
  for (std::size_t k = 0; k < w.y_len(); ++k) {
    const Column& col = spec.column(y_at(spec, w, k));
    rc.y_lo += yscale * col.d_ex;
    yscale *= col.b_ex;
  }
  rc.y_hi = rc.y_lo + yscale;
  return rc;
}

// ---------------------------------------------------------------------------
// Serialization: "i.j-i.j|j-j-j" with 1-based indices, theta = "|".

inline std::string word_to_string(const CarpetSpec& spec, const SplitWord& w) {
  std::ostringstream os;
  for (std::size_t k = 0; k < w.x.size(); ++k) {
    const Cell& cl = spec.cell(w.x[k]);
    if (k) os << '-';
    os << (cl.row + 1) << '.' << (cl.col + 1);
  }
  os << '|';
  for (std::size_t k = 0; k < w.r.size(); ++k) {
    if (k) os << '-';
    os << (w.r[k] + 1);
  }
  return os.str();
}

inline SplitWord word_from_string(const CarpetSpec& spec, const std::string& s) {
  auto bar = s.find('|');
  if (bar == std::string::npos) throw PreconditionError("word string needs a '|'");
  SplitWord w;
  auto parse_part = [](const std::string& part, auto&& fn) {
    std::size_t pos = 0;
    while (pos < part.size()) {
      auto dash = part.find('-', pos);
      if (dash == std::string::npos) dash = part.size();
      fn(part.substr(pos, dash - pos));
      pos = dash + 1;
    }
  };
  parse_part(s.substr(0, bar), [&](const std::string& tok) {
    auto dot = tok.find('.');
    if (dot == std::string::npos) throw PreconditionError("x-letter needs i.j");
    int i = std::stoi(tok.substr(0, dot));
    int j = std::stoi(tok.substr(dot + 1));
    if (j < 1 || static_cast<std::size_t>(j) > spec.column_count())
      throw PreconditionError("column out of range");
    const Column& col = spec.column(static_cast<ColId>(j - 1));
    if (i < 1 || i > col.ncells) throw PreconditionError("cell out of range");
    w.x.push_back(spec.cell_id(static_cast<ColId>(j - 1), static_cast<std::uint16_t>(i - 1)));
  });
  parse_part(s.substr(bar + 1), [&](const std::string& tok) {
    int j = std::stoi(tok);
    if (j < 1 || static_cast<std::size_t>(j) > spec.column_count())
      throw PreconditionError("column out of range");
    w.r.push_back(static_cast<ColId>(j - 1));
  });
  recompute_caches(spec, w);
  return w;
}

// ---------------------------------------------------------------------------
// Random deep words (probe generators for maximality/tiling certification).

inline SplitWord random_psi_word(const CarpetSpec& spec, CounterRng& rng, std::size_t x_len) {
  SplitWord w;
  for (std::size_t t = 0; t < x_len; ++t)
    w.x.push_back(static_cast<CellId>(rng.next_below(spec.cell_count())));
  recompute_caches(spec, w);
  // Random completion: extend with random columns until the window crosses.
  while (!log_gt(w.log_a, w.log_by)) {
    const ColId j = static_cast<ColId>(rng.next_below(spec.column_count()));
    w.r.push_back(j);
    w.log_by += spec.column(j).log_b;
    w.log_mu += spec.column(j).log_q;
  }
  return w;
}

inline SplitWord random_phi_pair(const CarpetSpec& spec, CounterRng& rng, std::size_t x_len,
                                 std::size_t r_len) {
  SplitWord w;
  for (std::size_t t = 0; t < x_len; ++t)
    w.x.push_back(static_cast<CellId>(rng.next_below(spec.cell_count())));
  for (std::size_t t = 0; t < r_len; ++t)
    w.r.push_back(static_cast<ColId>(rng.next_below(spec.column_count())));
  recompute_caches(spec, w);
  return w;
}

}  // namespace carpetq
