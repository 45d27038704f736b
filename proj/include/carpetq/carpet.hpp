// Lalley-Gatzouras carpet specification: validation of the (A1)-(A4)
// geometry, the self-affine measure weights, derived constants, the
// Bedford-McMullen specialization and closed-form moments.
#pragma once

#include "carpetq/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace carpetq {

using CellId = std::uint16_t;
using ColId = std::uint16_t;

struct RawCell {
  double a = 0, c = 0, p = 0;
  std::optional<Rational> a_ex, c_ex, p_ex;
};

struct RawColumn {
  double b = 0, d = 0;
  std::optional<Rational> b_ex, d_ex;
  std::vector<RawCell> cells;
};

struct RawCarpet {
  std::vector<RawColumn> columns;
};

struct Cell {
  double a = 0, c = 0, p = 0;
  double log_a = 0, log_p = 0;
  ColId col = 0;      // 0-based column index
  std::uint16_t row = 0;  // 0-based index inside the column
  Rational a_ex, c_ex, p_ex;
};

struct Column {
  double b = 0, d = 0, q = 0;
  double log_b = 0, log_q = 0;
  std::uint32_t cell0 = 0;
  std::uint16_t ncells = 0;
  Rational b_ex, d_ex, q_ex;
};

struct BmOrigin {
  int n0 = 0, m0 = 0;
};

class CarpetSpec {
 public:
  static CarpetSpec validate(const RawCarpet& raw);

  std::size_t column_count() const { return cols_.size(); }
  std::size_t cell_count() const { return cells_.size(); }
  const Column& column(ColId j) const { return cols_[j]; }
  const Cell& cell(CellId f) const { return cells_[f]; }
  std::span<const Column> columns() const { return cols_; }
  std::span<const Cell> cells() const { return cells_; }
  CellId cell_id(ColId j, std::uint16_t row) const {
    return static_cast<CellId>(cols_[j].cell0 + row);
  }

  bool exact() const { return exact_; }
  const std::optional<BmOrigin>& bm() const { return bm_; }
  void set_bm(BmOrigin o) { bm_ = o; }

  double a_min = 1, a_max = 0, b_min = 1, b_max = 0;
  double p_min = 1, p_max = 0, q_min = 1, q_max = 0;

  bool all_single_cell_columns() const {
    for (const auto& c : cols_)
      if (c.ncells > 1) return false;
    return true;
  }
  // Smallest column index with at least two cells, if any.
  std::optional<ColId> first_multicell_column() const {
    for (ColId j = 0; j < cols_.size(); ++j)
      if (cols_[j].ncells >= 2) return j;
    return std::nullopt;
  }

  Rational a_min_ex, b_min_ex, p_min_ex, q_min_ex;

 private:
  std::vector<Column> cols_;
  std::vector<Cell> cells_;
  bool exact_ = false;
  std::optional<BmOrigin> bm_;
};

namespace detail {

// Floors a ratio of logs. Ratios like log(1/27)/log(1/3) are exactly integral
// for ratio-of-small-integer inputs but float division may land an ulp below;
// snap within 1e-9 before flooring.
inline long snap_floor(double x) {
  double r = std::round(x);
  if (std::abs(x - r) < 1e-9) return static_cast<long>(r);
  return static_cast<long>(std::floor(x));
}

}  // namespace detail

inline CarpetSpec CarpetSpec::validate(const RawCarpet& raw) {
  const std::size_t m = raw.columns.size();
  if (m < 2) throw ValidationError(CarpetError::TooFewColumns, "need m >= 2 columns");

  bool exact = true;
  for (const auto& col : raw.columns) {
    if (!col.b_ex || !col.d_ex) exact = false;
    for (const auto& cl : col.cells)
      if (!cl.a_ex || !cl.c_ex || !cl.p_ex) exact = false;
  }

  auto leq = [exact](double x, double y, const Rational& xe, const Rational& ye) {
    return exact ? xe <= ye : x <= y + kCmpEps;
  };
  auto lt = [exact](double x, double y, const Rational& xe, const Rational& ye) {
    return exact ? xe < ye : x < y - kCmpEps;
  };
  // Exact operand accessor; the value is only consulted when exact == true.
  auto ex = [](const std::optional<Rational>& v, double) { return v ? *v : Rational(0); };

  CarpetSpec out;
  out.exact_ = exact;

  double sum_b = 0;
  Rational sum_b_ex = 0;
  for (std::size_t j = 0; j < m; ++j) {
    const auto& rc = raw.columns[j];
    if (rc.cells.empty())
      throw ValidationError(CarpetError::EmptyColumn, "column without cells");
    if (!(rc.b > 0 && rc.b < 1) || !(rc.d >= 0 && rc.d < 1))
      throw ValidationError(CarpetError::BadColumnRange, "need 0 < b < 1 and 0 <= d < 1");
    sum_b += rc.b;
    if (exact) sum_b_ex += *rc.b_ex;
  }
  if (exact ? sum_b_ex > 1 : sum_b > 1 + kCmpEps)
    throw ValidationError(CarpetError::A1, "sum of column heights exceeds 1");
  {
    const auto& last = raw.columns[m - 1];
    if (!leq(last.d, 1 - last.b, ex(last.d_ex, 0), Rational(1) - ex(last.b_ex, 0)))
      throw ValidationError(CarpetError::A1, "top column leaves the unit square");
  }
  for (std::size_t j = 0; j + 1 < m; ++j) {
    const auto& lo = raw.columns[j];
    const auto& hi = raw.columns[j + 1];
    if (!leq(lo.b + lo.d, hi.d, ex(lo.b_ex, 0) + ex(lo.d_ex, 0), ex(hi.d_ex, 0)))
      throw ValidationError(CarpetError::A2, "columns overlap vertically");
  }

  double sum_p = 0;
  Rational sum_p_ex = 0;
  for (std::size_t j = 0; j < m; ++j) {
    const auto& rc = raw.columns[j];
    double sum_a = 0;
    Rational sum_a_ex = 0;
    for (std::size_t i = 0; i < rc.cells.size(); ++i) {
      const auto& cl = rc.cells[i];
      if (!(cl.a > 0 && cl.a < 1) || !(cl.c >= 0 && cl.c < 1))
        throw ValidationError(CarpetError::BadCellRange, "need 0 < a < 1 and 0 <= c < 1");
      if (!(cl.p > 0))
        throw ValidationError(CarpetError::NonPositiveProbability, "need p > 0");
      sum_a += cl.a;
      sum_p += cl.p;
      if (exact) {
        sum_a_ex += *cl.a_ex;
        sum_p_ex += *cl.p_ex;
      }
      if (!lt(cl.a, rc.b, ex(cl.a_ex, 0), ex(rc.b_ex, 0)))
        throw ValidationError(CarpetError::A3, "cell as wide as its column (need a < b strictly)");
      if (i + 1 < rc.cells.size()) {
        const auto& nx = rc.cells[i + 1];
        if (!leq(cl.a + cl.c, nx.c, ex(cl.a_ex, 0) + ex(cl.c_ex, 0), ex(nx.c_ex, 0)))
          throw ValidationError(CarpetError::A4, "cells overlap horizontally");
      }
    }
    if (exact ? sum_a_ex > 1 : sum_a > 1 + kCmpEps)
      throw ValidationError(CarpetError::A3, "cell widths exceed 1");
    const auto& last = rc.cells.back();
    if (!leq(last.a + last.c, 1.0, ex(last.a_ex, 0) + ex(last.c_ex, 0), Rational(1)))
      throw ValidationError(CarpetError::A3, "last cell leaves the unit square");
  }

  if (exact) {
    if (boost::multiprecision::abs(sum_p_ex - 1) > Rational(1, 1000000000))
      throw ValidationError(CarpetError::ProbabilitySum, "probabilities do not sum to 1");
  } else if (std::abs(sum_p - 1.0) > 1e-9) {
    throw ValidationError(CarpetError::ProbabilitySum, "probabilities do not sum to 1");
  }

  // Build validated layout; probabilities renormalized exactly.
  out.cols_.reserve(m);
  for (std::size_t j = 0; j < m; ++j) {
    const auto& rc = raw.columns[j];
    Column col;
    col.b = rc.b;
    col.d = rc.d;
    col.log_b = std::log(rc.b);
    col.cell0 = static_cast<std::uint32_t>(out.cells_.size());
    col.ncells = static_cast<std::uint16_t>(rc.cells.size());
    Rational q_ex = 0;
    double q = 0;
    for (std::size_t i = 0; i < rc.cells.size(); ++i) {
      const auto& cl = rc.cells[i];
      Cell cc;
      cc.a = cl.a;
      cc.c = cl.c;
      cc.col = static_cast<ColId>(j);
      cc.row = static_cast<std::uint16_t>(i);
      cc.log_a = std::log(cl.a);
      if (exact) {
        cc.a_ex = *cl.a_ex;
        cc.c_ex = *cl.c_ex;
        cc.p_ex = *cl.p_ex / sum_p_ex;
        cc.p = to_double(cc.p_ex);
        q_ex += cc.p_ex;
      } else {
        cc.p = cl.p / sum_p;
      }
      cc.log_p = std::log(cc.p);
      q += cc.p;
      out.cells_.push_back(std::move(cc));
    }
    col.q = q;
    col.log_q = std::log(q);
    if (exact) {
      col.b_ex = *rc.b_ex;
      col.d_ex = *rc.d_ex;
      col.q_ex = q_ex;
    }
    out.cols_.push_back(std::move(col));
  }

  for (const auto& col : out.cols_) {
    out.b_min = std::min(out.b_min, col.b);
    out.b_max = std::max(out.b_max, col.b);
    out.q_min = std::min(out.q_min, col.q);
    out.q_max = std::max(out.q_max, col.q);
  }
  for (const auto& cl : out.cells_) {
    out.a_min = std::min(out.a_min, cl.a);
    out.a_max = std::max(out.a_max, cl.a);
    out.p_min = std::min(out.p_min, cl.p);
    out.p_max = std::max(out.p_max, cl.p);
  }
  if (exact) {
    out.a_min_ex = out.cells_[0].a_ex;
    out.p_min_ex = out.cells_[0].p_ex;
    for (const auto& cl : out.cells_) {
      if (cl.a_ex < out.a_min_ex) out.a_min_ex = cl.a_ex;
      if (cl.p_ex < out.p_min_ex) out.p_min_ex = cl.p_ex;
    }
    out.b_min_ex = out.cols_[0].b_ex;
    out.q_min_ex = out.cols_[0].q_ex;
    for (const auto& col : out.cols_) {
      if (col.b_ex < out.b_min_ex) out.b_min_ex = col.b_ex;
      if (col.q_ex < out.q_min_ex) out.q_min_ex = col.q_ex;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Derived constants of sections 2 and 4.

struct DerivedConstants {
  double r = 0;
  double a_min, a_max, b_min, b_max, p_min, p_max, q_min, q_max;
  long A1, A2, A6, A7;
  double A3, A4;
  double eta_low, eta_high;        // eta underbar / overbar at this r
  double log_eta_low, log_eta_high;
  long M;                          // 0 when eta_high >= 1 (then unused)
  long A5, T1, T2;
  std::uint64_t N;                 // card(G)
  std::size_t m;
};

inline DerivedConstants derived_constants(const CarpetSpec& spec, double r) {
  if (!(r > 0)) throw PreconditionError("need r > 0");
  DerivedConstants d{};
  d.r = r;
  d.a_min = spec.a_min;
  d.a_max = spec.a_max;
  d.b_min = spec.b_min;
  d.b_max = spec.b_max;
  d.p_min = spec.p_min;
  d.p_max = spec.p_max;
  d.q_min = spec.q_min;
  d.q_max = spec.q_max;
  d.N = spec.cell_count();
  d.m = spec.column_count();

  const double la_min = std::log(spec.a_min), la_max = std::log(spec.a_max);
  const double lb_min = std::log(spec.b_min), lb_max = std::log(spec.b_max);
  d.A1 = detail::snap_floor(la_min / lb_max) + 1;
  d.A2 = detail::snap_floor(lb_min / la_max) + 1;
  double a3 = 0;
  for (const auto& cl : spec.cells())
    a3 = std::max(a3, cl.a / spec.column(cl.col).b);
  d.A3 = a3;
  d.A4 = std::log(a3) / lb_min;
  d.A6 = detail::snap_floor(1.0 / d.A4);
  d.A7 = detail::snap_floor(2.0 / d.A4) + 1;

  d.log_eta_low = std::log(spec.p_min) + d.A1 * std::log(spec.q_min) + r * la_min;
  d.log_eta_high = std::log(spec.p_max) - std::log(spec.q_min) + r * la_max;
  d.eta_low = std::exp(d.log_eta_low);
  d.eta_high = std::exp(d.log_eta_high);
  d.M = d.log_eta_high < 0 ? detail::snap_floor(d.log_eta_low / d.log_eta_high) : 0;
  d.A5 = detail::snap_floor((2 * std::log(spec.q_min) + d.log_eta_low) / (r * la_max));
  d.T1 = detail::snap_floor((d.A1 + d.A5 + 3) / d.A4);
  d.T2 = detail::snap_floor(d.T1 + 2.0 * d.A2 / d.A4);
  return d;
}

// Exact eta underbar, available for integral r on exact-mode specs.
inline Rational eta_low_exact(const CarpetSpec& spec, long r, long A1) {
  return spec.p_min_ex * rational_pow(spec.q_min_ex, A1) * rational_pow(spec.a_min_ex, r);
}

// ---------------------------------------------------------------------------
// Bedford-McMullen specialization: grid-aligned maps on an n0 x m0 lattice.

inline CarpetSpec bedford_mcmullen(int n0, int m0,
                                   std::vector<std::pair<int, int>> cells_ij,
                                   std::vector<double> probs = {}) {
  if (cells_ij.empty())
    throw ValidationError(CarpetError::EmptyCellSet, "no cells selected");
  if (m0 >= n0)
    throw ValidationError(CarpetError::A3, "need m0 < n0 strictly (else a = b)");
  if (m0 < 1) throw ValidationError(CarpetError::BadColumnRange, "need m0 >= 1");

  std::vector<std::size_t> order(cells_ij.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](std::size_t u, std::size_t v) {
    auto [iu, ju] = cells_ij[u];
    auto [iv, jv] = cells_ij[v];
    return std::pair(ju, iu) < std::pair(jv, iv);
  });

  if (probs.empty()) probs.assign(cells_ij.size(), 1.0 / static_cast<double>(cells_ij.size()));
  if (probs.size() != cells_ij.size())
    throw ValidationError(CarpetError::ProbabilitySum, "probability list length mismatch");

  RawCarpet raw;
  int prev_j = -1;
  std::pair<int, int> prev_cell{-1, -1};
  for (std::size_t k : order) {
    auto [i, j] = cells_ij[k];
    if (i < 0 || i >= n0 || j < 0 || j >= m0)
      throw ValidationError(CarpetError::BadCellRange, "cell outside the lattice");
    if (std::pair(i, j) == prev_cell)
      throw ValidationError(CarpetError::BadCellRange, "duplicate cell");
    prev_cell = {i, j};
    if (j != prev_j) {
      RawColumn col;
      col.b = 1.0 / m0;
      col.d = static_cast<double>(j) / m0;
      col.b_ex = Rational(1, m0);
      col.d_ex = Rational(j, m0);
      raw.columns.push_back(std::move(col));
      prev_j = j;
    }
    RawCell cl;
    cl.a = 1.0 / n0;
    cl.c = static_cast<double>(i) / n0;
    cl.a_ex = Rational(1, n0);
    cl.c_ex = Rational(i, n0);
    cl.p = probs[k];
    // Probabilities given as doubles; treat exact only if they are dyadic-safe
    // ratios of the cell count (the common uniform case).
    cl.p_ex = Rational(1, static_cast<long>(cells_ij.size()));
    if (std::abs(cl.p - 1.0 / static_cast<double>(cells_ij.size())) > 1e-15) cl.p_ex.reset();
    raw.columns.back().cells.push_back(std::move(cl));
  }

  CarpetSpec spec = CarpetSpec::validate(raw);
  spec.set_bm(BmOrigin{n0, m0});
  return spec;
}

// ---------------------------------------------------------------------------
// Moments of the invariant measure from its fixed-point equation.

struct Moments {
  double mean_x, mean_y;
  double cov_xx, cov_xy, cov_yy;
};

inline Moments moments(const CarpetSpec& spec) {
  double pa = 0, pc = 0, pb = 0, pd = 0;
  double paa = 0, pac = 0, pcc = 0;
  double pbb = 0, pbd = 0, pdd = 0;
  double pab = 0, pad = 0, pbc = 0, pcd = 0;
  for (const auto& cl : spec.cells()) {
    const auto& col = spec.column(cl.col);
    const double p = cl.p, a = cl.a, c = cl.c, b = col.b, dd = col.d;
    pa += p * a;
    pc += p * c;
    pb += p * b;
    pd += p * dd;
    paa += p * a * a;
    pac += p * a * c;
    pcc += p * c * c;
    pbb += p * b * b;
    pbd += p * b * dd;
    pdd += p * dd * dd;
    pab += p * a * b;
    pad += p * a * dd;
    pbc += p * b * c;
    pcd += p * c * dd;
  }
  Moments mo{};
  mo.mean_x = pc / (1 - pa);
  mo.mean_y = pd / (1 - pb);
  const double ex2 = (2 * pac * mo.mean_x + pcc) / (1 - paa);
  const double ey2 = (2 * pbd * mo.mean_y + pdd) / (1 - pbb);
  const double exy = (pad * mo.mean_x + pbc * mo.mean_y + pcd) / (1 - pab);
  mo.cov_xx = ex2 - mo.mean_x * mo.mean_x;
  mo.cov_yy = ey2 - mo.mean_y * mo.mean_y;
  mo.cov_xy = exy - mo.mean_x * mo.mean_y;
  return mo;
}

}  // namespace carpetq
