// Shared carpet fixtures. All parameters are small-integer ratios, so every
// fixture runs in exact-rational mode.
#pragma once

#include "carpetq/carpet.hpp"

#include <string>
#include <vector>

namespace fixtures {

using carpetq::CarpetSpec;
using carpetq::RawCarpet;
using carpetq::RawCell;
using carpetq::RawColumn;

inline RawCell cellr(const std::string& a, const std::string& c, const std::string& p) {
  RawCell out;
  out.a_ex = *carpetq::parse_rational(a);
  out.c_ex = *carpetq::parse_rational(c);
  out.p_ex = *carpetq::parse_rational(p);
  out.a = carpetq::to_double(*out.a_ex);
  out.c = carpetq::to_double(*out.c_ex);
  out.p = carpetq::to_double(*out.p_ex);
  return out;
}

inline RawColumn colr(const std::string& b, const std::string& d, std::vector<RawCell> cells) {
  RawColumn out;
  out.b_ex = *carpetq::parse_rational(b);
  out.d_ex = *carpetq::parse_rational(d);
  out.b = carpetq::to_double(*out.b_ex);
  out.d = carpetq::to_double(*out.d_ex);
  out.cells = std::move(cells);
  return out;
}

// m = 3, n_1 = n_2 = 2, n_3 = 1; widths 1/9 and 1/27, all columns 1/3 tall.
inline RawCarpet thirds_raw(const std::string& p = "1/5") {
  RawCarpet raw;
  raw.columns.push_back(colr("1/3", "0", {cellr("1/9", "0", p), cellr("1/27", "26/27", p)}));
  raw.columns.push_back(colr("1/3", "1/3", {cellr("1/27", "1/9", p), cellr("1/9", "4/27", p)}));
  raw.columns.push_back(colr("1/3", "2/3", {cellr("1/9", "0", p)}));
  return raw;
}

inline CarpetSpec thirds() { return CarpetSpec::validate(thirds_raw()); }

// The thirds carpet with the third column replaced by a 1/12-wide cell in a
// 1/10-tall column at height 9/10.
inline CarpetSpec thirds_thin_top() {
  RawCarpet raw = thirds_raw();
  raw.columns[2] = colr("1/10", "9/10", {cellr("1/12", "0", "1/5")});
  return CarpetSpec::validate(raw);
}

// Bedford-McMullen 4x2 lattice, cells (0,0), (1,0), (0,1), uniform weights.
inline CarpetSpec bm_4_2() {
  return carpetq::bedford_mcmullen(4, 2, {{0, 0}, {1, 0}, {0, 1}});
}

// Two single-cell columns, heights 2/5, widths 1/5: every route has the same
// contraction, so s_r = log 2 / log(5/2) for every r.
inline CarpetSpec two_bar() {
  RawCarpet raw;
  raw.columns.push_back(colr("2/5", "0", {cellr("1/5", "0", "1/2")}));
  raw.columns.push_back(colr("2/5", "1/2", {cellr("1/5", "0", "1/2")}));
  return CarpetSpec::validate(raw);
}

// Degenerate (n_j = 1) quarter carpet: b = 1/2, a = 1/4; tau(q) = 1 - q and
// s_r = 1 for every r.
inline CarpetSpec quarter() {
  RawCarpet raw;
  raw.columns.push_back(colr("1/2", "0", {cellr("1/4", "0", "1/2")}));
  raw.columns.push_back(colr("1/2", "1/2", {cellr("1/4", "0", "1/2")}));
  return CarpetSpec::validate(raw);
}

// Mixed column sizes with unequal widths (n_1 = 2, n_2 = 1).
inline CarpetSpec mixed() {
  RawCarpet raw;
  raw.columns.push_back(colr("1/2", "0", {cellr("1/4", "0", "1/3"), cellr("1/4", "1/2", "1/3")}));
  raw.columns.push_back(colr("1/2", "1/2", {cellr("1/8", "0", "1/3")}));
  return CarpetSpec::validate(raw);
}

// Deep contractions (a = b^5): the level-root sequence of the partition
// equation converges fast here; tau(q) = 1 - q, t_r = 1/(1+r) and s_r = 1
// exactly, handy as a closed-form oracle.
inline CarpetSpec deep_quarter() {
  RawCarpet raw;
  raw.columns.push_back(colr("1/2", "0", {cellr("1/32", "0", "1/2")}));
  raw.columns.push_back(colr("1/2", "1/2", {cellr("1/32", "0", "1/2")}));
  return CarpetSpec::validate(raw);
}

// Deep Bedford-McMullen lattice (32 x 2), three cells, uniform weights.
inline CarpetSpec bm_32_2() {
  return carpetq::bedford_mcmullen(32, 2, {{0, 0}, {1, 0}, {0, 1}});
}

// Deep mixed-n_j variant.
inline CarpetSpec deep_mixed() {
  RawCarpet raw;
  raw.columns.push_back(colr("1/2", "0", {cellr("1/32", "0", "1/3"), cellr("1/32", "1/2", "1/3")}));
  raw.columns.push_back(colr("1/2", "1/2", {cellr("1/64", "0", "1/3")}));
  return CarpetSpec::validate(raw);
}

// Heterogeneous column heights with vertical gaps: completions mix columns
// whose b_j straddle the window threshold.
inline CarpetSpec gappy() {
  RawCarpet raw;
  raw.columns.push_back(colr("1/2", "0", {cellr("1/4", "0", "1/4"), cellr("1/8", "1/2", "1/4")}));
  raw.columns.push_back(colr("1/4", "11/20", {cellr("1/8", "0", "1/4")}));
  raw.columns.push_back(colr("1/8", "17/20", {cellr("1/16", "0", "1/4")}));
  return CarpetSpec::validate(raw);
}

}  // namespace fixtures
