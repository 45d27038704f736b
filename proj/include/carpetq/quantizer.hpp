// Empirical quantization: chaos-game sampling of the invariant measure,
// generalized Lloyd optimization of n-point codebooks in the r-th power
// metric, anti-chain codebooks, and the n^{-r/s_r} convergence-order scan.
#pragma once

#include "carpetq/antichain.hpp"
#include "carpetq/carpet.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace carpetq {

using Point = std::array<double, 2>;

struct SampleSet {
  std::vector<Point> pts;
  std::uint64_t seed = 0;
  double tol = 0;
  int depth = 0;
};

// Chaos-game truncation: each point composes i.i.d. letters to a depth D with
// b_max^D < tol, applied to the base point (0,0). RNG streams are per-point
// counters, so the result is independent of generation order or threading.
inline SampleSet sample(const CarpetSpec& spec, std::size_t count, double tol,
                        std::uint64_t seed) {
  if (!(tol > 0)) throw PreconditionError("need tol > 0");
  SampleSet out;
  out.seed = seed;
  out.tol = tol;
  out.depth = static_cast<int>(std::floor(std::log(tol) / std::log(spec.b_max))) + 1;
  out.pts.resize(count);

  std::vector<double> cum(spec.cell_count());
  double acc = 0;
  for (CellId f = 0; f < spec.cell_count(); ++f) {
    acc += spec.cell(f).p;
    cum[f] = acc;
  }
  cum.back() = 1.0;

  for (std::size_t idx = 0; idx < count; ++idx) {
    CounterRng rng(seed, idx);
    double x = 0, y = 0, sx = 1, sy = 1;
    for (int t = 0; t < out.depth; ++t) {
      const double u = rng.next_double();
      CellId f = 0;
      while (cum[f] < u && static_cast<std::size_t>(f) + 1 < spec.cell_count()) ++f;
      const Cell& cl = spec.cell(f);
      const Column& col = spec.column(cl.col);
      x += sx * cl.c;
      sx *= cl.a;
      y += sy * col.d;
      sy *= col.b;
    }
    out.pts[idx] = {x, y};
  }
  return out;
}

// ---------------------------------------------------------------------------
// Generalized Lloyd.

struct Codebook {
  std::vector<Point> centers;
  double r = 2;
  double error_r = 0;  // (1/N) sum min_c |x - c|^r
  std::string method;
  std::vector<double> error_history;
};

namespace detail {

inline double dist2(const Point& u, const Point& v) {
  const double dx = u[0] - v[0], dy = u[1] - v[1];
  return dx * dx + dy * dy;
}

inline double pow_r(double d2, double r) {
  if (r == 2.0) return d2;
  return std::pow(d2, 0.5 * r);
}

// argmin_c sum |x - c|^r over one cell: the mean for r = 2, otherwise damped
// iteratively-reweighted least squares (damping 0.5, step < 1e-10, <= 200 its).
inline Point cell_center(std::span<const Point> pts, std::span<const std::uint32_t> idx,
                         Point start, double r) {
  if (idx.empty()) return start;
  if (r == 2.0) {
    double sx = 0, sy = 0;
    for (auto i : idx) {
      sx += pts[i][0];
      sy += pts[i][1];
    }
    return {sx / static_cast<double>(idx.size()), sy / static_cast<double>(idx.size())};
  }
  Point c = start;
  for (int it = 0; it < 200; ++it) {
    double wsum = 0, sx = 0, sy = 0;
    for (auto i : idx) {
      const double d = std::max(std::sqrt(dist2(pts[i], c)), 1e-15);
      const double w = std::pow(d, r - 2.0);
      wsum += w;
      sx += w * pts[i][0];
      sy += w * pts[i][1];
    }
    const Point target{sx / wsum, sy / wsum};
    const Point next{c[0] + 0.5 * (target[0] - c[0]), c[1] + 0.5 * (target[1] - c[1])};
    const double step = std::hypot(next[0] - c[0], next[1] - c[1]);
    c = next;
    if (step < 1e-10) break;
  }
  return c;
}

}  // namespace detail

inline double eval_error(std::span<const Point> centers, std::span<const Point> pts, double r) {
  if (centers.empty()) throw PreconditionError("empty codebook");
  double total = 0;
  for (const auto& p : pts) {
    double best = detail::dist2(p, centers[0]);
    for (std::size_t c = 1; c < centers.size(); ++c)
      best = std::min(best, detail::dist2(p, centers[c]));
    total += detail::pow_r(best, r);
  }
  return total / static_cast<double>(pts.size());
}

inline Codebook lloyd(const SampleSet& sample_set, std::size_t n, double r, int restarts,
                      std::uint64_t seed) {
  const auto& pts = sample_set.pts;
  if (n < 1) throw PreconditionError("need n >= 1");
  if (n > pts.size()) throw PreconditionError("codebook larger than the sample");
  if (!(r > 0)) throw PreconditionError("need r > 0");
  if (restarts < 1) restarts = 1;

  Codebook best;
  best.r = r;
  best.method = "lloyd";
  best.error_r = std::numeric_limits<double>::infinity();

  std::vector<std::uint32_t> assign(pts.size());
  std::vector<double> mind(pts.size());

  for (int rs = 0; rs < restarts; ++rs) {
    CounterRng rng(seed, 0x4c6c6f79640000ULL + static_cast<std::uint64_t>(rs));
    std::vector<Point> centers;
    centers.reserve(n);
    // k-means++-style seeding with d^r weights
    centers.push_back(pts[rng.next_below(pts.size())]);
    for (auto& m : mind) m = std::numeric_limits<double>::infinity();
    while (centers.size() < n) {
      double total = 0;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        mind[i] = std::min(mind[i], detail::dist2(pts[i], centers.back()));
        total += detail::pow_r(mind[i], r);
      }
      if (total <= 0) {
        centers.push_back(pts[rng.next_below(pts.size())]);
        continue;
      }
      const double u = rng.next_double() * total;
      double acc = 0;
      std::size_t pick = pts.size() - 1;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        acc += detail::pow_r(mind[i], r);
        if (acc >= u) {
          pick = i;
          break;
        }
      }
      centers.push_back(pts[pick]);
    }

    std::vector<double> history;
    double prev_err = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 200; ++it) {
      // assignment (ties to the lowest center index)
      double err = 0;
      std::vector<double> cell_err(centers.size(), 0.0);
      for (std::size_t i = 0; i < pts.size(); ++i) {
        double bd = detail::dist2(pts[i], centers[0]);
        std::uint32_t bc = 0;
        for (std::uint32_t c = 1; c < centers.size(); ++c) {
          const double d = detail::dist2(pts[i], centers[c]);
          if (d < bd) {
            bd = d;
            bc = c;
          }
        }
        assign[i] = bc;
        const double e = detail::pow_r(bd, r);
        err += e;
        cell_err[bc] += e;
      }
      err /= static_cast<double>(pts.size());
      history.push_back(err);

      // empty-cell repair: move the center onto the farthest point of the
      // highest-error cell
      std::vector<std::vector<std::uint32_t>> buckets(centers.size());
      for (std::size_t i = 0; i < pts.size(); ++i) buckets[assign[i]].push_back(i);
      bool repaired = false;
      for (std::uint32_t c = 0; c < centers.size(); ++c) {
        if (!buckets[c].empty()) continue;
        std::uint32_t donor = 0;
        for (std::uint32_t d = 1; d < centers.size(); ++d)
          if (cell_err[d] > cell_err[donor]) donor = d;
        if (buckets[donor].empty()) continue;
        std::uint32_t far = buckets[donor][0];
        double fard = 0;
        for (auto i : buckets[donor]) {
          const double d = detail::dist2(pts[i], centers[donor]);
          if (d > fard) {
            fard = d;
            far = i;
          }
        }
        centers[c] = pts[far];
        repaired = true;
      }
      if (repaired) continue;

      for (std::uint32_t c = 0; c < centers.size(); ++c)
        centers[c] = detail::cell_center(pts, buckets[c], centers[c], r);

      if (prev_err - err < 1e-10 * std::max(err, 1e-300) && it > 0) break;
      prev_err = err;
    }

    const double final_err = eval_error(centers, pts, r);
    history.push_back(final_err);
    if (final_err < best.error_r) {
      best.centers = centers;
      best.error_r = final_err;
      best.error_history = std::move(history);
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Anti-chain codebook: centers of the Lambda_{n,r} approximate squares.

struct AntichainCodebook {
  Codebook cb;
  double analytic_bound = 0;  // sum mu(F) diam(F)^r
  double log_sum_e = 0;       // log sum E_r over the family
  std::uint64_t size = 0;
};

inline AntichainCodebook antichain_codebook(const CarpetSpec& spec, int n, double r,
                                            const Budget& budget = {}) {
  AntichainCodebook out;
  AntiChain fam = build_lambda(spec, n, r, budget);
  out.size = fam.words.size();
  out.cb.r = r;
  out.cb.method = "antichain";
  LogSumExp bound;
  for (const auto& w : fam.words) {
    Rect rc = rectangle(spec, w);
    out.cb.centers.push_back({0.5 * (rc.x_lo + rc.x_hi), 0.5 * (rc.y_lo + rc.y_hi)});
    bound.add(w.log_mu + r * std::log(rc.diam()));
  }
  out.analytic_bound = std::exp(bound.value());
  out.log_sum_e = sum_e_t(spec, fam, 1.0);
  return out;
}

// ---------------------------------------------------------------------------
// Convergence-order scan.

struct ScanRow {
  int n;
  double error_r;
  double scaled;  // n^{r/s_r} * error_r
};

struct ScanResult {
  std::vector<ScanRow> rows;
  double slope = 0;      // least-squares slope of log error_r vs log n
  double band_min = 0;   // min/max of the scaled column
  double band_max = 0;
  double s_r = 0;
  double r = 0;
  std::size_t sample_size = 0;
  std::uint64_t seed = 0;
};

inline ScanResult coefficient_scan(const CarpetSpec& spec, double r,
                                   const std::vector<int>& n_grid, std::size_t sample_size,
                                   std::uint64_t seed, double s_r, int restarts = 2) {
  if (n_grid.empty()) throw PreconditionError("empty n grid");
  ScanResult out;
  out.r = r;
  out.s_r = s_r;
  out.sample_size = sample_size;
  out.seed = seed;
  SampleSet s = sample(spec, sample_size, 1e-9, seed);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  out.band_min = std::numeric_limits<double>::infinity();
  out.band_max = 0;
  for (int n : n_grid) {
    Codebook cb = lloyd(s, static_cast<std::size_t>(n), r, restarts, seed + n);
    ScanRow row;
    row.n = n;
    row.error_r = cb.error_r;
    row.scaled = std::pow(static_cast<double>(n), r / s_r) * cb.error_r;
    out.rows.push_back(row);
    const double lx = std::log(static_cast<double>(n)), ly = std::log(cb.error_r);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    out.band_min = std::min(out.band_min, row.scaled);
    out.band_max = std::max(out.band_max, row.scaled);
  }
  const double k = static_cast<double>(n_grid.size());
  out.slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  return out;
}

}  // namespace carpetq
