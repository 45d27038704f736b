// Partition sums over Psi_l / Phi_l, the pressure roots and every dimension
// and spectrum solver: s_r by three independent routes, tau(q), tau_y(q) and
// the finite-stage auxiliary measures lambda_k.
//
// The fast path is a dynamic program over (level, log-ratio) states: an
// x-word omega enters the sums only through its weight (p_omega a_omega^s)^..
// and the ratio rho(omega) = a_omega / b_{omega_y}, and the completion factor
//   zeta_t(rho) = sum_{tau in Omega(rho)} q_tau^t
// obeys zeta_t(rho) = sum_{b_j < rho} q_j^t + sum_{b_j >= rho} q_j^t zeta_t(rho / b_j).
#pragma once

#include "carpetq/words.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

namespace carpetq {

struct FastOptions {
  double delta = 1e-12;  // states whose log-ratios differ by less are merged
  std::size_t max_states = 2'000'000;
};

namespace detail {

class CompletionFactor {
 public:
  CompletionFactor(const CarpetSpec& spec, double t, double delta)
      : spec_(spec), t_(t), delta_(delta) {}

  // log zeta_t(rho) for log_rho <= 0; ratios past the threshold have the
  // single empty completion.
  double log_zeta(double log_rho) {
    if (log_gt(log_rho, 0.0)) return 0.0;
    const long long k = llround(log_rho / delta_);
    if (auto it = memo_.find(k); it != memo_.end()) return it->second;
    LogSumExp acc;
    for (ColId j = 0; j < spec_.column_count(); ++j) {
      const Column& col = spec_.column(j);
      if (log_gt(log_rho, col.log_b)) {
        acc.add(t_ * col.log_q);
      } else {
        acc.add(t_ * col.log_q + log_zeta(log_rho - col.log_b));
      }
    }
    const double v = acc.value();
    memo_.emplace(k, v);
    return v;
  }

 private:
  const CarpetSpec& spec_;
  double t_, delta_;
  std::map<long long, double> memo_;
};

// Runs the level DP: seed state (log_rho0, weight 0), l transitions by all
// cells with per-letter weight t log p + s log a, then the completion factor.
inline double fast_sum_seeded(const CarpetSpec& spec, int l, double t, double s, double log_rho0,
                              const FastOptions& opts) {
  if (l < 1) throw PreconditionError("need l >= 1");
  struct State {
    double log_rho;
    double log_w;
  };
  std::map<long long, State> states;
  states.emplace(llround(log_rho0 / opts.delta), State{log_rho0, 0.0});
  for (int step = 0; step < l; ++step) {
    std::map<long long, State> next;
    for (const auto& [key, st] : states) {
      for (CellId f = 0; f < spec.cell_count(); ++f) {
        const Cell& cl = spec.cell(f);
        const Column& col = spec.column(cl.col);
        const double lr = st.log_rho + cl.log_a - col.log_b;
        const double lw = st.log_w + t * cl.log_p + s * cl.log_a;
        const long long k = llround(lr / opts.delta);
        auto [it, inserted] = next.try_emplace(k, State{lr, lw});
        if (!inserted) it->second.log_w = log_add(it->second.log_w, lw);
      }
    }
    states.swap(next);
    if (states.size() > opts.max_states)
      throw NumericError("partition DP state explosion: " + std::to_string(states.size()) +
                         " states at level " + std::to_string(step + 1));
  }
  CompletionFactor zeta(spec, t, opts.delta);
  LogSumExp total;
  for (const auto& [key, st] : states) total.add(st.log_w + zeta.log_zeta(st.log_rho));
  return total.value();
}

}  // namespace detail

// log Upsilon_l(t, s) = log sum_{sigma in Phi_l} (p q)^t a^s, brute force.
inline double upsilon_naive(const CarpetSpec& spec, int l, double t, double s,
                            const Budget& budget = {}) {
  LogSumExp acc;
  enumerate_psi_cb(spec, l, budget,
                   [&](const SplitWord& w) { acc.add(t * w.log_mu + s * w.log_a); });
  return acc.value();
}

// log I_{l,r}(t); note I_{l,r}(t) = Upsilon_l(t, r t).
inline double partition_sum_naive(const CarpetSpec& spec, int l, double t, double r,
                                  const Budget& budget = {}) {
  return upsilon_naive(spec, l, t, r * t, budget);
}

inline double upsilon_fast(const CarpetSpec& spec, int l, double t, double s,
                           const FastOptions& opts = {}) {
  return detail::fast_sum_seeded(spec, l, t, s, 0.0, opts);
}

inline double partition_sum_fast(const CarpetSpec& spec, int l, double t, double r,
                                 const FastOptions& opts = {}) {
  return detail::fast_sum_seeded(spec, l, t, r * t, 0.0, opts);
}

// log sum_{rho in Lambda_h(sigma)} E_r(rho)^t without enumerating: the DP is
// seeded at sigma's ratio a_{sigma_L} / b_{sigma_y}.
inline double descendant_sum_fast(const CarpetSpec& spec, const SplitWord& w, int h, double t,
                                  double r, const FastOptions& opts = {}) {
  const double log_rho0 = w.log_a - w.log_by;
  return t * log_e_r(spec, w, r) + detail::fast_sum_seeded(spec, h, t, r * t, log_rho0, opts);
}

// ---------------------------------------------------------------------------
// Root finders. All bisections carry a verified sign change and stop at
// absolute width 1e-13.

namespace detail {

inline constexpr double kRootTol = 1e-13;

template <class F>
double bisect(F&& f, double lo, double hi, double flo, double fhi) {
  if (!(flo > 0 && fhi < 0))
    throw NumericError("bisection bracket without sign change");
  while (hi - lo > kRootTol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm > 0) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Expands [lo, hi] geometrically until f(lo) > 0 > f(hi) (f decreasing).
template <class F>
std::pair<double, double> expand_bracket(F&& f, double lo, double hi) {
  double flo = f(lo), fhi = f(hi);
  for (int it = 0; it < 200 && flo <= 0; ++it) {
    hi = lo;
    fhi = flo;
    lo = lo * 2 - 1;
    flo = f(lo);
  }
  for (int it = 0; it < 200 && fhi >= 0; ++it) {
    lo = hi;
    flo = fhi;
    hi = hi * 2 + 1;
    fhi = f(hi);
  }
  if (!(flo > 0 && fhi < 0)) throw NumericError("could not bracket root");
  return {lo, hi};
}

}  // namespace detail

struct LevelRoot {
  int level;
  double t_hat;
};

struct PressureCurve {
  double r = 0;
  std::vector<LevelRoot> samples;
  double root = 0;   // t_hat at the deepest level
  double band = 0;   // spread of the deeper half of the t_hat sequence
  std::pair<double, double> bracket{0, 0};
};

inline double s_from_t(double t, double r) { return r * t / (1.0 - t); }

// Level-l roots of I_{l,r}(t) = 1; the root of the deepest level estimates
// t_r = s_r / (s_r + r). I_l(0) = card(Phi_l) > 1 and I_l(1) <= a_max^{r l} < 1
// guarantee the sign change.
inline PressureCurve solve_t_r(const CarpetSpec& spec, double r, int l_max,
                               const FastOptions& opts = {}) {
  if (!(r > 0)) throw PreconditionError("need r > 0");
  PressureCurve out;
  out.r = r;
  for (int l = 1; l <= l_max; ++l) {
    auto f = [&](double t) { return partition_sum_fast(spec, l, t, r, opts); };
    const double f0 = f(0.0), f1 = f(1.0);
    if (!(f0 > 0 && f1 < 0)) throw NumericError("partition root not bracketed (invalid spec?)");
    out.samples.push_back({l, detail::bisect(f, 0.0, 1.0, f0, f1)});
  }
  out.root = out.samples.back().t_hat;
  // Observed oscillation of the deeper two thirds of the sequence; for a
  // monotone O(1/l) drift this covers the residual error with a 2x margin.
  for (std::size_t i = out.samples.size() / 3; i < out.samples.size(); ++i)
    out.band = std::max(out.band, std::abs(out.samples[i].t_hat - out.root));
  out.band = std::max(out.band, detail::kRootTol);
  out.bracket = {out.root - out.band, out.root + out.band};
  return out;
}

// L^q-spectrum of the y-projection: sum_j q_j^q b_j^x = 1.
inline double tau_y(const CarpetSpec& spec, double q) {
  auto f = [&](double x) {
    LogSumExp acc;
    for (const auto& col : spec.columns()) acc.add(q * col.log_q + x * col.log_b);
    return acc.value();
  };
  auto [lo, hi] = detail::expand_bracket(f, -4.0, 4.0);
  return detail::bisect(f, lo, hi, f(lo), f(hi));
}

// Feng-Wang closed form: sum_{(i,j)} p_ij^q a_ij^{beta - tau_y} b_j^{tau_y} = 1.
inline double closed_form_beta(const CarpetSpec& spec, double q) {
  const double ty = tau_y(spec, q);
  auto f = [&](double beta) {
    LogSumExp acc;
    for (const auto& cl : spec.cells()) {
      const Column& col = spec.column(cl.col);
      acc.add(q * cl.log_p + (beta - ty) * cl.log_a + ty * col.log_b);
    }
    return acc.value();
  };
  auto [lo, hi] = detail::expand_bracket(f, -4.0, 4.0);
  return detail::bisect(f, lo, hi, f(lo), f(hi));
}

// t* with beta(t*) = r t*; s_r = r t* / (1 - t*).
inline double closed_form_t_r(const CarpetSpec& spec, double r) {
  if (!(r > 0)) throw PreconditionError("need r > 0");
  auto g = [&](double t) { return closed_form_beta(spec, t) - r * t; };
  const double g0 = g(0.0), g1 = g(1.0);
  return detail::bisect(g, 0.0, 1.0, g0, g1);
}

inline double closed_form_s_r(const CarpetSpec& spec, double r) {
  return s_from_t(closed_form_t_r(spec, r), r);
}

// Bedford-McMullen closed form for d_r; xi is the real ratio log m0 / log n0
// (the floor reading would degenerate for m0 < n0 and contradicts the general
// closed form; see README).
inline double bm_closed_form_d_r(const CarpetSpec& spec, double r) {
  if (!spec.bm())
    throw ValidationError(CarpetError::NotBedfordMcMullen, "spec was not built as Bedford-McMullen");
  const double m0 = spec.bm()->m0, n0 = spec.bm()->n0;
  const double xi = std::log(m0) / std::log(n0);
  const double log_m0r = -r * std::log(m0);
  auto f = [&](double theta) {
    LogSumExp sg, sy;
    for (const auto& cl : spec.cells()) sg.add(theta * (cl.log_p + log_m0r));
    for (const auto& col : spec.columns()) sy.add(theta * (col.log_q + log_m0r));
    return xi * sg.value() + (1 - xi) * sy.value();
  };
  const double theta = detail::bisect(f, 0.0, 1.0, f(0.0), f(1.0));
  return r * theta / (1.0 - theta);
}

// ---------------------------------------------------------------------------
// Finite-stage auxiliary measures lambda_k on Phi_k: atom mass
// E_r(sigma)^{t_r} / I_{k,r}(t_r). Cylinder masses are evaluated through the
// seeded descendant DP, so k may exceed any enumeration budget.

struct AuxMeasure {
  double r = 0, t_r = 0;
  int k = 0;
  double log_I_k = 0;
};

inline AuxMeasure aux_measure(const CarpetSpec& spec, double r, int k, double t_r,
                              const FastOptions& opts = {}) {
  if (k < 1) throw PreconditionError("need k >= 1");
  AuxMeasure out;
  out.r = r;
  out.t_r = t_r;
  out.k = k;
  out.log_I_k = partition_sum_fast(spec, k, t_r, r, opts);
  return out;
}

// lambda_k([sigma]) for sigma in Phi_n, n < k.
inline double aux_mass(const CarpetSpec& spec, const AuxMeasure& aux, const SplitWord& w) {
  const int n = static_cast<int>(w.x.size());
  if (n >= aux.k) throw PreconditionError("need |sigma_L| < k");
  const double log_num = descendant_sum_fast(spec, w, aux.k - n, aux.t_r, aux.r);
  return std::exp(log_num - aux.log_I_k);
}

// Materialized atoms (small k only).
inline std::vector<std::pair<SplitWord, double>> aux_atoms(const CarpetSpec& spec,
                                                           const AuxMeasure& aux,
                                                           const Budget& budget = {}) {
  std::vector<std::pair<SplitWord, double>> out;
  enumerate_psi_cb(spec, aux.k, budget, [&](SplitWord w) {
    const double lm = aux.t_r * (w.log_mu + aux.r * w.log_a) - aux.log_I_k;
    out.emplace_back(std::move(w), std::exp(lm));
  });
  return out;
}

}  // namespace carpetq
