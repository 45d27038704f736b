#include "carpetq/pressure.hpp"

#include "fixtures.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <chrono>

using namespace carpetq;

TEST_CASE("upsilon at (1, 0) is the total mass") {
  for (auto spec : {fixtures::bm_4_2(), fixtures::mixed(), fixtures::two_bar(),
                    fixtures::quarter()}) {
    for (int l = 1; l <= 4; ++l)
      CHECK(upsilon_naive(spec, l, 1.0, 0.0) == Catch::Approx(0.0).margin(1e-9));
  }
  CarpetSpec ex = fixtures::thirds();
  for (int l = 1; l <= 3; ++l)
    CHECK(upsilon_naive(ex, l, 1.0, 0.0) == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("I_{1,r}(0) counts Phi_1 on the thirds fixture") {
  CarpetSpec spec = fixtures::thirds();
  CHECK(partition_sum_naive(spec, 1, 0.0, 2.0) == Catch::Approx(std::log(81.0)).epsilon(1e-12));
  CHECK(partition_sum_fast(spec, 1, 0.0, 2.0) == Catch::Approx(std::log(81.0)).epsilon(1e-12));
}

TEST_CASE("partition sums decrease strictly in t and in s") {
  CarpetSpec spec = fixtures::mixed();
  for (int l : {1, 3}) {
    double prev = partition_sum_naive(spec, l, 0.0, 2.0);
    for (double t : {0.25, 0.5, 0.75, 1.0}) {
      const double cur = partition_sum_naive(spec, l, t, 2.0);
      CHECK(cur < prev);
      prev = cur;
    }
    CHECK(upsilon_naive(spec, l, 0.7, 1.2) < upsilon_naive(spec, l, 0.7, 1.1));
  }
}

TEST_CASE("fast DP matches the naive enumeration") {
  struct Case {
    CarpetSpec spec;
    int lmax;
  };
  std::vector<Case> cases;
  cases.push_back({fixtures::thirds(), 4});
  cases.push_back({fixtures::thirds_thin_top(), 4});
  cases.push_back({fixtures::bm_4_2(), 6});
  cases.push_back({fixtures::mixed(), 6});
  cases.push_back({fixtures::two_bar(), 8});
  cases.push_back({fixtures::gappy(), 5});
  for (const auto& [spec, lmax] : cases) {
    for (int l = 1; l <= lmax; ++l)
      for (double t : {0.0, 0.37, 1.0})
        for (double r : {1.0, 2.0}) {
          const double fast = partition_sum_fast(spec, l, t, r);
          const double naive = partition_sum_naive(spec, l, t, r);
          CHECK(fast == Catch::Approx(naive).margin(1e-10));
        }
    for (int l = 1; l <= std::min(lmax, 4); ++l)
      for (double s : {0.5, 1.3})
        CHECK(upsilon_fast(spec, l, 0.4, s) ==
              Catch::Approx(upsilon_naive(spec, l, 0.4, s)).margin(1e-10));
  }
}

TEST_CASE("fast DP handles level 40 quickly") {
  CarpetSpec spec = fixtures::thirds();
  const auto start = std::chrono::steady_clock::now();
  const double v = partition_sum_fast(spec, 40, 0.4, 2.0);
  const auto elapsed = std::chrono::steady_clock::now() - start;
  CHECK(std::isfinite(v));
  CHECK(std::chrono::duration_cast<std::chrono::seconds>(elapsed).count() < 10);
}

TEST_CASE("descendant sums: seeded DP against enumeration") {
  CarpetSpec spec = fixtures::bm_4_2();
  auto psi = enumerate_psi(spec, 2);
  for (std::size_t idx : {std::size_t(0), psi.size() / 2, psi.size() - 1}) {
    const SplitWord& sigma = psi[idx];
    for (int h = 1; h <= 3; ++h)
      for (double t : {0.0, 0.39, 1.0}) {
        LogSumExp acc;
        descendants_cb(spec, sigma, h, Budget{}, [&](const SplitWord& rho) {
          acc.add(t * log_e_r(spec, rho, 2.0));
        });
        CHECK(descendant_sum_fast(spec, sigma, h, t, 2.0) ==
              Catch::Approx(acc.value()).margin(1e-10));
      }
  }
}

TEST_CASE("descendant bound constants hold past the A7 threshold") {
  CarpetSpec spec = fixtures::thirds();
  DerivedConstants d = derived_constants(spec, 2.0);
  const double t_r = closed_form_t_r(spec, 2.0);
  const int h = static_cast<int>(d.A7) + 1;
  const double log_Ih_tr = partition_sum_fast(spec, h, t_r, 2.0);
  const double log_Ih_1 = partition_sum_fast(spec, h, 1.0, 2.0);

  CounterRng rng(20240817);
  for (int it = 0; it < 50; ++it) {
    SplitWord sigma = random_psi_word(spec, rng, 1 + it % 3);
    for (double t : {t_r, 1.0}) {
      const double log_Ih = t == 1.0 ? log_Ih_1 : log_Ih_tr;
      double sum_q_t = 0;
      for (const auto& col : spec.columns()) sum_q_t += std::pow(col.q, t);
      const double lo = std::min(1.0, 1.0 / sum_q_t);
      const double hi = std::pow(spec.q_min, -t);
      const double ratio = std::exp(descendant_sum_fast(spec, sigma, h, t, 2.0) -
                                    t * log_e_r(spec, sigma, 2.0) - log_Ih);
      CHECK(ratio >= lo * (1 - 1e-9));
      CHECK(ratio <= hi * (1 + 1e-9));
    }
  }
}

TEST_CASE("submultiplicativity band of the partition sums") {
  CarpetSpec spec = fixtures::bm_4_2();
  const double t_r = closed_form_t_r(spec, 2.0);
  for (double t : {0.0, t_r, 1.0}) {
    double lo = 1e300, hi = -1e300;
    for (int k = 1; k <= 5; ++k)
      for (int p = 1; p <= 5; ++p) {
        const double g = partition_sum_fast(spec, k + p, t, 2.0) -
                         partition_sum_fast(spec, k, t, 2.0) -
                         partition_sum_fast(spec, p, t, 2.0);
        lo = std::min(lo, g);
        hi = std::max(hi, g);
      }
    CHECK(hi - lo <= std::log(100.0));
  }
}

TEST_CASE("boundedness of I_l at the root") {
  CarpetSpec spec = fixtures::bm_4_2();
  const double t_r = closed_form_t_r(spec, 2.0);
  double lo = 1e300, hi = -1e300;
  for (int l = 1; l <= 12; ++l) {
    const double v = partition_sum_fast(spec, l, t_r, 2.0);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(hi - lo <= std::log(100.0));
}

TEST_CASE("solve_t_r: bracketing, stabilization, closed-form agreement") {
  CarpetSpec spec = fixtures::deep_quarter();
  for (double r : {1.0, 2.0, 3.0}) {
    PressureCurve curve = solve_t_r(spec, r, 12);
    CHECK(curve.root > 0);
    CHECK(curve.root < 1);
    REQUIRE(curve.samples.size() == 12);
    const double d_last = std::abs(curve.samples[11].t_hat - curve.samples[10].t_hat);
    const double d_first = std::abs(curve.samples[1].t_hat - curve.samples[0].t_hat);
    CHECK(d_last < d_first + 1e-15);

    // exact values: t_r = 1/(1+r), s_r = 1
    CHECK(std::abs(curve.root - 1.0 / (1.0 + r)) < 0.02);
    const double s_hat = s_from_t(curve.root, r);
    const double s_closed = closed_form_s_r(spec, r);
    CHECK(s_closed == Catch::Approx(1.0).margin(1e-10));
    CHECK(std::abs(s_hat - s_closed) <= 0.02 * s_closed);
  }
}

TEST_CASE("partition root covers the closed form within the reported band") {
  // The band must be an honest uncertainty even on fixtures with a slowly
  // drifting level-root sequence.
  for (auto spec : {fixtures::bm_4_2(), fixtures::thirds(), fixtures::deep_quarter()}) {
    for (double r : {1.0, 2.0}) {
      PressureCurve curve = solve_t_r(spec, r, 12);
      const double t_star = closed_form_t_r(spec, r);
      CHECK(std::abs(curve.root - t_star) <= curve.band);
      const double s_closed = closed_form_s_r(spec, r);
      const double s_lo = s_from_t(curve.root - curve.band, r);
      const double s_hi = s_from_t(curve.root + curve.band, r);
      CHECK(s_closed >= s_lo - 1e-12);
      CHECK(s_closed <= s_hi + 1e-12);
      if (spec.bm()) {
        const double d_r = bm_closed_form_d_r(spec, r);
        CHECK(d_r >= s_lo - 1e-12);
        CHECK(d_r <= s_hi + 1e-12);
      }
    }
  }
}

TEST_CASE("closed forms: tau_y, beta, and the spectrum endpoints") {
  for (auto spec : {fixtures::thirds(), fixtures::bm_4_2(), fixtures::mixed()}) {
    CHECK(tau_y(spec, 1.0) == Catch::Approx(0.0).margin(1e-12));
    CHECK(closed_form_beta(spec, 1.0) == Catch::Approx(0.0).margin(1e-12));
  }
  // two_bar / quarter have tau(q) proportional to 1 - q
  CarpetSpec tb = fixtures::two_bar();
  const double gamma = std::log(2.0) / std::log(2.5);
  for (double q : {0.0, 0.5, 2.0})
    CHECK(closed_form_beta(tb, q) == Catch::Approx(gamma * (1 - q)).margin(1e-11));
  CarpetSpec qt = fixtures::quarter();
  for (double q : {0.0, 0.5, 2.0})
    CHECK(closed_form_beta(qt, q) == Catch::Approx(1 - q).margin(1e-11));

  // box-counting value at q = 0 on the BM(4,2) three-cell fixture
  CarpetSpec bm = fixtures::bm_4_2();
  CHECK(closed_form_beta(bm, 0.0) ==
        Catch::Approx(1.0 + std::log(1.5) / std::log(4.0)).margin(1e-10));
}

TEST_CASE("bm closed form agrees with the Feng-Wang route") {
  for (auto spec : {fixtures::bm_4_2(), fixtures::bm_32_2()}) {
    for (double r : {1.0, 2.0, 3.0}) {
      const double via_bm = bm_closed_form_d_r(spec, r);
      const double via_fw = closed_form_s_r(spec, r);
      CHECK(std::abs(via_bm - via_fw) <= 1e-10);
      const double theta = via_bm / (via_bm + r);
      CHECK(theta > 0);
      CHECK(theta < 1);
    }
  }
  CHECK_THROWS_AS(bm_closed_form_d_r(fixtures::two_bar(), 2.0), ValidationError);
}

TEST_CASE("two_bar has r-independent dimension log2/log(5/2)") {
  CarpetSpec spec = fixtures::two_bar();
  const double gamma = std::log(2.0) / std::log(2.5);
  for (double r : {0.5, 1.0, 2.0, 5.0})
    CHECK(closed_form_s_r(spec, r) == Catch::Approx(gamma).margin(1e-11));
}

TEST_CASE("error paths: state explosion guard and aux budget") {
  CarpetSpec spec = fixtures::thirds_thin_top();
  FastOptions tight;
  tight.max_states = 2;
  CHECK_THROWS_AS(partition_sum_fast(spec, 6, 0.4, 2.0, tight), NumericError);

  const double t_r = closed_form_t_r(spec, 2.0);
  AuxMeasure aux = aux_measure(spec, 2.0, 4, t_r);
  CHECK_THROWS_AS(aux_atoms(spec, aux, Budget{10}), BudgetExceeded);
  SplitWord too_deep;
  too_deep.x.assign(4, CellId{0});
  CHECK_THROWS_AS(aux_mass(spec, aux, too_deep), PreconditionError);
}

TEST_CASE("closed forms on the unequal-height fixture") {
  CarpetSpec spec = fixtures::gappy();
  CHECK(tau_y(spec, 1.0) == Catch::Approx(0.0).margin(1e-12));
  CHECK(closed_form_beta(spec, 1.0) == Catch::Approx(0.0).margin(1e-12));
  for (double r : {1.0, 2.0}) {
    PressureCurve curve = solve_t_r(spec, r, 12);
    const double t_star = closed_form_t_r(spec, r);
    CHECK(std::abs(curve.root - t_star) <= curve.band);
  }
}

TEST_CASE("auxiliary measures") {
  CarpetSpec spec = fixtures::thirds();
  const double r = 2.0;
  const double t_r = closed_form_t_r(spec, r);

  SECTION("atoms normalize at small k") {
    AuxMeasure aux = aux_measure(spec, r, 3, t_r);
    double mass = 0;
    for (const auto& [w, m] : aux_atoms(spec, aux)) mass += m;
    CHECK(mass == Catch::Approx(1.0).margin(1e-9));
  }

  SECTION("cylinder masses are additive across Phi_1") {
    AuxMeasure aux = aux_measure(spec, r, 6, t_r);
    double mass = 0;
    for (const auto& w : enumerate_psi(spec, 1)) mass += aux_mass(spec, aux, w);
    CHECK(mass == Catch::Approx(1.0).margin(1e-9));
  }

  SECTION("lambda_k([sigma]) stays comparable to E_r(sigma)^{t_r} in k") {
    auto phi2 = enumerate_psi(spec, 2);
    const SplitWord& sigma = phi2[phi2.size() / 3];
    double lo = 1e300, hi = -1e300;
    for (int k = 6; k <= 10; ++k) {
      AuxMeasure aux = aux_measure(spec, r, k, t_r);
      const double ratio =
          std::log(aux_mass(spec, aux, sigma)) - t_r * log_e_r(spec, sigma, r);
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    CHECK(hi - lo <= std::log(10.0));
  }
}
