#include "carpetq/carpet.hpp"
#include "carpetq/spec_io.hpp"

#include "fixtures.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace carpetq;

namespace {

CarpetError code_of(const RawCarpet& raw) {
  try {
    CarpetSpec::validate(raw);
  } catch (const ValidationError& e) {
    return e.code();
  }
  FAIL("expected validation to fail");
  return CarpetError::TooFewColumns;
}

}  // namespace

TEST_CASE("thirds fixture validates") {
  CarpetSpec spec = fixtures::thirds();
  REQUIRE(spec.column_count() == 3);
  REQUIRE(spec.cell_count() == 5);
  REQUIRE(spec.exact());
  CHECK(spec.a_min == Catch::Approx(1.0 / 27).epsilon(1e-15));
  CHECK(spec.a_max == Catch::Approx(1.0 / 9).epsilon(1e-15));
  CHECK(spec.b_min == Catch::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(spec.b_max == Catch::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(spec.q_min == Catch::Approx(0.2));
  CHECK(spec.q_max == Catch::Approx(0.4));
}

TEST_CASE("strictness and sum boundaries flip acceptance with distinct codes") {
  SECTION("a_11 = b_1 violates (A3) strictly") {
    RawCarpet raw = fixtures::thirds_raw();
    raw.columns[0].cells[0] = fixtures::cellr("1/3", "0", "1/5");
    CHECK(code_of(raw) == CarpetError::A3);
  }
  SECTION("column heights summing above 1 violate (A1)") {
    RawCarpet raw = fixtures::thirds_raw();
    raw.columns[0] = fixtures::colr("4/5", "0", raw.columns[0].cells);
    // keep column order plausible: d_2 = 1/3 < b_1 + d_1 now, so fix offsets
    raw.columns[0].cells[0] = fixtures::cellr("1/9", "0", "1/5");
    CHECK(code_of(raw) == CarpetError::A1);
  }
  SECTION("vertical overlap violates (A2)") {
    RawCarpet raw = fixtures::thirds_raw();
    raw.columns[1] = fixtures::colr("1/3", "1/4", raw.columns[1].cells);
    CHECK(code_of(raw) == CarpetError::A2);
  }
  SECTION("horizontal overlap violates (A4)") {
    RawCarpet raw = fixtures::thirds_raw();
    raw.columns[1].cells[1] = fixtures::cellr("1/9", "1/10", "1/5");  // c_22 < a_12 + c_12
    CHECK(code_of(raw) == CarpetError::A4);
  }
  SECTION("last cell leaving the unit square violates (A3)") {
    RawCarpet raw = fixtures::thirds_raw();
    raw.columns[0].cells[1] = fixtures::cellr("2/27", "26/27", "1/5");
    CHECK(code_of(raw) == CarpetError::A3);
  }
  SECTION("non-positive probability") {
    RawCarpet raw = fixtures::thirds_raw();
    raw.columns[0].cells[0].p = 0;
    raw.columns[0].cells[0].p_ex = Rational(0);
    CHECK(code_of(raw) == CarpetError::NonPositiveProbability);
  }
  SECTION("probability sum far from 1") {
    RawCarpet raw = fixtures::thirds_raw("1/4");
    CHECK(code_of(raw) == CarpetError::ProbabilitySum);
  }
  SECTION("m = 1 rejected") {
    RawCarpet raw;
    raw.columns.push_back(fixtures::colr("1/2", "0", {fixtures::cellr("1/4", "0", "1")}));
    CHECK(code_of(raw) == CarpetError::TooFewColumns);
  }
  SECTION("equalities on the non-strict side are accepted") {
    // The thirds fixture already contains a_12 + c_12 = c_22 and a_21 + c_21 = 1.
    CHECK_NOTHROW(fixtures::thirds());
  }
}

TEST_CASE("probabilities within tolerance are renormalized exactly") {
  RawCarpet raw = fixtures::thirds_raw();
  for (auto& col : raw.columns)
    for (auto& cl : col.cells) {
      cl.p = 0.2 * (1 + 2e-10);
      cl.p_ex = Rational(1, 5) * (Rational(1) + Rational(2, 10000000000LL));
    }
  CarpetSpec spec = CarpetSpec::validate(raw);
  Rational sum = 0;
  for (const auto& cl : spec.cells()) sum += cl.p_ex;
  CHECK(sum == Rational(1));
}

TEST_CASE("derived constants on the thirds fixture") {
  CarpetSpec spec = fixtures::thirds();
  DerivedConstants d = derived_constants(spec, 2.0);
  CHECK(d.A1 == 4);
  CHECK(d.A2 == 1);
  CHECK(d.A3 == Catch::Approx(1.0 / 3).epsilon(1e-14));
  CHECK(d.A4 == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(d.A6 == 1);
  CHECK(d.A7 == 3);
  CHECK(d.N == 5);

  // eta_low = p q^4 a^r with the uniform weights
  const double eta_low = 0.2 * std::pow(0.2, 4) * std::pow(1.0 / 27, 2);
  CHECK(d.eta_low == Catch::Approx(eta_low).epsilon(1e-12));
  CHECK(d.eta_low < d.eta_high);
  CHECK(d.eta_low > 0);

  DerivedConstants d3 = derived_constants(spec, 3.0);
  CHECK(d3.eta_low < d.eta_low);
  CHECK(d3.eta_high < d.eta_high);

  Rational el = eta_low_exact(spec, 2, d.A1);
  CHECK(to_double(el) == Catch::Approx(d.eta_low).epsilon(1e-12));
}

TEST_CASE("bedford_mcmullen builds a valid two-column spec") {
  CarpetSpec spec = fixtures::bm_4_2();
  REQUIRE(spec.column_count() == 2);
  REQUIRE(spec.cell_count() == 3);
  CHECK(spec.bm().has_value());
  CHECK(spec.bm()->n0 == 4);
  CHECK(spec.column(0).ncells == 2);
  CHECK(spec.column(1).ncells == 1);
  CHECK(spec.cell(1).c == Catch::Approx(0.25));
  CHECK(spec.column(1).d == Catch::Approx(0.5));

  CHECK_THROWS_AS(bedford_mcmullen(2, 2, {{0, 0}, {0, 1}}), ValidationError);
  CHECK_THROWS_AS(bedford_mcmullen(4, 2, {}), ValidationError);
  CHECK_THROWS_AS(bedford_mcmullen(4, 2, {{0, 0}, {0, 0}, {0, 1}}), ValidationError);
  // one occupied row only -> m = 1 after restriction
  CHECK_THROWS_AS(bedford_mcmullen(4, 2, {{0, 0}, {1, 0}}), ValidationError);
}

TEST_CASE("moments solve the affine fixed-point equations") {
  CarpetSpec spec = fixtures::quarter();
  Moments mo = moments(spec);
  CHECK(mo.mean_x == Catch::Approx(0.0).margin(1e-14));
  CHECK(mo.mean_y == Catch::Approx(0.5).epsilon(1e-14));
  // covariance PSD
  CHECK(mo.cov_xx >= 0);
  CHECK(mo.cov_yy >= 0);
  CHECK(mo.cov_xx * mo.cov_yy - mo.cov_xy * mo.cov_xy >= -1e-18);

  // x-symmetric spec: two cells mirrored around 1/2
  RawCarpet raw;
  raw.columns.push_back(fixtures::colr(
      "1/2", "0", {fixtures::cellr("1/4", "0", "1/4"), fixtures::cellr("1/4", "3/4", "1/4")}));
  raw.columns.push_back(fixtures::colr(
      "1/2", "1/2", {fixtures::cellr("1/4", "0", "1/4"), fixtures::cellr("1/4", "3/4", "1/4")}));
  Moments ms = moments(CarpetSpec::validate(raw));
  CHECK(ms.mean_x == Catch::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("spec json round trip and shorthand") {
  auto doc = nlohmann::json{
      {"columns",
       {{{"b", "1/3"}, {"d", "0"}, {"cells", {{{"a", "1/9"}, {"c", "0"}, {"p", "1/2"}}}}},
        {{"b", "1/3"}, {"d", "1/3"}, {"cells", {{{"a", "1/9"}, {"c", "0"}, {"p", "1/2"}}}}}}}};
  CarpetSpec spec = spec_from_json(doc);
  CHECK(spec.exact());
  CHECK(spec.column_count() == 2);

  auto bm = nlohmann::json{{"n0", 4}, {"m0", 2}, {"cells", {{0, 0}, {1, 0}, {0, 1}}}};
  CarpetSpec spec2 = spec_from_json(bm);
  CHECK(spec2.bm().has_value());

  auto echo = spec_to_json(spec2);
  CarpetSpec spec3 = spec_from_json(echo);
  CHECK(spec3.cell_count() == spec2.cell_count());
}
