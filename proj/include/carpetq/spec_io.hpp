// Carpet spec files: JSON with optional "p/q" strings for exact-rational
// inputs, plus the Bedford-McMullen shorthand {"n0":..,"m0":..,"cells":[[i,j],..]}.
#pragma once

#include "carpetq/carpet.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <string>

namespace carpetq {

namespace detail {

inline void read_value(const nlohmann::json& v, double& out, std::optional<Rational>& out_ex) {
  if (v.is_string()) {
    auto r = parse_rational(v.get<std::string>());
    if (!r) throw ValidationError(CarpetError::BadCellRange, "unparsable rational: " + v.get<std::string>());
    out_ex = *r;
    out = to_double(*r);
  } else {
    out = v.get<double>();
    out_ex.reset();
  }
}

}  // namespace detail

inline RawCarpet raw_from_json(const nlohmann::json& doc) {
  RawCarpet raw;
  for (const auto& jc : doc.at("columns")) {
    RawColumn col;
    detail::read_value(jc.at("b"), col.b, col.b_ex);
    detail::read_value(jc.at("d"), col.d, col.d_ex);
    for (const auto& jcell : jc.at("cells")) {
      RawCell cl;
      detail::read_value(jcell.at("a"), cl.a, cl.a_ex);
      detail::read_value(jcell.at("c"), cl.c, cl.c_ex);
      detail::read_value(jcell.at("p"), cl.p, cl.p_ex);
      col.cells.push_back(std::move(cl));
    }
    raw.columns.push_back(std::move(col));
  }
  return raw;
}

inline CarpetSpec spec_from_json(const nlohmann::json& doc) {
  if (doc.contains("columns")) return CarpetSpec::validate(raw_from_json(doc));
  if (doc.contains("n0")) {
    std::vector<std::pair<int, int>> cells;
    for (const auto& c : doc.at("cells")) cells.emplace_back(c.at(0).get<int>(), c.at(1).get<int>());
    std::vector<double> probs;
    if (doc.contains("p"))
      for (const auto& p : doc.at("p")) probs.push_back(p.get<double>());
    return bedford_mcmullen(doc.at("n0").get<int>(), doc.at("m0").get<int>(), std::move(cells),
                            std::move(probs));
  }
  throw ValidationError(CarpetError::BadCellRange, "spec JSON needs \"columns\" or \"n0\"");
}

inline CarpetSpec load_spec_file(const std::string& path, std::uint64_t* hash_out = nullptr) {
  std::ifstream in(path);
  if (!in) throw ValidationError(CarpetError::BadCellRange, "cannot open spec file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  auto doc = nlohmann::json::parse(ss.str());
  if (hash_out) *hash_out = fnv1a(doc.dump());
  return spec_from_json(doc);
}

inline nlohmann::json derived_to_json(const DerivedConstants& d) {
  return nlohmann::json{
      {"r", d.r},         {"a_min", d.a_min},     {"a_max", d.a_max},
      {"b_min", d.b_min}, {"b_max", d.b_max},     {"p_min", d.p_min},
      {"p_max", d.p_max}, {"q_min", d.q_min},     {"q_max", d.q_max},
      {"A1", d.A1},       {"A2", d.A2},           {"A3", d.A3},
      {"A4", d.A4},       {"A5", d.A5},           {"A6", d.A6},
      {"A7", d.A7},       {"M", d.M},             {"T1", d.T1},
      {"T2", d.T2},       {"eta_low", d.eta_low}, {"eta_high", d.eta_high},
      {"N", d.N},         {"m", d.m},
  };
}

inline nlohmann::json spec_to_json(const CarpetSpec& spec) {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& col : spec.columns()) {
    nlohmann::json cells = nlohmann::json::array();
    for (std::uint16_t i = 0; i < col.ncells; ++i) {
      const auto& cl = spec.cell(static_cast<CellId>(col.cell0 + i));
      cells.push_back({{"a", cl.a}, {"c", cl.c}, {"p", cl.p}});
    }
    cols.push_back({{"b", col.b}, {"d", col.d}, {"cells", cells}});
  }
  return nlohmann::json{{"columns", cols}};
}

}  // namespace carpetq
