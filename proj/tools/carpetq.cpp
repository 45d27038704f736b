// carpetq: batch front-end for carpet validation, enumeration, dimension and
// spectrum solving, anti-chain construction and quantization experiments.
//
// Exit codes: 0 ok, 2 validation error, 3 budget exceeded, 4 numeric failure.
#include "carpetq/antichain.hpp"
#include "carpetq/pressure.hpp"
#include "carpetq/quantizer.hpp"
#include "carpetq/spec_io.hpp"
#include "carpetq/svg.hpp"
#include "carpetq/words.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

constexpr const char* kVersion = "0.1.0";

struct Common {
  std::string spec_path;
  std::uint64_t spec_hash = 0;
  std::optional<carpetq::CarpetSpec> spec;
  std::uint64_t budget = 5'000'000;
  int threads = 0;  // from CARPET_QUANT_THREADS; reserved for parallel builds
};

std::string header_line(const Common& c, const std::string& cmd, std::uint64_t seed = 0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "# carpetq %s cmd=%s spec=%016llx seed=%llu", kVersion,
                cmd.c_str(), static_cast<unsigned long long>(c.spec_hash),
                static_cast<unsigned long long>(seed));
  return buf;
}

std::string derived_comment(const carpetq::DerivedConstants& d) {
  char buf[320];
  std::snprintf(buf, sizeof buf,
                "# derived: N=%llu m=%zu A1=%ld A2=%ld A3=%.12g A4=%.12g A5=%ld A6=%ld A7=%ld "
                "M=%ld T1=%ld T2=%ld eta_low=%.12g eta_high=%.12g",
                static_cast<unsigned long long>(d.N), d.m, d.A1, d.A2, d.A3, d.A4, d.A5, d.A6,
                d.A7, d.M, d.T1, d.T2, d.eta_low, d.eta_high);
  return buf;
}

void write_out(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path);
  if (!out) throw carpetq::NumericError("cannot open output file: " + path);
  out << content;
}

std::vector<int> parse_ngrid(const std::string& s) {
  std::vector<int> out;
  if (s.find(':') != std::string::npos) {
    // lo:hi:x<factor> (geometric) or lo:hi:<step> (arithmetic)
    const auto c1 = s.find(':'), c2 = s.find(':', c1 + 1);
    if (c2 == std::string::npos) throw carpetq::PreconditionError("ngrid needs lo:hi:step");
    const int lo = std::stoi(s.substr(0, c1));
    const int hi = std::stoi(s.substr(c1 + 1, c2 - c1 - 1));
    const std::string step = s.substr(c2 + 1);
    if (!step.empty() && (step[0] == 'x' || step[0] == 'X')) {
      const int f = std::stoi(step.substr(1));
      if (f < 2) throw carpetq::PreconditionError("geometric step must be >= 2");
      for (long n = lo; n <= hi; n *= f) out.push_back(static_cast<int>(n));
    } else {
      const int st = std::stoi(step);
      if (st < 1) throw carpetq::PreconditionError("step must be >= 1");
      for (long n = lo; n <= hi; n += st) out.push_back(static_cast<int>(n));
    }
  } else {
    std::size_t pos = 0;
    while (pos < s.size()) {
      auto comma = s.find(',', pos);
      if (comma == std::string::npos) comma = s.size();
      out.push_back(std::stoi(s.substr(pos, comma - pos)));
      pos = comma + 1;
    }
  }
  if (out.empty()) throw carpetq::PreconditionError("empty n grid");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace carpetq;
  CLI::App app{"carpetq: self-affine carpet quantization toolkit"};
  app.require_subcommand(1);

  Common common;
  if (const char* env = std::getenv("CARPET_QUANT_THREADS")) {
    common.threads = std::max(1, std::atoi(env));
  }

  std::string out_path = "-";
  std::uint64_t seed = 1;
  double r = 2.0;

  auto add_spec_opt = [&](CLI::App* sub) {
    sub->add_option("--spec", common.spec_path, "carpet spec JSON file")->required();
    sub->add_option("--budget", common.budget, "enumeration budget (words)");
    sub->add_option("--out", out_path, "output file ('-' for stdout)");
  };

  // validate
  auto* sub_validate = app.add_subcommand("validate", "validate a spec and echo derived constants");
  add_spec_opt(sub_validate);
  sub_validate->add_option("--r", r, "power used for the r-dependent constants");

  // enumerate
  int level = 1;
  auto* sub_enum = app.add_subcommand("enumerate", "list Psi_l words");
  add_spec_opt(sub_enum);
  sub_enum->add_option("--level", level, "x-depth l")->required();

  // dimension
  std::string method = "closed";
  int lmax = 12;
  auto* sub_dim = app.add_subcommand("dimension", "solve for the quantization dimension s_r");
  add_spec_opt(sub_dim);
  sub_dim->add_option("--r", r, "power r")->required();
  sub_dim->add_option("--method", method, "partition|closed|bm");
  sub_dim->add_option("--lmax", lmax, "partition levels");

  // spectrum
  std::string q_grid = "0:2:0.5";
  auto* sub_spec = app.add_subcommand("spectrum", "tau(q) along a q grid");
  add_spec_opt(sub_spec);
  sub_spec->add_option("--q-grid", q_grid, "a:b:step");

  // antichain
  int n_stop = 2;
  std::string family = "lambda";
  bool do_check = false;
  bool no_enforce = false;
  auto* sub_anti = app.add_subcommand("antichain", "build stopping-set families");
  add_spec_opt(sub_anti);
  sub_anti->add_option("--n", n_stop, "stopping index")->required();
  sub_anti->add_option("--r", r, "power r")->required();
  sub_anti->add_option("--family", family, "lambda|gamma|bar|star");
  sub_anti->add_flag("--check", do_check, "run certification checks");
  sub_anti->add_flag("--no-enforce-thresholds", no_enforce,
                     "build bar/star below the admissibility thresholds (flags recorded)");

  // quantize
  std::string ngrid = "16:1024:x2";
  std::size_t samples = 200'000;
  int restarts = 2;
  std::string json_out;
  auto* sub_quant = app.add_subcommand("quantize", "empirical quantization error scan");
  add_spec_opt(sub_quant);
  sub_quant->add_option("--r", r, "power r")->required();
  sub_quant->add_option("--ngrid", ngrid, "codebook sizes, e.g. 16:1024:x2 or 16,64,256");
  sub_quant->add_option("--samples", samples, "sample size");
  sub_quant->add_option("--seed", seed, "RNG seed");
  sub_quant->add_option("--restarts", restarts, "Lloyd restarts");
  sub_quant->add_option("--json", json_out, "JSON summary path");

  // render
  std::string what = "squares";
  auto* sub_render = app.add_subcommand("render", "static SVG rendering");
  add_spec_opt(sub_render);
  sub_render->add_option("--what", what, "squares|antichain|codebook");
  sub_render->add_option("--level", level, "level for squares");
  sub_render->add_option("--n", n_stop, "stopping index for antichain / codebook size");
  sub_render->add_option("--r", r, "power r");
  sub_render->add_option("--samples", samples, "sample size for codebook");
  sub_render->add_option("--seed", seed, "RNG seed");

  CLI11_PARSE(app, argc, argv);

  try {
    common.spec = load_spec_file(common.spec_path, &common.spec_hash);
    const CarpetSpec& spec = *common.spec;
    const Budget budget{common.budget};

    if (sub_validate->parsed()) {
      nlohmann::json doc;
      doc["version"] = kVersion;
      doc["spec_hash"] = common.spec_hash;
      doc["exact_mode"] = spec.exact();
      doc["columns"] = spec.column_count();
      doc["cells"] = spec.cell_count();
      doc["derived"] = derived_to_json(derived_constants(spec, r));
      doc["bedford_mcmullen"] = spec.bm().has_value();
      write_out(out_path, doc.dump(2) + "\n");
      return 0;
    }

    if (sub_enum->parsed()) {
      std::string out = header_line(common, "enumerate") + "\n";
      out += derived_comment(derived_constants(spec, r)) + "\n";
      std::uint64_t count = 0;
      enumerate_psi_cb(spec, level, budget, [&](const SplitWord& w) {
        out += word_to_string(spec, w);
        out += '\n';
        ++count;
      });
      out += "# count=" + std::to_string(count) + "\n";
      write_out(out_path, out);
      return 0;
    }

    if (sub_dim->parsed()) {
      std::string out = header_line(common, "dimension") + "\n";
      out += derived_comment(derived_constants(spec, r)) + "\n";
      char buf[160];
      if (method == "closed") {
        const double s = closed_form_s_r(spec, r);
        std::snprintf(buf, sizeof buf, "method,r,s_r\nclosed,%.12g,%.15g\n", r, s);
        out += buf;
      } else if (method == "bm") {
        const double s = bm_closed_form_d_r(spec, r);
        std::snprintf(buf, sizeof buf, "method,r,s_r\nbm,%.12g,%.15g\n", r, s);
        out += buf;
      } else if (method == "partition") {
        PressureCurve curve = solve_t_r(spec, r, lmax);
        out += "level,t_hat,s_hat\n";
        for (const auto& smp : curve.samples) {
          std::snprintf(buf, sizeof buf, "%d,%.15g,%.15g\n", smp.level, smp.t_hat,
                        s_from_t(smp.t_hat, r));
          out += buf;
        }
        std::snprintf(buf, sizeof buf, "# root t=%.15g s=%.15g band_t=%.3g\n", curve.root,
                      s_from_t(curve.root, r), curve.band);
        out += buf;
      } else {
        throw PreconditionError("unknown method: " + method);
      }
      write_out(out_path, out);
      return 0;
    }

    if (sub_spec->parsed()) {
      const auto c1 = q_grid.find(':'), c2 = q_grid.find(':', c1 + 1);
      if (c1 == std::string::npos || c2 == std::string::npos)
        throw PreconditionError("q-grid needs a:b:step");
      const double qa = std::stod(q_grid.substr(0, c1));
      const double qb = std::stod(q_grid.substr(c1 + 1, c2 - c1 - 1));
      const double qs = std::stod(q_grid.substr(c2 + 1));
      if (!(qs > 0)) throw PreconditionError("q step must be positive");
      std::string out = header_line(common, "spectrum") + "\n";
      out += derived_comment(derived_constants(spec, 2.0)) + "\n";
      out += "q,tau_y,tau\n";
      char buf[120];
      for (double q = qa; q <= qb + 1e-12; q += qs) {
        std::snprintf(buf, sizeof buf, "%.12g,%.15g,%.15g\n", q, tau_y(spec, q),
                      closed_form_beta(spec, q));
        out += buf;
      }
      write_out(out_path, out);
      return 0;
    }

    if (sub_anti->parsed()) {
      AntiChain fam = build_lambda(spec, n_stop, r, budget);
      CertificationReport rep;
      bool separation_checked = false;
      double min_ratio = 0;
      bool separation_ok = true;
      if (family == "lambda") {
        if (do_check) rep = certify_lambda(spec, fam);
      } else if (family == "gamma") {
        fam = build_gamma(spec, n_stop, r, budget);
        if (do_check) rep = certify_gamma(spec, fam);
      } else if (family == "bar" || family == "star") {
        if (do_check) rep = certify_lambda(spec, fam);
        AntiChain stage = std::move(fam);
        if (family == "bar" || !spec.all_single_cell_columns())
          stage = build_bar(spec, stage, r, !no_enforce);
        if (family == "star") stage = build_star(spec, stage, r, !no_enforce);
        fam = std::move(stage);
        if (do_check && family == "star") {
          SeparationReport sep = check_separation(spec, fam);
          min_ratio = sep.min_ratio;
          separation_checked = true;
          const double rho = star_separation_constant(spec);
          separation_ok = fam.words.size() < 2 || sep.min_ratio >= rho - 1e-12;
          if (spec.exact() && fam.words.size() >= 2)
            separation_ok = separation_ok &&
                            verify_separation_exact(spec, fam, star_separation_constant_ex(spec));
        }
      } else {
        throw PreconditionError("unknown family: " + family);
      }

      std::string words_text = header_line(common, "antichain") + "\n";
      for (const auto& w : fam.words) words_text += word_to_string(spec, w) + "\n";
      write_out(out_path, words_text);

      nlohmann::json side;
      side["version"] = kVersion;
      side["spec_hash"] = common.spec_hash;
      side["family"] = family;
      side["n"] = n_stop;
      side["r"] = r;
      side["cardinality"] = fam.words.size();
      side["l_min"] = fam.l_min;
      side["derived"] = derived_to_json(fam.consts);
      for (const auto& [k, v] : fam.certified) side["flags"][k] = v;
      if (do_check) {
        side["check"]["window_ok"] = rep.window_ok;
        side["check"]["pairwise_ok"] = rep.pairwise_ok;
        side["check"]["mass_ok"] = rep.mass_ok;
        side["check"]["probes_ok"] = rep.probes_ok;
        if (separation_checked) {
          side["check"]["separation_min_ratio"] = min_ratio;
          side["check"]["separation_ok"] = separation_ok;
        }
      }
      std::cerr << side.dump(2) << "\n";
      if (do_check && !(rep.all() && separation_ok)) throw NumericError("certification failed");
      return 0;
    }

    if (sub_quant->parsed()) {
      const double s_r = closed_form_s_r(spec, r);
      ScanResult scan = coefficient_scan(spec, r, parse_ngrid(ngrid), samples, seed, s_r, restarts);
      std::string out = header_line(common, "quantize", seed) + "\n";
      out += derived_comment(derived_constants(spec, r)) + "\n";
      out += "n,error_r,scaled\n";
      char buf[120];
      for (const auto& row : scan.rows) {
        std::snprintf(buf, sizeof buf, "%d,%.15g,%.15g\n", row.n, row.error_r, row.scaled);
        out += buf;
      }
      write_out(out_path, out);
      nlohmann::json summary;
      summary["version"] = kVersion;
      summary["spec_hash"] = common.spec_hash;
      summary["seed"] = seed;
      summary["samples"] = samples;
      summary["r"] = r;
      summary["s_r"] = s_r;
      summary["slope"] = scan.slope;
      summary["expected_slope"] = -r / s_r;
      summary["band_min"] = scan.band_min;
      summary["band_max"] = scan.band_max;
      if (!json_out.empty()) write_out(json_out, summary.dump(2) + "\n");
      else std::cerr << summary.dump(2) << "\n";
      return 0;
    }

    if (sub_render->parsed()) {
      std::string svg;
      if (what == "squares") {
        auto words = enumerate_psi(spec, level, budget);
        svg = render_rects(spec, words, header_line(common, "render-squares"));
      } else if (what == "antichain") {
        AntiChain fam = build_lambda(spec, n_stop, r, budget);
        svg = render_rects(spec, fam.words, header_line(common, "render-antichain"));
      } else if (what == "codebook") {
        SampleSet smp = sample(spec, samples, 1e-9, seed);
        Codebook cb = lloyd(smp, static_cast<std::size_t>(n_stop), r, 2, seed);
        auto backdrop = enumerate_psi(spec, 1, budget);
        svg =
            render_points(spec, backdrop, cb.centers, header_line(common, "render-codebook", seed));
      } else {
        throw PreconditionError("unknown render target: " + what);
      }
      write_out(out_path, svg);
      return 0;
    }
  } catch (const ValidationError& e) {
    nlohmann::json err{
        {"error", {{"type", "validation"}, {"code", to_string(e.code())}, {"message", e.what()}}}};
    std::cout << err.dump() << "\n";
    return 2;
  } catch (const BudgetExceeded& e) {
    nlohmann::json err{
        {"error", {{"type", "budget"}, {"partial", e.partial_count()}, {"message", e.what()}}}};
    std::cout << err.dump() << "\n";
    return 3;
  } catch (const std::exception& e) {
    nlohmann::json err{{"error", {{"type", "numeric"}, {"message", e.what()}}}};
    std::cout << err.dump() << "\n";
    return 4;
  }
  return 0;
}
