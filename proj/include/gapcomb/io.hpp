#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gapcomb/construction.hpp"
#include "gapcomb/errors.hpp"
#include "gapcomb/measure.hpp"
#include "gapcomb/meyer.hpp"
#include "gapcomb/verify.hpp"

namespace gapcomb {

using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Deterministic float formatting: 17 significant digits round-trip doubles
// bit-exactly through strtod.

inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline double parse_double(const std::string& s) {
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw ParseError("parse_double: bad input '" + s + "'");
  }
}

// All output files are written atomically (temp + rename).
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("atomic_write: cannot open " + tmp.string());
    out << content;
    if (!out) throw Error("atomic_write: short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("read_file: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// Atom lists: CSV (position_num, position_den, weight_re, weight_im) and a
// JSON form with exact integer strings for numerators and denominators.

inline std::string atoms_to_csv(const std::vector<Atom>& atoms) {
  std::string out = "position_num,position_den,weight_re,weight_im\n";
  for (const auto& a : atoms) {
    out += a.position.numerator().str();
    out += ',';
    out += a.position.denominator().str();
    out += ',';
    out += fmt17(a.weight.real());
    out += ',';
    out += fmt17(a.weight.imag());
    out += '\n';
  }
  return out;
}

inline std::vector<Atom> atoms_from_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("atoms_from_csv: empty input");
  std::vector<Atom> atoms;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string num, den, re, im;
    if (!std::getline(ls, num, ',') || !std::getline(ls, den, ',') ||
        !std::getline(ls, re, ',') || !std::getline(ls, im, ','))
      throw ParseError("atoms_from_csv: bad row '" + line + "'");
    atoms.push_back({Rational(BigInt(num), BigInt(den)), {parse_double(re), parse_double(im)}});
  }
  return atoms;
}

inline std::string atoms_to_json(const std::vector<Atom>& atoms) {
  ordered_json arr = ordered_json::array();
  for (const auto& a : atoms) {
    ordered_json o;
    o["position"] = {{"num", a.position.numerator().str()},
                     {"den", a.position.denominator().str()}};
    o["weight"] = {{"re", fmt17(a.weight.real())}, {"im", fmt17(a.weight.imag())}};
    arr.push_back(std::move(o));
  }
  return arr.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Gap-coefficient files: line-based structured text, bit-exact reload.

inline std::string meyer_to_text(const MeyerCoefficients& mc) {
  std::string out;
  out.reserve(mc.c.size() * 48 + 512);
  out += "gapcomb-meyer-v1\n";
  out += "M " + std::to_string(mc.M) + "\n";
  out += "alpha " + mc.alpha.str() + "\n";
  out += "j_star " + std::to_string(mc.j_star) + "\n";
  out += "tol " + fmt17(mc.tol) + "\n";
  out += "method " + mc.method + "\n";
  out += "seed " + std::to_string(mc.seed) + "\n";
  out += "kernel_dim " + std::to_string(mc.kernel_dim) + "\n";
  out += "iterations " + std::to_string(mc.iterations) + "\n";
  out += "time_residual " + fmt17(mc.cert.time_residual) + "\n";
  out += "freq_residual " + fmt17(mc.cert.freq_residual) + "\n";
  out += "worst_time_index " + std::to_string(mc.cert.worst_time_index) + "\n";
  out += "worst_freq_index " + std::to_string(mc.cert.worst_freq_index) + "\n";
  out += "max_freq_abs " + fmt17(mc.cert.max_freq_abs) + "\n";
  out += "count " + std::to_string(mc.c.size()) + "\n";
  for (const Complex& z : mc.c) {
    out += "c ";
    out += fmt17(z.real());
    out += ' ';
    out += fmt17(z.imag());
    out += '\n';
  }
  return out;
}

inline MeyerCoefficients meyer_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "gapcomb-meyer-v1")
    throw ParseError("meyer_from_text: bad header");
  MeyerCoefficients mc;
  std::size_t count = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "M") ls >> mc.M;
    else if (key == "alpha") { std::string v; ls >> v; mc.alpha = Rational::parse(v); }
    else if (key == "j_star") ls >> mc.j_star;
    else if (key == "tol") { std::string v; ls >> v; mc.tol = parse_double(v); }
    else if (key == "method") ls >> mc.method;
    else if (key == "seed") ls >> mc.seed;
    else if (key == "kernel_dim") ls >> mc.kernel_dim;
    else if (key == "iterations") ls >> mc.iterations;
    else if (key == "time_residual") { std::string v; ls >> v; mc.cert.time_residual = parse_double(v); }
    else if (key == "freq_residual") { std::string v; ls >> v; mc.cert.freq_residual = parse_double(v); }
    else if (key == "worst_time_index") ls >> mc.cert.worst_time_index;
    else if (key == "worst_freq_index") ls >> mc.cert.worst_freq_index;
    else if (key == "max_freq_abs") { std::string v; ls >> v; mc.cert.max_freq_abs = parse_double(v); }
    else if (key == "count") { ls >> count; mc.c.reserve(count); }
    else if (key == "c") {
      std::string re, im;
      ls >> re >> im;
      mc.c.push_back({parse_double(re), parse_double(im)});
    } else {
      throw ParseError("meyer_from_text: unknown key '" + key + "'");
    }
  }
  if (mc.c.size() != count || mc.M <= 0 ||
      mc.c.size() != static_cast<std::size_t>(mc.M) * static_cast<std::size_t>(mc.M))
    throw ParseError("meyer_from_text: inconsistent coefficient count");
  mc.cert.j_star_is_one = true;
  return mc;
}

// ---------------------------------------------------------------------------
// Assembled-measure directory: measure.json plus one coefficient file per
// level.  Reload rebuilds mu and mu_hat through the same construction path;
// the Fourier side re-checks the window certificate, so a tampered
// coefficient file surfaces as CertificateFailure.

inline ordered_json config_to_json(const BuildConfig& cfg) {
  ordered_json j;
  j["base"] = cfg.base;
  j["alpha"] = cfg.alpha.str();
  j["n_lo"] = cfg.n_lo;
  j["n_hi"] = cfg.n_hi;
  j["q"] = cfg.q;
  j["tol"] = fmt17(cfg.tol);
  j["seed"] = cfg.seed;
  j["max_rounds"] = cfg.max_rounds;
  j["method"] = cfg.method ? to_string(*cfg.method) : "auto";
  return j;
}

inline BuildConfig config_from_json(const ordered_json& j) {
  BuildConfig cfg;
  cfg.base = j.at("base").get<long>();
  cfg.alpha = Rational::parse(j.at("alpha").get<std::string>());
  cfg.n_lo = j.at("n_lo").get<int>();
  cfg.n_hi = j.at("n_hi").get<int>();
  cfg.q = j.at("q").get<int>();
  cfg.tol = parse_double(j.at("tol").get<std::string>());
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.max_rounds = j.at("max_rounds").get<long>();
  const std::string m = j.at("method").get<std::string>();
  if (m == "nullspace") cfg.method = MeyerMethod::nullspace;
  else if (m == "alternating_projection") cfg.method = MeyerMethod::alternating_projection;
  else cfg.method = std::nullopt;
  return cfg;
}

inline void save_measure(const AssembledMeasure& fm, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  ordered_json j;
  j["format"] = "gapcomb-measure-v1";
  j["config"] = config_to_json(fm.config);
  ordered_json levels = ordered_json::array();
  for (const auto& lv : fm.levels) {
    const std::string coeff_file = "meyer_n" + std::to_string(lv.params.n) + ".txt";
    atomic_write(dir / coeff_file, meyer_to_text(lv.coeffs));
    ordered_json l;
    l["n"] = lv.params.n;
    l["M"] = lv.params.M;
    l["tau"] = lv.params.tau.str();
    l["weight"] = fmt17(lv.weight);
    l["j_star"] = lv.placement.j_star;
    l["j_dd"] = lv.placement.j_dd;
    l["h"] = lv.placement.h.str();
    l["lambda"] = lv.placement.lambda.str();
    l["coeff_file"] = coeff_file;
    levels.push_back(std::move(l));
  }
  j["levels"] = std::move(levels);
  ordered_json certs = ordered_json::array();
  for (const auto& c : fm.certificates)
    certs.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  j["certificates"] = std::move(certs);
  atomic_write(dir / "measure.json", j.dump(2) + "\n");
}

inline AssembledMeasure load_measure(const std::filesystem::path& dir) {
  const ordered_json j = ordered_json::parse(read_file(dir / "measure.json"));
  if (j.at("format").get<std::string>() != "gapcomb-measure-v1")
    throw ParseError("load_measure: unknown format");
  AssembledMeasure fm;
  fm.config = config_from_json(j.at("config"));
  for (const auto& l : j.at("levels")) {
    Level lv;
    lv.params.n = l.at("n").get<int>();
    lv.params.M = l.at("M").get<long>();
    lv.params.tau = Rational::parse(l.at("tau").get<std::string>());
    lv.weight = parse_double(l.at("weight").get<std::string>());
    lv.placement.n = lv.params.n;
    lv.placement.j_star = l.at("j_star").get<long>();
    lv.placement.j_dd = l.at("j_dd").get<long>();
    lv.placement.h = Rational::parse(l.at("h").get<std::string>());
    lv.placement.lambda = Rational::parse(l.at("lambda").get<std::string>());
    lv.coeffs = meyer_from_text(read_file(dir / l.at("coeff_file").get<std::string>()));
    lv.block = make_coeffs(lv.coeffs.c);
    fm.levels.push_back(std::move(lv));
  }
  for (const auto& c : j.at("certificates"))
    fm.certificates.push_back({c.at("name").get<std::string>(), c.at("pass").get<bool>(),
                               c.at("detail").get<std::string>()});
  for (const auto& lv : fm.levels) {
    fm.mu = add(fm.mu, level_difference(lv));
    const Complex w{lv.weight, 0.0};
    fm.mu_hat = add(fm.mu_hat, MeasureExpr::from_term(fourier_side_measure(
                                   lv.coeffs, lv.placement.h + lv.params.tau, w)));
    fm.mu_hat = add(fm.mu_hat, MeasureExpr::from_term(
                                   fourier_side_measure(lv.coeffs, lv.placement.h, -w)));
  }
  return fm;
}

// ---------------------------------------------------------------------------
// Report writers.

inline std::string blowup_to_csv(const BlowupReport& rep) {
  std::string out = "n,t_num,t_den,F_re,F_im,F_abs,lower_bound,threshold,two_path_rel\n";
  for (const auto& r : rep.rows) {
    out += std::to_string(r.n) + ',' + r.t.numerator().str() + ',' + r.t.denominator().str() +
           ',' + fmt17(r.F.real()) + ',' + fmt17(r.F.imag()) + ',' + fmt17(r.F_abs) + ',' +
           fmt17(r.lower_bound) + ',' + fmt17(r.threshold) + ',' + fmt17(r.two_path_rel) + '\n';
  }
  return out;
}

inline std::string growth_to_csv(const GrowthReport& rep) {
  std::string out = "r_num,r_den,mass,exponent\n";
  for (const auto& r : rep.rows) {
    out += r.r.numerator().str() + ',' + r.r.denominator().str() + ',' + fmt17(r.mass) + ',';
    out += r.exponent ? fmt17(*r.exponent) : std::string("undefined");
    out += '\n';
  }
  return out;
}

inline std::string poisson_to_csv(const std::vector<PoissonRecord>& recs) {
  std::string out = "lhs_re,lhs_im,rhs_re,rhs_im,residual,lhs_tail,rhs_tail\n";
  for (const auto& r : recs) {
    out += fmt17(r.lhs.real()) + ',' + fmt17(r.lhs.imag()) + ',' + fmt17(r.rhs.real()) + ',' +
           fmt17(r.rhs.imag()) + ',' + fmt17(r.residual) + ',' + fmt17(r.lhs_tail) + ',' +
           fmt17(r.rhs_tail) + '\n';
  }
  return out;
}

inline ordered_json verdict_to_json(const HeadlineVerdict& v) {
  ordered_json j;
  j["verdict"] = v.verdict_line;
  j["crystalline"] = v.crystalline_pass ? "pass" : "FAIL";
  j["quasicrystal"] = v.quasicrystal_fail_certified ? "fail (blow-up certified)" : "UNDECIDED";
  ordered_json subs = ordered_json::array();
  for (const auto& c : v.sub)
    subs.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  j["sub_certificates"] = std::move(subs);
  ordered_json blow = ordered_json::array();
  for (const auto& r : v.blowup.rows)
    blow.push_back({{"n", r.n},
                    {"t", r.t.str()},
                    {"F_abs", fmt17(r.F_abs)},
                    {"lower_bound", fmt17(r.lower_bound)},
                    {"threshold", fmt17(r.threshold)},
                    {"two_path_rel", fmt17(r.two_path_rel)}});
  j["blowup"] = std::move(blow);
  ordered_json exps = ordered_json::array();
  for (double e : v.growth.level_exponents) exps.push_back(fmt17(e));
  j["growth_exponents"] = std::move(exps);
  j["growth_escalation"] = v.growth.escalation_pass;
  return j;
}

// |F(t)| samples on a grid around each blow-up probe, for external plotting.
inline std::string convolution_plot_csv(const AssembledMeasure& fm, const Rational& t_center,
                                        int half_points = 128) {
  const PsiFunction psi = fm.psi();
  const Rational step = t_center / Rational(256);
  std::string out = "t,F_abs\n";
  for (int i = -half_points; i <= half_points; ++i) {
    const Rational t = t_center + step * Rational(i);
    const double v = std::abs(hat_convolution_at(fm, psi, t));
    out += fmt17(t.to_double()) + ',' + fmt17(v) + '\n';
  }
  return out;
}

}  // namespace gapcomb
