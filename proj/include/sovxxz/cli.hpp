#pragma once

#include "matelem.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <set>

namespace sovxxz::cli {

using json = nlohmann::ordered_json;

enum ExitCode { kOk = 0, kValidation = 2, kResidual = 3, kSolver = 4 };

struct SweepSpec {
  std::string param;
  std::vector<cplx> values;
};

struct RunConfig {
  ModelParams params;
  std::uint64_t seed = 7;
  std::optional<double> tol_rel;
  std::optional<double> tol_abs;
  /// 1-based site index for matrix elements
  int site = 1;
  unsigned workers = 1;
  int samples = 20;
  int couples = 5;
  std::optional<SweepSpec> sweep;
};

inline cplx parse_complex(const json& j, const std::string& key) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ValidationError("config: field '" + key + "' must be a two-element array [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline const std::vector<std::string>& param_keys() {
  static const std::vector<std::string> k = {"n_sites",  "eta",      "zeta_minus", "kappa_minus", "tau_minus",
                                             "zeta_plus", "kappa_plus", "tau_plus", "xi",          "case",
                                             "tri_c"};
  return k;
}

/// Schema-checked model parameters; a "sweep" block is accepted alongside.
inline ModelParams parse_params(const json& j) {
  if (!j.is_object()) throw ValidationError("config: top level must be an object");
  const auto& keys = param_keys();
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(keys.begin(), keys.end(), it.key()) == keys.end() && it.key() != "sweep")
      throw ValidationError("config: unknown field '" + it.key() + "'");
  for (const char* req : {"n_sites", "eta", "zeta_minus", "zeta_plus", "xi", "case"})
    if (!j.contains(req)) throw ValidationError(std::string("config: missing field '") + req + "'");
  ModelParams p;
  if (!j["n_sites"].is_number_integer()) throw ValidationError("config: 'n_sites' must be an integer");
  p.n_sites = j["n_sites"].get<int>();
  if (p.n_sites < 1 || p.n_sites > 8) throw ValidationError("config: 'n_sites' must lie in [1, 8]");
  p.eta = parse_complex(j["eta"], "eta");
  auto side = [&](const std::string& s, BoundaryParams& b) {
    b.zeta = parse_complex(j["zeta_" + s], "zeta_" + s);
    b.kappa = j.contains("kappa_" + s) ? parse_complex(j["kappa_" + s], "kappa_" + s) : cplx(0.0);
    b.tau = j.contains("tau_" + s) ? parse_complex(j["tau_" + s], "tau_" + s) : cplx(0.0);
  };
  side("minus", p.minus);
  side("plus", p.plus);
  if (!j["xi"].is_array() || static_cast<int>(j["xi"].size()) != p.n_sites)
    throw ValidationError("config: 'xi' must be an array of n_sites complex values");
  for (std::size_t k = 0; k < j["xi"].size(); ++k) p.xi.push_back(parse_complex(j["xi"][k], "xi"));
  const json& c = j["case"];
  if (!c.is_string() || (c != "minus" && c != "plus")) throw ValidationError("config: 'case' must be \"minus\" or \"plus\"");
  p.bcase = c == "minus" ? Case::Minus : Case::Plus;
  if (j.contains("tri_c")) p.tri_c = parse_complex(j["tri_c"], "tri_c");
  return p;
}

inline std::optional<SweepSpec> parse_sweep(const json& j) {
  if (!j.contains("sweep")) return std::nullopt;
  const json& s = j["sweep"];
  if (!s.is_object() || !s.contains("param") || !s["param"].is_string() || !s.contains("values") ||
      !s["values"].is_array() || s["values"].empty())
    throw ValidationError("config: 'sweep' needs a string 'param' and a non-empty 'values' array");
  SweepSpec r;
  r.param = s["param"].get<std::string>();
  static const std::set<std::string> allowed = {"eta",       "zeta_minus", "kappa_minus", "tau_minus",
                                                "zeta_plus", "kappa_plus", "tau_plus"};
  if (!allowed.count(r.param)) throw ValidationError("config: sweep param '" + r.param + "' is not sweepable");
  for (const auto& v : s["values"]) r.values.push_back(parse_complex(v, "sweep.values"));
  return r;
}

inline json params_json(const ModelParams& p) {
  json j;
  j["n_sites"] = p.n_sites;
  j["eta"] = complex_json(p.eta);
  j["zeta_minus"] = complex_json(p.minus.zeta);
  j["kappa_minus"] = complex_json(p.minus.kappa);
  j["tau_minus"] = complex_json(p.minus.tau);
  j["zeta_plus"] = complex_json(p.plus.zeta);
  j["kappa_plus"] = complex_json(p.plus.kappa);
  j["tau_plus"] = complex_json(p.plus.tau);
  json xi = json::array();
  for (auto x : p.xi) xi.push_back(complex_json(x));
  j["xi"] = xi;
  j["case"] = to_string(p.bcase);
  if (p.tri_c) j["tri_c"] = complex_json(*p.tri_c);
  return j;
}

inline cplx& sweep_slot(ModelParams& p, const std::string& name) {
  if (name == "eta") return p.eta;
  if (name == "zeta_minus") return p.minus.zeta;
  if (name == "kappa_minus") return p.minus.kappa;
  if (name == "tau_minus") return p.minus.tau;
  if (name == "zeta_plus") return p.plus.zeta;
  if (name == "kappa_plus") return p.plus.kappa;
  if (name == "tau_plus") return p.plus.tau;
  throw ValidationError("unknown sweep parameter '" + name + "'");
}

/// 64-bit FNV-1a as 16 hex digits.
inline std::string fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string config_hash(const ModelParams& p, std::uint64_t seed) {
  return fnv1a(params_json(p).dump() + "#" + std::to_string(seed));
}

struct Check {
  std::string name;
  double residual;
  double tol;
  bool pass() const { return std::isfinite(residual) && residual <= tol; }
};

/// Spec tolerances with optional global overrides for relative and absolute checks.
struct TolSet {
  std::optional<double> rel, abs;
  double r(double d) const { return rel.value_or(d); }
  double a(double d) const { return abs.value_or(d); }
  json to_json() const {
    json j;
    j["rel_override"] = rel ? json(*rel) : json(nullptr);
    j["abs_override"] = abs ? json(*abs) : json(nullptr);
    return j;
  }
};

inline json checks_json(const std::vector<Check>& cs) {
  json a = json::array();
  for (const auto& c : cs) {
    json j;
    j["name"] = c.name;
    j["residual"] = c.residual;
    j["tol"] = c.tol;
    j["pass"] = c.pass();
    a.push_back(j);
  }
  return a;
}

inline bool all_pass(const std::vector<Check>& cs) {
  return std::all_of(cs.begin(), cs.end(), [](const Check& c) { return c.pass(); });
}

inline json report_head(const std::string& command, const RunConfig& cfg, const TolSet& tol) {
  json r;
  r["command"] = command;
  r["config_hash"] = config_hash(cfg.params, cfg.seed);
  r["seed"] = cfg.seed;
  r["params"] = params_json(cfg.params);
  r["tolerances"] = tol.to_json();
  return r;
}

inline std::vector<cplx> sample_points(std::uint64_t seed, int count) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  std::vector<cplx> out;
  for (int k = 0; k < count; ++k) out.emplace_back(u(rng), u(rng));
  return out;
}

// ---- verify

inline std::vector<Check> verify_checks(const Model& m, std::uint64_t seed, const TolSet& tol, unsigned workers) {
  const auto pts = sample_points(seed, 10);
  const cplx e = m.eta();
  std::vector<Check> out;
  auto worst = [&](auto&& f) {
    std::vector<double> v(pts.size() / 2);
    parallel_for(v.size(), workers, [&](std::size_t k) { v[k] = f(pts[2 * k], pts[2 * k + 1]); });
    return *std::max_element(v.begin(), v.end());
  };
  out.push_back({"yang_baxter", worst([&](cplx l, cplx u) { return yang_baxter_residual(l, u, e); }), tol.r(1e-9)});
  out.push_back({"reflection_u_minus",
                 worst([&](cplx l, cplx u) {
                   return reflection_residual([&](cplx x) { return m.u_minus(x); }, l, u, e);
                 }),
                 tol.r(1e-9)});
  out.push_back({"reflection_u_plus_t",
                 worst([&](cplx l, cplx u) {
                   return reflection_residual([&](cplx x) { return m.u_plus_t(-x); }, l, u, e);
                 }),
                 tol.r(1e-9)});
  out.push_back({"parity_relations", worst([&](cplx l, cplx) { return parity_residual(m, l); }), tol.r(1e-9)});
  out.push_back({"transfer_commuting", worst([&](cplx l, cplx u) {
                   const CMatrix a = m.transfer(l), b = m.transfer(u);
                   return max_abs(a * b - b * a) / (max_abs(a) * max_abs(b));
                 }),
                 tol.r(1e-9)});
  out.push_back({"transfer_even", worst([&](cplx l, cplx) { return rel_diff(m.transfer(l), m.transfer(-l)); }),
                 tol.r(1e-9)});
  out.push_back({"transfer_two_traces",
                 worst([&](cplx l, cplx) { return rel_diff(m.transfer(l), m.transfer_plus_form(l)); }), tol.r(1e-9)});
  out.push_back({"qdet_factorization", worst([&](cplx l, cplx) {
                   double w = 0;
                   for (Side s : {Side::Minus, Side::Plus}) {
                     const CMatrix q = m.detq_u_operator(s, l);
                     w = std::max({w, rel_diff(q, CMatrix(m.detq_u(s, l) * m.identity())),
                                   rel_diff(m.detq_u_operator_alt(s, l), q)});
                   }
                   return w;
                 }),
                 tol.r(1e-9)});
  out.push_back({"qdet_central", worst([&](cplx l, cplx u) {
                   double w = 0;
                   for (Side s : {Side::Minus, Side::Plus}) {
                     const CMatrix q = m.detq_u_operator(s, l);
                     const Gens g = m.gens(s, u);
                     for (const CMatrix* x : {&g.A, &g.B, &g.C, &g.D})
                       w = std::max(w, max_abs(q * *x - *x * q) / (max_abs(q) * max_abs(*x)));
                   }
                   return w;
                 }),
                 tol.r(1e-9)});
  out.push_back({"qdet_k_factorization", worst([&](cplx l, cplx) {
                   return std::max(rel_diff(m.detq_k(Side::Minus, l), m.detq_k_factorized(Side::Minus, l)),
                                   rel_diff(m.detq_k(Side::Plus, l), m.detq_k_factorized(Side::Plus, l)));
                 }),
                 tol.r(1e-10)});
  {
    const cplx h = e / 2.0, ip = kI * kPi / 2.0;
    const cplx v0 = 2.0 * std::cosh(e) * m.parity() * m.detq_m(0.0);
    const cplx v1 = -2.0 * std::cosh(e) * m.coth(Side::Minus) * m.coth(Side::Plus) * m.detq_m(ip);
    double w = 0;
    for (double s : {1.0, -1.0}) {
      w = std::max(w, rel_diff(m.transfer(s * h), CMatrix(v0 * m.identity())));
      w = std::max(w, rel_diff(m.transfer(s * (h - ip)), CMatrix(v1 * m.identity())));
    }
    out.push_back({"transfer_fixed_values", w, tol.r(1e-10)});
  }
  if (m.n() >= 2) {
    ModelParams hp = m.params();
    out.push_back({"hamiltonian_link", hamiltonian_link_residual(hp), tol.r(1e-6)});
  }
  const Side eps = general_side(m.params().bcase);
  const SovBasis b = build_basis(m, eps);
  double be = 0;
  for (std::size_t k = 0; k < 5; ++k) be = std::max(be, b_eigen_residual(m, b, pts[k]));
  out.push_back({"sov_b_eigen", be, tol.r(1e-8)});
  out.push_back({"sov_pairing", pairing_residual(m, b), tol.r(1e-8)});
  out.push_back({"sov_identity_resolution", identity_resolution(m, b), tol.a(1e-8)});
  {
    const std::vector<Action> acts = eps == Side::Minus ? std::vector<Action>{Action::LeftAMinus, Action::RightDMinus}
                                                        : std::vector<Action>{Action::LeftDPlus, Action::RightAPlus};
    const unsigned count = 1u << m.n();
    std::vector<double> v(count);
    parallel_for(count, workers, [&](std::size_t idx) {
      double w = 0;
      for (Action g : acts) {
        const cplx lam = pts[(idx + 5) % pts.size()];
        w = std::max(w, rel_diff(interpolated_action(m, b, g, unsigned(idx), lam),
                                 direct_action(m, b, g, unsigned(idx), lam)));
      }
      v[idx] = w;
    });
    out.push_back({"sov_interpolated_actions", *std::max_element(v.begin(), v.end()), tol.r(1e-8)});
  }
  return out;
}

// ---- spectrum

struct SpectrumData {
  SolveResult sol;
  std::vector<SovEigenpair> pairs;
  OracleMatch match;
  double completeness = 0;
  double condition = 0;
};

inline SpectrumData spectrum_data(const Model& m, std::uint64_t seed, unsigned workers) {
  const Side eps = general_side(m.params().bcase);
  const SovBasis b = build_basis(m, eps);
  SpectrumData d;
  d.condition = basis_condition(b);
  SolveOptions opt;
  opt.workers = workers;
  d.sol = solve_all(m, eps, seed, opt);
  d.pairs = build_all(m, b, d.sol.taus, workers);
  d.match = match_oracle(m, d.sol.taus, diagonalize(m, cplx(0.123, 0.456), seed, workers), workers);
  d.completeness = completeness_residual(m, d.pairs);
  return d;
}

inline json spectrum_json(const Model& m, const SpectrumData& d) {
  json sols = json::array();
  const Side eps = general_side(m.params().bcase);
  std::vector<double> dist(d.sol.taus.size(), std::numeric_limits<double>::infinity());
  for (std::size_t k = 0; k < d.match.index.size(); ++k) dist[d.match.index[k]] = d.match.distance[k];
  for (std::size_t k = 0; k < d.sol.taus.size(); ++k) {
    json s;
    json c = json::array();
    for (auto x : d.sol.taus[k].c) c.push_back(complex_json(x));
    s["c"] = c;
    s["sov_residual"] = max_of(sov_residuals(m, d.sol.taus[k], eps));
    s["oracle_distance"] = dist[k];
    s["eigen_residual"] = d.pairs[k].residual;
    sols.push_back(s);
  }
  return sols;
}

inline std::vector<Check> spectrum_checks(const Model& m, const SpectrumData& d, const TolSet& tol) {
  double er = 0;
  for (const auto& p : d.pairs) er = std::max(er, p.residual);
  const double want = double(std::size_t(1) << m.n());
  return {{"solution_count_deficit", want - double(d.sol.taus.size()), 0.0},
          {"sov_system", d.sol.max_residual, tol.r(1e-9)},
          {"oracle_agreement", d.match.worst, tol.r(1e-8)},
          {"eigen_residual", er, tol.r(1e-8)},
          {"completeness", d.completeness, tol.a(1e-7)}};
}

// ---- scalar

inline std::vector<Check> scalar_checks(const Model& m, const SpectrumData& d, std::uint64_t seed, int samples,
                                        const TolSet& tol, unsigned workers) {
  const Side eps = general_side(m.params().bcase);
  const SovBasis b = build_basis(m, eps);
  std::vector<double> rel(samples);
  parallel_for(samples, workers, [&](std::size_t k) {
    std::mt19937_64 rng(seed * 1000003u + k);
    std::normal_distribution<double> g;
    SeparateState l{true, eps, {}}, r{false, eps, {}};
    for (int a = 0; a < m.n(); ++a) {
      l.factors.push_back({cplx(g(rng), g(rng)), cplx(g(rng), g(rng))});
      r.factors.push_back({cplx(g(rng), g(rng)), cplx(g(rng), g(rng))});
    }
    const cplx direct = assemble(m, b, l).transpose() * assemble(m, b, r);
    rel[k] = rel_diff(pairing_det(m, l, r), direct);
  });
  double cert = 0, gram = 0;
  const std::size_t np = d.pairs.size();
  std::vector<double> cw(np, 0), gw(np, 0);
  parallel_for(np, workers, [&](std::size_t i) {
    for (std::size_t j = 0; j < np; ++j) {
      if (i == j) continue;
      cw[i] = std::max(cw[i], orthogonality_certificate(m, eps, d.pairs[i], d.pairs[j]));
      const cplx x = d.pairs[i].left.transpose() * d.pairs[j].right;
      const cplx ni = d.pairs[i].left.transpose() * d.pairs[i].right;
      const cplx nj = d.pairs[j].left.transpose() * d.pairs[j].right;
      gw[i] = std::max(gw[i], std::abs(x) / std::sqrt(std::abs(ni * nj)));
    }
  });
  for (std::size_t i = 0; i < np; ++i) {
    cert = std::max(cert, cw[i]);
    gram = std::max(gram, gw[i]);
  }
  return {{"pairing_det_vs_direct", *std::max_element(rel.begin(), rel.end()), tol.r(1e-9)},
          {"orthogonality_certificate", cert, tol.r(1e-8)},
          {"eigen_gram_offdiagonal", gram, tol.r(1e-8)}};
}

// ---- matelem

struct MatelemEntry {
  std::size_t left, right;
  cplx value, direct, normalized;
  double scatter;
};

/// Deterministic couples: the diagonal (0,0) then seeded draws without repetition.
inline std::vector<std::pair<std::size_t, std::size_t>> pick_couples(std::size_t count, int couples,
                                                                     std::uint64_t seed) {
  std::vector<std::pair<std::size_t, std::size_t>> out = {{0, 0}};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> u(0, count - 1);
  const std::size_t cap = std::min<std::size_t>(count * count, std::size_t(couples) + 1);
  while (out.size() < cap) {
    std::pair<std::size_t, std::size_t> p{u(rng), u(rng)};
    if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
  }
  return out;
}

inline std::vector<MatelemEntry> matelem_entries(const Model& m, const SpectrumData& d, int site, int couples,
                                                 std::uint64_t seed, unsigned workers) {
  const Side eps = general_side(m.params().bcase);
  const CMatrix s = sigma_string(m, string_kind(eps), site);
  const auto cs = pick_couples(d.pairs.size(), couples, seed);
  std::vector<MatelemEntry> out(cs.size());
  parallel_for(cs.size(), workers, [&](std::size_t k) {
    const auto& l = d.pairs[cs[k].first];
    const auto& r = d.pairs[cs[k].second];
    const auto res = matrix_element(m, eps, l, r, site);
    const cplx direct = direct_matrix_element(l.left, s, r.right);
    const double nrm = std::sqrt(std::abs(cplx(l.left.transpose() * l.right) * cplx(r.left.transpose() * r.right)));
    out[k] = {cs[k].first, cs[k].second, res.value, direct, res.value / nrm, std::abs(res.value - direct) / nrm};
  });
  return out;
}

/// Calibration constant relating the determinant formula to the oracle; frozen at 1.
inline constexpr double kCalibration = 1.0;

inline json matelem_json(const std::vector<MatelemEntry>& es) {
  json a = json::array();
  for (const auto& e : es) {
    json j;
    j["left"] = e.left;
    j["right"] = e.right;
    j["value"] = complex_json(e.value);
    j["oracle"] = complex_json(e.direct);
    j["normalized"] = complex_json(e.normalized);
    if (std::abs(e.direct) > 1e-12 * std::max(1.0, std::abs(e.value)))
      j["ratio"] = complex_json(e.value / e.direct);
    else
      j["ratio"] = nullptr;
    j["scatter"] = e.scatter;
    a.push_back(j);
  }
  return a;
}

inline double max_scatter(const std::vector<MatelemEntry>& es) {
  double w = 0;
  for (const auto& e : es) w = std::max(w, e.scatter);
  return w;
}

// ---- commands

struct Outcome {
  json report;
  int code = kOk;
};

inline Outcome fail_outcome(json head, int code, const std::string& msg) {
  head["error"] = msg;
  head["exit_code"] = code;
  return {head, code};
}

inline Outcome finish(json r, const std::vector<Check>& cs) {
  r["checks"] = checks_json(cs);
  const bool ok = all_pass(cs);
  r["pass"] = ok;
  const int code = ok ? kOk : kResidual;
  r["exit_code"] = code;
  return {r, code};
}

/// Runs one command; errors are folded into the report and exit code.
inline Outcome run_command(const std::string& cmd, const RunConfig& cfg, const TolSet& tol) {
  json head = report_head(cmd, cfg, tol);
  try {
    validate(cfg.params);
    const Model m(cfg.params);
    if (cmd == "verify") return finish(head, verify_checks(m, cfg.seed, tol, cfg.workers));
    if (cmd == "matelem") string_sites(string_kind(general_side(cfg.params.bcase)), cfg.site, m.n());
    const SpectrumData d = spectrum_data(m, cfg.seed, cfg.workers);
    if (cmd == "spectrum") {
      head["solutions"] = spectrum_json(m, d);
      head["completeness"] = d.completeness;
      head["sov_basis_condition"] = d.condition;
      head["solver"] = {{"newton", d.sol.newton_found},
                        {"homotopy", d.sol.homotopy_found},
                        {"oracle", d.sol.oracle_found}};
      return finish(head, spectrum_checks(m, d, tol));
    }
    if (cmd == "scalar") return finish(head, scalar_checks(m, d, cfg.seed, cfg.samples, tol, cfg.workers));
    if (cmd == "matelem") {
      const auto es = matelem_entries(m, d, cfg.site, cfg.couples, cfg.seed, cfg.workers);
      head["site"] = cfg.site;
      head["calibration_constant"] = kCalibration;
      head["elements"] = matelem_json(es);
      return finish(head, {{"matelem_scatter", max_scatter(es), tol.r(1e-7)}});
    }
    return fail_outcome(head, kValidation, "unknown command '" + cmd + "'");
  } catch (const ValidationError& e) {
    return fail_outcome(head, kValidation, e.what());
  } catch (const SolverIncomplete& e) {
    return fail_outcome(head, kSolver, e.what());
  } catch (const NumError& e) {
    return fail_outcome(head, kSolver, e.what());
  }
}

inline std::vector<cplx> default_sweep_values(const ModelParams& p) {
  const cplx k = p.bcase == Case::Minus ? p.minus.kappa : p.plus.kappa;
  std::vector<cplx> v;
  for (double s : {0.5, 0.75, 1.0, 1.25, 1.5}) v.push_back(s * k);
  return v;
}

struct SweepRow {
  std::size_t index;
  std::string hash;
  cplx value;
  int code;
  std::size_t solutions;
  double sov_residual, oracle_distance, completeness, matelem_scatter;
};

inline std::string csv_number(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

inline std::string sweep_csv(const std::string& param, const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "index,config_hash,param,re,im,exit_code,solutions,max_sov_residual,oracle_distance,completeness,"
        "matelem_scatter\n";
  for (const auto& r : rows)
    os << r.index << ',' << r.hash << ',' << param << ',' << csv_number(r.value.real()) << ','
       << csv_number(r.value.imag()) << ',' << r.code << ',' << r.solutions << ',' << csv_number(r.sov_residual)
       << ',' << csv_number(r.oracle_distance) << ',' << csv_number(r.completeness) << ','
       << csv_number(r.matelem_scatter) << '\n';
  return os.str();
}

/// Grid points run on the worker pool; rows and reports are ordered by grid index.
inline Outcome run_sweep(const RunConfig& cfg, const TolSet& tol, std::string& csv) {
  json head = report_head("sweep", cfg, tol);
  SweepSpec sp;
  if (cfg.sweep) {
    sp = *cfg.sweep;
  } else {
    sp.param = cfg.params.bcase == Case::Minus ? "kappa_minus" : "kappa_plus";
    sp.values = default_sweep_values(cfg.params);
  }
  try {
    string_sites(string_kind(general_side(cfg.params.bcase)), cfg.site, cfg.params.n_sites);
  } catch (const ValidationError& e) {
    return fail_outcome(head, kValidation, e.what());
  }
  const std::size_t count = sp.values.size();
  std::vector<SweepRow> rows(count);
  std::vector<json> points(count);
  parallel_for(count, cfg.workers, [&](std::size_t k) {
    RunConfig c = cfg;
    c.workers = 1;
    sweep_slot(c.params, sp.param) = sp.values[k];
    SweepRow row{k, config_hash(c.params, c.seed), sp.values[k], kOk, 0, NAN, NAN, NAN, NAN};
    json pt = report_head("sweep_point", c, tol);
    pt["index"] = k;
    try {
      validate(c.params);
      const Model m(c.params);
      const SpectrumData d = spectrum_data(m, c.seed, 1);
      auto cs = spectrum_checks(m, d, tol);
      const auto es = matelem_entries(m, d, c.site, c.couples, c.seed, 1);
      cs.push_back({"matelem_scatter", max_scatter(es), tol.r(1e-7)});
      row.solutions = d.sol.taus.size();
      row.sov_residual = d.sol.max_residual;
      row.oracle_distance = d.match.worst;
      row.completeness = d.completeness;
      row.matelem_scatter = max_scatter(es);
      Outcome o = finish(pt, cs);
      row.code = o.code;
      points[k] = o.report;
    } catch (const ValidationError& e) {
      row.code = kValidation;
      points[k] = fail_outcome(pt, kValidation, e.what()).report;
    } catch (const std::runtime_error& e) {
      row.code = kSolver;
      points[k] = fail_outcome(pt, kSolver, e.what()).report;
    }
    rows[k] = row;
  });
  int code = kOk;
  for (const auto& r : rows) code = std::max(code, r.code);
  head["sweep_param"] = sp.param;
  head["site"] = cfg.site;
  head["points"] = points;
  head["pass"] = code == kOk;
  head["exit_code"] = code;
  csv = sweep_csv(sp.param, rows);
  return {head, code};
}

}  // namespace sovxxz::cli
