#include "sblab/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <utility>

#include "CLI11.hpp"
#include "sblab/model_io.hpp"
#include "sblab/model_zoo.hpp"
#include "sblab/sbl_engine.hpp"

namespace sblab {

namespace {

using nlohmann::ordered_json;

std::string basename_of(const std::string& path) {
  return std::filesystem::path(path).filename().string();
}

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

ordered_json config_json(const RunConfig& cfg) {
  ordered_json tol;
  tol["regularity"] = cfg.tol_regularity;
  tol["ll"] = cfg.tol_ll;
  tol["defining"] = cfg.tol_defining;
  tol["path"] = cfg.tol_path;
  ordered_json j;
  j["samples"] = cfg.sample_count;
  j["seed"] = cfg.seed;
  j["tolerances"] = std::move(tol);
  return j;
}

ordered_json system_json(const BalanceSystem& sys) {
  ordered_json j;
  j["name"] = sys.name;
  j["fields"] = sys.field_names;
  j["spatial_dim"] = sys.spatial_dim;
  return j;
}

ordered_json vector_json(const Eigen::VectorXd& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

ordered_json matrix_json(const Eigen::MatrixXd& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

ordered_json classification_json(const ClassificationReport& r) {
  ordered_json j;
  j["elliptic"] = r.elliptic;
  j["holonomic"] = to_string(r.holonomic_verdict);
  j["sampled_points"] = r.sampled_points;
  j["singular_points"] = r.singular_points;
  j["det_w_sign_flip"] = r.det_w_sign_flip;
  ordered_json evs = ordered_json::array();
  for (const auto& ev : r.common_eigenvectors) {
    ordered_json e;
    e["zeta"] = vector_json(ev.zeta);
    e["eigenvalues"] = ev.eigenvalues;
    evs.push_back(std::move(e));
  }
  j["common_eigenvectors"] = std::move(evs);
  if (r.two_field) {
    ordered_json t;
    t["J"] = matrix_json(r.two_field->J);
    t["det"] = r.two_field->detJ;
    t["type"] = to_string(r.two_field->type);
    j["two_field"] = std::move(t);
  }
  ordered_json tol;
  tol["eigen"] = r.tolerances.eigen;
  tol["rank"] = r.tolerances.rank;
  tol["regularity"] = r.tolerances.regularity;
  tol["two_field_det"] = r.tolerances.two_field_det;
  j["tolerances"] = std::move(tol);
  return j;
}

CommandResult fail_with(ordered_json rep, const char* type,
                        const std::string& message, int code) {
  ordered_json err;
  err["type"] = type;
  err["message"] = message;
  rep["error"] = std::move(err);
  return {code, std::move(rep)};
}

template <typename Fn>
CommandResult guarded(ordered_json& rep, Fn&& body) {
  try {
    return body();
  } catch (const ParseError& e) {
    return fail_with(std::move(rep), "input", e.what(), kExitInputError);
  } catch (const DimensionMismatchError& e) {
    return fail_with(std::move(rep), "input", e.what(), kExitInputError);
  } catch (const NumericError& e) {
    return fail_with(std::move(rep), "numeric", e.what(), kExitNumericError);
  } catch (const Error& e) {
    return fail_with(std::move(rep), "numeric", e.what(), kExitNumericError);
  }
}

// ---- line-oriented input files for cattaneo-derive ----

struct IniLine {
  int line_no = 0;
  std::string text;
};

std::map<std::string, std::vector<IniLine>> scan_sections(const std::string& text,
                                                          const std::string& where) {
  std::map<std::string, std::vector<IniLine>> out;
  std::istringstream in(text);
  std::string raw;
  std::string current;
  int line_no = 0;
  auto trim = [](std::string s) {
    const char* ws = " \t\r";
    auto b = s.find_first_not_of(ws);
    if (b == std::string::npos) return std::string();
    auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, raw)) {
    ++line_no;
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ParseError(where + " line " + std::to_string(line_no) +
                         ": malformed section header");
      current = trim(line.substr(1, line.size() - 2));
      if (current.empty())
        throw ParseError(where + " line " + std::to_string(line_no) +
                         ": empty section name");
      out[current];
      continue;
    }
    if (current.empty())
      throw ParseError(where + " line " + std::to_string(line_no) +
                       ": content before any section header");
    out[current].push_back({line_no, line});
  }
  return out;
}

std::string read_file_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Expr parse_expr_at(const std::string& text, const std::string& where, int line) {
  try {
    return parse_expr(text);
  } catch (const SyntaxError& e) {
    throw ParseError(where + " line " + std::to_string(line) + ": " + e.what());
  }
}

double parse_number_at(const std::string& text, const std::string& where, int line) {
  Expr e = parse_expr_at(text, where, line);
  if (!e.free_vars().empty())
    throw ParseError(where + " line " + std::to_string(line) +
                     ": expected a numeric constant, got '" + text + "'");
  return e.eval({});
}

// Splits "key = rhs" or "key in [lo, hi]"; kind 0 = assign, 1 = range.
struct KeyLine {
  std::string key;
  int kind = 0;
  std::string rhs;            // assign
  double lo = 0.0, hi = 0.0;  // range
};

KeyLine split_key_line(const IniLine& l, const std::string& where) {
  auto fail = [&](const std::string& msg) {
    throw ParseError(where + " line " + std::to_string(l.line_no) + ": " + msg);
  };
  auto eq = l.text.find('=');
  auto inkw = l.text.find(" in ");
  KeyLine out;
  if (eq != std::string::npos && (inkw == std::string::npos || eq < inkw)) {
    out.key = l.text.substr(0, eq);
    out.kind = 0;
    out.rhs = l.text.substr(eq + 1);
  } else if (inkw != std::string::npos) {
    out.key = l.text.substr(0, inkw);
    out.kind = 1;
    std::string rest = l.text.substr(inkw + 4);
    auto lb = rest.find('[');
    auto comma = rest.find(',');
    auto rb = rest.find(']');
    if (lb == std::string::npos || comma == std::string::npos ||
        rb == std::string::npos || !(lb < comma && comma < rb))
      fail("expected 'name in [lo, hi]'");
    out.lo = parse_number_at(rest.substr(lb + 1, comma - lb - 1), where, l.line_no);
    out.hi = parse_number_at(rest.substr(comma + 1, rb - comma - 1), where, l.line_no);
  } else {
    fail("expected 'key = value' or 'name in [lo, hi]'");
  }
  auto trim = [](std::string s) {
    const char* ws = " \t";
    auto b = s.find_first_not_of(ws);
    if (b == std::string::npos) return std::string();
    auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
  };
  out.key = trim(out.key);
  out.rhs = trim(out.rhs);
  if (out.key.empty()) fail("missing key");
  return out;
}

CattaneoSpec parse_cattaneo_spec(const std::string& path) {
  const std::string where = basename_of(path);
  auto sections = scan_sections(read_file_text(path), where);
  auto it = sections.find("cattaneo");
  if (it == sections.end()) throw ParseError(where + ": missing [cattaneo] section");
  for (const auto& [name, lines] : sections)
    if (name != "cattaneo")
      throw ParseError(where + ": unknown section [" + name + "]");

  CattaneoSpec spec;
  bool have_tau = false, have_lambda = false, have_eps = false, have_theta = false;
  Interval theta{}, qall{-1.0, 1.0};
  std::array<std::optional<Interval>, 3> qind;
  for (const auto& l : it->second) {
    KeyLine kl = split_key_line(l, where);
    if (kl.kind == 0) {
      Expr e = parse_expr_at(kl.rhs, where, l.line_no);
      if (kl.key == "tau") {
        spec.tau = e;
        have_tau = true;
      } else if (kl.key == "Lambda") {
        spec.Lambda = e;
        have_lambda = true;
      } else if (kl.key == "eps_eq") {
        spec.eps_eq = e;
        have_eps = true;
      } else {
        throw ParseError(where + " line " + std::to_string(l.line_no) +
                         ": unknown key '" + kl.key + "'");
      }
    } else {
      Interval iv{kl.lo, kl.hi};
      if (kl.key == "theta") {
        theta = iv;
        have_theta = true;
      } else if (kl.key == "q") {
        qall = iv;
      } else if (kl.key == "q1" || kl.key == "q2" || kl.key == "q3") {
        qind[kl.key[1] - '1'] = iv;
      } else {
        throw ParseError(where + " line " + std::to_string(l.line_no) +
                         ": unknown range '" + kl.key + "'");
      }
    }
  }
  if (!have_tau || !have_lambda || !have_eps || !have_theta)
    throw ParseError(where + ": [cattaneo] needs tau, Lambda, eps_eq and a theta range");
  spec.box = {theta, qind[0].value_or(qall), qind[1].value_or(qall),
              qind[2].value_or(qall)};
  spec.validate();
  return spec;
}

struct ParsedParams {
  CattaneoSblParams params;
  std::optional<double> theta_base;
};

ParsedParams parse_cattaneo_params(const std::string& path) {
  const std::string where = basename_of(path);
  auto sections = scan_sections(read_file_text(path), where);
  auto it = sections.find("params");
  if (it == sections.end()) throw ParseError(where + ": missing [params] section");
  for (const auto& [name, lines] : sections)
    if (name != "params")
      throw ParseError(where + ": unknown section [" + name + "]");

  ParsedParams out;
  out.params.lambda0_hat = Expr::constant(0.0);
  out.params.Khat = {Expr::constant(0.0), Expr::constant(0.0), Expr::constant(0.0)};
  for (const auto& l : it->second) {
    KeyLine kl = split_key_line(l, where);
    if (kl.kind != 0)
      throw ParseError(where + " line " + std::to_string(l.line_no) +
                       ": ranges are not allowed in [params]");
    const std::string& k = kl.key;
    if (k == "lambda0_hat")
      out.params.lambda0_hat = parse_expr_at(kl.rhs, where, l.line_no);
    else if (k == "Khat1" || k == "Khat2" || k == "Khat3")
      out.params.Khat[k[4] - '1'] = parse_expr_at(kl.rhs, where, l.line_no);
    else if (k == "alpha")
      out.params.alpha = parse_number_at(kl.rhs, where, l.line_no);
    else if (k == "a0")
      out.params.a0 = parse_number_at(kl.rhs, where, l.line_no);
    else if (k == "k1" || k == "k2" || k == "k3")
      out.params.kA[k[1] - '1'] = parse_number_at(kl.rhs, where, l.line_no);
    else if (k == "m1" || k == "m2" || k == "m3")
      out.params.mA[k[1] - '1'] = parse_number_at(kl.rhs, where, l.line_no);
    else if (k == "f0")
      out.params.f0 = parse_number_at(kl.rhs, where, l.line_no);
    else if (k == "theta_base")
      out.theta_base = parse_number_at(kl.rhs, where, l.line_no);
    else
      throw ParseError(where + " line " + std::to_string(l.line_no) +
                       ": unknown key '" + k + "'");
  }
  if (out.params.alpha < 0.0)
    throw ParseError(where + ": alpha must be nonnegative");
  return out;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ParseError(path + ": cannot open for writing");
  f << text;
  if (!f) throw ParseError(path + ": write failed");
}

}  // namespace

void RunConfig::validate() const {
  if (sample_count < 1)
    throw DimensionMismatchError("config: sample_count must be >= 1");
  if (!(tol_regularity > 0.0) || !(tol_ll > 0.0) || !(tol_defining > 0.0) ||
      !(tol_path > 0.0))
    throw DimensionMismatchError("config: tolerances must be positive");
}

CommandResult run_analyze(const std::string& model_file, const RunConfig& cfg) {
  ordered_json rep;
  rep["command"] = "analyze";
  rep["input"] = basename_of(model_file);
  return guarded(rep, [&]() -> CommandResult {
    cfg.validate();
    BalanceSystem sys = load_model_file(model_file);
    SystemEvaluator ev(std::move(sys));
    rep["system"] = system_json(ev.system());
    rep["config"] = config_json(cfg);
    ClassifyTolerances tol;
    tol.regularity = cfg.tol_regularity;
    ClassificationReport cls = classify(ev, cfg.sample_count, cfg.seed, tol);
    rep["classification"] = classification_json(cls);
    return {kExitPass, std::move(rep)};
  });
}

CommandResult run_verify(const std::string& model_file, const std::string& sbl_file,
                         const RunConfig& cfg) {
  ordered_json rep;
  rep["command"] = "verify";
  rep["model"] = basename_of(model_file);
  rep["candidate"] = basename_of(sbl_file);
  return guarded(rep, [&]() -> CommandResult {
    cfg.validate();
    BalanceSystem sys = load_model_file(model_file);
    SblCandidate cand = load_sbl_file(sbl_file, sys);
    SystemEvaluator ev(std::move(sys));
    rep["system"] = system_json(ev.system());
    rep["config"] = config_json(cfg);

    CandidateEvaluator ce(ev, cand);
    DensityEvaluator h0 = DensityEvaluator::in_y(ev, cand.K0);
    auto ys = sample_box(ev.system().domain_box, cfg.sample_count, cfg.seed);

    double max_flux = 0.0, max_source = 0.0, max_def = 0.0;
    int singular = 0;
    std::map<Definiteness, int> verdicts;
    std::vector<StatePoint> regular_pts;
    for (const auto& y : ys) {
      StatePoint p = make_state(ev.system(), y);
      if (!is_regular(ev, p, cfg.tol_regularity)) {
        ++singular;
        continue;
      }
      regular_pts.push_back(p);
      Eigen::VectorXd lambda = h0.gradient_w(ev, y);
      LlResidual lr = ll_residual(ev, ce, lambda, p);
      max_flux = std::max(max_flux, lr.r_flux);
      max_source = std::max(max_source, lr.r_source);
      max_def = std::max(max_def, defining_residual(ev, h0, p).max_abs);
      ++verdicts[hessian_and_convexity(ev, h0, p).verdict];
    }
    if (regular_pts.empty())
      throw NumericError("every sampled state has a singular density Jacobian");

    bool ll_pass = max_flux <= cfg.tol_ll && max_source <= cfg.tol_ll;
    bool def_pass = max_def <= cfg.tol_defining;

    ordered_json ll;
    ll["max_flux_residual"] = max_flux;
    ll["max_source_residual"] = max_source;
    ll["points"] = static_cast<int>(regular_pts.size());
    ll["singular_skipped"] = singular;
    ll["pass"] = ll_pass;
    rep["lagrange_liu"] = std::move(ll);

    ordered_json def;
    def["max_residual"] = max_def;
    def["pass"] = def_pass;
    rep["defining"] = std::move(def);

    ordered_json cx;
    int distinct = 0;
    std::string single;
    for (auto d : {Definiteness::PosDef, Definiteness::NegDef,
                   Definiteness::Indefinite, Definiteness::Semi}) {
      int n = verdicts.count(d) ? verdicts[d] : 0;
      cx[to_string(d)] = n;
      if (n > 0) {
        ++distinct;
        single = to_string(d);
      }
    }
    cx["overall"] = distinct == 1 ? single : "Mixed";
    rep["convexity"] = std::move(cx);

    ResidualInequalityReport ri = residual_inequality(ev, h0, regular_pts);
    ordered_json rij;
    rij["min_production"] = ri.min_value;
    rij["holds"] = ri.holds;
    rep["residual_inequality"] = std::move(rij);

    if (!ll_pass) {
      int checked = std::min<int>(50, static_cast<int>(regular_pts.size()));
      int feasible = 0;
      double worst_resid = 0.0;
      for (int i = 0; i < checked; ++i) {
        MainFieldSolve s = solve_main_fields(ev, ce, regular_pts[i], cfg.tol_ll);
        if (s.feasible) ++feasible;
        worst_resid = std::max(worst_resid, s.flux_residual);
      }
      ordered_json mf;
      mf["checked"] = checked;
      mf["feasible"] = feasible;
      mf["max_flux_residual"] = worst_resid;
      if (feasible == 0)
        mf["note"] =
            "no multiplier vector solves the flux equations at the sampled "
            "states; the candidate is not generated by any density h0";
      rep["main_field_solve"] = std::move(mf);
    }

    bool pass = ll_pass && def_pass;
    rep["pass"] = pass;
    return {pass ? kExitPass : kExitChecksFailed, std::move(rep)};
  });
}

CommandResult run_cattaneo_derive(const std::string& spec_file,
                                  const std::string& params_file,
                                  const DeriveOutputs& out, const RunConfig& cfg,
                                  std::optional<double> theta_base) {
  ordered_json rep;
  rep["command"] = "cattaneo-derive";
  rep["spec"] = basename_of(spec_file);
  rep["params"] = basename_of(params_file);
  return guarded(rep, [&]() -> CommandResult {
    cfg.validate();
    CattaneoSpec spec = parse_cattaneo_spec(spec_file);
    ParsedParams pp = parse_cattaneo_params(params_file);
    double base = theta_base ? *theta_base
                             : pp.theta_base.value_or(spec.box[0].lo);
    if (!spec.box[0].contains(base))
      throw DimensionMismatchError("theta_base outside the theta range");
    rep["config"] = config_json(cfg);
    rep["base"] = base;

    Expr eps = cattaneo_internal_energy(spec, pp.params);
    BalanceSystem sys = cattaneo_system(spec, eps);
    SblCandidate cand = cattaneo_sbl(spec, pp.params, base, eps);
    write_text_file(out.model_path, render_model_text(sys));
    write_text_file(out.sbl_path, render_sbl_text(cand));
    ordered_json outs;
    outs["model"] = out.model_path;
    outs["sbl"] = out.sbl_path;
    rep["outputs"] = std::move(outs);

    CattaneoEntropyReport ent =
        cattaneo_entropy_check(spec, pp.params, cfg.sample_count, cfg.seed);
    ordered_json ej;
    ej["is_entropy_type"] = ent.is_entropy_type;
    ej["min_production"] = ent.min_production;
    ej["max_khat_deriv"] = ent.max_khat_deriv;
    rep["entropy"] = std::move(ej);

    SystemEvaluator ev(std::move(sys));
    CandidateEvaluator ce(ev, cand);
    DensityEvaluator h0 = DensityEvaluator::in_y(ev, cand.K0);
    int n = std::min(cfg.sample_count, 100);
    auto ys = sample_box(ev.system().domain_box, n, cfg.seed);
    double max_flux = 0.0, max_source = 0.0;
    for (const auto& y : ys) {
      StatePoint p = make_state(ev.system(), y);
      Eigen::VectorXd lambda = h0.gradient_w(ev, y);
      LlResidual lr = ll_residual(ev, ce, lambda, p);
      max_flux = std::max(max_flux, lr.r_flux);
      max_source = std::max(max_source, lr.r_source);
    }
    bool pass = max_flux <= cfg.tol_ll && max_source <= cfg.tol_ll;
    ordered_json sc;
    sc["max_flux_residual"] = max_flux;
    sc["max_source_residual"] = max_source;
    sc["points"] = n;
    sc["pass"] = pass;
    rep["self_check"] = std::move(sc);
    rep["pass"] = pass;
    return {pass ? kExitPass : kExitChecksFailed, std::move(rep)};
  });
}

std::string report_text(const ordered_json& rep) {
  std::ostringstream out;
  const std::string cmd = rep.value("command", "?");
  if (rep.contains("error")) {
    out << cmd << ": error (" << rep["error"]["type"].get<std::string>()
        << "): " << rep["error"]["message"].get<std::string>() << "\n";
    return out.str();
  }
  if (cmd == "analyze") {
    const auto& c = rep["classification"];
    out << "analyze " << rep["input"].get<std::string>() << "\n";
    out << "  system " << rep["system"]["name"].get<std::string>() << ": "
        << rep["system"]["fields"].size() << " fields, "
        << rep["system"]["spatial_dim"].get<int>() << " axes\n";
    out << "  elliptic: " << (c["elliptic"].get<bool>() ? "yes" : "no") << "\n";
    out << "  holonomic: " << c["holonomic"].get<std::string>() << "\n";
    out << "  common eigenvectors: " << c["common_eigenvectors"].size() << "\n";
    if (c.contains("two_field"))
      out << "  two-field type: " << c["two_field"]["type"].get<std::string>()
          << " (det J = " << fmt_g(c["two_field"]["det"].get<double>()) << ")\n";
    out << "  sampled " << c["sampled_points"].get<int>() << " states ("
        << c["singular_points"].get<int>() << " singular)\n";
  } else if (cmd == "verify") {
    out << "verify " << rep["model"].get<std::string>() << " + "
        << rep["candidate"].get<std::string>() << "\n";
    const auto& ll = rep["lagrange_liu"];
    out << "  multiplier residual: flux " << fmt_g(ll["max_flux_residual"].get<double>())
        << ", source " << fmt_g(ll["max_source_residual"].get<double>()) << " -> "
        << (ll["pass"].get<bool>() ? "pass" : "FAIL") << "\n";
    const auto& def = rep["defining"];
    out << "  defining residual: " << fmt_g(def["max_residual"].get<double>())
        << " -> " << (def["pass"].get<bool>() ? "pass" : "FAIL") << "\n";
    out << "  convexity: " << rep["convexity"]["overall"].get<std::string>() << "\n";
    const auto& ri = rep["residual_inequality"];
    out << "  residual inequality: min production "
        << fmt_g(ri["min_production"].get<double>()) << ", "
        << (ri["holds"].get<bool>() ? "holds" : "violated") << "\n";
    if (rep.contains("main_field_solve") && rep["main_field_solve"].contains("note"))
      out << "  note: " << rep["main_field_solve"]["note"].get<std::string>() << "\n";
    out << "  result: " << (rep["pass"].get<bool>() ? "PASS" : "FAIL") << "\n";
  } else if (cmd == "cattaneo-derive") {
    out << "cattaneo-derive " << rep["spec"].get<std::string>() << " + "
        << rep["params"].get<std::string>() << "\n";
    out << "  wrote " << rep["outputs"]["model"].get<std::string>() << ", "
        << rep["outputs"]["sbl"].get<std::string>() << "\n";
    const auto& e = rep["entropy"];
    out << "  entropy type: " << (e["is_entropy_type"].get<bool>() ? "yes" : "no")
        << " (min production " << fmt_g(e["min_production"].get<double>()) << ")\n";
    const auto& sc = rep["self_check"];
    out << "  self check: flux residual "
        << fmt_g(sc["max_flux_residual"].get<double>()) << " -> "
        << (sc["pass"].get<bool>() ? "pass" : "FAIL") << "\n";
    out << "  result: " << (rep["pass"].get<bool>() ? "PASS" : "FAIL") << "\n";
  } else {
    out << rep.dump(2) << "\n";
  }
  return out.str();
}

int run_main(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err) {
  CLI::App app{"workbench for supplementary balance laws of zero-order systems"};
  app.name("sblab");
  app.require_subcommand(1);

  struct CommonOpts {
    RunConfig cfg;
    std::string json_out;
    std::string format = "json";
  };
  auto add_common = [](CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--samples", o.cfg.sample_count, "states to sample (default 200)");
    cmd->add_option("--seed", o.cfg.seed, "sampling seed (default 42)");
    cmd->add_option("--tol-regularity", o.cfg.tol_regularity,
                    "relative det W cutoff (default 1e-10)");
    cmd->add_option("--tol-ll", o.cfg.tol_ll,
                    "multiplier residual tolerance (default 1e-8)");
    cmd->add_option("--tol-defining", o.cfg.tol_defining,
                    "defining residual tolerance (default 1e-8)");
    cmd->add_option("--tol-path", o.cfg.tol_path,
                    "flux path-agreement tolerance (default 1e-7)");
    cmd->add_option("--json", o.json_out, "also write the JSON report to this file");
    cmd->add_option("--format", o.format, "report format on stdout")
        ->check(CLI::IsMember({"json", "text"}));
  };

  std::string model_file, sbl_file, spec_file, params_file;
  CommonOpts an, ve, de;
  DeriveOutputs douts;
  double base_val = 0.0;

  CLI::App* analyze = app.add_subcommand("analyze", "classify a model's defining system");
  analyze->add_option("model", model_file, "model file")->required();
  add_common(analyze, an);

  CLI::App* verify = app.add_subcommand("verify", "check a candidate against a model");
  verify->add_option("model", model_file, "model file")->required();
  verify->add_option("sbl", sbl_file, "candidate file")->required();
  add_common(verify, ve);

  CLI::App* derive = app.add_subcommand(
      "cattaneo-derive", "derive the compatible model and candidate from constitutive data");
  derive->add_option("spec", spec_file, "constitutive spec file")->required();
  derive->add_option("params", params_file, "family parameter file")->required();
  derive->add_option("--model-out", douts.model_path,
                     "output model path (default derived.model)");
  derive->add_option("--sbl-out", douts.sbl_path,
                     "output candidate path (default derived.sbl)");
  CLI::Option* base_opt =
      derive->add_option("--base", base_val, "integration base for theta");
  add_common(derive, de);

  std::vector<const char*> argv;
  argv.push_back("sblab");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitPass : kExitInputError;
  }

  CommandResult res;
  const CommonOpts* opts = nullptr;
  if (analyze->parsed()) {
    opts = &an;
    res = run_analyze(model_file, an.cfg);
  } else if (verify->parsed()) {
    opts = &ve;
    res = run_verify(model_file, sbl_file, ve.cfg);
  } else {
    opts = &de;
    std::optional<double> base;
    if (base_opt->count() > 0) base = base_val;
    res = run_cattaneo_derive(spec_file, params_file, douts, de.cfg, base);
  }

  if (!opts->json_out.empty()) {
    std::ofstream f(opts->json_out, std::ios::binary);
    if (!f) {
      err << opts->json_out << ": cannot open for writing\n";
      return kExitInputError;
    }
    f << res.report.dump(2) << "\n";
  }
  if (opts->format == "text")
    out << report_text(res.report);
  else
    out << res.report.dump(2) << "\n";
  if (res.report.contains("error"))
    err << res.report["error"]["message"].get<std::string>() << "\n";
  return res.exit_code;
}

}  // namespace sblab
