#include "svkit/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <set>

#include "svkit/error.hpp"
#include "svkit/horizontal.hpp"
#include "svkit/reach.hpp"
#include "svkit/sampling.hpp"
#include "svkit/subunit.hpp"
#include "svkit/verify.hpp"

namespace fs = std::filesystem;

namespace svkit {

ReportFormat parse_report_format(const std::string& s) {
  if (s == "structured-text") return ReportFormat::StructuredText;
  if (s == "csv") return ReportFormat::Csv;
  throw Error(ErrorCode::Parse, "unknown report format '" + s + "'");
}

std::vector<std::string> catalog_operator_kinds() {
  return {"pucci", "inf-laplacian", "m-laplacian", "model", "hjb", "isaacs", "linear", "counterexample"};
}

std::vector<std::string> scenario_task_names() {
  return {"certify-subunit", "hormander-rank", "reach",     "btc",         "check-subsolution", "barrier",
          "hopf",            "smp-propagate",  "scp-difference", "strict-lift", "audit"};
}

namespace {

// ------------------------------------------------------------ config access (errors are Parse)

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorCode::Parse, msg); }

const Json& need(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) bad(std::string("missing '") + key + "'");
  return j[key];
}

double num(const Json& j, const char* key, double def) {
  if (!j.contains(key)) return def;
  if (!j[key].is_number()) bad(std::string("'") + key + "' must be a number");
  return j[key].get<double>();
}

double num(const Json& j, const char* key) {
  const Json& v = need(j, key);
  if (!v.is_number()) bad(std::string("'") + key + "' must be a number");
  return v.get<double>();
}

int integer(const Json& j, const char* key, int def) {
  if (!j.contains(key)) return def;
  if (!j[key].is_number_integer()) bad(std::string("'") + key + "' must be an integer");
  return j[key].get<int>();
}

bool boolean(const Json& j, const char* key, bool def) {
  if (!j.contains(key)) return def;
  if (!j[key].is_boolean()) bad(std::string("'") + key + "' must be true or false");
  return j[key].get<bool>();
}

std::string text(const Json& j, const char* key, const std::string& def) {
  if (!j.contains(key)) return def;
  if (!j[key].is_string()) bad(std::string("'") + key + "' must be a string");
  return j[key].get<std::string>();
}

Vec vec(const Json& j, const char* key, int dim) {
  Vec v = vec_from_json(need(j, key), key);
  if (dim >= 0 && v.size() != dim) bad(std::string("'") + key + "' has the wrong dimension");
  return v;
}

std::vector<double> doubles(const Json& j, const char* key, std::vector<double> def) {
  if (!j.contains(key)) return def;
  const Json& v = j[key];
  if (v.is_object()) return log_grid(num(v, "lo"), num(v, "hi"), integer(v, "n", 16));
  Vec x = vec_from_json(v, key);
  return std::vector<double>(x.data(), x.data() + x.size());
}

Box box_or(const Json& j, const char* key, const Box& def) {
  if (!j.contains(key)) return def;
  Box b = box_from_json(j[key]);
  if (b.dim() != def.dim()) bad(std::string("'") + key + "' has the wrong dimension");
  return b;
}

std::vector<int> resolution(const Json& j, int d, int def) {
  if (!j.contains("resolution")) return std::vector<int>(d, def);
  const Json& r = j["resolution"];
  if (r.is_number_integer()) return std::vector<int>(d, r.get<int>());
  if (!r.is_array() || static_cast<int>(r.size()) != d) bad("'resolution' needs one entry per dimension");
  std::vector<int> out;
  for (const auto& v : r) {
    if (!v.is_number_integer() || v.get<int>() < 1) bad("'resolution' entries must be positive integers");
    out.push_back(v.get<int>());
  }
  return out;
}

/// Points: a list of vectors, or {"random": n, "box"?: ..., "seed"?: ...}.
std::vector<Vec> points(const Json& j, const char* key, int d, const Box& def_box, std::uint64_t seed) {
  const Json& v = need(j, key);
  std::vector<Vec> out;
  if (v.is_object()) {
    const int n = integer(v, "random", 10);
    const Box b = box_or(v, "box", def_box);
    Rng rng(v.contains("seed") ? static_cast<std::uint64_t>(integer(v, "seed", 0)) : seed);
    for (int i = 0; i < n; ++i) out.push_back(rng.uniform_in_box(b.lo, b.hi));
    return out;
  }
  if (!v.is_array()) bad(std::string("'") + key + "' must be a list of points or a random spec");
  for (const auto& p : v) {
    Vec x = vec_from_json(p, key);
    if (x.size() != d) bad(std::string("'") + key + "' has a point of the wrong dimension");
    out.push_back(x);
  }
  return out;
}

SmoothFunction smooth_from_json(const Json& j, int d) {
  const std::string kind = text(j, "kind", "quadratic");
  if (kind == "zero") return SmoothFunction::quadratic(0.0, Vec::Zero(d), Mat::Zero(d, d));
  if (kind != "quadratic") bad("unknown function kind '" + kind + "'");
  const double c = num(j, "c", 0.0);
  const Vec b = j.contains("b") ? vec(j, "b", d) : Vec::Zero(d);
  const Mat Q = j.contains("Q") ? mat_from_json(j["Q"], "Q") : Mat::Zero(d, d);
  if (Q.rows() != d || Q.cols() != d) bad("'Q' must be d x d");
  try {
    return SmoothFunction::quadratic(c, b, Q);
  } catch (const Error& e) {
    bad(e.what());
  }
}

// ------------------------------------------------------------ operators

LinearTerm member_from_json(const Json& j, const VectorFieldFamily& family) {
  const int d = family.dim();
  LinearTerm t;
  const Json& a = need(j, "A");
  if (a.is_object()) {
    const double s = num(a, "sigma_scale", 1.0);
    if (!(s >= 0.0)) bad("'sigma_scale' must be nonnegative");
    t.A = [family, s](const Vec& x) -> Mat {
      const Mat S = family.sigma(x);
      return s * S * S.transpose();
    };
    t.sigma = [family, s](const Vec& x) -> Mat { return std::sqrt(s) * family.sigma(x); };
  } else {
    const Mat A = mat_from_json(a, "A");
    if (A.rows() != d || A.cols() != d) bad("member 'A' must be d x d");
    t.A = [A](const Vec&) -> Mat { return A; };
  }
  if (j.contains("b")) {
    const Vec b = vec(j, "b", d);
    t.b = [b](const Vec&) -> Vec { return b; };
  }
  if (j.contains("c")) {
    const double c = num(j, "c");
    t.c = [c](const Vec&) { return c; };
  }
  if (j.contains("f")) {
    const double f = num(j, "f");
    t.f = [f](const Vec&) { return f; };
  }
  return t;
}

LinearOperatorFamily linear_family_from_json(const Json& members, const VectorFieldFamily& family) {
  if (!members.is_array() || members.empty()) bad("'members' must be a non-empty list");
  LinearOperatorFamily lf;
  lf.dim = family.dim();
  for (const auto& m : members) lf.terms.push_back(member_from_json(m, family));
  return lf;
}

PucciSign sign_of(const Json& j) {
  const std::string s = text(j, "sign", "plus");
  if (s == "plus") return PucciSign::Plus;
  if (s == "minus") return PucciSign::Minus;
  bad("'sign' must be plus or minus");
}

HorizontalPart part_from_json(const Json& j, const std::string& kind) {
  if (kind == "pucci") {
    const double lo = num(j, "lambda", 1.0), hi = num(j, "Lambda", 1.0);
    if (!(lo > 0.0 && lo <= hi)) bad("Pucci constants need 0 < lambda <= Lambda");
    return pucci_part(lo, hi, sign_of(j));
  }
  if (kind == "inf-laplacian") return infinity_laplacian_part(num(j, "h", 3.0));
  if (kind == "m-laplacian") return m_laplacian_part(num(j, "m"));
  bad("unknown principal part '" + kind + "'");
}

OperatorSpec model_from_json(const Json& j, const HorizontalPart& E, const VectorFieldFamily& family) {
  ModelCoefficients mc;
  const double a = num(j, "a", 1.0), c = num(j, "c", 0.0);
  mc.a = [a](const Vec&) { return a; };
  if (c != 0.0) mc.c = [c](const Vec&) { return c; };
  mc.k = num(j, "k", 1.0);
  mc.E = E;
  try {
    return euclideanize(build_model_equation(mc, family), family);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidArgument || e.code() == ErrorCode::Precondition) bad(e.what());
    throw;
  }
}

}  // namespace

BuiltOperator operator_from_json(const Json& desc, const VectorFieldFamily& family) {
  if (!desc.is_object()) bad("operator descriptor must be an object");
  const std::string kind = text(desc, "kind", "");
  const int d = family.dim();
  BuiltOperator out;
  if (kind == "pucci" && !boolean(desc, "horizontal", true)) {
    const double lo = num(desc, "lambda", 1.0), hi = num(desc, "Lambda", 1.0);
    if (!(lo > 0.0 && lo <= hi)) bad("Pucci constants need 0 < lambda <= Lambda");
    out.F = pucci_operator(d, lo, hi, sign_of(desc));
  } else if (kind == "pucci" || kind == "inf-laplacian" || kind == "m-laplacian") {
    out.F = model_from_json(desc, part_from_json(desc, kind), family);
  } else if (kind == "model") {
    const Json& E = need(desc, "E");
    out.F = model_from_json(desc, part_from_json(E, text(E, "kind", "")), family);
  } else if (kind == "hjb") {
    const std::string mode = text(desc, "mode", "inf");
    if (mode != "inf" && mode != "sup") bad("hjb 'mode' must be inf or sup");
    const bool homogeneous = boolean(desc, "homogeneous", false);
    out.linear = linear_family_from_json(need(desc, "members"), family);
    out.F = build_hjb(*out.linear, mode == "inf" ? HjbMode::Inf : HjbMode::Sup, homogeneous);
    out.hjb_inf_homogeneous = mode == "inf" && homogeneous;
  } else if (kind == "isaacs") {
    const std::string mode = text(desc, "mode", "inf-sup");
    if (mode != "inf-sup" && mode != "sup-inf") bad("isaacs 'mode' must be inf-sup or sup-inf");
    const Json& rows = need(desc, "members");
    if (!rows.is_array() || rows.empty()) bad("isaacs 'members' must be a non-empty list of lists");
    IsaacsFamily fam;
    fam.dim = d;
    for (const auto& row : rows) {
      if (!row.is_array() || row.empty()) bad("isaacs 'members' rows must be non-empty lists");
      std::vector<LinearTerm> r;
      for (const auto& m : row) r.push_back(member_from_json(m, family));
      fam.terms.push_back(std::move(r));
    }
    out.F = build_isaacs(fam, mode == "inf-sup" ? IsaacsMode::InfSup : IsaacsMode::SupInf);
  } else if (kind == "linear") {
    LinearTerm t = member_from_json(desc, family);
    out.linear = LinearOperatorFamily{d, {t}};
    out.F = linear_operator(t, d);
  } else if (kind == "counterexample") {
    const double f0 = num(desc, "f0", -1.0);
    out.F = smooth_counterexample_operator([f0](const Vec& x) { return x.norm() <= 1e-12 ? f0 : 0.0; }, d);
  } else {
    bad("unknown operator kind '" + kind + "'");
  }
  if (boolean(desc, "reflect", false)) out.F = reflect_operator(out.F);
  return out;
}

VectorFieldFamily family_from_ref(const Json& ref, const std::string& base_dir) {
  try {
    if (ref.is_string()) return catalog_family(ref.get<std::string>());
    if (!ref.is_object()) bad("family reference must be a name or an object");
    VectorFieldFamily fam = ref.contains("catalog")  ? catalog_family(text(ref, "catalog", ""))
                            : ref.contains("file")   ? load_family((fs::path(base_dir) / text(ref, "file", "")).string())
                                                     : family_from_json(ref);
    if (ref.contains("domain")) {
      Box b = box_from_json(ref["domain"]);
      if (b.dim() != fam.dim()) bad("family domain has the wrong dimension");
      fam = fam.with_domain(b);
    }
    return fam;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidArgument) bad(e.what());
    throw;
  }
}

namespace {

GridFunction grid_from_spec(const Json& j, const VectorFieldFamily& family, const std::string& base_dir) {
  const int d = family.dim();
  GridFunction g;
  if (j.contains("file")) {
    g = load_grid((fs::path(base_dir) / text(j, "file", "")).string());
    if (g.dim() != d) bad("grid file has the wrong dimension");
  } else {
    const Box b = box_or(j, "box", family.domain());
    std::vector<int> shape;
    const Json& s = need(j, "shape");
    if (s.is_number_integer())
      shape.assign(d, s.get<int>());
    else if (s.is_array() && static_cast<int>(s.size()) == d)
      for (const auto& v : s) {
        if (!v.is_number_integer()) bad("'shape' entries must be integers");
        shape.push_back(v.get<int>());
      }
    else
      bad("'shape' needs one entry per dimension");
    for (int n : shape)
      if (n < 3) bad("grid shape entries must be at least 3");
    const SmoothFunction f = smooth_from_json(j.contains("function") ? j["function"] : Json{{"kind", "zero"}}, d);
    g = GridFunction::sample(b, shape, f.f);
  }
  if (j.contains("exceptional")) {
    g.tag = Semicontinuity::UscPointlist;
    for (const auto& e : j["exceptional"]) {
      const Vec p = vec(e, "point", d);
      const long n = g.nearest_node(p);
      if ((g.node(n) - p).norm() > 1e-9 * std::max(1.0, p.norm())) bad("exceptional point is not a grid node");
      g.set_exceptional(n, num(e, "value"));
    }
  }
  if (j.contains("tag")) {
    const std::string t = text(j, "tag", "continuous");
    if (t == "continuous")
      g.tag = Semicontinuity::Continuous;
    else if (t == "usc-pointlist")
      g.tag = Semicontinuity::UscPointlist;
    else
      bad("unknown semicontinuity tag '" + t + "'");
  }
  return g;
}

JetParams jet_params(const Json& j, const VectorFieldFamily& family) {
  JetParams p;
  p.rho = integer(j, "rho", p.rho);
  p.p_min = num(j, "p_min", p.p_min);
  p.tol = num(j, "tol", p.tol);
  p.touch_tol = num(j, "touch_tol", p.touch_tol);
  p.p_magnitudes = doubles(j, "p_magnitudes", p.p_magnitudes);
  p.curvatures = doubles(j, "curvatures", p.curvatures);
  p.p_directions = integer(j, "p_directions", p.p_directions);
  if (j.contains("exact_jets")) {
    const SmoothFunction f = smooth_from_json(j["exact_jets"], family.dim());
    p.exact_jet = [f](const Vec& x) { return std::make_pair(f.grad(x), f.hess(x)); };
  }
  return p;
}

std::vector<Vec> z_candidates(const Json& j, const VectorFieldFamily& family, const Vec& x) {
  std::vector<Vec> out;
  if (!j.contains("Z") || (j["Z"].is_string() && j["Z"].get<std::string>() == "fields")) {
    for (int i = 0; i < family.count(); ++i) out.push_back(family.field(i, x));
    return out;
  }
  if (!j["Z"].is_array()) bad("'Z' must be \"fields\" or a list of vectors");
  for (const auto& z : j["Z"]) {
    Vec v = vec_from_json(z, "Z");
    if (v.size() != family.dim()) bad("'Z' vector has the wrong dimension");
    out.push_back(v);
  }
  return out;
}

std::string status(bool ok) { return ok ? "PASS" : "FAIL"; }

std::string csv_cell(const Json& v) {
  if (v.is_number_float()) return format_double(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

std::string vec_text(const Vec& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? " " : "") + format_double(v[i]);
  return s;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string csv() const {
    std::string out;
    for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
    out += "\n";
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + r[i];
      out += "\n";
    }
    return out;
  }
};

struct Outcome {
  std::string status = "FAIL";
  Json result = Json::object();
  Table table;
  std::vector<std::pair<std::string, std::string>> aux;  // (suffix, content)
};

struct Context {
  const VectorFieldFamily& family;
  const BuiltOperator& op;
  std::string base_dir;
  std::uint64_t seed;
  ReportFormat format;
};

// ------------------------------------------------------------ tasks

Outcome task_rank(const Json& t, Context& c) {
  Outcome o;
  const int d = c.family.dim();
  const int depth = integer(t, "depth", 2);
  const int expect = integer(t, "expect_rank", d);
  const double tol = num(t, "tol", 1e-8);
  Json certs = Json::array();
  bool ok = true;
  o.table.header = {"point", "depth", "rank"};
  for (const Vec& x : points(t, "points", d, c.family.domain(), c.seed)) {
    const auto cert = hormander_rank(c.family, x, depth, tol);
    ok = ok && cert.rank == expect;
    certs.push_back(to_json(cert));
    o.table.rows.push_back({vec_text(x), std::to_string(depth), std::to_string(cert.rank)});
  }
  o.result["expect_rank"] = expect;
  o.result["certificates"] = certs;
  o.status = status(ok);
  return o;
}

SubunitMode mode_of(const std::string& s) {
  if (s == "plus") return SubunitMode::Plus;
  if (s == "minus") return SubunitMode::Minus;
  if (s == "strong") return SubunitMode::Strong;
  bad("subunit 'mode' must be plus, minus or strong");
}

Outcome task_certify(const Json& t, Context& c) {
  Outcome o;
  const int d = c.family.dim();
  const SubunitMode mode = mode_of(text(t, "mode", "plus"));
  const std::string expect = text(t, "expect", "certified");
  SearchParams sp;
  sp.n_directions = integer(t, "n_directions", sp.n_directions);
  if (t.contains("gamma_grid")) sp.gamma_grid = doubles(t, "gamma_grid", {});
  Json certs = Json::array();
  bool ok = true;
  o.table.header = {"point", "Z", "verdict", "certified", "refuted", "inconclusive"};
  for (const Vec& x : points(t, "points", d, c.family.domain(), c.seed)) {
    for (const Vec& Z : z_candidates(t, c.family, x)) {
      if (Z.norm() < 1e-12) continue;
      const auto cert = certify_subunit(c.op.F, x, Z, mode, sp);
      ok = ok && to_string(cert.verdict) == expect;
      certs.push_back(to_json(cert));
      o.table.rows.push_back({vec_text(x), vec_text(Z), to_string(cert.verdict), std::to_string(cert.certified),
                              std::to_string(cert.refuted), std::to_string(cert.inconclusive)});
    }
  }
  o.result["expect"] = expect;
  o.result["certificates"] = certs;
  o.status = status(ok && !certs.empty());
  return o;
}

ReachOptions reach_options(const Json& t, Context& c) {
  ReachOptions ro;
  ro.seed = static_cast<std::uint64_t>(integer(t, "control_seed", static_cast<int>(c.seed % 1000000)));
  ro.max_substeps = integer(t, "max_substeps", ro.max_substeps);
  return ro;
}

Outcome task_reach(const Json& t, Context& c) {
  Outcome o;
  const int d = c.family.dim();
  const Vec x0 = vec(t, "origin", d);
  const Box box = box_or(t, "box", c.family.domain());
  const auto res = resolution(t, d, 32);
  const double T = num(t, "T");
  const double dt = num(t, "dt", 0.0);
  const auto ro = reach_options(t, c);
  const ReachableSet rs = reachable_set(c.family, x0, box, res, T, dt, ro);
  const double min_fraction = num(t, "min_fraction", 0.0);
  bool monotone = true;
  if (boolean(t, "check_monotone", true)) {
    const ReachableSet half = reachable_set(c.family, x0, box, res, 0.5 * T, rs.dt, ro);
    for (long k = 0; k < rs.grid.size(); ++k)
      if (half.occupied(k) && !rs.occupied(k)) monotone = false;
    o.result["monotone_half_horizon"] = monotone;
  }
  o.result["dt"] = rs.dt;
  o.result["occupied_cells"] = rs.occupied_count();
  o.result["total_cells"] = rs.grid.size();
  o.result["occupancy_fraction"] = rs.occupancy_fraction();
  o.result["origin_occupied"] = rs.occupied(rs.origin_cell);
  o.aux.emplace_back("reach.json", reachable_set_to_json(rs).dump(1) + "\n");
  if (c.format == ReportFormat::Csv) o.aux.emplace_back("occupancy.csv", reachable_set_csv(rs));
  o.status = status(rs.occupied(rs.origin_cell) && monotone && rs.occupancy_fraction() >= min_fraction);
  return o;
}

Outcome task_btc(const Json& t, Context& c) {
  Outcome o;
  const int d = c.family.dim();
  const Vec x0 = vec(t, "from", d), x1 = vec(t, "to", d);
  const Box box = box_or(t, "box", c.family.domain());
  const auto res = resolution(t, d, 32);
  const auto r = btc_connect(c.family, x0, x1, box, res, num(t, "T_max"), num(t, "tol", 0.0), num(t, "dt", 0.0),
                             reach_options(t, c));
  o.result["success"] = r.success;
  o.result["message"] = r.message;
  o.result["s"] = r.s;
  o.result["final_error"] = r.final_error;
  o.result["tol"] = r.tol;
  o.result["segments"] = r.signal.values.size();
  o.result["occupied_cells"] = r.occupied_cells;
  bool reversible = true;
  if (r.success && !r.signal.values.empty()) {
    const double dt = r.trajectory.times.size() > 1 ? r.trajectory.times[1] - r.trajectory.times[0] : 1e-3;
    const auto back = integrate_trajectory(c.family, r.trajectory.states.back(), r.signal.reversed(), r.s,
                                           std::max(dt, 1e-12), box);
    const double err = back.exited ? std::numeric_limits<double>::infinity() : (back.states.back() - x0).norm();
    reversible = err <= r.tol;
    o.result["reverse_error"] = std::isfinite(err) ? Json(err) : Json("inf");
  }
  o.result["reversible"] = reversible;
  if (r.success) o.aux.emplace_back("trajectory.csv", trajectory_csv(r.trajectory));
  o.status = status(r.success && reversible);
  return o;
}

Outcome task_subsolution(const Json& t, Context& c) {
  Outcome o;
  const GridFunction u = grid_from_spec(need(t, "grid"), c.family, c.base_dir);
  const auto rep = check_subsolution(c.op.F, u, jet_params(t, c.family));
  const std::string expect = text(t, "expect", "consistent-with-subsolution");
  o.result = to_json(rep);
  o.table.header = {"node", "F", "x", "p"};
  for (const auto& v : rep.violations)
    o.table.rows.push_back({std::to_string(v.node), format_double(v.value), vec_text(v.jet.x), vec_text(v.jet.p)});
  o.status = status(rep.verdict == expect);
  return o;
}

Outcome task_barrier(const Json& t, Context& c) {
  Outcome o;
  const int d = c.family.dim();
  const Vec z = vec(t, "z", d), y = vec(t, "y", d);
  const auto cands = z_candidates(t, c.family, z);
  SearchParams sp;
  sp.n_directions = integer(t, "n_directions", 64);
  const auto r = barrier_strictness(c.op.F, z, y, num(t, "r", 0.1), doubles(t, "gamma_grid", log_grid(0.1, 1e4, 25)),
                                    integer(t, "n_samples", 200), cands, c.seed, sp);
  const std::string expect = text(t, "expect", "found");
  o.result["precheck_ok"] = r.precheck_ok;
  o.result["found"] = r.found;
  if (r.certified_Z) o.result["certified_Z"] = vec_to_json(*r.certified_Z);
  o.result["gamma"] = r.gamma;
  o.result["C"] = r.C;
  o.result["r_used"] = r.r_used;
  o.result["halvings"] = r.halvings;
  o.result["samples"] = r.samples;
  o.result["message"] = r.message;
  o.status = status((expect == "found") == r.found);
  return o;
}

Outcome task_hopf(const Json& t, Context& c) {
  Outcome o;
  const int d = c.family.dim();
  const GridFunction u = grid_from_spec(need(t, "grid"), c.family, c.base_dir);
  const auto r = hopf_test(c.op.F, u, vec(t, "x0", d), vec(t, "y", d), num(t, "R"), vec(t, "w", d),
                           doubles(t, "gamma_grid", log_grid(0.1, 1e4, 25)), num(t, "r", 0.5));
  const std::string expect = text(t, "expect", "negative");
  o.result["accepted"] = r.accepted;
  o.result["negative"] = r.negative;
  o.result["gamma"] = r.gamma;
  o.result["epsilon"] = r.epsilon;
  o.result["quotient_bound"] = r.quotient_bound;
  Json m = Json::array();
  o.table.header = {"tau", "quotient"};
  for (const auto& [tau, q] : r.measured) {
    m.push_back(Json{{"tau", tau}, {"quotient", q}});
    o.table.rows.push_back({format_double(tau), format_double(q)});
  }
  o.result["measured"] = m;
  o.result["interior_gap"] = r.interior_gap;
  o.result["nodes_in_X"] = r.nodes_in_X;
  o.result["message"] = r.message;
  const bool ok = expect == "negative" ? (r.accepted && r.negative) : !r.accepted;
  o.status = status(ok);
  return o;
}

Outcome task_propagate(const Json& t, Context& c) {
  Outcome o;
  const GridFunction u = grid_from_spec(need(t, "grid"), c.family, c.base_dir);
  PropagationParams pp;
  pp.tol = num(t, "tol", 0.0);
  pp.n_traj = integer(t, "n_traj", pp.n_traj);
  pp.T = num(t, "T", pp.T);
  pp.dt = num(t, "dt", pp.dt);
  pp.segments = integer(t, "segments", pp.segments);
  pp.seed = c.seed;
  pp.jets = jet_params(t, c.family);
  const auto r = propagation_test(c.op.F, c.family, u, pp);
  const std::string expect = text(t, "expect", "PASS");
  o.result["status"] = to_string(r.status);
  o.result["message"] = r.message;
  if (r.precheck) {
    o.result["precheck_verdict"] = r.precheck->verdict;
    if (!r.precheck->violations.empty()) {
      o.result["precheck_witness_F"] = r.precheck->violations.front().value;
      o.result["precheck_witness"] = to_json(r.precheck->violations.front().jet);
    }
  }
  if (r.x0.size()) o.result["x0"] = vec_to_json(r.x0);
  o.result["max_value"] = r.max_value;
  o.result["tol"] = r.tol;
  o.result["K_cells"] = r.K_cells.size();
  o.result["trajectories_checked"] = r.trajectories_checked;
  o.result["max_deviation"] = r.max_deviation;
  o.result["endpoints_in_K"] = r.endpoints_in_K;
  o.table.header = {"cell"};
  for (long k : r.K_cells) o.table.rows.push_back({std::to_string(k)});
  bool ok = to_string(r.status) == expect;
  if (r.status == PropagationStatus::Pass) ok = ok && r.endpoints_in_K;
  o.status = status(ok);
  return o;
}

const LinearOperatorFamily& task_family(const Json& t, Context& c, std::optional<LinearOperatorFamily>& local) {
  if (t.contains("members")) {
    local = linear_family_from_json(t["members"], c.family);
    return *local;
  }
  if (!c.op.linear) bad("task needs 'members' or an hjb/linear scenario operator");
  return *c.op.linear;
}

Outcome task_scp(const Json& t, Context& c) {
  Outcome o;
  const int d = c.family.dim();
  std::optional<LinearOperatorFamily> local;
  const auto& fam = task_family(t, c, local);
  const auto u = smooth_from_json(need(t, "u"), d), v = smooth_from_json(need(t, "v"), d);
  const auto pts = points(t, "points", d, c.family.domain(), c.seed);
  const auto r = scp_difference_check(fam, u, v, pts, num(t, "tol", 1e-9));
  o.result["preconditions_ok"] = r.preconditions_ok;
  o.result["margin"] = std::isfinite(r.margin) ? Json(r.margin) : Json(format_double(r.margin));
  o.result["samples"] = r.samples;
  if (r.failed_point) o.result["failed_point"] = vec_to_json(*r.failed_point);
  o.result["message"] = r.message;
  o.status = status(r.preconditions_ok && r.pass);
  return o;
}

Outcome task_strict_lift(const Json& t, Context& c) {
  Outcome o;
  const int d = c.family.dim();
  std::optional<LinearOperatorFamily> local;
  const auto& fam = task_family(t, c, local);
  const OperatorSpec F = local ? build_hjb(fam, HjbMode::Inf, true) : c.op.F;
  if (!local && !c.op.hjb_inf_homogeneous) bad("strict-lift needs a homogeneous inf-type hjb operator");
  const auto u = smooth_from_json(need(t, "u"), d);
  const Vec center = vec(t, "center", d);
  const double r1 = num(t, "r1", 0.5);
  const Box K{center.array() - r1, center.array() + r1};
  const double eta_bar = min_ellipticity(c.family, K, integer(t, "eta_nodes", 9));
  double L_K;
  if (t.contains("L_K")) {
    L_K = num(t, "L_K");
  } else {
    L_K = lipschitz_in_p(F, K, integer(t, "lipschitz_samples", 400), c.seed);
    for (std::size_t a = 0; a < fam.terms.size(); ++a)
      for (const Vec& x : {center, Vec(K.lo), Vec(K.hi)}) L_K = std::max(L_K, fam.b(a, x).norm());
  }
  const double delta = t.contains("delta") ? num(t, "delta") : 0.5 * eta_bar;
  const double eps = num(t, "epsilon", 1e-2);
  StrictLift lift;
  try {
    lift = StrictLift::build(center, eps, delta, eta_bar, L_K, r1);
  } catch (const Error& e) {
    o.result["message"] = e.what();
    o.status = "FAIL";
    return o;
  }
  const auto pts = ball_samples(center, lift.r_bar, integer(t, "n_samples", 200), c.seed);
  const auto r = strict_lift_check(F, u, lift, pts);
  o.result["eta_bar"] = eta_bar;
  o.result["L_K"] = L_K;
  o.result["delta"] = delta;
  o.result["r_bar"] = lift.r_bar;
  o.result["lambda"] = lift.lambda;
  o.result["epsilon"] = eps;
  o.result["preconditions_ok"] = r.preconditions_ok;
  o.result["samples"] = r.samples;
  o.result["max_F"] = r.max_F;
  o.result["bound"] = r.bound;
  o.result["max_margin"] = r.max_margin;
  o.result["message"] = r.message;
  bool ok = r.preconditions_ok && r.pass && r.max_F <= r.bound + 1e-9;
  if (t.contains("epsilons")) {
    const auto lin = strict_lift_linearity(F, u, lift, doubles(t, "epsilons", {}), pts);
    o.result["linearity_slopes"] = lin.slopes;
    o.result["linearity_spread"] = lin.spread;
    ok = ok && lin.spread <= num(t, "linearity_tol", 0.05);
  }
  o.status = status(ok);
  return o;
}

Outcome task_audit(const Json& t, Context& c) {
  Outcome o;
  const int d = c.family.dim();
  AuditSpec spec;
  spec.x_box = box_or(t, "box", c.family.domain());
  if (t.contains("x_points")) spec.x_points = points(t, "x_points", d, spec.x_box, c.seed);
  spec.n_samples = integer(t, "n_samples", spec.n_samples);
  spec.p_scale = num(t, "p_scale", spec.p_scale);
  spec.X_scale = num(t, "X_scale", spec.X_scale);
  spec.seed = c.seed;
  const auto r = audit_operator(c.op.F, spec, static_cast<std::size_t>(integer(t, "max_witnesses", 8)));
  o.result = to_json(r);
  bool ok = r.proper_ok == boolean(t, "expect_proper", true);
  if (t.contains("expect_scaling_failures_at")) {
    const auto want = points(t, "expect_scaling_failures_at", d, spec.x_box, c.seed);
    ok = ok && want.size() == r.scaling_failure_points.size();
    for (const Vec& w : want) {
      bool hit = false;
      for (const Vec& g : r.scaling_failure_points) hit = hit || (g - w).norm() <= 1e-12;
      ok = ok && hit;
    }
  } else {
    ok = ok && r.scaling_ok;
  }
  o.table.header = {"scaling_failure_point"};
  for (const Vec& p : r.scaling_failure_points) o.table.rows.push_back({vec_text(p)});
  o.status = status(ok);
  return o;
}

using TaskFn = Outcome (*)(const Json&, Context&);

const std::map<std::string, TaskFn>& task_table() {
  static const std::map<std::string, TaskFn> table{
      {"hormander-rank", task_rank},  {"certify-subunit", task_certify}, {"reach", task_reach},
      {"btc", task_btc},              {"check-subsolution", task_subsolution}, {"barrier", task_barrier},
      {"hopf", task_hopf},            {"smp-propagate", task_propagate}, {"scp-difference", task_scp},
      {"strict-lift", task_strict_lift}, {"audit", task_audit}};
  return table;
}

}  // namespace

ScenarioResult run_scenario(const std::string& config_path, const ScenarioOptions& options) {
  Json cfg;
  try {
    cfg = parse_json(read_text_file(config_path));
  } catch (const Error& e) {
    ScenarioResult r;
    r.exit_code = 2;
    r.error = e.what();
    return r;
  }
  if (cfg.is_object() && !cfg.contains("name")) cfg["name"] = fs::path(config_path).stem().string();
  return run_scenario_json(cfg, fs::path(config_path).parent_path().string(), options);
}

ScenarioResult run_scenario_json(const Json& cfg, const std::string& base_dir, const ScenarioOptions& options) {
  ScenarioResult res;
  std::optional<VectorFieldFamily> family;
  std::optional<BuiltOperator> op;
  ReportFormat format = ReportFormat::StructuredText;
  std::uint64_t seed = 0;
  const Json* tasks = nullptr;
  try {
    if (!cfg.is_object()) bad("config must be an object");
    res.name = text(cfg, "name", "scenario");
    if (res.name.empty() || res.name.find_first_of("/\\") != std::string::npos) bad("invalid scenario name");
    format = options.format ? *options.format : parse_report_format(text(cfg, "format", "structured-text"));
    if (options.seed) {
      seed = *options.seed;
    } else {
      if (cfg.contains("seed") && (!cfg["seed"].is_number_unsigned())) bad("'seed' must be a nonnegative integer");
      seed = cfg.value("seed", std::uint64_t{1});
    }
    family = family_from_ref(need(cfg, "family"), base_dir);
    if (cfg.contains("operator")) op = operator_from_json(cfg["operator"], *family);
    tasks = &need(cfg, "tasks");
    if (!tasks->is_array()) bad("'tasks' must be a list");
    for (const auto& t : *tasks) {
      const std::string name = text(t, "task", "");
      if (!task_table().count(name)) bad("unknown task '" + name + "'");
      const bool self_contained = name == "hormander-rank" || name == "reach" || name == "btc" ||
                                  ((name == "scp-difference" || name == "strict-lift") && t.contains("members"));
      if (!self_contained && !op)
        bad("task '" + name + "' needs an operator");
    }
  } catch (const Error& e) {
    res.exit_code = 2;
    res.error = e.what();
    return res;
  } catch (const nlohmann::json::exception& e) {
    res.exit_code = 2;
    res.error = e.what();
    return res;
  }

  std::error_code ec;
  fs::create_directories(options.out_dir, ec);
  const fs::path out(options.out_dir);
  const BuiltOperator empty_op{};
  const BuiltOperator& the_op = op ? *op : empty_op;

  Json report;
  report["scenario"] = res.name;
  report["seed"] = seed;
  report["family"] = Json{{"name", family->name()}, {"dim", family->dim()}, {"count", family->count()},
                          {"domain", box_to_json(family->domain())}};
  report["operator"] = op ? Json(the_op.F.label) : Json();
  report["tasks"] = Json::array();
  Table summary{{"index", "task", "status", "message"}, {}};
  bool config_error = false;

  auto flush = [&](bool final_write) {
    Json r = report;
    r["summary"] = Json{{"passed", res.passed}, {"failed", res.failed}, {"complete", final_write}};
    const std::string path =
        (out / (res.name + (format == ReportFormat::Csv ? ".summary.csv" : ".report.json"))).string();
    write_text_file(path, format == ReportFormat::Csv ? summary.csv() : r.dump(2) + "\n");
    return path;
  };

  try {
    int index = 0;
    for (const auto& t : *tasks) {
      const std::string name = t["task"].get<std::string>();
      const std::uint64_t task_seed =
          t.contains("seed") && t["seed"].is_number_unsigned() ? t["seed"].get<std::uint64_t>() : seed + index;
      Context ctx{*family, the_op, base_dir, task_seed, format};
      Outcome o;
      try {
        o = task_table().at(name)(t, ctx);
      } catch (const Error& e) {
        o.status = "ERROR";
        o.result = Json{{"error", e.what()}, {"code", static_cast<int>(e.code())}};
        if (e.code() == ErrorCode::Parse && !config_error) {
          config_error = true;
          res.error = "task " + std::to_string(index) + " (" + name + "): " + e.what();
        }
      } catch (const nlohmann::json::exception& e) {
        o.status = "ERROR";
        o.result = Json{{"error", e.what()}};
        if (!config_error) res.error = "task " + std::to_string(index) + " (" + name + "): " + e.what();
        config_error = true;
      }
      (o.status == "PASS" ? res.passed : res.failed)++;
      const std::string stem = res.name + "." + std::to_string(index) + "-" + name;
      for (const auto& [suffix, content] : o.aux) {
        const std::string p = (out / (stem + "." + suffix)).string();
        write_text_file(p, content);
        res.files.push_back(p);
      }
      if (format == ReportFormat::Csv && !o.table.header.empty()) {
        const std::string p = (out / (stem + ".csv")).string();
        write_text_file(p, o.table.csv());
        res.files.push_back(p);
      }
      std::string msg = o.result.is_object() && o.result.contains("message") ? csv_cell(o.result["message"])
                        : o.result.is_object() && o.result.contains("error") ? csv_cell(o.result["error"])
                                                                               : "";
      std::replace(msg.begin(), msg.end(), ',', ';');
      summary.rows.push_back({std::to_string(index), name, o.status, msg});
      report["tasks"].push_back(Json{{"index", index}, {"task", name}, {"status", o.status}, {"result", o.result}});
      flush(false);
      ++index;
    }
    res.files.push_back(flush(true));
  } catch (const Error& e) {
    res.exit_code = 2;
    res.error = e.what();
    return res;
  }
  res.exit_code = config_error ? 2 : (res.failed > 0 ? 1 : 0);
  return res;
}

}  // namespace svkit
