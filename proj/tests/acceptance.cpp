// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the number of failures.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "svkit/error.hpp"
#include "svkit/fields.hpp"
#include "svkit/horizontal.hpp"
#include "svkit/io.hpp"
#include "svkit/operators.hpp"
#include "svkit/reach.hpp"
#include "svkit/sampling.hpp"
#include "svkit/scenario.hpp"
#include "svkit/subunit.hpp"
#include "svkit/verify.hpp"

using namespace svkit;
namespace fs = std::filesystem;

#ifndef SVKIT_SCENARIO_DIR
#define SVKIT_SCENARIO_DIR "scenarios"
#endif

namespace tol {
constexpr double bracket = 1e-9;
constexpr double pucci = 1e-9;
constexpr double ellipticity_rel = 1e-9;
constexpr double loop_c3 = 1.0;        // |endpoint - (0,0,-4s^2)| <= loop_c3 * s^3
constexpr double local_fraction = 0.95;
constexpr double scp = 1e-9;
constexpr double lift = 1e-9;
constexpr double linearity = 0.05;
constexpr double witness = 1e-9;
}  // namespace tol

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail << "failed: ";
      else detail << "; ";
      detail << what;
      pass = false;
    }
  }
};

static std::string fmt(double v) { return format_double(v); }

static OperatorSpec horizontal_pucci(const VectorFieldFamily& fam, double lambda, double Lambda) {
  ModelCoefficients mc;
  mc.a = [](const Vec&) { return 1.0; };
  mc.E = pucci_part(lambda, Lambda, PucciSign::Plus);
  return euclideanize(build_model_equation(mc, fam), fam);
}

static Mat random_between(Rng& rng, int n, double lambda, double Lambda) {
  const Mat Q = rng.random_orthogonal(n);
  Vec d(n);
  for (int i = 0; i < n; ++i) d(i) = rng.uniform(lambda, Lambda);
  return Q * d.asDiagonal() * Q.transpose();
}

static Outcome rank_ground_truth() {
  Outcome o;
  Rng rng(101);
  const auto gr = catalog_family("grushin");
  const auto he = catalog_family("heisenberg1");
  int checked = 0;
  double worst = 0.0;
  for (int s = 0; s < 100; ++s) {
    Vec xg(2);
    xg << 0.0, rng.uniform(-5, 5);
    o.require(hormander_rank(gr, xg, 1).rank == 1, "grushin depth-1 rank at x1=0");
    o.require(hormander_rank(gr, xg, 2).rank == 2, "grushin depth-2 rank at x1=0");
    Vec xo = rng.uniform_in_box(Vec::Constant(2, -5), Vec::Constant(2, 5));
    o.require(hormander_rank(gr, xo, 1).rank == (xo(0) != 0.0 ? 2 : 1), "grushin depth-1 rank off the line");
    o.require(hormander_rank(gr, xo, 2).rank == 2, "grushin depth-2 rank off the line");
    Vec xh = rng.uniform_in_box(Vec::Constant(3, -5), Vec::Constant(3, 5));
    o.require(hormander_rank(he, xh, 2).rank == 3, "heisenberg depth-2 rank");
    worst = std::max(worst, (lie_bracket(gr, 0, 1, xo) - Vec::Unit(2, 1)).norm());
    Vec e(3);
    e << 0, 0, -4;
    worst = std::max(worst, (lie_bracket(he, 0, 1, xh) - e).norm());
    checked += 3;
  }
  o.require(worst <= tol::bracket, "bracket closed form error " + fmt(worst));
  o.detail << "points=" << checked << " max bracket error=" << fmt(worst);
  return o;
}

static Outcome pucci_algebra() {
  Outcome o;
  Rng rng(202);
  double worst_sandwich = 0.0, worst_dual = 0.0, worst_oracle = 0.0;
  for (int s = 0; s < 1000; ++s) {
    const int n = rng.integer(1, 5);
    const double lambda = rng.uniform(0.1, 2.0);
    const double Lambda = lambda + rng.uniform(0.0, 3.0);
    const Mat M = rng.random_symmetric(n, rng.uniform(0.1, 10.0));
    const Mat A = random_between(rng, n, lambda, Lambda);
    const double mid = -(A * M).trace();
    const double hi = pucci_extremal(M, lambda, Lambda, PucciSign::Plus);
    const double lo = pucci_extremal(M, lambda, Lambda, PucciSign::Minus);
    worst_sandwich = std::max({worst_sandwich, lo - mid, mid - hi});
    worst_dual = std::max(worst_dual, std::abs(hi + pucci_extremal(-M, lambda, Lambda, PucciSign::Minus)));
  }
  for (int s = 0; s < 200; ++s) {
    const int n = rng.integer(1, 5);
    const double lambda = rng.uniform(0.1, 2.0);
    const double Lambda = lambda + rng.uniform(0.0, 3.0);
    const Mat M = rng.random_symmetric(n, 3.0);
    for (auto sign : {PucciSign::Plus, PucciSign::Minus}) {
      const double exact = pucci_extremal(M, lambda, Lambda, sign);
      const double oracle = pucci_variational_oracle(M, lambda, Lambda, sign, 64, 1000 + s, true);
      worst_oracle = std::max(worst_oracle, std::abs(exact - oracle));
    }
  }
  o.require(worst_sandwich <= tol::pucci, "sandwich violated by " + fmt(worst_sandwich));
  o.require(worst_dual == 0.0, "duality gap " + fmt(worst_dual));
  o.require(worst_oracle <= tol::pucci, "oracle mismatch " + fmt(worst_oracle));
  o.detail << "sandwich excess=" << fmt(std::max(0.0, worst_sandwich)) << " duality gap=" << fmt(worst_dual)
           << " oracle error=" << fmt(worst_oracle);
  return o;
}

static Outcome subunit_properties() {
  Outcome o;
  Rng rng(303);
  int columns = 0;
  for (const char* name : {"grushin", "heisenberg1"}) {
    const auto fam = catalog_family(name).with_domain(Box::cube(name[0] == 'g' ? 2 : 3, 2.0));
    const OperatorSpec F = horizontal_pucci(fam, 1.0, 2.0);
    for (int s = 0; s < 50; ++s) {
      const Vec x = rng.uniform_in_box(fam.domain().lo, fam.domain().hi);
      for (int i = 0; i < fam.count(); ++i) {
        const auto c = certify_subunit(F, x, fam.field(i, x), SubunitMode::Plus);
        o.require(c.verdict == Verdict::Certified, std::string(name) + " column not certified");
        ++columns;
      }
    }
  }

  int agree = 0, with_radius = 0;
  for (int s = 0; s < 50; ++s) {
    const int d = rng.integer(2, 4);
    const int rank = rng.integer(1, d);
    LinearTerm t;
    const Mat A = rng.random_psd(d, rank);
    t.A = [A](const Vec&) { return A; };
    Vec b = rng.normal_vec(d);
    t.b = [b](const Vec&) { return b; };
    // half the instances pick Z in the range of A, half generic
    Vec Z = s % 2 == 0 ? Vec(A * rng.normal_vec(d)) : rng.normal_vec(d);
    const OperatorSpec F = linear_operator(t, d);
    const bool cert = certify_subunit(F, Vec::Zero(d), Z, SubunitMode::Plus).verdict == Verdict::Certified;
    const bool radius = subunit_scaling_radius(A, Z).r_max > 0.0;
    if (cert == radius) ++agree;
    if (radius) ++with_radius;
  }
  o.require(agree == 50, "linear round trip agreed on " + std::to_string(agree) + "/50");

  int hjb_agree = 0, hjb_holds = 0;
  for (int s = 0; s < 20; ++s) {
    const int d = rng.integer(2, 3);
    LinearOperatorFamily fam;
    fam.dim = d;
    const int members = rng.integer(2, 3);
    Vec common = rng.normal_vec(d);
    for (int a = 0; a < members; ++a) {
      LinearTerm t;
      Mat A = rng.random_psd(d, rng.integer(1, d));
      if (s % 2 == 0) A += common * common.transpose();  // a shared range direction
      t.A = [A](const Vec&) { return A; };
      Vec b = (s % 4 == 1) ? Vec(rng.normal_vec(d)) : Vec(Vec::Zero(d));
      t.b = [b](const Vec&) { return b; };
      fam.terms.push_back(t);
    }
    const Vec Z = s % 2 == 0 ? common : rng.normal_vec(d);
    const Vec x = Vec::Zero(d);
    const bool structural = family_subunit(fam, x, Z, FamilyMode::HjbInf).holds;
    const bool direct =
        certify_subunit(build_hjb(fam, HjbMode::Inf, true), x, Z, SubunitMode::Plus).verdict == Verdict::Certified;
    if (structural == direct) ++hjb_agree;
    if (structural) ++hjb_holds;
  }
  o.require(hjb_agree == 20, "hjb-inf equivalence agreed on " + std::to_string(hjb_agree) + "/20");
  o.detail << "columns certified=" << columns << " linear round trip " << agree << "/50 (" << with_radius
           << " positive radius) hjb-inf " << hjb_agree << "/20 (" << hjb_holds << " hold)";
  return o;
}

static Outcome ellipticity_witnesses() {
  Outcome o;
  Rng rng(404);
  double worst_inf = 0.0, worst_m = 0.0, worst_pucci = 0.0;
  for (int s = 0; s < 500; ++s) {
    const int m = rng.integer(1, 4);
    Vec q = rng.normal_vec(m);
    if (q.norm() < 1e-3) q(0) += 1.0;
    const Mat Y = rng.random_symmetric(m, 2.0);
    const double g = rng.uniform(0.0, 10.0);
    const Mat Yg = Y - g * q * q.transpose();
    const double qn = q.norm();

    const double a0 = infinity_laplacian(q, Y, 3.0), a1 = infinity_laplacian(q, Yg, 3.0);
    const double ea = g * std::pow(qn, 4);
    worst_inf = std::max(worst_inf, std::abs(a1 - a0 - ea) / std::max({1.0, std::abs(a0), std::abs(a1), ea}));

    const double mexp = rng.uniform(1.2, 5.0);
    const double m0 = m_laplacian(q, Y, mexp), m1 = m_laplacian(q, Yg, mexp);
    const double em = g * std::pow(qn, mexp) * (mexp - 1.0);
    worst_m = std::max(worst_m, std::abs(m1 - m0 - em) / std::max({1.0, std::abs(m0), std::abs(m1), em}));

    const double lambda = rng.uniform(0.1, 2.0), Lambda = lambda + rng.uniform(0.0, 2.0);
    const double p0 = pucci_extremal(Y, lambda, Lambda, PucciSign::Plus);
    const double p1 = pucci_extremal(Yg, lambda, Lambda, PucciSign::Plus);
    const double ep = lambda * g * qn * qn;
    worst_pucci = std::max(worst_pucci, (ep - (p1 - p0)) / std::max({1.0, std::abs(p0), std::abs(p1), ep}));
  }
  o.require(worst_inf <= tol::ellipticity_rel, "infinity-Laplacian witness error " + fmt(worst_inf));
  o.require(worst_m <= tol::ellipticity_rel, "m-Laplacian witness error " + fmt(worst_m));
  o.require(worst_pucci <= tol::ellipticity_rel, "Pucci lower bound shortfall " + fmt(worst_pucci));
  o.detail << "samples=500 inf-lap rel err=" << fmt(worst_inf) << " m-lap rel err=" << fmt(worst_m)
           << " pucci shortfall=" << fmt(std::max(0.0, worst_pucci));
  return o;
}

static Vec heisenberg_loop(const VectorFieldFamily& he, double s, double dt) {
  ControlSignal sig;
  for (int k = 0; k < 4; ++k) {
    Vec b = Vec::Zero(2);
    b(k % 2) = k < 2 ? 1.0 : -1.0;
    sig.append(b, s);
  }
  return integrate_trajectory(he, Vec::Zero(3), sig, 4 * s, dt).states.back();
}

static Outcome reachability() {
  Outcome o;
  const auto he = catalog_family("heisenberg1").with_domain(Box::cube(3, 1.0));
  std::ostringstream loop;
  double prev_ratio = 0.0;
  for (double s : {0.1, 0.05, 0.025}) {
    const Vec e = heisenberg_loop(he, s, s / 20.0);
    Vec expect(3);
    expect << 0, 0, -4 * s * s;
    const double err = (e - expect).norm();
    o.require(err <= tol::loop_c3 * s * s * s, "loop endpoint error " + fmt(err) + " at s=" + fmt(s));
    const double ratio = e(2) / (s * s);
    o.require(std::abs(ratio + 4.0) <= tol::loop_c3 * s, "x3/s^2 = " + fmt(ratio) + " at s=" + fmt(s));
    loop << " s=" << s << ":err=" << fmt(err);
    prev_ratio = ratio;
  }
  (void)prev_ratio;

  Vec target(3);
  target << 0, 0, 0.5;
  const auto bh = btc_connect(he, Vec::Zero(3), target, he.domain(), {64, 64, 64}, 6.0, 0.0);
  o.require(bh.success, "heisenberg btc: " + bh.message);

  const auto gr = catalog_family("grushin").with_domain(Box::cube(2, 2.0));
  Vec g0(2), g1(2);
  g0 << -1, 0;
  g1 << 1, 1;
  const auto bg = btc_connect(gr, g0, g1, gr.domain(), {64, 64}, 20.0, 0.0);
  o.require(bg.success, "grushin btc: " + bg.message);

  const auto lc = local_controllability(catalog_family("heisenberg1"), Vec::Zero(3), 0.2, 24, 2.0);
  o.require(lc.fraction >= tol::local_fraction, "local controllability fraction " + fmt(lc.fraction));

  o.detail << "loop" << loop.str() << " heis btc s=" << fmt(bh.s) << " err=" << fmt(bh.final_error)
           << " grushin btc s=" << fmt(bg.s) << " err=" << fmt(bg.final_error) << " local fraction="
           << fmt(lc.fraction) << " (" << lc.cells_reached << "/" << lc.cells_in_ball << ")";
  return o;
}

static Outcome barrier_strictness_cases() {
  Outcome o;
  const std::vector<double> gammas = log_grid(0.1, 1000.0, 41);
  Vec z(2), y(2);
  z << 1, 0;
  y << 0, 0;

  const OperatorSpec lap = pucci_operator(2, 1.0, 1.0, PucciSign::Plus);
  double min_at_z = INFINITY;
  for (double g : {1.01, 1.1, 1.5, 2.0, 5.0, 10.0, 50.0}) {
    const BarrierJet bj = barrier_eval(Barrier::make(z, y, g), z);
    min_at_z = std::min(min_at_z, lap.eval(z, bj.value, bj.gradient, bj.hessian));
  }
  o.require(min_at_z > 0.0, "F[v](z) not positive for gamma > 1");
  const auto sl = barrier_strictness(lap, z, y, 0.1, gammas, 200, {Vec::Unit(2, 0), Vec::Unit(2, 1)});
  o.require(sl.found && sl.C > 0.0 && sl.halvings == 0, "laplacian barrier: " + sl.message);

  const auto gr = catalog_family("grushin").with_domain(Box::cube(2, 2.0));
  const auto sg = barrier_strictness(horizontal_pucci(gr, 1.0, 1.0), z, y, 0.1, gammas, 200,
                                     {gr.field(0, z), gr.field(1, z)});
  o.require(sg.found && sg.C > 0.0, "grushin barrier: " + sg.message);

  PolynomialField e1{{Polynomial::constant(2, 1.0), Polynomial(2)}};
  const auto line = VectorFieldFamily::from_polynomials("line", {e1}, Box::cube(2, 2.0));
  Vec zd(2);
  zd << 0, 1;
  const auto sd = barrier_strictness(horizontal_pucci(line, 1.0, 1.0), zd, y, 0.1, gammas, 200, {Vec::Unit(2, 0)});
  o.require(!sd.found && !sd.precheck_ok, "degenerate case should fail at the precheck");

  o.detail << "min F[v](z) over gamma>1=" << fmt(min_at_z) << " laplacian gamma=" << fmt(sl.gamma)
           << " C=" << fmt(sl.C) << " grushin gamma=" << fmt(sg.gamma) << " C=" << fmt(sg.C)
           << " degenerate: \"" << sd.message << "\"";
  return o;
}

static Outcome counterexample_regressions() {
  Outcome o;
  const auto f = [](const Vec& x) { return x.norm() == 0.0 ? -1.0 : 0.0; };
  const OperatorSpec F = smooth_counterexample_operator(f, 2);
  GridFunction u = GridFunction::sample(Box::cube(2, 1.0), {21, 21}, [](const Vec&) { return 0.0; });
  u.tag = Semicontinuity::UscPointlist;
  u.set_exceptional(u.nearest_node(Vec::Zero(2)), 1.0);
  const auto rep = check_subsolution(F, u);
  o.require(!rep.refuted, "discontinuous u refuted");

  AuditSpec spec;
  Rng rng(707);
  spec.x_points.push_back(Vec::Zero(2));
  for (int i = 0; i < 30; ++i) spec.x_points.push_back(rng.uniform_in_box(Vec::Constant(2, -1), Vec::Constant(2, 1)));
  spec.n_samples = 300;
  spec.seed = 708;
  const auto audit = audit_operator(F, spec);
  o.require(audit.proper_ok, "audit reports improper operator");
  bool at_origin = false, elsewhere = false;
  for (const auto& p : audit.scaling_failure_points) (p.norm() == 0.0 ? at_origin : elsewhere) = true;
  o.require(at_origin && !elsewhere, "scaling failures not exactly at the origin");
  o.detail << "subsolution verdict=" << rep.verdict << " (touching jets " << rep.touching_jets
           << ") scaling failure points=" << audit.scaling_failure_points.size() << " of "
           << audit.sampled_points.size() << " sampled";
  return o;
}

static Json run_and_load(const std::string& scenario, const fs::path& out) {
  ScenarioOptions opt;
  opt.out_dir = out.string();
  const auto res = run_scenario((fs::path(SVKIT_SCENARIO_DIR) / (scenario + ".json")).string(), opt);
  if (res.exit_code != 0) throw Error(ErrorCode::Precondition, scenario + " exited with " + std::to_string(res.exit_code));
  return parse_json(read_text_file((out / (res.name + ".report.json")).string()));
}

static fs::path scratch(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("svkit-acceptance-" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

static Outcome scp_machinery() {
  Outcome o;
  const fs::path out = scratch("scp");
  const Json scp = run_and_load("scp-instances", out);
  int instances = 0;
  double worst = -INFINITY;
  for (const auto& t : scp["tasks"]) {
    if (t["task"] != "scp-difference") continue;
    ++instances;
    const double m = t["result"]["margin"].get<double>();
    worst = std::max(worst, m);
    o.require(t["result"]["preconditions_ok"].get<bool>(), "scp preconditions failed");
  }
  o.require(instances == 3, "expected 3 scp instances, found " + std::to_string(instances));
  o.require(worst <= tol::scp, "scp margin " + fmt(worst));

  const Json hjb = run_and_load("heisenberg-hjb", out);
  bool found = false;
  double max_F = 0, bound = 0, spread = 1;
  for (const auto& t : hjb["tasks"]) {
    if (t["task"] != "strict-lift") continue;
    found = true;
    const auto& r = t["result"];
    max_F = r["max_F"].get<double>();
    bound = r["bound"].get<double>();
    spread = r["linearity_spread"].get<double>();
    const auto eps = r["epsilon"].get<double>(), delta = r["delta"].get<double>();
    const auto eta = r["eta_bar"].get<double>(), L = r["L_K"].get<double>();
    // the radius must follow min((eta_bar - delta)/L_K, r1) with r1 from the scenario
    o.require(delta > 0 && delta < eta, "delta outside (0, eta_bar)");
    o.require(r["r_bar"].get<double>() <= (eta - delta) / L + 1e-15, "r_bar above (eta_bar - delta)/L_K");
    o.require(bound < 0.0 && bound >= -eps * delta * std::exp(0.5 * r["r_bar"].get<double>() * r["r_bar"].get<double>()),
              "bound outside [-eps delta e^(r_bar^2/2), 0)");
    o.require(r["linearity_slopes"].size() >= 2, "linearity needs two epsilons");
  }
  o.require(found, "no strict-lift task in the bundled scenario");
  o.require(max_F <= bound + tol::lift, "strict lift max F " + fmt(max_F) + " above bound " + fmt(bound));
  o.require(spread <= tol::linearity, "linearity spread " + fmt(spread));
  o.detail << "scp instances=" << instances << " worst margin=" << fmt(worst) << " lift max F=" << fmt(max_F)
           << " bound=" << fmt(bound) << " linearity spread=" << fmt(spread);
  fs::remove_all(out);
  return o;
}

static Outcome propagation() {
  Outcome o;
  const Box box = Box::cube(2, 1.0);
  PolynomialField e1{{Polynomial::constant(2, 1.0), Polynomial(2)}};
  const auto line = VectorFieldFamily::from_polynomials("line", {e1}, box);
  const auto u = GridFunction::sample(box, {21, 21}, [](const Vec& x) { return -x(1) * x(1); });
  const auto pr = propagation_test(horizontal_pucci(line, 1.0, 1.0), line, u);
  o.require(pr.status == PropagationStatus::Pass && pr.max_deviation <= pr.tol, "line propagation: " + pr.message);
  o.require(pr.endpoints_in_K, "trajectory endpoints outside K");

  const auto plane = catalog_family("euclidean:2").with_domain(box);
  const auto rr = propagation_test(horizontal_pucci(plane, 1.0, 1.0), plane, u);
  double wv = NAN;
  if (rr.precheck && !rr.precheck->violations.empty()) wv = rr.precheck->violations.front().value;
  o.require(rr.status == PropagationStatus::Refused, "full Laplacian case not refused");
  o.require(std::abs(wv - 2.0) <= tol::witness, "refusal witness F=" + fmt(wv));
  o.detail << "line: deviation=" << fmt(pr.max_deviation) << " <= tol=" << fmt(pr.tol) << " trajectories="
           << pr.trajectories_checked << "; plane: refused with witness F=" << fmt(wv);
  return o;
}

static bool same_bytes(const fs::path& a, const fs::path& b) { return read_text_file(a.string()) == read_text_file(b.string()); }

static Outcome determinism() {
  Outcome o;
  int scenarios = 0, files = 0;
  for (const auto& entry : fs::directory_iterator(SVKIT_SCENARIO_DIR)) {
    if (entry.path().extension() != ".json") continue;
    ++scenarios;
    for (auto fmt_ : {ReportFormat::StructuredText, ReportFormat::Csv}) {
      ScenarioOptions a, b;
      const fs::path da = scratch("det-a"), db = scratch("det-b");
      a.out_dir = da.string();
      b.out_dir = db.string();
      a.format = b.format = fmt_;
      const auto ra = run_scenario(entry.path().string(), a);
      const auto rb = run_scenario(entry.path().string(), b);
      o.require(ra.exit_code == rb.exit_code, entry.path().filename().string() + " exit codes differ");
      o.require(ra.files.size() == rb.files.size(), entry.path().filename().string() + " file lists differ");
      for (std::size_t i = 0; i < std::min(ra.files.size(), rb.files.size()); ++i) {
        const fs::path fa = ra.files[i], fb = rb.files[i];
        o.require(fa.filename() == fb.filename() && same_bytes(fa, fb), fa.filename().string() + " differs");
        ++files;
      }
      fs::remove_all(da);
      fs::remove_all(db);
    }
  }
  o.require(scenarios >= 3, "fewer than three bundled scenarios");
  o.detail << "scenarios=" << scenarios << " files compared=" << files;
  return o;
}

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"bracket and rank ground truth", rank_ground_truth},
      {"Pucci algebra", pucci_algebra},
      {"subunit properties", subunit_properties},
      {"ellipticity witnesses", ellipticity_witnesses},
      {"reachability", reachability},
      {"barrier strictness", barrier_strictness_cases},
      {"counterexample regressions", counterexample_regressions},
      {"comparison machinery", scp_machinery},
      {"propagation of maxima", propagation},
      {"determinism", determinism},
  };
  int failures = 0;
  int k = 0;
  for (const auto& c : criteria) {
    ++k;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("%s %2d %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", k, c.name, o.detail.str().c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures;
}
