#include "svkit/svkit.h"

#include <cstring>
#include <new>
#include <string>

#include "svkit/error.hpp"
#include "svkit/fields.hpp"
#include "svkit/horizontal.hpp"
#include "svkit/io.hpp"
#include "svkit/reach.hpp"
#include "svkit/scenario.hpp"
#include "svkit/subunit.hpp"
#include "svkit/verify.hpp"

struct svk_family {
  svkit::VectorFieldFamily fam;
};

struct svk_operator {
  svkit::VectorFieldFamily fam;
  svkit::BuiltOperator op;
};

struct svk_grid {
  svkit::GridFunction g;
};

namespace {

thread_local std::string g_last_error;

svk_status fail(svk_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

template <class Fn>
svk_status guard(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return SVK_OK;
  } catch (const svkit::Error& e) {
    return fail(static_cast<svk_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return fail(SVK_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SVK_E_INTERNAL, e.what());
  }
}

#define SVK_REQUIRE(ptr)                                                  \
  do {                                                                    \
    if (!(ptr)) return fail(SVK_E_NULL_POINTER, #ptr " must not be NULL"); \
  } while (0)

svkit::Vec vec(const double* p, int n) { return Eigen::Map<const svkit::Vec>(p, n); }

svkit::Mat mat(const double* p, int n) {
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(p, n, n);
}

void put(const svkit::Vec& v, double* out) { std::memcpy(out, v.data(), sizeof(double) * v.size()); }

void put(const svkit::Mat& m, double* out) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i * m.cols() + j] = m(i, j);
}

}  // namespace

extern "C" {

const char* svk_version(void) { return "1.0.0"; }

const char* svk_last_error(void) { return g_last_error.c_str(); }

const char* svk_status_name(svk_status s) {
  switch (s) {
    case SVK_OK: return "ok";
    case SVK_E_INVALID_ARGUMENT: return "invalid-argument";
    case SVK_E_OUT_OF_DOMAIN: return "out-of-domain";
    case SVK_E_INDEX_OUT_OF_RANGE: return "index-out-of-range";
    case SVK_E_NOT_SYMMETRIC: return "not-symmetric";
    case SVK_E_SINGULAR: return "singular";
    case SVK_E_UNSUPPORTED: return "unsupported";
    case SVK_E_PARSE: return "parse";
    case SVK_E_IO: return "io";
    case SVK_E_PRECONDITION: return "precondition";
    case SVK_E_NUMERICAL: return "numerical";
    case SVK_E_NULL_POINTER: return "null-pointer";
    case SVK_E_BUFFER_TOO_SMALL: return "buffer-too-small";
    case SVK_E_INTERNAL: return "internal";
  }
  return "unknown";
}

svk_status svk_family_catalog(const char* name, svk_family** out) {
  SVK_REQUIRE(name);
  SVK_REQUIRE(out);
  return guard([&] { *out = new svk_family{svkit::catalog_family(name)}; });
}

svk_status svk_family_from_json(const char* json_text, svk_family** out) {
  SVK_REQUIRE(json_text);
  SVK_REQUIRE(out);
  return guard([&] { *out = new svk_family{svkit::family_from_json(svkit::parse_json(json_text))}; });
}

svk_status svk_family_load(const char* path, svk_family** out) {
  SVK_REQUIRE(path);
  SVK_REQUIRE(out);
  return guard([&] { *out = new svk_family{svkit::load_family(path)}; });
}

void svk_family_free(svk_family* family) { delete family; }

svk_status svk_family_dims(const svk_family* f, int* dim, int* count) {
  SVK_REQUIRE(f);
  if (dim) *dim = f->fam.dim();
  if (count) *count = f->fam.count();
  return SVK_OK;
}

svk_status svk_family_set_domain(svk_family* f, const double* lo, const double* hi) {
  SVK_REQUIRE(f);
  SVK_REQUIRE(lo);
  SVK_REQUIRE(hi);
  return guard([&] {
    const int d = f->fam.dim();
    f->fam = f->fam.with_domain(svkit::Box{vec(lo, d), vec(hi, d)});
  });
}

svk_status svk_field_eval(const svk_family* f, int i, const double* x, double* out) {
  SVK_REQUIRE(f);
  SVK_REQUIRE(x);
  SVK_REQUIRE(out);
  return guard([&] { put(f->fam.field(i, vec(x, f->fam.dim())), out); });
}

svk_status svk_field_jacobian(const svk_family* f, int i, const double* x, double* out) {
  SVK_REQUIRE(f);
  SVK_REQUIRE(x);
  SVK_REQUIRE(out);
  return guard([&] { put(f->fam.jacobian(i, vec(x, f->fam.dim())), out); });
}

svk_status svk_lie_bracket(const svk_family* f, int i, int j, const double* x, double* out) {
  SVK_REQUIRE(f);
  SVK_REQUIRE(x);
  SVK_REQUIRE(out);
  return guard([&] { put(svkit::lie_bracket(f->fam, i, j, vec(x, f->fam.dim())), out); });
}

svk_status svk_hormander_rank(const svk_family* f, const double* x, int max_depth, double tol, int* rank) {
  SVK_REQUIRE(f);
  SVK_REQUIRE(x);
  SVK_REQUIRE(rank);
  return guard([&] { *rank = svkit::hormander_rank(f->fam, vec(x, f->fam.dim()), max_depth, tol).rank; });
}

svk_status svk_horizontal_jet(const svk_family* f, const double* x, const double* p, const double* X, double* q_out,
                              double* H_out) {
  SVK_REQUIRE(f);
  SVK_REQUIRE(x);
  SVK_REQUIRE(p);
  SVK_REQUIRE(X);
  SVK_REQUIRE(q_out);
  SVK_REQUIRE(H_out);
  return guard([&] {
    const int d = f->fam.dim();
    const auto jet = svkit::horizontal_jet(f->fam, vec(x, d), vec(p, d), mat(X, d));
    put(jet.q, q_out);
    put(jet.H, H_out);
  });
}

svk_status svk_operator_from_json(const svk_family* f, const char* descriptor, svk_operator** out) {
  SVK_REQUIRE(f);
  SVK_REQUIRE(descriptor);
  SVK_REQUIRE(out);
  return guard([&] {
    auto* op = new svk_operator{f->fam, {}};
    try {
      op->op = svkit::operator_from_json(svkit::parse_json(descriptor), op->fam);
    } catch (...) {
      delete op;
      throw;
    }
    *out = op;
  });
}

void svk_operator_free(svk_operator* op) { delete op; }

svk_status svk_operator_dims(const svk_operator* op, int* dim, int* grad_dim) {
  SVK_REQUIRE(op);
  if (dim) *dim = op->op.F.dim;
  if (grad_dim) *grad_dim = op->op.F.grad_dim;
  return SVK_OK;
}

svk_status svk_operator_eval(const svk_operator* op, const double* x, double r, const double* p, const double* X,
                             double* out) {
  SVK_REQUIRE(op);
  SVK_REQUIRE(x);
  SVK_REQUIRE(p);
  SVK_REQUIRE(X);
  SVK_REQUIRE(out);
  return guard([&] {
    const int n = op->op.F.grad_dim;
    *out = op->op.F.eval(vec(x, op->op.F.dim), r, vec(p, n), mat(X, n));
  });
}

svk_status svk_pucci(const double* M, int n, double lambda, double Lambda, int sign, double* out) {
  SVK_REQUIRE(M);
  SVK_REQUIRE(out);
  if (n < 1) return fail(SVK_E_INVALID_ARGUMENT, "n must be positive");
  if (sign != 1 && sign != -1) return fail(SVK_E_INVALID_ARGUMENT, "sign must be +1 or -1");
  return guard([&] {
    *out = svkit::pucci_extremal(mat(M, n), lambda, Lambda, sign > 0 ? svkit::PucciSign::Plus : svkit::PucciSign::Minus);
  });
}

svk_status svk_certify_subunit(const svk_operator* op, const double* x, const double* Z, svk_subunit_mode mode,
                               svk_verdict* verdict) {
  SVK_REQUIRE(op);
  SVK_REQUIRE(x);
  SVK_REQUIRE(Z);
  SVK_REQUIRE(verdict);
  if (mode < SVK_SUBUNIT_PLUS || mode > SVK_SUBUNIT_STRONG) return fail(SVK_E_INVALID_ARGUMENT, "unknown subunit mode");
  return guard([&] {
    const int d = op->op.F.dim;
    const auto m = mode == SVK_SUBUNIT_PLUS    ? svkit::SubunitMode::Plus
                   : mode == SVK_SUBUNIT_MINUS ? svkit::SubunitMode::Minus
                                               : svkit::SubunitMode::Strong;
    const auto cert = svkit::certify_subunit(op->op.F, vec(x, d), vec(Z, d), m);
    *verdict = cert.verdict == svkit::Verdict::Certified ? SVK_CERTIFIED
               : cert.verdict == svkit::Verdict::Refuted ? SVK_REFUTED
                                                         : SVK_INCONCLUSIVE;
  });
}

svk_status svk_integrate(const svk_family* f, const double* x0, int n_segments, const double* betas,
                         const double* durations, double T, double dt, double* y_end, int* exited) {
  SVK_REQUIRE(f);
  SVK_REQUIRE(x0);
  SVK_REQUIRE(y_end);
  if (n_segments < 0) return fail(SVK_E_INVALID_ARGUMENT, "n_segments must be nonnegative");
  if (n_segments > 0 && (!betas || !durations)) return fail(SVK_E_NULL_POINTER, "betas and durations are required");
  return guard([&] {
    const int d = f->fam.dim(), m = f->fam.count();
    svkit::ControlSignal sig;
    for (int k = 0; k < n_segments; ++k) sig.append(vec(betas + k * m, m), durations[k]);
    const auto tr = svkit::integrate_trajectory(f->fam, vec(x0, d), sig, T, dt);
    put(tr.states.back(), y_end);
    if (exited) *exited = tr.exited.has_value();
  });
}

svk_status svk_btc_connect(const svk_family* f, const double* x0, const double* x1, const double* lo,
                           const double* hi, const int* resolution, double T_max, double tol, int* success, double* s,
                           double* final_error) {
  SVK_REQUIRE(f);
  SVK_REQUIRE(x0);
  SVK_REQUIRE(x1);
  SVK_REQUIRE(lo);
  SVK_REQUIRE(hi);
  SVK_REQUIRE(resolution);
  SVK_REQUIRE(success);
  return guard([&] {
    const int d = f->fam.dim();
    const auto r = svkit::btc_connect(f->fam, vec(x0, d), vec(x1, d), svkit::Box{vec(lo, d), vec(hi, d)},
                                      std::vector<int>(resolution, resolution + d), T_max, tol);
    *success = r.success;
    if (s) *s = r.s;
    if (final_error) *final_error = r.final_error;
  });
}

svk_status svk_grid_load(const char* path, svk_grid** out) {
  SVK_REQUIRE(path);
  SVK_REQUIRE(out);
  return guard([&] { *out = new svk_grid{svkit::load_grid(path)}; });
}

void svk_grid_free(svk_grid* grid) { delete grid; }

svk_status svk_grid_info(const svk_grid* g, int* dims, long* nodes) {
  SVK_REQUIRE(g);
  if (dims) *dims = g->g.dim();
  if (nodes) *nodes = g->g.size();
  return SVK_OK;
}

svk_status svk_grid_interpolate(const svk_grid* g, const double* x, double* out) {
  SVK_REQUIRE(g);
  SVK_REQUIRE(x);
  SVK_REQUIRE(out);
  return guard([&] { *out = g->g.interpolate(vec(x, g->g.dim())); });
}

svk_status svk_check_subsolution(const svk_operator* op, const svk_grid* g, int* refuted, double* max_value) {
  SVK_REQUIRE(op);
  SVK_REQUIRE(g);
  SVK_REQUIRE(refuted);
  return guard([&] {
    const auto rep = svkit::check_subsolution(op->op.F, g->g);
    *refuted = rep.refuted;
    if (max_value) *max_value = rep.max_value;
  });
}

svk_status svk_run_scenario(const char* config_path, const char* out_dir, const char* format, const uint64_t* seed,
                            int* exit_code) {
  SVK_REQUIRE(config_path);
  SVK_REQUIRE(exit_code);
  *exit_code = 2;
  if (format && std::strcmp(format, "structured-text") != 0 && std::strcmp(format, "csv") != 0)
    return fail(SVK_E_INVALID_ARGUMENT, std::string("unknown report format '") + format + "'");
  return guard([&] {
    svkit::ScenarioOptions opts;
    if (out_dir) opts.out_dir = out_dir;
    if (format) opts.format = svkit::parse_report_format(format);
    if (seed) opts.seed = *seed;
    const auto res = svkit::run_scenario(config_path, opts);
    *exit_code = res.exit_code;
    if (res.exit_code == 2) g_last_error = res.error;
  });
}

svk_status svk_catalog(char* buf, size_t cap, size_t* needed) {
  bool too_small = false;
  const svk_status st = guard([&] {
    std::string s = "families:\n";
    for (const auto& n : svkit::catalog_family_names()) s += "  " + n + "\n";
    s += "operators:\n";
    for (const auto& n : svkit::catalog_operator_kinds()) s += "  " + n + "\n";
    s += "tasks:\n";
    for (const auto& n : svkit::scenario_task_names()) s += "  " + n + "\n";
    if (needed) *needed = s.size() + 1;
    if (!buf || cap < s.size() + 1) {
      too_small = true;
      return;
    }
    std::memcpy(buf, s.c_str(), s.size() + 1);
  });
  if (st == SVK_OK && too_small) return fail(SVK_E_BUFFER_TOO_SMALL, "catalog buffer too small");
  return st;
}

}  // extern "C"
