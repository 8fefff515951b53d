#include "svkit/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "svkit/error.hpp"

namespace svkit {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  out << content;
  if (!out) throw Error(ErrorCode::Io, "write failed for '" + path + "'");
}

Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, e.what());
  }
}

Json vec_to_json(const Vec& v) {
  Json j = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

Json mat_to_json(const Mat& m) {
  Json j = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) j.push_back(vec_to_json(m.row(i).transpose()));
  return j;
}

Vec vec_from_json(const Json& j, const char* what) {
  if (!j.is_array()) throw Error(ErrorCode::Parse, std::string(what) + ": expected an array of numbers");
  Vec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw Error(ErrorCode::Parse, std::string(what) + ": expected numbers");
    v[i] = j[i].get<double>();
  }
  return v;
}

Mat mat_from_json(const Json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw Error(ErrorCode::Parse, std::string(what) + ": expected a matrix");
  const Eigen::Index rows = j.size();
  Vec first = vec_from_json(j[0], what);
  Mat m(rows, first.size());
  for (Eigen::Index i = 0; i < rows; ++i) {
    Vec r = vec_from_json(j[i], what);
    if (r.size() != m.cols()) throw Error(ErrorCode::Parse, std::string(what) + ": ragged matrix");
    m.row(i) = r.transpose();
  }
  return m;
}

Json box_to_json(const Box& b) { return Json{{"lo", vec_to_json(b.lo)}, {"hi", vec_to_json(b.hi)}}; }

Box box_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("lo") || !j.contains("hi")) throw Error(ErrorCode::Parse, "box needs lo and hi");
  Box b{vec_from_json(j["lo"], "box.lo"), vec_from_json(j["hi"], "box.hi")};
  if (b.lo.size() != b.hi.size()) throw Error(ErrorCode::Parse, "box lo and hi differ in size");
  for (int k = 0; k < b.dim(); ++k)
    if (!(b.lo[k] < b.hi[k])) throw Error(ErrorCode::Parse, "box must satisfy lo < hi");
  return b;
}

namespace {

int get_int(const Json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number_integer()) throw Error(ErrorCode::Parse, std::string("missing integer '") + key + "'");
  return j[key].get<int>();
}

}  // namespace

VectorFieldFamily family_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::Parse, "family document must be an object");
  const int d = get_int(j, "dim");
  const int m = get_int(j, "count");
  if (d < 1 || m < 1) throw Error(ErrorCode::Parse, "family needs dim >= 1 and count >= 1");
  if (!j.contains("fields") || !j["fields"].is_array() || static_cast<int>(j["fields"].size()) != m)
    throw Error(ErrorCode::Parse, "family needs 'count' entries in 'fields'");
  std::vector<PolynomialField> fields;
  for (const auto& jf : j["fields"]) {
    if (!jf.is_array() || static_cast<int>(jf.size()) != d)
      throw Error(ErrorCode::Parse, "each field needs 'dim' components");
    PolynomialField f;
    for (const auto& jc : jf) {
      if (!jc.is_array()) throw Error(ErrorCode::Parse, "component must be a list of terms");
      Polynomial p(d);
      for (const auto& t : jc) {
        if (!t.is_object() || !t.contains("exponents") || !t.contains("coeff") || !t["coeff"].is_number())
          throw Error(ErrorCode::Parse, "term needs exponents and coeff");
        const auto& je = t["exponents"];
        if (!je.is_array() || static_cast<int>(je.size()) != d)
          throw Error(ErrorCode::Parse, "term exponents need 'dim' entries");
        Polynomial::Exponents e;
        for (const auto& x : je) {
          if (!x.is_number_integer() || x.get<int>() < 0)
            throw Error(ErrorCode::Parse, "exponents must be nonnegative integers");
          e.push_back(x.get<int>());
        }
        p.add_term(e, t["coeff"].get<double>());
      }
      f.components.push_back(std::move(p));
    }
    fields.push_back(std::move(f));
  }
  const Box domain = j.contains("domain") ? box_from_json(j["domain"]) : Box::cube(d, 10.0);
  if (domain.dim() != d) throw Error(ErrorCode::Parse, "domain dimension does not match dim");
  const std::string name = j.contains("name") && j["name"].is_string() ? j["name"].get<std::string>() : "custom";
  return VectorFieldFamily::from_polynomials(name, std::move(fields), domain);
}

Json family_to_json(const VectorFieldFamily& family) {
  if (family.smoothness() != Smoothness::AnalyticPolynomial)
    throw Error(ErrorCode::Unsupported, "only polynomial families can be serialized");
  Json j;
  j["name"] = family.name();
  j["dim"] = family.dim();
  j["count"] = family.count();
  Json fields = Json::array();
  for (int i = 0; i < family.count(); ++i) {
    Json jf = Json::array();
    for (const auto& comp : family.polynomial(i).components) {
      Json jc = Json::array();
      for (const auto& [e, c] : comp.terms()) jc.push_back(Json{{"exponents", e}, {"coeff", c}});
      jf.push_back(jc);
    }
    fields.push_back(jf);
  }
  j["fields"] = fields;
  j["domain"] = box_to_json(family.domain());
  return j;
}

VectorFieldFamily load_family(const std::string& path) { return family_from_json(parse_json(read_text_file(path))); }

GridFunction grid_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::Parse, "grid document must be an object");
  GridFunction g;
  const int d = get_int(j, "dims");
  g.origin = vec_from_json(j.value("origin", Json()), "origin");
  g.spacing = vec_from_json(j.value("spacing", Json()), "spacing");
  if (!j.contains("shape") || !j["shape"].is_array()) throw Error(ErrorCode::Parse, "grid needs a shape");
  for (const auto& s : j["shape"]) {
    if (!s.is_number_integer()) throw Error(ErrorCode::Parse, "shape entries must be integers");
    g.shape.push_back(s.get<int>());
  }
  if (static_cast<int>(g.shape.size()) != d || g.origin.size() != d || g.spacing.size() != d)
    throw Error(ErrorCode::Parse, "grid header sizes disagree with dims");
  const std::string tag = j.value("semicontinuity_tag", std::string("continuous"));
  if (tag == "continuous")
    g.tag = Semicontinuity::Continuous;
  else if (tag == "usc-pointlist")
    g.tag = Semicontinuity::UscPointlist;
  else
    throw Error(ErrorCode::Parse, "unknown semicontinuity tag '" + tag + "'");
  const Vec vals = vec_from_json(j.value("values", Json()), "values");
  g.values.assign(vals.data(), vals.data() + vals.size());
  if (static_cast<long>(g.values.size()) != g.size()) throw Error(ErrorCode::Parse, "value count does not match shape");
  if (j.contains("exceptional")) {
    for (const auto& e : j["exceptional"]) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number())
        throw Error(ErrorCode::Parse, "exceptional entries are [node, value]");
      const long n = e[0].get<long>();
      if (n < 0 || n >= g.size()) throw Error(ErrorCode::Parse, "exceptional point is not a grid node");
      g.set_exceptional(n, e[1].get<double>());
    }
  }
  try {
    g.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::Parse, e.what());
  }
  return g;
}

Json grid_to_json(const GridFunction& g) {
  Json j;
  j["dims"] = g.dim();
  j["origin"] = vec_to_json(g.origin);
  j["spacing"] = vec_to_json(g.spacing);
  j["shape"] = g.shape;
  j["semicontinuity_tag"] = to_string(g.tag);
  Json ex = Json::array();
  for (const auto& [n, v] : g.exceptional) ex.push_back(Json::array({n, v}));
  j["exceptional"] = ex;
  j["values"] = g.values;
  return j;
}

GridFunction load_grid(const std::string& path) { return grid_from_json(parse_json(read_text_file(path))); }

void save_grid(const std::string& path, const GridFunction& g) { write_text_file(path, grid_to_json(g).dump(1) + "\n"); }

Json reachable_set_to_json(const ReachableSet& rs) {
  Json j;
  j["box"] = box_to_json(rs.grid.box());
  j["resolution"] = rs.grid.resolution();
  j["T"] = rs.T;
  j["dt"] = rs.dt;
  j["origin"] = vec_to_json(rs.origin);
  j["occupied_cells"] = rs.occupied_count();
  Json rle = Json::array();
  Json times = Json::array();
  long c = 0;
  while (c < rs.grid.size()) {
    const bool v = rs.occupied(c);
    long run = 0;
    while (c < rs.grid.size() && rs.occupied(c) == v) {
      if (v) times.push_back(rs.first_arrival[c]);
      ++run;
      ++c;
    }
    rle.push_back(Json::array({v ? 1 : 0, run}));
  }
  j["occupancy_rle"] = rle;
  j["first_arrival"] = times;
  return j;
}

std::string reachable_set_csv(const ReachableSet& rs) {
  std::string out;
  const int d = rs.grid.dim();
  for (int k = 0; k < d; ++k) out += "i" + std::to_string(k + 1) + ",";
  out += "occupied,first_arrival\n";
  for (long c = 0; c < rs.grid.size(); ++c) {
    for (int i : rs.grid.unflatten(c)) out += std::to_string(i) + ",";
    const bool occ = rs.occupied(c);
    out += occ ? "1," : "0,";
    out += occ ? format_double(rs.first_arrival[c]) : "";
    out += "\n";
  }
  return out;
}

std::string trajectory_csv(const Trajectory& tr) {
  std::string out = "t";
  const int d = tr.states.empty() ? 0 : static_cast<int>(tr.states.front().size());
  for (int k = 0; k < d; ++k) out += ",y" + std::to_string(k + 1);
  out += "\n";
  for (std::size_t s = 0; s < tr.times.size(); ++s) {
    out += format_double(tr.times[s]);
    for (int k = 0; k < d; ++k) out += "," + format_double(tr.states[s][k]);
    out += "\n";
  }
  return out;
}

Json to_json(const RankCertificate& c) {
  Json j;
  j["point"] = vec_to_json(c.point);
  j["depth_used"] = c.depth_used;
  j["rank"] = c.rank;
  Json gens = Json::array();
  for (const auto& g : c.generators) {
    Json w = Json::array();
    for (int i : g.word) w.push_back(i + 1);  // displayed 1-based
    gens.push_back(Json{{"word", w}, {"depth", g.depth}, {"value", vec_to_json(g.value)}});
  }
  j["generators"] = gens;
  j["singular_values"] = vec_to_json(c.singular_values);
  return j;
}

Json to_json(const SubunitCertificate& c) {
  Json j;
  j["point"] = vec_to_json(c.point);
  j["Z"] = vec_to_json(c.Z);
  j["mode"] = to_string(c.mode);
  j["verdict"] = to_string(c.verdict);
  j["directions"] = c.directions.size();
  j["certified"] = c.certified;
  j["refuted"] = c.refuted;
  j["inconclusive"] = c.inconclusive;
  if (c.witness_p) {
    j["witness_p"] = vec_to_json(*c.witness_p);
    j["witness_profile_tail"] = c.witness_profile.empty() ? Json() : Json(c.witness_profile.back());
  }
  return j;
}

Json to_json(const Jet& jet) {
  return Json{{"x", vec_to_json(jet.x)}, {"r", jet.r}, {"p", vec_to_json(jet.p)}, {"X", mat_to_json(jet.X)}};
}

Json to_json(const SubsolutionReport& r) {
  Json j;
  j["verdict"] = r.verdict;
  j["nodes_checked"] = r.nodes_checked;
  j["jets_tested"] = r.jets_tested;
  j["touching_jets"] = r.touching_jets;
  j["violation_count"] = r.violation_count;
  j["max_F_over_touching_jets"] = std::isfinite(r.max_value) ? Json(r.max_value) : Json(format_double(r.max_value));
  Json w = Json::array();
  for (const auto& v : r.violations) w.push_back(Json{{"node", v.node}, {"F", v.value}, {"jet", to_json(v.jet)}});
  j["witnesses"] = w;
  return j;
}

Json to_json(const AuditReport& r) {
  Json j;
  j["proper"] = r.proper_ok;
  j["scaling_checked"] = r.scaling_checked;
  j["scaling"] = r.scaling_ok;
  j["violation_count"] = r.violation_count;
  Json pts = Json::array();
  for (const auto& p : r.scaling_failure_points) pts.push_back(vec_to_json(p));
  j["scaling_failure_points"] = pts;
  j["sampled_points"] = r.sampled_points.size();
  Json w = Json::array();
  for (const auto& v : r.witnesses)
    w.push_back(Json{{"check", v.check}, {"xi", v.xi}, {"lhs", v.lhs}, {"rhs", v.rhs}, {"jet", to_json(v.jet)}});
  j["witnesses"] = w;
  return j;
}

}  // namespace svkit
