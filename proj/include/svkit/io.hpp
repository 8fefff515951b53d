#pragma once

#include <string>

#include <json.hpp>

#include "svkit/fields.hpp"
#include "svkit/reach.hpp"
#include "svkit/subunit.hpp"
#include "svkit/verify.hpp"

namespace svkit {

using Json = nlohmann::ordered_json;

/// Shortest round-trip decimal ("inf", "-inf", "nan" for non-finite values).
std::string format_double(double v);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
/// Parses a structured-text document; throws Parse with the parser message.
Json parse_json(const std::string& text);

Json vec_to_json(const Vec& v);
Json mat_to_json(const Mat& m);
Vec vec_from_json(const Json& j, const char* what);
Mat mat_from_json(const Json& j, const char* what);
Json box_to_json(const Box& b);
Box box_from_json(const Json& j);

/// Polynomial family document: {name?, dim, count, fields: [[[{exponents, coeff}...] per component] per field],
/// domain?: {lo, hi}}.
VectorFieldFamily family_from_json(const Json& j);
Json family_to_json(const VectorFieldFamily& family);
VectorFieldFamily load_family(const std::string& path);

/// Grid function document: {dims, origin, spacing, shape, semicontinuity_tag, exceptional: [[node, value]...],
/// values: [...] row-major}.
GridFunction grid_from_json(const Json& j);
Json grid_to_json(const GridFunction& g);
GridFunction load_grid(const std::string& path);
void save_grid(const std::string& path, const GridFunction& g);

/// Header {box, resolution, T, dt, origin}, run-length occupancy [[value, count]...] starting with the value of
/// cell 0, first-arrival times of occupied cells in flat order.
Json reachable_set_to_json(const ReachableSet& rs);
/// Columns i1..id, occupied, first_arrival.
std::string reachable_set_csv(const ReachableSet& rs);
/// Columns t, y1..yd.
std::string trajectory_csv(const Trajectory& tr);

Json to_json(const RankCertificate& c);
/// Summary of a certificate (verdict, counts, witness); per-direction data is omitted.
Json to_json(const SubunitCertificate& c);
Json to_json(const SubsolutionReport& r);
Json to_json(const AuditReport& r);
Json to_json(const Jet& j);

}  // namespace svkit
