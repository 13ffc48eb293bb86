#pragma once

#include <string>

#include "json.hpp"
#include "ultra/boundary_process.hpp"
#include "ultra/duality.hpp"
#include "ultra/simulate.hpp"
#include "ultra/tree.hpp"
#include "ultra/walk.hpp"

namespace ultra::io {

/// Keys keep insertion order, so vertex-keyed objects come out in id order.
using Json = nlohmann::ordered_json;

/// Reads and parses a file. Throws ParseError if it cannot be read or is not
/// JSON.
Json read_file(const std::string& path);
Json parse(const std::string& text);
void write_file(const std::string& path, const Json& value, bool pretty = true);

/// A rational from "p/q", "p" or a JSON integer. Throws ParseError.
Rational to_rational(const Json& value);
inline Json from_rational(const Rational& value) { return format_rational(value); }

/// { "root": id, "children": { "id": [ids...] }, "allow_degree_one": bool }.
/// Vertex ids are 0..n−1 and each must appear as the root or as a child;
/// vertices without an entry in "children" are leaves. The flag is optional.
/// Shape errors throw ParseError, tree errors InvalidInput.
Tree tree_from_json(const Json& value);
Json to_json(const Tree& tree);

/// { "id": "p/q" } over the interior vertices.
UltrametricElement phi_from_json(const Tree& tree, const Json& value);
Json to_json(const Tree& tree, const UltrametricElement& phi);
Json to_json(const Tree& tree, const RealUltrametricElement& phi);

/// { "leaf id": "p/q" } over all leaves.
BoundaryMeasure measure_from_json(const Tree& tree, const Json& value);
Json measure_to_json(const Tree& tree, const LeafVector& weights);

/// { "points": [names], "dist": [["p/q", ...], ...] }.
UltrametricSpace space_from_json(const Json& value);
Json to_json(const UltrametricSpace& space);

/// { "p": { "x": { "y": "p/q" } } } for interior x.
Walk walk_from_json(const Tree& tree, const Json& value);
Json to_json(const Walk& walk);

/// { "kind": "standard" } or { "kind": "table", "cdf": [[r, value], ...] }.
/// Values given as rationals are kept exactly; JSON numbers are taken as
/// doubles.
SigmaMeasure sigma_from_json(const Json& value);
Json to_json(const SigmaMeasure& sigma);

/// { "leaves": [ids], "entries": [[...], ...] }, row-major in leaf order.
Json to_json(const ExactOperator& op);
Json to_json(const RealOperator& op);

/// [{ "identity", "location", "lhs", "rhs", "pass" }, ...].
Json to_json(const IdentityReport& report);
/// { "theorem", "instances", "checks", "comparisons": [...], "failures": [...] }.
/// "comparisons" holds every recorded entry, "failures" only the failing ones.
Json to_json(const CheckReport& report);

/// { "empirical": {leaf: p}, "exact": {leaf: p}, "tv", "trials", "seed", ... }.
Json to_json(const SimulationStats& stats);

}  // namespace ultra::io
