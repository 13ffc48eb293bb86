#include "ultra/io.hpp"

#include <fstream>
#include <sstream>

namespace ultra::io {

namespace {

std::string key(VertexId v) { return std::to_string(v); }

VertexId to_vertex(const Json& value) {
  if (value.is_number_unsigned()) return value.get<VertexId>();
  if (value.is_number_integer()) throw ParseError("negative vertex id " + value.dump());
  if (value.is_string()) {
    const std::string& s = value.get_ref<const std::string&>();
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
      throw ParseError("vertex id is not a non-negative integer: \"" + s + "\"");
    return std::stoull(s);
  }
  throw ParseError("vertex id must be an integer or a string of digits, got " + value.dump());
}

VertexId key_vertex(const std::string& k) { return to_vertex(Json(k)); }

const Json& member(const Json& object, const char* name) {
  if (!object.is_object()) throw ParseError(std::string("expected an object with \"") + name + "\"");
  auto it = object.find(name);
  if (it == object.end()) throw ParseError(std::string("missing \"") + name + "\"");
  return *it;
}

void require_object(const Json& value, const char* what) {
  if (!value.is_object()) throw ParseError(std::string(what) + " must be a JSON object");
}

void check_vertex(const Tree& tree, VertexId v, const char* what) {
  if (v >= tree.size()) throw InvalidInput(std::string(what) + ": unknown vertex " + key(v));
}

template <class Row>
Json operator_json(const std::vector<VertexId>& leaves, const std::vector<Row>& rows) {
  Json out;
  out["leaves"] = leaves;
  out["entries"] = Json::array();
  for (const auto& row : rows) {
    Json r = Json::array();
    for (const auto& v : row) {
      if constexpr (std::is_same_v<std::decay_t<decltype(v)>, Rational>)
        r.push_back(from_rational(v));
      else
        r.push_back(v);
    }
    out["entries"].push_back(std::move(r));
  }
  return out;
}

Json comparison_json(const Comparison& c) {
  return Json{{"location", c.location}, {"lhs", from_rational(c.lhs)}, {"rhs", from_rational(c.rhs)}, {"pass", c.pass}};
}

}  // namespace

Json parse(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
}

Json read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse(buffer.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_file(const std::string& path, const Json& value, bool pretty) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path);
  out << value.dump(pretty ? 2 : -1) << '\n';
}

Rational to_rational(const Json& value) {
  if (value.is_string()) return parse_rational(value.get_ref<const std::string&>());
  if (value.is_number_integer()) return Rational(value.get<long>());
  throw ParseError("expected a rational \"p/q\", got " + value.dump());
}

// ---------------------------------------------------------------------------

Tree tree_from_json(const Json& value) {
  const Json& children = member(value, "children");
  require_object(children, "\"children\"");
  TreeDescription d;
  d.root = to_vertex(member(value, "root"));
  if (auto it = value.find("allow_degree_one"); it != value.end()) {
    if (!it->is_boolean()) throw ParseError("\"allow_degree_one\" must be a boolean");
    d.allow_degree_one = it->get<bool>();
  }
  std::vector<std::pair<VertexId, std::vector<VertexId>>> entries;
  VertexId top = d.root;
  for (auto it = children.begin(); it != children.end(); ++it) {
    VertexId v = key_vertex(it.key());
    if (!it.value().is_array()) throw ParseError("children of " + it.key() + " must be an array");
    std::vector<VertexId> kids;
    for (const Json& c : it.value()) kids.push_back(to_vertex(c));
    top = std::max(top, v);
    for (VertexId c : kids) top = std::max(top, c);
    entries.emplace_back(v, std::move(kids));
  }
  if (top > 1'000'000) throw InvalidInput("tree: vertex id " + key(top) + " is too large");
  d.children.assign(top + 1, {});
  std::vector<bool> seen(top + 1, false);
  seen[d.root] = true;
  for (auto& [v, kids] : entries) {
    if (!d.children[v].empty()) throw InvalidInput("tree: vertex " + key(v) + " listed twice");
    for (VertexId c : kids) seen[c] = true;
    d.children[v] = std::move(kids);
  }
  for (VertexId v = 0; v <= top; ++v) {
    if (!seen[v]) throw InvalidInput("tree: vertex ids must be 0..n-1; " + key(v) + " is missing");
  }
  return Tree::build(d);
}

Json to_json(const Tree& tree) {
  Json out;
  out["root"] = tree.root();
  Json children = Json::object();
  for (VertexId v : tree.interior()) {
    auto c = tree.children(v);
    children[key(v)] = std::vector<VertexId>(c.begin(), c.end());
  }
  out["children"] = std::move(children);
  if (tree.allows_degree_one()) out["allow_degree_one"] = true;
  return out;
}

UltrametricElement phi_from_json(const Tree& tree, const Json& value) {
  require_object(value, "phi");
  std::vector<Rational> phi(tree.size(), Rational(0));
  std::vector<bool> given(tree.size(), false);
  for (auto it = value.begin(); it != value.end(); ++it) {
    VertexId v = key_vertex(it.key());
    check_vertex(tree, v, "phi");
    if (tree.is_leaf(v)) throw InvalidInput("phi: vertex " + it.key() + " is a leaf");
    phi[v] = to_rational(it.value());
    given[v] = true;
  }
  for (VertexId v : tree.interior())
    if (!given[v]) throw InvalidInput("phi: no value for vertex " + key(v));
  return UltrametricElement(tree, std::move(phi));
}

Json to_json(const Tree& tree, const UltrametricElement& phi) {
  Json out = Json::object();
  for (VertexId v : tree.interior()) out[key(v)] = from_rational(phi(v));
  return out;
}

Json to_json(const Tree& tree, const RealUltrametricElement& phi) {
  Json out = Json::object();
  for (VertexId v : tree.interior()) out[key(v)] = phi(v);
  return out;
}

BoundaryMeasure measure_from_json(const Tree& tree, const Json& value) {
  require_object(value, "mu");
  LeafVector w(tree.leaf_count(), Rational(0));
  std::vector<bool> given(tree.leaf_count(), false);
  for (auto it = value.begin(); it != value.end(); ++it) {
    VertexId v = key_vertex(it.key());
    check_vertex(tree, v, "mu");
    if (!tree.is_leaf(v)) throw InvalidInput("mu: vertex " + it.key() + " is not a leaf");
    std::size_t i = tree.leaf_index(v);
    w[i] = to_rational(it.value());
    given[i] = true;
  }
  for (std::size_t i = 0; i < w.size(); ++i)
    if (!given[i]) throw InvalidInput("mu: no weight for leaf " + key(tree.leaves()[i]));
  return BoundaryMeasure::validate(tree, std::move(w));
}

Json measure_to_json(const Tree& tree, const LeafVector& weights) {
  Json out = Json::object();
  for (std::size_t i = 0; i < weights.size(); ++i) out[key(tree.leaves()[i])] = from_rational(weights[i]);
  return out;
}

UltrametricSpace space_from_json(const Json& value) {
  UltrametricSpace s;
  const Json& points = member(value, "points");
  const Json& dist = member(value, "dist");
  if (!points.is_array() || !dist.is_array()) throw ParseError("\"points\" and \"dist\" must be arrays");
  for (const Json& p : points) s.points.push_back(p.is_string() ? p.get<std::string>() : p.dump());
  for (const Json& row : dist) {
    if (!row.is_array()) throw ParseError("each row of \"dist\" must be an array");
    std::vector<Rational> r;
    for (const Json& d : row) r.push_back(to_rational(d));
    s.dist.push_back(std::move(r));
  }
  return s;
}

Json to_json(const UltrametricSpace& space) {
  Json dist = Json::array();
  for (const auto& row : space.dist) {
    Json r = Json::array();
    for (const Rational& d : row) r.push_back(from_rational(d));
    dist.push_back(std::move(r));
  }
  return Json{{"points", space.points}, {"dist", std::move(dist)}};
}

Walk walk_from_json(const Tree& tree, const Json& value) {
  const Json& p = member(value, "p");
  require_object(p, "\"p\"");
  Walk::Table table;
  for (auto it = p.begin(); it != p.end(); ++it) {
    VertexId x = key_vertex(it.key());
    check_vertex(tree, x, "walk");
    require_object(it.value(), "a walk row");
    auto& row = table[x];
    for (auto jt = it.value().begin(); jt != it.value().end(); ++jt) {
      VertexId y = key_vertex(jt.key());
      check_vertex(tree, y, "walk");
      row[y] = to_rational(jt.value());
    }
  }
  return Walk::validate(tree, table);
}

Json to_json(const Walk& walk) {
  Json p = Json::object();
  for (const auto& [x, row] : walk.table()) {
    Json r = Json::object();
    for (const auto& [y, q] : row) r[key(y)] = from_rational(q);
    p[key(x)] = std::move(r);
  }
  return Json{{"p", std::move(p)}};
}

SigmaMeasure sigma_from_json(const Json& value) {
  const Json& kind = member(value, "kind");
  if (kind == "standard") return SigmaMeasure::standard();
  if (kind != "table") throw ParseError("sigma: \"kind\" must be \"standard\" or \"table\"");
  const Json& cdf = member(value, "cdf");
  if (!cdf.is_array()) throw ParseError("sigma: \"cdf\" must be an array");
  std::vector<SigmaMeasure::Step> steps;
  for (const Json& entry : cdf) {
    if (!entry.is_array() || entry.size() != 2) throw ParseError("sigma: each cdf entry must be [r, value]");
    SigmaMeasure::Step s;
    s.radius = to_rational(entry[0]);
    if (entry[1].is_number_float()) {
      s.value = entry[1].get<double>();
    } else {
      s.exact = to_rational(entry[1]);
      s.value = to_double(*s.exact);
    }
    steps.push_back(std::move(s));
  }
  return SigmaMeasure::tabulated(std::move(steps));
}

Json to_json(const SigmaMeasure& sigma) {
  if (sigma.kind() == SigmaMeasure::Kind::Standard) return Json{{"kind", "standard"}};
  Json cdf = Json::array();
  for (const auto& s : sigma.steps()) {
    cdf.push_back(Json::array({from_rational(s.radius), s.exact ? from_rational(*s.exact) : Json(s.value)}));
  }
  return Json{{"kind", "table"}, {"cdf", std::move(cdf)}};
}

Json to_json(const ExactOperator& op) { return operator_json(op.leaves, op.entries); }
Json to_json(const RealOperator& op) { return operator_json(op.leaves, op.entries); }

Json to_json(const IdentityReport& report) {
  Json out = Json::array();
  for (const IdentityCheck& c : report.checks) {
    out.push_back(Json{{"identity", c.identity},
                       {"location", c.location},
                       {"lhs", from_rational(c.lhs)},
                       {"rhs", from_rational(c.rhs)},
                       {"pass", c.pass}});
  }
  return out;
}

Json to_json(const CheckReport& report) {
  Json comparisons = Json::array();
  Json failures = Json::array();
  for (const Comparison& c : report.entries) {
    if (report.record_all) comparisons.push_back(comparison_json(c));
    if (!c.pass) failures.push_back(comparison_json(c));
  }
  Json out{{"theorem", report.theorem}, {"instances", report.instances}, {"checks", report.checks}};
  if (report.record_all) out["comparisons"] = std::move(comparisons);
  out["failures"] = std::move(failures);
  return out;
}

Json to_json(const SimulationStats& stats) {
  Json empirical = Json::object(), exact = Json::object(), se = Json::object(), counts = Json::object();
  for (std::size_t i = 0; i < stats.leaves.size(); ++i) {
    std::string k = key(stats.leaves[i]);
    empirical[k] = stats.empirical[i];
    exact[k] = stats.exact[i];
    se[k] = stats.standard_error[i];
    counts[k] = stats.counts[i];
  }
  return Json{{"empirical", std::move(empirical)},
              {"exact", std::move(exact)},
              {"tv", stats.tv},
              {"trials", stats.trials},
              {"seed", stats.seed},
              {"counts", std::move(counts)},
              {"standard_error", std::move(se)},
              {"tv_bound", stats.tv_bound()},
              {"truncated", stats.truncated}};
}

}  // namespace ultra::io
