#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "ultra/io.hpp"

using namespace ultra;
using namespace fixtures;
using io::Json;

TEST_CASE("rationals round-trip through the JSON form") {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 500; ++i) {
    Rational q = random_rational(rng) * ratio(static_cast<long>(rng() % 1000) - 500, 1 + static_cast<long>(rng() % 97));
    Json j = io::from_rational(q);
    CHECK(io::to_rational(j) == q);
    CHECK(io::from_rational(io::to_rational(j)) == j);
  }
  CHECK(io::from_rational(ratio(-3, 6)) == "-1/2");
  CHECK(io::from_rational(Rational(4)) == "4");
  CHECK(io::to_rational(Json(7)) == 7);
  CHECK_THROWS_AS(io::to_rational(Json(0.5)), ParseError);
  CHECK_THROWS_AS(io::to_rational(Json("1/0")), ParseError);
  CHECK_THROWS_AS(io::to_rational(Json("x")), ParseError);
}

TEST_CASE("B2 files") {
  Tree t = io::tree_from_json(io::read_file(std::string(TEST_DATA_DIR) + "/b2_tree.json"));
  CHECK(t.description().children == b2::tree().description().children);
  Walk w = io::walk_from_json(t, io::read_file(std::string(TEST_DATA_DIR) + "/b2_walk.json"));
  CHECK(w.table() == b2::walk().table());
  UltrametricElement phi = io::phi_from_json(t, io::read_file(std::string(TEST_DATA_DIR) + "/b2_phi.json"));
  CHECK(phi.values() == b2::phi().values());
  BoundaryMeasure mu = io::measure_from_json(t, io::read_file(std::string(TEST_DATA_DIR) + "/b2_mu.json"));
  CHECK(mu == b2::uniform_measure());
  SigmaMeasure table = io::sigma_from_json(io::read_file(std::string(TEST_DATA_DIR) + "/sigma_table.json"));
  REQUIRE(table.steps().size() == 2);
  CHECK(*table.steps()[0].exact == ratio(1, 4));
  CHECK(io::to_json(table) == io::read_file(std::string(TEST_DATA_DIR) + "/sigma_table.json"));
  CHECK(io::sigma_from_json(Json{{"kind", "standard"}}).kind() == SigmaMeasure::Kind::Standard);
}

TEST_CASE("random instances round-trip") {
  std::mt19937_64 rng(12);
  for (int rep = 0; rep < 10; ++rep) {
    Tree t = random_tree(rng, 8 + 15 * rep);
    Walk w = random_walk(rng, t);
    UltrametricElement phi = random_phi(rng, t);
    BoundaryMeasure mu = random_measure(rng, t);
    SigmaMeasure sigma = random_tabulated_sigma(rng, t, phi);

    Tree t2 = io::tree_from_json(io::parse(io::to_json(t).dump()));
    REQUIRE(t2.description().children == t.description().children);
    CHECK(io::walk_from_json(t2, io::parse(io::to_json(w).dump())).table() == w.table());
    CHECK(io::phi_from_json(t2, io::to_json(t, phi)).values() == phi.values());
    CHECK(io::measure_from_json(t2, io::measure_to_json(t, mu.weights())) == mu);
    SigmaMeasure s2 = io::sigma_from_json(io::parse(io::to_json(sigma).dump()));
    REQUIRE(s2.steps().size() == sigma.steps().size());
    for (std::size_t i = 0; i < s2.steps().size(); ++i) {
      CHECK(s2.steps()[i].radius == sigma.steps()[i].radius);
      CHECK(s2.steps()[i].exact == sigma.steps()[i].exact);
    }

    UltrametricSpace space{{}, boundary_metric(t, phi)};
    for (std::size_t i = 0; i < t.leaf_count(); ++i) space.points.push_back("p" + std::to_string(i));
    UltrametricSpace s3 = io::space_from_json(io::parse(io::to_json(space).dump()));
    CHECK(s3.points == space.points);
    CHECK(s3.dist == space.dist);
  }
}

TEST_CASE("doubles in a sigma table are kept inexact") {
  SigmaMeasure s = io::sigma_from_json(io::parse(R"({"kind": "table", "cdf": [["1/2", 0.25], ["1", "3/4"]]})"));
  CHECK_FALSE(s.steps()[0].exact.has_value());
  CHECK(s.steps()[0].value == 0.25);
  CHECK(*s.steps()[1].exact == ratio(3, 4));
  Json back = io::to_json(s);
  CHECK(back["cdf"][0][1].get<double>() == 0.25);
  CHECK(back["cdf"][1][1] == "3/4");
}

TEST_CASE("error kinds") {
  CHECK_THROWS_AS(io::parse("{"), ParseError);
  CHECK_THROWS_AS(io::read_file("/nonexistent/file.json"), ParseError);
  CHECK_THROWS_AS(io::tree_from_json(io::parse(R"({"children": {}})")), ParseError);
  CHECK_THROWS_AS(io::tree_from_json(io::parse(R"({"root": 0, "children": {"0": 1}})")), ParseError);
  CHECK_THROWS_AS(io::tree_from_json(io::parse(R"({"root": 0, "children": {"a": [1, 2]}})")), ParseError);
  CHECK_THROWS_AS(io::tree_from_json(io::parse(R"({"root": 0, "children": {"0": [1, 3]}})")), InvalidInput);
  CHECK_THROWS_AS(io::tree_from_json(io::parse(R"({"root": 0, "children": {"0": [1], "1": [2, 3]}})")),
                  InvalidInput);
  Tree chain = io::tree_from_json(
      io::parse(R"({"root": 0, "children": {"0": [1], "1": [2, 3]}, "allow_degree_one": true})"));
  CHECK(chain.size() == 4);
  CHECK(io::to_json(chain)["allow_degree_one"] == true);

  Tree t = b2::tree();
  CHECK_THROWS_AS(io::phi_from_json(t, io::parse(R"({"0": "3/2", "1": "1/2"})")), InvalidInput);
  CHECK_THROWS_AS(io::phi_from_json(t, io::parse(R"({"0": "3/2", "1": "1/2", "2": "1/2", "3": "1/8"})")),
                  InvalidInput);
  CHECK_THROWS_AS(io::phi_from_json(t, io::parse(R"({"0": "3/2", "1": "1/2", "2": "one"})")), ParseError);
  CHECK_THROWS_AS(io::measure_from_json(t, io::parse(R"({"3": "1/2", "4": "1/2", "5": "0", "6": "0"})")),
                  InvalidInput);
  CHECK_THROWS_AS(io::measure_from_json(t, io::parse(R"({"3": "1/2", "4": "1/2"})")), InvalidInput);
  CHECK_THROWS_AS(io::walk_from_json(t, io::parse(R"({"q": {}})")), ParseError);
  CHECK_THROWS_AS(io::sigma_from_json(io::parse(R"({"kind": "other"})")), ParseError);
  CHECK_THROWS_AS(io::sigma_from_json(io::parse(R"({"kind": "table", "cdf": [["1"]]})")), ParseError);
  CHECK_THROWS_AS(io::sigma_from_json(io::parse(R"({"kind": "table", "cdf": [["1", "2"]]})")), InvalidInput);
}

TEST_CASE("operator and report formats") {
  JumpProcessSpec spec = JumpProcessSpec::validate(b2::tree(), b2::phi(), b2::uniform_measure(),
                                                   SigmaMeasure::tabulated({{ratio(1, 2), ratio(1, 4)},
                                                                            {ratio(3, 2), ratio(1, 2)}}));
  Json exact = io::to_json(semigroup_operator_exact(spec, 1));
  CHECK(exact["leaves"] == Json::array({3, 4, 5, 6}));
  CHECK(exact["entries"][2] == Json::array({"1/8", "1/8", "1/2", "1/4"}));
  Json real = io::to_json(semigroup_operator(spec, 1.0));
  CHECK(real["entries"][0][0].get<double>() == doctest::Approx(0.5));

  CheckReport r;
  r.theorem = "demo";
  r.record_all = true;
  r.add("a", Rational(1), Rational(1));
  r.add("b", ratio(1, 2), ratio(1, 3));
  Json j = io::to_json(r);
  CHECK(j["theorem"] == "demo");
  CHECK(j["checks"] == 2);
  CHECK(j["comparisons"].size() == 2);
  REQUIRE(j["failures"].size() == 1);
  CHECK(j["failures"][0] == Json{{"location", "b"}, {"lhs", "1/2"}, {"rhs", "1/3"}, {"pass", false}});

  Walk w = b2::walk();
  WalkKernels k(w);
  Json ids = io::to_json(check_kernel_identities(w, k));
  REQUIRE_FALSE(ids.empty());
  CHECK(ids[0].contains("identity"));
  CHECK(ids[0]["location"].is_array());
}
