#include "tqft/triangulation.hpp"

#include <fstream>
#include <sstream>

#include "doctest.h"
#include "reference_values.hpp"

using tqft::ShapeStructure;
using tqft::Slot;
using tqft::Triangulation;

namespace {

ShapeStructure shape_from_flat(const double* flat, size_t ntets) {
  ShapeStructure s;
  for (size_t i = 0; i < ntets; ++i) {
    s.angles.push_back({flat[3 * i], flat[3 * i + 1], flat[3 * i + 2]});
  }
  return s;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("builtin ideal triangulation has the expected combinatorics") {
  const Triangulation& tri = tqft::builtin_ideal_73();
  CHECK_NOTHROW(tri.validate());
  CHECK(tri.tets.size() == 5);
  CHECK(tri.edges.size() == 5);
  CHECK_FALSE(tri.has_knot_edge());
  int total = 0;
  for (const auto& e : tri.edges) total += static_cast<int>(e.incidences.size());
  CHECK(total == 30);
  CHECK(tri.tets[0].sign == 1);
  CHECK(tri.tets[1].sign == -1);
  CHECK(tri.tets[2].sign == 1);
  CHECK(tri.tets[3].sign == 1);
  CHECK(tri.tets[4].sign == 1);
}

TEST_CASE("builtin one-vertex triangulation has the expected combinatorics") {
  const Triangulation& tri = tqft::builtin_h_73();
  CHECK_NOTHROW(tri.validate());
  CHECK(tri.tets.size() == 6);
  CHECK(tri.edges.size() == 7);
  CHECK(tri.knot_edge == "e0");
  CHECK(tri.edge("e0").incidences.size() == 1);
  int total = 0;
  for (const auto& e : tri.edges) total += static_cast<int>(e.incidences.size());
  CHECK(total == 36);
  CHECK(tri.tets[2].sign == -1);
  for (int i : {0, 1, 3, 4, 5}) CHECK(tri.tets[i].sign == 1);
}

TEST_CASE("builtin JSON bodies match the shipped data files byte for byte") {
  const std::string base = TQFT_SOURCE_DIR;
  CHECK(tqft::builtin_ideal_73_json() == read_file(base + "/data/ideal_73.json"));
  CHECK(tqft::builtin_h_73_json() == read_file(base + "/data/h_73.json"));
}

TEST_CASE("reference interior point is a positive angle structure") {
  const Triangulation& tri = tqft::builtin_ideal_73();
  const ShapeStructure s =
      shape_from_flat(tqft::ref::kFeasibleAngles.data(), 5);
  CHECK(tqft::is_angle_structure(tri, s));
  for (const auto& e : tri.edges) {
    CHECK(tqft::edge_weight(tri, s, e) ==
          doctest::Approx(2.0 * tqft::kPi).epsilon(1e-12));
  }
  const auto [lambda, mu] = tqft::lambda_mu(s);
  CHECK(lambda == doctest::Approx(tqft::ref::kFeasibleLambda).epsilon(1e-12));
  CHECK(mu == doctest::Approx(tqft::ref::kFeasibleMu).epsilon(1e-12));
}

TEST_CASE("volume-maximising angles form a balanced structure with zero holonomy") {
  const Triangulation& tri = tqft::builtin_ideal_73();
  const ShapeStructure s = shape_from_flat(tqft::ref::kMaxAngles.data(), 5);
  CHECK(tqft::is_angle_structure(tri, s, false, 1e-9));
  const auto [lambda, mu] = tqft::lambda_mu(s);
  CHECK(std::abs(lambda) < 1e-9);
  CHECK(std::abs(mu) < 1e-9);
}

TEST_CASE("knot-zero extended assignments validate on the one-vertex triangulation") {
  const Triangulation& tri = tqft::builtin_h_73();
  for (const auto* flat : {tqft::ref::kHTau1.data(), tqft::ref::kHTau2.data()}) {
    const ShapeStructure s = shape_from_flat(flat, 6);
    CHECK(tqft::is_angle_structure(tri, s, /*extended=*/true));
    // not a positive structure: the knot edge carries zero angle
    CHECK_FALSE(tqft::is_angle_structure(tri, s, /*extended=*/false));
    CHECK(std::abs(tqft::edge_weight(tri, s, tri.edge("e0"))) < 1e-12);
    for (const auto& e : tri.edges) {
      if (e.id == "e0") continue;
      CHECK(tqft::edge_weight(tri, s, e) ==
            doctest::Approx(2.0 * tqft::kPi).epsilon(1e-12));
    }
  }
}

TEST_CASE("is_angle_structure rejects broken inputs") {
  const Triangulation& tri = tqft::builtin_ideal_73();
  ShapeStructure s = shape_from_flat(tqft::ref::kFeasibleAngles.data(), 5);
  SUBCASE("perturbed angle breaks the edge balance") {
    s.angle(0, Slot::A) += 1e-3;
    CHECK_FALSE(tqft::is_angle_structure(tri, s));
  }
  SUBCASE("negative angle is rejected even when balanced") {
    s.angle(0, Slot::A) = -0.01;
    s.angle(0, Slot::B) += 0.01;
    CHECK_FALSE(tqft::is_angle_structure(tri, s, true));
  }
  SUBCASE("wrong number of tetrahedra") {
    s.angles.pop_back();
    CHECK_FALSE(tqft::is_angle_structure(tri, s));
  }
}

TEST_CASE("JSON round trip preserves the triangulation") {
  for (const Triangulation* tri :
       {&tqft::builtin_ideal_73(), &tqft::builtin_h_73()}) {
    const std::string text = tqft::triangulation_to_json(*tri);
    const Triangulation back = tqft::triangulation_from_json(text);
    REQUIRE(back.tets.size() == tri->tets.size());
    REQUIRE(back.edges.size() == tri->edges.size());
    CHECK(back.knot_edge == tri->knot_edge);
    for (size_t i = 0; i < back.tets.size(); ++i) {
      CHECK(back.tets[i].id == tri->tets[i].id);
      CHECK(back.tets[i].sign == tri->tets[i].sign);
    }
    for (size_t i = 0; i < back.edges.size(); ++i) {
      CHECK(back.edges[i].id == tri->edges[i].id);
      REQUIRE(back.edges[i].incidences.size() ==
              tri->edges[i].incidences.size());
      for (size_t k = 0; k < back.edges[i].incidences.size(); ++k) {
        CHECK(back.edges[i].incidences[k].tet_id ==
              tri->edges[i].incidences[k].tet_id);
        CHECK(back.edges[i].incidences[k].slot ==
              tri->edges[i].incidences[k].slot);
      }
    }
    // serialisation is deterministic
    CHECK(tqft::triangulation_to_json(*tri) == text);
  }
}

TEST_CASE("malformed triangulation JSON is rejected") {
  CHECK_THROWS_AS(tqft::triangulation_from_json("not json"),
                  std::invalid_argument);
  CHECK_THROWS_AS(tqft::triangulation_from_json("{}"), std::invalid_argument);
  // bad slot letter
  CHECK_THROWS_AS(
      tqft::triangulation_from_json(
          R"({"tets":[{"id":1,"sign":1}],"edges":[{"id":"e1","incidences":[[1,"D"]]}],"knot_edge":null})"),
      std::invalid_argument);
  // knot edge names a missing edge
  CHECK_THROWS_AS(
      tqft::triangulation_from_json(
          R"({"tets":[{"id":1,"sign":1}],"edges":[{"id":"e1","incidences":[[1,"A"],[1,"A"],[1,"B"],[1,"B"],[1,"C"],[1,"C"]]}],"knot_edge":"nope"})"),
      std::invalid_argument);
  // slot count violated (slot C missing)
  CHECK_THROWS_AS(
      tqft::triangulation_from_json(
          R"({"tets":[{"id":1,"sign":1}],"edges":[{"id":"e1","incidences":[[1,"A"],[1,"A"],[1,"B"],[1,"B"]]}],"knot_edge":null})"),
      std::invalid_argument);
  // sign not +-1
  CHECK_THROWS_AS(
      tqft::triangulation_from_json(
          R"({"tets":[{"id":1,"sign":2}],"edges":[{"id":"e1","incidences":[[1,"A"],[1,"A"],[1,"B"],[1,"B"],[1,"C"],[1,"C"]]}],"knot_edge":null})"),
      std::invalid_argument);
}

TEST_CASE("lambda_mu requires the five-tetrahedron shape") {
  ShapeStructure s = shape_from_flat(tqft::ref::kHTau1.data(), 6);
  CHECK_THROWS_AS(tqft::lambda_mu(s), std::invalid_argument);
}

TEST_CASE("load_triangulation reads the shipped files") {
  const std::string base = TQFT_SOURCE_DIR;
  const Triangulation t1 = tqft::load_triangulation(base + "/data/ideal_73.json");
  CHECK(t1.tets.size() == 5);
  const Triangulation t2 = tqft::load_triangulation(base + "/data/h_73.json");
  CHECK(t2.knot_edge == "e0");
  CHECK_THROWS_AS(tqft::load_triangulation(base + "/data/absent.json"),
                  std::invalid_argument);
}
