#include "tqft/triangulation.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace tqft {

namespace {

// Canonical JSON bodies of the built-in triangulations.  These strings are
// byte-identical to the files shipped under data/ (a test enforces that).
const std::string kIdeal73Json = R"({
  "tets": [
    {"id": 1, "sign": 1},
    {"id": 2, "sign": -1},
    {"id": 3, "sign": 1},
    {"id": 4, "sign": 1},
    {"id": 5, "sign": 1}
  ],
  "edges": [
    {"id": "e1", "incidences": [[1, "B"], [2, "B"], [3, "A"], [4, "B"], [4, "C"], [5, "A"], [5, "B"]]},
    {"id": "e2", "incidences": [[1, "B"], [1, "C"], [2, "C"], [3, "B"], [3, "C"], [4, "A"], [5, "C"]]},
    {"id": "e3", "incidences": [[2, "A"], [3, "B"], [4, "A"], [4, "B"], [5, "A"], [5, "C"]]},
    {"id": "e4", "incidences": [[1, "A"], [1, "C"], [2, "A"], [2, "C"], [3, "A"]]},
    {"id": "e5", "incidences": [[1, "A"], [2, "B"], [3, "C"], [4, "C"], [5, "B"]]}
  ],
  "knot_edge": null
}
)";

const std::string kH73Json = R"({
  "tets": [
    {"id": 1, "sign": 1},
    {"id": 2, "sign": 1},
    {"id": 3, "sign": -1},
    {"id": 4, "sign": 1},
    {"id": 5, "sign": 1},
    {"id": 6, "sign": 1}
  ],
  "edges": [
    {"id": "e0", "incidences": [[1, "A"]]},
    {"id": "e1", "incidences": [[1, "A"], [2, "A"], [2, "C"], [3, "A"], [3, "C"], [4, "A"]]},
    {"id": "e2", "incidences": [[1, "B"], [1, "C"], [2, "B"], [2, "C"], [3, "C"], [6, "C"]]},
    {"id": "e3", "incidences": [[1, "B"], [1, "C"], [4, "B"], [4, "C"], [5, "A"]]},
    {"id": "e4", "incidences": [[3, "A"], [4, "B"], [5, "A"], [5, "B"], [6, "A"], [6, "C"]]},
    {"id": "e5", "incidences": [[2, "B"], [3, "B"], [4, "A"], [5, "B"], [5, "C"], [6, "A"], [6, "B"]]},
    {"id": "e6", "incidences": [[2, "A"], [3, "B"], [4, "C"], [5, "C"], [6, "B"]]}
  ],
  "knot_edge": "e0"
}
)";

}  // namespace

Slot slot_from_string(const std::string& s) {
  if (s == "A") return Slot::A;
  if (s == "B") return Slot::B;
  if (s == "C") return Slot::C;
  throw std::invalid_argument("slot_from_string: expected A, B or C, got '" +
                              s + "'");
}

std::string to_string(Slot s) {
  switch (s) {
    case Slot::A: return "A";
    case Slot::B: return "B";
    case Slot::C: return "C";
  }
  throw std::invalid_argument("to_string(Slot): invalid value");
}

int Triangulation::tet_index(int tet_id) const {
  for (size_t i = 0; i < tets.size(); ++i) {
    if (tets[i].id == tet_id) return static_cast<int>(i);
  }
  return -1;
}

const EdgeClass& Triangulation::edge(const std::string& id) const {
  for (const auto& e : edges) {
    if (e.id == id) return e;
  }
  throw std::invalid_argument("Triangulation::edge: no edge named '" + id +
                              "'");
}

void Triangulation::validate() const {
  std::set<int> tet_ids;
  for (const auto& t : tets) {
    if (t.sign != 1 && t.sign != -1) {
      throw std::invalid_argument("validate: tetrahedron sign must be +-1");
    }
    if (!tet_ids.insert(t.id).second) {
      throw std::invalid_argument("validate: duplicate tetrahedron id");
    }
  }
  std::set<std::string> edge_ids;
  // Opposite tetrahedron edges share a slot, so across all edge classes
  // every (tet, slot) pair must occur exactly twice.
  std::map<std::pair<int, int>, int> slot_count;
  for (const auto& e : edges) {
    if (e.id.empty() || !edge_ids.insert(e.id).second) {
      throw std::invalid_argument("validate: missing or duplicate edge id");
    }
    for (const auto& inc : e.incidences) {
      if (tet_ids.find(inc.tet_id) == tet_ids.end()) {
        throw std::invalid_argument(
            "validate: incidence references unknown tetrahedron");
      }
      slot_count[{inc.tet_id, static_cast<int>(inc.slot)}]++;
    }
  }
  for (const auto& t : tets) {
    for (int s = 0; s < 3; ++s) {
      auto it = slot_count.find({t.id, s});
      const int n = (it == slot_count.end()) ? 0 : it->second;
      if (n != 2) {
        throw std::invalid_argument(
            "validate: tetrahedron " + std::to_string(t.id) + " slot " +
            to_string(static_cast<Slot>(s)) + " appears " + std::to_string(n) +
            " times, expected 2");
      }
    }
  }
  if (!knot_edge.empty() && edge_ids.find(knot_edge) == edge_ids.end()) {
    throw std::invalid_argument("validate: knot_edge names a missing edge");
  }
}

double edge_weight(const Triangulation& tri, const ShapeStructure& shape,
                   const EdgeClass& edge) {
  double turns = 0.0;
  for (const auto& inc : edge.incidences) {
    const int pos = tri.tet_index(inc.tet_id);
    if (pos < 0 || static_cast<size_t>(pos) >= shape.angles.size()) {
      throw std::invalid_argument("edge_weight: shape/triangulation mismatch");
    }
    turns += shape.angle(pos, inc.slot);
  }
  return 2.0 * kPi * turns;
}

bool is_angle_structure(const Triangulation& tri, const ShapeStructure& shape,
                        bool extended, double tol) {
  if (shape.angles.size() != tri.tets.size()) return false;
  for (const auto& triple : shape.angles) {
    double sum = 0.0;
    for (double a : triple) {
      if (extended) {
        if (a < -tol || a > 0.5 + tol) return false;
      } else {
        if (a <= tol || a >= 0.5 - tol) return false;
      }
      sum += a;
    }
    if (std::abs(sum - 0.5) > tol) return false;
  }
  for (const auto& e : tri.edges) {
    const double w = edge_weight(tri, shape, e);
    const double target = (e.id == tri.knot_edge) ? 0.0 : 2.0 * kPi;
    if (std::abs(w - target) > 2.0 * kPi * tol) return false;
  }
  return true;
}

std::pair<double, double> lambda_mu(const ShapeStructure& shape) {
  if (shape.angles.size() != 5) {
    throw std::invalid_argument("lambda_mu: expects the five-tetrahedron "
                                "ideal triangulation shape");
  }
  const double a3 = shape.angle(2, Slot::A);
  const double a4 = shape.angle(3, Slot::A);
  const double c4 = shape.angle(3, Slot::C);
  const double b5 = shape.angle(4, Slot::B);
  const double lambda = -2.0 * kPi * (-c4 + b5 - 3.0 * a3 + 3.0 * a4);
  const double mu = a3 - a4;
  return {lambda, mu};
}

Triangulation triangulation_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("triangulation_from_json: ") +
                                e.what());
  }
  Triangulation tri;
  if (!j.is_object() || !j.contains("tets") || !j.contains("edges")) {
    throw std::invalid_argument(
        "triangulation_from_json: expected object with tets and edges");
  }
  for (const auto& jt : j.at("tets")) {
    Tetrahedron t;
    t.id = jt.at("id").get<int>();
    t.sign = jt.at("sign").get<int>();
    tri.tets.push_back(t);
  }
  for (const auto& je : j.at("edges")) {
    EdgeClass e;
    e.id = je.at("id").get<std::string>();
    for (const auto& ji : je.at("incidences")) {
      if (!ji.is_array() || ji.size() != 2) {
        throw std::invalid_argument(
            "triangulation_from_json: incidence must be [tet, slot]");
      }
      EdgeIncidence inc;
      inc.tet_id = ji.at(0).get<int>();
      inc.slot = slot_from_string(ji.at(1).get<std::string>());
      e.incidences.push_back(inc);
    }
    tri.edges.push_back(std::move(e));
  }
  if (j.contains("knot_edge") && !j.at("knot_edge").is_null()) {
    tri.knot_edge = j.at("knot_edge").get<std::string>();
  }
  tri.validate();
  return tri;
}

std::string triangulation_to_json(const Triangulation& tri) {
  nlohmann::json j;
  j["tets"] = nlohmann::json::array();
  for (const auto& t : tri.tets) {
    j["tets"].push_back({{"id", t.id}, {"sign", t.sign}});
  }
  j["edges"] = nlohmann::json::array();
  for (const auto& e : tri.edges) {
    nlohmann::json je;
    je["id"] = e.id;
    je["incidences"] = nlohmann::json::array();
    for (const auto& inc : e.incidences) {
      je["incidences"].push_back({inc.tet_id, to_string(inc.slot)});
    }
    j["edges"].push_back(je);
  }
  if (tri.knot_edge.empty()) {
    j["knot_edge"] = nullptr;
  } else {
    j["knot_edge"] = tri.knot_edge;
  }
  return j.dump(2) + "\n";
}

Triangulation load_triangulation(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::invalid_argument("load_triangulation: cannot open '" + path +
                                "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return triangulation_from_json(buf.str());
}

const Triangulation& builtin_ideal_73() {
  static const Triangulation tri = triangulation_from_json(kIdeal73Json);
  return tri;
}

const Triangulation& builtin_h_73() {
  static const Triangulation tri = triangulation_from_json(kH73Json);
  return tri;
}

const std::string& builtin_ideal_73_json() { return kIdeal73Json; }
const std::string& builtin_h_73_json() { return kH73Json; }

}  // namespace tqft
