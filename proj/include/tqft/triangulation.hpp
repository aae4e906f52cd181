#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "tqft/constants.hpp"

namespace tqft {

/// Dihedral-angle slot of an ideal tetrahedron.  Slot A holds the angle on
/// the edge pair (01|23), B on (02|13), C on (03|12); opposite edges share
/// a slot, so each slot meets two of the six tetrahedron edges.
enum class Slot : int { A = 0, B = 1, C = 2 };

Slot slot_from_string(const std::string& s);
std::string to_string(Slot s);

struct Tetrahedron {
  int id = 0;
  int sign = +1;  // +1 positively oriented, -1 negatively oriented
};

struct EdgeIncidence {
  int tet_id = 0;
  Slot slot = Slot::A;
};

struct EdgeClass {
  std::string id;
  std::vector<EdgeIncidence> incidences;
};

/// A one-vertex style edge-gluing description of a triangulated 3-manifold:
/// tetrahedra with orientations plus edge classes listing which tetrahedron
/// angle slots wrap around each edge.  An optional distinguished edge marks
/// the knot strand in a one-vertex H-style triangulation of (S^3, knot).
struct Triangulation {
  std::vector<Tetrahedron> tets;
  std::vector<EdgeClass> edges;
  std::string knot_edge;  // empty when no distinguished edge

  bool has_knot_edge() const { return !knot_edge.empty(); }
  int tet_index(int tet_id) const;                // position in tets, -1 if absent
  const EdgeClass& edge(const std::string& id) const;

  /// Structural sanity: unique ids, signs +-1, every tetrahedron meeting
  /// every slot exactly twice across all edge classes, knot edge present
  /// when named.  Throws std::invalid_argument on violation.
  void validate() const;
};

/// Dihedral angles in turns (full turn = 1), one (A, B, C) triple per
/// tetrahedron, positionally aligned with Triangulation::tets.
struct ShapeStructure {
  std::vector<std::array<double, 3>> angles;

  double angle(int tet_pos, Slot s) const {
    return angles[tet_pos][static_cast<int>(s)];
  }
  double& angle(int tet_pos, Slot s) {
    return angles[tet_pos][static_cast<int>(s)];
  }
};

/// Total dihedral angle around an edge, in radians (2 pi times the sum of
/// the incident angles in turns).
double edge_weight(const Triangulation& tri, const ShapeStructure& shape,
                   const EdgeClass& edge);

/// True when `shape` is an angle structure on `tri`:
///  * every triple sums to 1/2 turn,
///  * each angle lies in (0, 1/2) (or [0, 1/2] when `extended`),
///  * every edge has total angle 2 pi, except a distinguished knot edge
///    which must have total angle 0.
/// All comparisons use absolute tolerance `tol`.
bool is_angle_structure(const Triangulation& tri, const ShapeStructure& shape,
                        bool extended = false, double tol = 1e-9);

/// Meridian-direction holonomy data of the five-tetrahedron ideal
/// triangulation: returns (lambda, mu) with
///   lambda = -2 pi (-c4 + b5 - 3 a3 + 3 a4)   [radians]
///   mu     = a3 - a4                          [turns]
/// Requires exactly five tetrahedra.
std::pair<double, double> lambda_mu(const ShapeStructure& shape);

/// Built-in five-tetrahedron ideal triangulation of the 7_3 knot complement.
const Triangulation& builtin_ideal_73();

/// Built-in six-tetrahedron one-vertex triangulation of (S^3, 7_3) with the
/// knot carried by the distinguished edge e0.
const Triangulation& builtin_h_73();

/// Canonical JSON bodies of the two built-ins (bytes identical to the files
/// shipped under data/).
const std::string& builtin_ideal_73_json();
const std::string& builtin_h_73_json();

/// (De)serialisation.  Schema:
/// {"tets":[{"id":1,"sign":1},...],
///  "edges":[{"id":"e1","incidences":[[1,"B"],...]},...],
///  "knot_edge":null|"e0"}
Triangulation triangulation_from_json(const std::string& text);
std::string triangulation_to_json(const Triangulation& tri);
Triangulation load_triangulation(const std::string& path);

}  // namespace tqft
