#pragma once

#include "spinmetro/metrology.hpp"
#include "spinmetro/spin.hpp"
#include "spinmetro/states.hpp"
#include "spinmetro/types.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace spinmetro {

// Affine parametrization of the attainable shell-weight vectors,
//   r = offset + slopes * free_values,
// with free_values listing the coordinates named in free_coords. For pure
// states the dependent shells follow from the invariance constraint
// lambda r = r (free shells 1..floor(s)); for mixed states only the
// unit-trace value r_0 = 1/n is fixed and every other shell is free.
struct ConstrainedRForm {
  Spin spin;
  bool mixed = false;
  std::vector<int> free_coords;
  RealVector offset;   // length 2s+1
  RealMatrix slopes;   // (2s+1) x free_coords.size()
  bool has_named_vertices = false;

  RealVector full_r(const RealVector& free_values) const;
  RealVector free_part(const RealVector& full) const;
};

ConstrainedRForm constrained_r_form(Spin s, bool mixed = false);

// Distinguished extreme point of the locus, tagged with the catalog name of
// a state that realizes it ("coherent", "ghz", ...).
struct LocusVertex {
  std::string name;
  RealVector coords;  // free coordinates
};

// Sampled picture of the attainable region in the free coordinates. The
// boundary walks sample indices counterclockwise; edge_curved[i] flags the
// edge boundary[i] -> boundary[(i+1) % size] as part of a curved segment
// rather than a straight face.
struct LocusModel {
  Spin spin;
  bool mixed = false;
  ConstrainedRForm form;
  std::vector<RealVector> sample_coords;
  std::vector<PureState> pure_states;    // parallel to sample_coords
  std::vector<MixedState> mixed_states;  // used instead when mixed
  std::vector<int> boundary;
  std::vector<bool> edge_curved;
  std::vector<LocusVertex> vertices;

  const RealVector& boundary_coords(int position) const;
};

// Draws n_samples random states (Fubini-Study for pure, Hilbert-Schmidt for
// mixed), then pushes states outward along n_refine directions of the free
// plane: gradient flows of linear shell-weight functionals for pure states,
// iterated non-unitary boosts for mixed ones. The boundary is the convex
// hull of all resulting coordinates. Supports one or two free coordinates.
LocusModel build_locus(Spin s, bool mixed, int n_samples, int n_refine,
                       std::uint64_t seed);

// Maximal runs of curved boundary edges, as lists of boundary positions.
std::vector<std::vector<int>> curved_runs(const LocusModel& locus);

// Least-squares quadratic y = c0 + c1 x + c2 x^2 through the points of one
// curved run (x, y = the two free coordinates), with the largest absolute
// misfit over the run reported alongside.
struct QuadraticFit {
  double c0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double max_residual = 0.0;
};

QuadraticFit fit_curved_segment(const LocusModel& locus, int run_index = 0);

// Orthonormal frame adapted to the plane that carries the locus in the
// rescaled picture rt_l = r_l / sqrt(2l+1). The in-plane rows reproduce the
// standardized affine charts; height_axis is the unit normal on which every
// attainable state has the constant component plane_height. The same frame
// maps a unitary V to the vector lambda_tilde * wt(V), whose in-plane angle
// phi classifies which boundary state senses V best:
//   avg_fidelity(rho, V) = state_point(r) . transform_point(V)
//                          + plane_height * transform_height(V).
struct StandardFrame {
  Spin spin;
  bool mixed = false;
  int in_plane_dim = 1;
  RealMatrix in_plane_axes;  // in_plane_dim x (2s+1), orthonormal rows
  RealVector height_axis;    // length 2s+1
  double plane_height = 0.0;
  RealMatrix lambda_t;       // symmetric lambda, cached for the V side

  Eigen::Vector2d state_point(const RealVector& r) const;
  Eigen::Vector2d transform_point(const UnitaryTransform& v) const;
  double transform_height(const UnitaryTransform& v) const;
};

// In-plane azimuth in degrees, wrapped to [0, 360).
double phi_deg_of(const Eigen::Vector2d& p);

// Frames are standardized for pure s = 1, 3/2, 2, 5/2 and for mixed s = 1;
// other spins throw (their invariant planes have more than two in-plane
// directions). For the one-dimensional loci (s = 1, 3/2) the second row is
// absent and points carry y = 0, with the coherent state on the positive
// x side.
StandardFrame standard_frame(Spin s, bool mixed = false);

// One-parameter families eta -> V(eta) used by the curve helpers.
using TransformFamily = std::function<UnitaryTransform(double)>;

TransformFamily rotation_family(Spin s);   // e^{-i eta S_z}
TransformFamily squeezing_family(Spin s);  // e^{-i eta S_z^2}

// Trace of the transform vector through the frame: azimuth, in-plane norm
// (zero when the curve passes through the pole), and the full frame
// coordinates (x, y, height component).
struct CurvePoint {
  double eta = 0.0;
  double phi_deg = 0.0;
  double in_plane_norm = 0.0;
  Eigen::Vector3d frame_point = Eigen::Vector3d::Zero();
};

std::vector<CurvePoint> transform_curve(const TransformFamily& family,
                                        const StandardFrame& frame,
                                        int n_points, double eta_min,
                                        double eta_max);

// Boundary states minimizing the in-plane score against the direction
// phi_deg. All boundary positions within tie_tol of the minimum are
// reported; label carries the vertex name when the minimizer sits on a
// named vertex and "continuous" when it lies on a curved segment.
struct SensorPick {
  std::vector<int> boundary_positions;
  RealVector coords;  // free coordinates of the first minimizer
  std::string label;
};

SensorPick optimal_sensor(const StandardFrame& frame, const LocusModel& locus,
                          double phi_deg, double tie_tol = 1e-9);

// Sector boundaries of the optimal-sensor map over phi in [0, 360): each row
// records the angle at which the optimum hands over from one boundary
// region to the next, sorted by angle.
struct CriticalAngleRow {
  std::string from;
  std::string to;
  double phi_deg = 0.0;
};

struct CriticalAngleTable {
  std::vector<CriticalAngleRow> rows;
};

CriticalAngleTable critical_angles(const StandardFrame& frame,
                                   const LocusModel& locus);

// Parameter values in (eta_min, eta_max) at which the family's transform
// vector changes sector: crossings of the critical rays of the table and
// passages through the pole (vanishing in-plane part, which flips the
// azimuth by 180 degrees). Values are refined by bisection to tol.
std::vector<double> curve_transitions(const TransformFamily& family,
                                      const StandardFrame& frame,
                                      const CriticalAngleTable& table,
                                      double eta_min, double eta_max,
                                      double tol = 1e-10);

}  // namespace spinmetro
