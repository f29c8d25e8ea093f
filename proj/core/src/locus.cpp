#include "spinmetro/locus.hpp"

#include "spinmetro/descent.hpp"
#include "spinmetro/tensorbasis.hpp"
#include "spinmetro/wigner.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace spinmetro {
namespace {

constexpr double kPi = std::numbers::pi;

// Chord-deviation scales used when classifying boundary edges: runs that sit
// within kStraightTol of a chord count as flat faces, and a macro segment
// whose interior bulges past kCurvedTol beyond the chord between its end
// corners is a genuinely curved piece of boundary.
constexpr double kStraightTol = 2e-4;
constexpr double kCurvedTol = 1e-3;

// Hull turn angle that separates a sharp corner from the gentle bend of a
// discretized arc.
constexpr double kCornerTurnDeg = 25.0;

// A boundary point within this distance of a cataloged extreme state gets
// that state's name.
constexpr double kVertexBall = 5e-3;

// Tighter radius used when classifying the running optimum as pinned to a
// vertex versus sliding along a curved segment; a wide ball here would bias
// the handover angles.
constexpr double kLabelBall = 1e-3;

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

RealVector rescaled(const RealVector& r) {
  RealVector rt(r.size());
  for (Eigen::Index l = 0; l < r.size(); ++l) {
    rt[l] = r[l] / std::sqrt(2.0 * l + 1.0);
  }
  return rt;
}

double wrap_deg(double a) {
  a = std::fmod(a, 360.0);
  if (a < 0.0) a += 360.0;
  return a;
}

// Signed difference a - b wrapped into (-180, 180].
double wrap_diff_deg(double a, double b) {
  double d = std::fmod(a - b, 360.0);
  if (d <= -180.0) d += 360.0;
  if (d > 180.0) d -= 360.0;
  return d;
}

RealVector functional_coeffs(const ConstrainedRForm& form,
                             const RealVector& direction) {
  RealVector coeffs = RealVector::Zero(form.offset.size());
  for (std::size_t j = 0; j < form.free_coords.size(); ++j) {
    coeffs[form.free_coords[j]] = -direction[static_cast<Eigen::Index>(j)];
  }
  return coeffs;
}

PureState flow_extreme(const PureState& start, const ConstrainedRForm& form,
                       const RealVector& direction, int max_steps) {
  DescentConfig cfg;
  cfg.step = 0.08;
  cfg.tol = 1e-11;
  cfg.max_steps = max_steps;
  cfg.sample_every = max_steps;
  return descend_functional(start, functional_coeffs(form, direction), cfg)
      .states.back();
}

// Pushes a mixed state toward the face of the locus that maximizes
// direction . free(r) by iterating small non-unitary boosts along the
// matching shell slices. The first-order gain per boost is proportional to
// the variance of the generator, so the iteration stalls exactly on an
// extremal face.
MixedState boost_extreme(const MixedState& start, const ConstrainedRForm& form,
                         const RealVector& direction, int max_iters) {
  const int t = form.spin.two_s;
  auto score = [&](const MixedState& m) {
    return direction.dot(form.free_part(r_vector(m).r));
  };
  MixedState rho = start;
  double best = score(rho);
  double mu = 0.05;
  for (int it = 0; it < max_iters && mu > 1e-11; ++it) {
    Matrix h = Matrix::Zero(rho.matrix.rows(), rho.matrix.cols());
    for (std::size_t j = 0; j < form.free_coords.size(); ++j) {
      h -= direction[static_cast<Eigen::Index>(j)] *
           l_part(rho, form.free_coords[j]);
    }
    const MixedState cand = t_boost(rho, h, t, mu);
    const double sc = score(cand);
    if (sc > best + 1e-15) {
      rho = cand;
      best = sc;
      mu = std::min(mu * 1.25, 0.2);
    } else {
      mu *= 0.5;
    }
  }
  return rho;
}

double cross2(const Eigen::Vector2d& o, const Eigen::Vector2d& a,
              const Eigen::Vector2d& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) -
         (a.y() - o.y()) * (b.x() - o.x());
}

// Strictly convex hull (collinear interior points dropped), counterclockwise.
// Returns indices into pts.
std::vector<int> convex_hull_ccw(const std::vector<Eigen::Vector2d>& pts) {
  std::vector<int> order(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (pts[a].x() != pts[b].x()) return pts[a].x() < pts[b].x();
    return pts[a].y() < pts[b].y();
  });
  // Drop near-duplicates so refined points piling onto one vertex do not
  // produce zero-length hull edges.
  std::vector<int> kept;
  for (int idx : order) {
    if (kept.empty() || (pts[idx] - pts[kept.back()]).norm() > 1e-9) {
      kept.push_back(idx);
    }
  }
  if (kept.size() < 3) return kept;

  const double eps = 1e-13;
  std::vector<int> hull(2 * kept.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < kept.size(); ++i) {  // lower
    while (k >= 2 &&
           cross2(pts[hull[k - 2]], pts[hull[k - 1]], pts[kept[i]]) <= eps) {
      --k;
    }
    hull[k++] = kept[i];
  }
  for (std::size_t i = kept.size() - 1, t = k + 1; i-- > 0;) {  // upper
    while (k >= t &&
           cross2(pts[hull[k - 2]], pts[hull[k - 1]], pts[kept[i]]) <= eps) {
      --k;
    }
    hull[k++] = kept[i];
  }
  hull.resize(k - 1);
  return hull;
}

double turn_angle_deg(const Eigen::Vector2d& prev, const Eigen::Vector2d& cur,
                      const Eigen::Vector2d& next) {
  const Eigen::Vector2d u = cur - prev;
  const Eigen::Vector2d v = next - cur;
  const double dot = u.dot(v);
  const double crs = u.x() * v.y() - u.y() * v.x();
  return std::abs(std::atan2(crs, dot)) * 180.0 / kPi;
}

// Largest outward deviation of the points p[i0..i1] (inclusive, cyclic) from
// the chord p[i0] -> p[i1].
double chord_bulge(const std::vector<Eigen::Vector2d>& pts,
                   const std::vector<int>& hull, std::size_t i0,
                   std::size_t i1) {
  const std::size_t m = hull.size();
  const Eigen::Vector2d a = pts[hull[i0]];
  const Eigen::Vector2d b = pts[hull[i1]];
  Eigen::Vector2d dir = b - a;
  const double len = dir.norm();
  if (len < 1e-15) return 0.0;
  dir /= len;
  const Eigen::Vector2d out(dir.y(), -dir.x());  // outward for ccw order
  double bulge = 0.0;
  for (std::size_t i = (i0 + 1) % m; i != i1; i = (i + 1) % m) {
    bulge = std::max(bulge, out.dot(pts[hull[i]] - a));
  }
  return bulge;
}

// Longest prefix of the cyclic run i0..i1 that stays within kStraightTol of
// its own chord; returns the number of edges in that straight prefix.
std::size_t straight_prefix(const std::vector<Eigen::Vector2d>& pts,
                            const std::vector<int>& hull, std::size_t i0,
                            std::size_t n_edges, bool reversed) {
  const std::size_t m = hull.size();
  auto at = [&](std::size_t step) {
    return reversed ? (i0 + m * 8 - step) % m : (i0 + step) % m;
  };
  std::size_t best = 0;
  for (std::size_t j = 2; j <= n_edges; ++j) {
    const Eigen::Vector2d a = pts[hull[at(0)]];
    const Eigen::Vector2d b = pts[hull[at(j)]];
    Eigen::Vector2d dir = b - a;
    const double len = dir.norm();
    if (len < 1e-12) break;
    dir /= len;
    double dev = 0.0;
    for (std::size_t i = 1; i < j; ++i) {
      const Eigen::Vector2d d = pts[hull[at(i)]] - a;
      dev = std::max(dev, std::abs(d.x() * dir.y() - d.y() * dir.x()));
    }
    if (dev > kStraightTol) break;
    if (len >= 0.02) best = j;
  }
  return best;
}

struct VertexTarget {
  std::string name;
  RealVector coords;
};

std::vector<VertexTarget> vertex_targets(Spin s, bool mixed,
                                         const ConstrainedRForm& form) {
  std::vector<std::string> tags;
  if (!mixed) {
    switch (s.two_s) {
      case 2:
      case 3:
        tags = {"ghz", "coherent"};
        break;
      case 4:
        tags = {"tetrahedron", "ghz", "coherent"};
        break;
      case 5:
        tags = {"triangular-bipyramid", "w", "ghz", "coherent"};
        break;
      default:
        break;
    }
  } else if (s.two_s == 2) {
    tags = {"maximally-mixed", "ghz", "coherent"};
  }
  std::vector<VertexTarget> out;
  for (const auto& tag : tags) {
    RealVector r;
    if (tag == "maximally-mixed") {
      r = r_vector(maximally_mixed(s)).r;
    } else {
      r = r_vector(named_state(tag, s)).r;
    }
    out.push_back({tag, form.free_part(r)});
  }
  return out;
}

Eigen::Vector2d as_point(const RealVector& coords) {
  return {coords[0], coords.size() > 1 ? coords[1] : 0.0};
}

}  // namespace

RealVector ConstrainedRForm::full_r(const RealVector& free_values) const {
  if (free_values.size() != slopes.cols()) {
    throw std::invalid_argument("free coordinate count mismatch");
  }
  return offset + slopes * free_values;
}

RealVector ConstrainedRForm::free_part(const RealVector& full) const {
  if (full.size() != offset.size()) {
    throw std::invalid_argument("full r-vector has the wrong length");
  }
  RealVector out(static_cast<Eigen::Index>(free_coords.size()));
  for (std::size_t j = 0; j < free_coords.size(); ++j) {
    out[static_cast<Eigen::Index>(j)] = full[free_coords[j]];
  }
  return out;
}

ConstrainedRForm constrained_r_form(Spin s, bool mixed) {
  ConstrainedRForm form;
  form.spin = s;
  form.mixed = mixed;
  const int n = s.dim();
  if (!mixed) {
    const PureShellForm pure = pure_shell_form(s);
    form.free_coords = pure.free_shells;
    form.offset = pure.offset_d;
    form.slopes = pure.slope_d;
    form.has_named_vertices = s.two_s >= 2 && s.two_s <= 5;
  } else {
    form.free_coords.resize(n - 1);
    for (int l = 1; l < n; ++l) form.free_coords[l - 1] = l;
    form.offset = RealVector::Zero(n);
    form.offset[0] = 1.0 / n;
    form.slopes = RealMatrix::Zero(n, n - 1);
    for (int l = 1; l < n; ++l) form.slopes(l, l - 1) = 1.0;
    form.has_named_vertices = (s.two_s == 2);
  }
  return form;
}

const RealVector& LocusModel::boundary_coords(int position) const {
  if (position < 0 || position >= static_cast<int>(boundary.size())) {
    throw std::out_of_range("boundary position out of range");
  }
  return sample_coords[boundary[position]];
}

LocusModel build_locus(Spin s, bool mixed, int n_samples, int n_refine,
                       std::uint64_t seed) {
  if (n_samples < 1 || n_refine < 0) {
    throw std::invalid_argument("sample and refinement counts must be positive");
  }
  LocusModel model;
  model.spin = s;
  model.mixed = mixed;
  model.form = constrained_r_form(s, mixed);
  const auto k = static_cast<Eigen::Index>(model.form.free_coords.size());
  if (k < 1 || k > 2) {
    throw std::invalid_argument(
        "boundary construction supports one or two free coordinates");
  }

  auto push_pure = [&](const PureState& psi) {
    model.sample_coords.push_back(model.form.free_part(r_vector(psi).r));
    model.pure_states.push_back(psi);
  };
  auto push_mixed = [&](const MixedState& rho) {
    model.sample_coords.push_back(model.form.free_part(r_vector(rho).r));
    model.mixed_states.push_back(rho);
  };

  for (int i = 0; i < n_samples; ++i) {
    if (mixed) {
      push_mixed(random_mixed(s, mix_seed(seed, static_cast<std::uint64_t>(i))));
    } else {
      push_pure(random_pure(s, mix_seed(seed, static_cast<std::uint64_t>(i))));
    }
  }

  // Boundary refinement: sweep directions of the free plane and push a state
  // as far as it goes along each one. Consecutive directions warm-start from
  // the previous extreme point; periodic fresh restarts stop a stale face
  // optimum from being dragged across a corner. The sweep runs once in each
  // rotational sense: approaching a corner from one side only would leave
  // the warm chain parked on the corner state, which stays a local optimum
  // for a band of directions past the handover, and the far side of an
  // adjacent curved segment would go unsampled.
  if (n_refine > 0 && k == 2) {
    const int half = std::max(1, n_refine / 2);
    for (int pass = 0; pass < 2; ++pass) {
      PureState warm_pure =
          mixed ? PureState{} : random_pure(s, mix_seed(seed, 7001 + pass));
      MixedState warm_mixed =
          mixed ? random_mixed(s, mix_seed(seed, 7003 + pass)) : MixedState{};
      for (int j = 0; j < n_refine; ++j) {
        const double shift = (j < half) ? 0.0 : 0.5;
        const double frac = ((j % half) + shift) / half;
        const double ang = 2.0 * kPi * (pass == 0 ? frac : 1.0 - frac);
        RealVector d(2);
        d << std::cos(ang), std::sin(ang);
        const bool fresh = (j % 16 == 0);
        const int restart = 9000 + pass * n_refine + j;
        if (mixed) {
          MixedState start = fresh
                                 ? random_mixed(s, mix_seed(seed, restart))
                                 : warm_mixed;
          warm_mixed =
              boost_extreme(start, model.form, d, fresh ? 6000 : 2500);
          push_mixed(warm_mixed);
        } else {
          PureState start = fresh ? random_pure(s, mix_seed(seed, restart))
                                  : warm_pure;
          warm_pure =
              flow_extreme(start, model.form, d, fresh ? 40000 : 15000);
          push_pure(warm_pure);
        }
      }
    }
  } else if (n_refine > 0) {
    for (int j = 0; j < n_refine; ++j) {
      RealVector d(1);
      d << (j % 2 == 0 ? 1.0 : -1.0);
      if (mixed) {
        push_mixed(boost_extreme(random_mixed(s, mix_seed(seed, 9000 + j)),
                                 model.form, d, 6000));
      } else {
        push_pure(flow_extreme(random_pure(s, mix_seed(seed, 9000 + j)),
                               model.form, d, 40000));
      }
    }
  }

  const auto n_pts = model.sample_coords.size();
  if (k == 1) {
    int lo = 0, hi = 0;
    for (std::size_t i = 1; i < n_pts; ++i) {
      if (model.sample_coords[i][0] < model.sample_coords[lo][0]) {
        lo = static_cast<int>(i);
      }
      if (model.sample_coords[i][0] > model.sample_coords[hi][0]) {
        hi = static_cast<int>(i);
      }
    }
    model.boundary = {lo, hi};
    model.edge_curved = {false, false};
  } else {
    std::vector<Eigen::Vector2d> pts(n_pts);
    for (std::size_t i = 0; i < n_pts; ++i) {
      pts[i] = as_point(model.sample_coords[i]);
    }
    std::vector<int> hull = convex_hull_ccw(pts);
    if (hull.size() < 3) {
      throw std::runtime_error("degenerate locus: hull has fewer than 3 points");
    }
    const std::size_t m = hull.size();
    model.boundary = hull;
    model.edge_curved.assign(m, false);

    std::vector<std::size_t> corners;
    for (std::size_t i = 0; i < m; ++i) {
      const auto& prev = pts[hull[(i + m - 1) % m]];
      const auto& next = pts[hull[(i + 1) % m]];
      if (turn_angle_deg(prev, pts[hull[i]], next) > kCornerTurnDeg) {
        corners.push_back(i);
      }
    }
    if (corners.empty()) {
      // Smooth closed boundary: every edge belongs to the curved segment.
      if (chord_bulge(pts, hull, 0, m / 2) > kCurvedTol) {
        model.edge_curved.assign(m, true);
      }
    } else {
      for (std::size_t c = 0; c < corners.size(); ++c) {
        const std::size_t i0 = corners[c];
        const std::size_t i1 = corners[(c + 1) % corners.size()];
        const std::size_t n_edges = (i1 + m - i0) % m == 0
                                        ? m
                                        : (i1 + m - i0) % m;
        if (n_edges < 2) continue;
        if (chord_bulge(pts, hull, i0, i1) <= kCurvedTol) continue;
        // A curved piece lives between the straight entry and exit runs.
        const std::size_t head = straight_prefix(pts, hull, i0, n_edges, false);
        const std::size_t tail = straight_prefix(pts, hull, i1, n_edges, true);
        for (std::size_t e = head; e + tail < n_edges; ++e) {
          model.edge_curved[(i0 + e) % m] = true;
        }
      }
    }
  }

  for (const auto& target : vertex_targets(s, mixed, model.form)) {
    double best = std::numeric_limits<double>::infinity();
    int best_pos = -1;
    for (std::size_t p = 0; p < model.boundary.size(); ++p) {
      const double dist =
          (model.sample_coords[model.boundary[p]] - target.coords).norm();
      if (dist < best) {
        best = dist;
        best_pos = static_cast<int>(p);
      }
    }
    if (best_pos >= 0 && best < kVertexBall) {
      model.vertices.push_back(
          {target.name, model.sample_coords[model.boundary[best_pos]]});
    }
  }
  return model;
}

std::vector<std::vector<int>> curved_runs(const LocusModel& locus) {
  const auto m = locus.boundary.size();
  std::vector<std::vector<int>> runs;
  if (m == 0) return runs;
  if (std::all_of(locus.edge_curved.begin(), locus.edge_curved.end(),
                  [](bool b) { return b; })) {
    std::vector<int> whole(m);
    for (std::size_t i = 0; i < m; ++i) whole[i] = static_cast<int>(i);
    runs.push_back(std::move(whole));
    return runs;
  }
  // Start scanning just past a straight edge so runs never wrap mid-arc.
  std::size_t start = 0;
  while (start < m && locus.edge_curved[start]) ++start;
  for (std::size_t step = 0; step < m; ++step) {
    const std::size_t e = (start + step) % m;
    if (!locus.edge_curved[e]) continue;
    if (!runs.empty() && !runs.back().empty()) {
      const int last_edge = runs.back()[runs.back().size() - 2];
      if ((last_edge + 1) % static_cast<int>(m) == static_cast<int>(e)) {
        runs.back().push_back(static_cast<int>((e + 1) % m));
        continue;
      }
    }
    runs.push_back({static_cast<int>(e), static_cast<int>((e + 1) % m)});
  }
  return runs;
}

QuadraticFit fit_curved_segment(const LocusModel& locus, int run_index) {
  const auto runs = curved_runs(locus);
  if (run_index < 0 || run_index >= static_cast<int>(runs.size())) {
    throw std::out_of_range("no curved segment with that index");
  }
  const auto& run = runs[run_index];
  if (run.size() < 5) {
    throw std::runtime_error("curved segment too sparse to fit");
  }
  Eigen::MatrixXd a(run.size(), 3);
  Eigen::VectorXd y(run.size());
  for (std::size_t i = 0; i < run.size(); ++i) {
    const RealVector& c = locus.boundary_coords(run[i]);
    a(i, 0) = 1.0;
    a(i, 1) = c[0];
    a(i, 2) = c[0] * c[0];
    y[i] = c[1];
  }
  const Eigen::Vector3d sol = a.colPivHouseholderQr().solve(y);
  QuadraticFit fit;
  fit.c0 = sol[0];
  fit.c1 = sol[1];
  fit.c2 = sol[2];
  fit.max_residual = (a * sol - y).cwiseAbs().maxCoeff();
  return fit;
}

namespace {

// Solves for a unit row x in the span of the rescaled slope columns w such
// that x . w_j reproduces the published chart coefficients.
RealVector chart_axis(const RealMatrix& w, const Eigen::Vector2d& coeffs) {
  const Eigen::Matrix2d gram = (w.transpose() * w).eval();
  const Eigen::Vector2d c = gram.ldlt().solve(coeffs);
  return w * c;
}

void check_chart(const RealVector& axis, const RealVector& offset_t,
                 double expected_const) {
  if (std::abs(axis.norm() - 1.0) > 1e-10 ||
      std::abs(axis.dot(offset_t) - expected_const) > 1e-10) {
    throw std::logic_error("standardized chart coefficients are inconsistent");
  }
}

}  // namespace

StandardFrame standard_frame(Spin s, bool mixed) {
  StandardFrame frame;
  frame.spin = s;
  frame.mixed = mixed;
  frame.lambda_t = lambda_tilde(lambda_matrix(s));
  const int n = s.dim();

  if (mixed) {
    if (s.two_s != 2) {
      throw std::invalid_argument("no standardized mixed frame for this spin");
    }
    frame.in_plane_dim = 2;
    frame.in_plane_axes = RealMatrix::Zero(2, n);
    frame.in_plane_axes(0, 1) = std::sqrt(10.0) / 4.0;
    frame.in_plane_axes(0, 2) = -std::sqrt(6.0) / 4.0;
    frame.in_plane_axes(1, 1) = std::sqrt(6.0) / 4.0;
    frame.in_plane_axes(1, 2) = std::sqrt(10.0) / 4.0;
    frame.height_axis = RealVector::Zero(n);
    frame.height_axis[0] = 1.0;
    frame.plane_height = 1.0 / 3.0;
    return frame;
  }

  const ConstrainedRForm form = constrained_r_form(s, false);
  RealMatrix w(n, static_cast<Eigen::Index>(form.free_coords.size()));
  for (Eigen::Index j = 0; j < w.cols(); ++j) {
    w.col(j) = rescaled(form.slopes.col(j));
  }
  const RealVector offset_t = rescaled(form.offset);

  switch (s.two_s) {
    case 2:
    case 3: {
      frame.in_plane_dim = 1;
      RealVector x = w.col(0) / w.col(0).norm();
      const RealVector rt_coh = rescaled(r_vector(named_state("coherent", s)).r);
      const RealVector rt_ghz = rescaled(r_vector(named_state("ghz", s)).r);
      if (x.dot(rt_coh - rt_ghz) < 0.0) x = -x;
      frame.in_plane_axes = x.transpose();
      break;
    }
    case 4: {
      const double sx = 42.0 * std::sqrt(10.0);
      const double sy = 14.0 * std::sqrt(30.0);
      const RealVector x = chart_axis(w, {85.0 / sx, 21.0 / sx});
      const RealVector y = chart_axis(w, {-25.0 / sy, 63.0 / sy});
      check_chart(x, offset_t, -12.0 / sx);
      // The y offset is pinned by the rotation property (unit rows through the
      // plane offset) and by the convention that the coherent state sits at
      // phi = 0; both give exactly -8 here.
      check_chart(y, offset_t, -8.0 / sy);
      frame.in_plane_dim = 2;
      frame.in_plane_axes = RealMatrix(2, n);
      frame.in_plane_axes.row(0) = x.transpose();
      frame.in_plane_axes.row(1) = y.transpose();
      break;
    }
    case 5: {
      const double sx = 36.0 * std::sqrt(2310.0);
      const double sy = 36.0 * std::sqrt(210.0);
      const RealVector x = chart_axis(w, {1050.0 / sx, 336.0 / sx});
      const RealVector y = chart_axis(w, {-210.0 / sy, 336.0 / sy});
      check_chart(x, offset_t, -115.0 / sx);
      check_chart(y, offset_t, -25.0 / sy);
      frame.in_plane_dim = 2;
      frame.in_plane_axes = RealMatrix(2, n);
      frame.in_plane_axes.row(0) = x.transpose();
      frame.in_plane_axes.row(1) = y.transpose();
      break;
    }
    default:
      throw std::invalid_argument("no standardized frame for this spin");
  }

  // Height axis: the remaining invariant direction, orthogonal to the chart
  // plane inside the +1 eigenspace of the symmetric lambda.
  Eigen::SelfAdjointEigenSolver<RealMatrix> eig(frame.lambda_t);
  RealVector z = RealVector::Zero(n);
  for (int i = 0; i < n; ++i) {
    if (eig.eigenvalues()[i] > 0.0) {
      z += eig.eigenvectors().col(i) * eig.eigenvectors().col(i)[0];
    }
  }
  for (int row = 0; row < frame.in_plane_dim; ++row) {
    z -= z.dot(frame.in_plane_axes.row(row)) *
         frame.in_plane_axes.row(row).transpose();
  }
  if (z.norm() < 0.5) {
    throw std::logic_error("invariant plane normal collapsed");
  }
  z.normalize();
  if (z.dot(offset_t) < 0.0) z = -z;
  frame.height_axis = z;
  frame.plane_height = z.dot(offset_t);
  return frame;
}

Eigen::Vector2d StandardFrame::state_point(const RealVector& r) const {
  if (r.size() != in_plane_axes.cols()) {
    throw std::invalid_argument("r-vector has the wrong length for this frame");
  }
  const RealVector rt = rescaled(r);
  Eigen::Vector2d p(in_plane_axes.row(0).dot(rt), 0.0);
  if (in_plane_dim == 2) p.y() = in_plane_axes.row(1).dot(rt);
  return p;
}

Eigen::Vector2d StandardFrame::transform_point(const UnitaryTransform& v) const {
  if (v.spin.two_s != spin.two_s) {
    throw std::invalid_argument("transform acts on a different spin");
  }
  const RealVector m = lambda_t * rescaled(shell_weights(spin, v.matrix));
  Eigen::Vector2d p(in_plane_axes.row(0).dot(m), 0.0);
  if (in_plane_dim == 2) p.y() = in_plane_axes.row(1).dot(m);
  return p;
}

double StandardFrame::transform_height(const UnitaryTransform& v) const {
  if (v.spin.two_s != spin.two_s) {
    throw std::invalid_argument("transform acts on a different spin");
  }
  const RealVector m = lambda_t * rescaled(shell_weights(spin, v.matrix));
  return height_axis.dot(m);
}

double phi_deg_of(const Eigen::Vector2d& p) {
  return wrap_deg(std::atan2(p.y(), p.x()) * 180.0 / kPi);
}

TransformFamily rotation_family(Spin s) {
  return [s](double eta) { return rotation_transform(s, eta); };
}

TransformFamily squeezing_family(Spin s) {
  return [s](double eta) { return squeezing_transform(s, eta); };
}

std::vector<CurvePoint> transform_curve(const TransformFamily& family,
                                        const StandardFrame& frame,
                                        int n_points, double eta_min,
                                        double eta_max) {
  if (n_points < 2 || !(eta_max > eta_min)) {
    throw std::invalid_argument("need at least two curve points in a nonempty range");
  }
  std::vector<CurvePoint> curve(n_points);
  for (int i = 0; i < n_points; ++i) {
    const double eta =
        eta_min + (eta_max - eta_min) * i / static_cast<double>(n_points - 1);
    const UnitaryTransform v = family(eta);
    const Eigen::Vector2d p = frame.transform_point(v);
    curve[i].eta = eta;
    curve[i].phi_deg = phi_deg_of(p);
    curve[i].in_plane_norm = p.norm();
    curve[i].frame_point =
        Eigen::Vector3d(p.x(), p.y(), frame.transform_height(v));
  }
  return curve;
}

namespace {

struct BoundaryCloud {
  std::vector<Eigen::Vector2d> points;  // frame coordinates per boundary node
  std::vector<std::string> labels;      // vertex name or "continuous"
  std::vector<double> inv_purity;       // 1 for pure loci
  double shift = 0.0;                   // height term added before normalizing
};

// For a pure locus the sensor ranking is the bare in-plane inner product with
// the sweep direction. A mixed locus needs the purity-normalized average
// fidelity instead: under the bare product the maximally mixed state would
// rank as a universally optimal sensor even though its fidelity is constant
// one under every transformation. Every unitary transform image carries a
// height component equal to the dimension times the state plane height (the
// shell weights sum to the dimension), so the normalized score of a boundary
// state against a sweep direction d is (p . d + plane_height) / purity. The
// winning label is unchanged by rescaling the in-plane part of the transform
// vector across its attainable range, which is what makes a one-angle sweep
// meaningful for mixed loci in the first place.
BoundaryCloud boundary_cloud(const StandardFrame& frame,
                             const LocusModel& locus) {
  BoundaryCloud cloud;
  const auto m = locus.boundary.size();
  cloud.points.resize(m);
  cloud.labels.assign(m, "continuous");
  cloud.inv_purity.assign(m, 1.0);
  cloud.shift = locus.mixed ? frame.plane_height : 0.0;
  for (std::size_t p = 0; p < m; ++p) {
    const RealVector full = locus.form.full_r(locus.boundary_coords(p));
    cloud.points[p] = frame.state_point(full);
    if (locus.mixed) cloud.inv_purity[p] = 1.0 / full.sum();
    double best = kLabelBall;
    for (const auto& vert : locus.vertices) {
      const double dist = (locus.boundary_coords(p) - vert.coords).norm();
      if (dist < best) {
        best = dist;
        cloud.labels[p] = vert.name;
      }
    }
  }
  return cloud;
}

double node_score(const BoundaryCloud& cloud, std::size_t i,
                  const Eigen::Vector2d& d) {
  return (cloud.points[i].dot(d) + cloud.shift) * cloud.inv_purity[i];
}

int argmin_against(const BoundaryCloud& cloud, double phi_deg) {
  const double rad = phi_deg * kPi / 180.0;
  const Eigen::Vector2d d(std::cos(rad), std::sin(rad));
  int best = 0;
  double best_score = node_score(cloud, 0, d);
  for (std::size_t i = 1; i < cloud.points.size(); ++i) {
    const double sc = node_score(cloud, i, d);
    if (sc < best_score) {
      best_score = sc;
      best = static_cast<int>(i);
    }
  }
  return best;
}

// Plane components of the second-order displacement form at a corner state.
// At a corner of the locus the first-order motion of the r-vector vanishes
// for every tangent direction (otherwise the attainable set would contain a
// line through the corner), so along psi(e) = cos(e) psi + sin(e) chi the
// shell weights move by
//   r_l(e) - r_l = e^2 (|D_l|^2 + 2 <chi|P_l|chi> - 2 r_l <chi|chi>) + O(e^3)
// with D = chi psi^+ + psi chi^+ and X_l the shell-l slice of X. Directions
// along the rotation orbit leave r constant and are deflated, leaving two
// real symmetric forms mx, my over the remaining tangent coordinates.
struct CornerForm {
  bool valid = false;
  RealMatrix mx;
  RealMatrix my;
};

CornerForm corner_form(const StandardFrame& frame, const PureState& psi) {
  CornerForm out;
  const Spin s = psi.spin;
  const int n = s.dim();
  if (frame.in_plane_dim != 2 || n < 3) return out;
  const TBasis& basis = cached_t_basis(s);

  Eigen::HouseholderQR<Matrix> qr(psi.amplitudes);
  const Matrix full_q = qr.householderQ();
  const Matrix perp = full_q.rightCols(n - 1);

  std::vector<Matrix> shell(n);
  const RealVector r = r_vector(psi).r;
  for (int l = 0; l < n; ++l) shell[l] = l_part(psi, l);

  auto q_plane = [&](const Vector& chi) {
    const Matrix d = chi * psi.amplitudes.adjoint() +
                     psi.amplitudes * chi.adjoint();
    const double chi2 = chi.squaredNorm();
    Eigen::Vector2d q = Eigen::Vector2d::Zero();
    for (int l = 0; l < n; ++l) {
      double growth = 0.0;
      for (int m = -l; m <= l; ++m) {
        growth += std::norm(basis.t(l, m).conjugate().cwiseProduct(d).sum());
      }
      growth += 2.0 * ((chi.adjoint() * shell[l] * chi)(0).real() -
                       r[l] * chi2);
      growth /= std::sqrt(2.0 * l + 1.0);
      q.x() += frame.in_plane_axes(0, l) * growth;
      q.y() += frame.in_plane_axes(1, l) * growth;
    }
    return q;
  };

  const int dim = 2 * (n - 1);
  std::vector<Vector> dirs(dim);
  for (int a = 0; a < dim; ++a) {
    const Complex unit = (a < n - 1) ? Complex(1, 0) : Complex(0, 1);
    dirs[a] = perp.col(a % (n - 1)) * unit;
  }
  RealMatrix mx = RealMatrix::Zero(dim, dim);
  RealMatrix my = RealMatrix::Zero(dim, dim);
  for (int a = 0; a < dim; ++a) {
    const Eigen::Vector2d qa = q_plane(dirs[a]);
    mx(a, a) = qa.x();
    my(a, a) = qa.y();
    for (int b = a + 1; b < dim; ++b) {
      const Eigen::Vector2d qp = q_plane(dirs[a] + dirs[b]);
      const Eigen::Vector2d qm = q_plane(dirs[a] - dirs[b]);
      mx(a, b) = mx(b, a) = 0.25 * (qp.x() - qm.x());
      my(a, b) = my(b, a) = 0.25 * (qp.y() - qm.y());
    }
  }

  // Rotation orbit directions, projected off the state and the phase.
  const SpinOperatorSet ops = spin_operators(s);
  RealMatrix orbit(dim, 3);
  for (int k = 0; k < 3; ++k) {
    const Matrix& gen = (k == 0) ? ops.sx : (k == 1) ? ops.sy : ops.sz;
    Vector chi = Complex(0, -1) * (gen * psi.amplitudes);
    chi -= psi.amplitudes * (psi.amplitudes.adjoint() * chi)(0);
    const Vector c = perp.adjoint() * chi;
    orbit.col(k).head(n - 1) = c.real();
    orbit.col(k).tail(n - 1) = c.imag();
  }
  Eigen::ColPivHouseholderQR<RealMatrix> orbit_qr(orbit);
  orbit_qr.setThreshold(1e-9);
  const auto rank = orbit_qr.rank();
  if (rank >= dim) return out;
  const RealMatrix orbit_full =
      orbit_qr.householderQ() * RealMatrix::Identity(dim, dim);
  const RealMatrix keep = orbit_full.rightCols(dim - rank);
  out.mx = keep.transpose() * mx * keep;
  out.my = keep.transpose() * my * keep;
  out.valid = true;
  return out;
}

double corner_eigen_min(const CornerForm& form, double gamma_deg) {
  const double rad = gamma_deg * kPi / 180.0;
  const RealMatrix pencil = std::cos(rad) * form.mx + std::sin(rad) * form.my;
  Eigen::SelfAdjointEigenSolver<RealMatrix> eig(pencil,
                                                Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

// A handover between a vertex and an adjacent curved run is detected from
// polyline secants, which lag the true boundary tangent at the vertex by the
// local node spacing, and the spacing right next to a corner is the worst on
// the whole boundary: flows aimed just past the supporting cone stall while
// escaping the local optimum at the vertex. Two exact refinements replace
// the polyline estimate, depending on the corner's shape.
//
// While d(gamma) . Q(chi) >= 0 for every tangent perturbation chi, no curve
// through the vertex leaves its supporting half-plane, so the edge of the
// local cone is the zero crossing of the smallest eigenvalue of the pencil
// cos(gamma) mx + sin(gamma) my nearest the polyline estimate. For a convex
// corner the adjacent curved run terminates at the vertex and this local
// edge is the handover.
//
// The attainable set need not be convex at a corner, though: the boundary
// can leave the vertex, bend inward, and re-emerge as the curved run (the
// spin 5/2 locus does this at the triangular-bipyramid corner). The optimum
// then jumps from the vertex straight to a distant point of the run, and
// the handover is the direction of the common supporting line, i.e. the
// normal of the chord from the vertex to the point it ties with. The two
// cases are told apart by checking whether any sampled boundary node
// undercuts the vertex strictly inside the pencil's claimed sector.
double refine_vertex_handover(const StandardFrame& frame,
                              const LocusModel& locus,
                              const BoundaryCloud& cloud,
                              const std::string& from, const std::string& to,
                              double phi_star) {
  if (locus.mixed || frame.in_plane_dim != 2) return phi_star;
  const bool from_cont = (from == "continuous");
  const bool to_cont = (to == "continuous");
  if (from_cont == to_cont) return phi_star;
  const std::string& vertex_name = from_cont ? to : from;
  const LocusVertex* vertex = nullptr;
  for (const auto& v : locus.vertices) {
    if (v.name == vertex_name) vertex = &v;
  }
  if (vertex == nullptr) return phi_star;

  const PureState psi_v = named_state(vertex_name, locus.spin);
  const CornerForm form = corner_form(frame, psi_v);
  if (!form.valid) return phi_star;

  const double span = 6.0;
  const int probes = 61;
  double best_lo = 0.0, best_hi = 0.0;
  double best_dist = std::numeric_limits<double>::infinity();
  double prev_gamma = phi_star - span;
  double prev_val = corner_eigen_min(form, prev_gamma);
  for (int i = 1; i < probes; ++i) {
    const double gamma = phi_star - span + 2.0 * span * i / (probes - 1);
    const double val = corner_eigen_min(form, gamma);
    if ((prev_val > 1e-10 && val < -1e-10) ||
        (prev_val < -1e-10 && val > 1e-10)) {
      const double mid = 0.5 * (prev_gamma + gamma);
      const double dist = std::abs(mid - phi_star);
      if (dist < best_dist) {
        best_dist = dist;
        best_lo = prev_gamma;
        best_hi = gamma;
      }
    }
    prev_gamma = gamma;
    prev_val = val;
  }
  if (!std::isfinite(best_dist)) return phi_star;

  double pos = corner_eigen_min(form, best_lo) > 0.0 ? best_lo : best_hi;
  double neg = (pos == best_lo) ? best_hi : best_lo;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (pos + neg);
    if (corner_eigen_min(form, mid) > 0.0) {
      pos = mid;
    } else {
      neg = mid;
    }
  }
  const double local_edge = 0.5 * (pos + neg);

  // Nodes this close to the vertex (in free coordinates) are treated as the
  // vertex itself when probing for an undercut or anchoring the tie chord.
  constexpr double kChordBall = 3e-3;
  constexpr double kDipTol = 1e-9;
  const Eigen::Vector2d p_v = frame.state_point(r_vector(psi_v).r);
  auto min_margin = [&](double gamma_deg, int* arg) {
    const double rad = gamma_deg * kPi / 180.0;
    const Eigen::Vector2d d(std::cos(rad), std::sin(rad));
    double lowest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
      const RealVector& c = locus.boundary_coords(static_cast<int>(i));
      if ((c - vertex->coords).norm() < kChordBall) continue;
      const double margin = d.dot(cloud.points[i] - p_v);
      if (margin < lowest) {
        lowest = margin;
        if (arg != nullptr) *arg = static_cast<int>(i);
      }
    }
    return lowest;
  };

  // The vertex owns the angles on its own side of the handover row.
  const double into_vertex = from_cont ? 0.35 : -0.35;
  if (min_margin(local_edge + into_vertex, nullptr) >= -kDipTol) {
    return wrap_deg(local_edge);
  }

  // Dipped corner: walk the chord normal onto the tie direction.
  double gamma = phi_star;
  for (int it = 0; it < 10; ++it) {
    int tie = -1;
    min_margin(gamma, &tie);
    if (tie < 0) return wrap_deg(gamma);
    const Eigen::Vector2d chord = cloud.points[static_cast<std::size_t>(tie)] - p_v;
    const double along = std::atan2(chord.y(), chord.x()) * 180.0 / kPi;
    const double cand_a = along + 90.0;
    const double cand_b = along - 90.0;
    gamma = std::abs(wrap_diff_deg(cand_a, gamma)) <
                    std::abs(wrap_diff_deg(cand_b, gamma))
                ? cand_a
                : cand_b;
  }
  return wrap_deg(gamma);
}

}  // namespace

SensorPick optimal_sensor(const StandardFrame& frame, const LocusModel& locus,
                          double phi_deg, double tie_tol) {
  if (locus.boundary.empty()) {
    throw std::invalid_argument("locus has no boundary");
  }
  const BoundaryCloud cloud = boundary_cloud(frame, locus);
  const double rad = phi_deg * kPi / 180.0;
  const Eigen::Vector2d d(std::cos(rad), std::sin(rad));
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    best = std::min(best, node_score(cloud, i, d));
  }

  SensorPick pick;
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    if (node_score(cloud, i, d) <= best + tie_tol) {
      pick.boundary_positions.push_back(static_cast<int>(i));
    }
  }
  pick.coords = locus.boundary_coords(pick.boundary_positions.front());
  pick.label = "continuous";
  double best_dist = kLabelBall;
  for (int pos : pick.boundary_positions) {
    for (const auto& vert : locus.vertices) {
      const double dist = (locus.boundary_coords(pos) - vert.coords).norm();
      if (dist < best_dist) {
        best_dist = dist;
        pick.label = vert.name;
      }
    }
  }
  return pick;
}

CriticalAngleTable critical_angles(const StandardFrame& frame,
                                   const LocusModel& locus) {
  if (locus.boundary.empty()) {
    throw std::invalid_argument("locus has no boundary");
  }
  const BoundaryCloud cloud = boundary_cloud(frame, locus);
  auto label_at = [&](double phi) -> const std::string& {
    return cloud.labels[argmin_against(cloud, phi)];
  };

  // Scan off the lattice of exact multiples so degenerate directions (every
  // score zero) never land exactly on a sample.
  const int n_scan = 1800;
  std::vector<double> phis(n_scan);
  std::vector<std::string> labels(n_scan);
  for (int i = 0; i < n_scan; ++i) {
    phis[i] = 360.0 * (i + 0.5) / n_scan;
    labels[i] = label_at(phis[i]);
  }

  CriticalAngleTable table;
  for (int i = 0; i < n_scan; ++i) {
    const int j = (i + 1) % n_scan;
    if (labels[i] == labels[j]) continue;
    double lo = phis[i];
    double hi = phis[j] > phis[i] ? phis[j] : phis[j] + 360.0;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (label_at(wrap_deg(mid)) == labels[i]) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    const double refined = refine_vertex_handover(
        frame, locus, cloud, labels[i], labels[j], wrap_deg(0.5 * (lo + hi)));
    table.rows.push_back({labels[i], labels[j], refined});
  }
  std::sort(table.rows.begin(), table.rows.end(),
            [](const CriticalAngleRow& a, const CriticalAngleRow& b) {
              return a.phi_deg < b.phi_deg;
            });

  // Collapse slivers narrower than a degree: they are hull-discretization
  // noise, not genuine sectors.
  auto width_after = [&](std::size_t i) {
    const auto& rows = table.rows;
    const double a = rows[i].phi_deg;
    const double b = rows[(i + 1) % rows.size()].phi_deg;
    return wrap_deg(b - a);
  };
  bool changed = true;
  while (changed && table.rows.size() > 1) {
    changed = false;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      if (width_after(i) >= 1.0) continue;
      const std::size_t j = (i + 1) % table.rows.size();
      table.rows[i].to = table.rows[j].to;
      table.rows[i].phi_deg =
          wrap_deg(table.rows[i].phi_deg + 0.5 * width_after(i));
      table.rows.erase(table.rows.begin() + static_cast<std::ptrdiff_t>(j));
      changed = true;
      break;
    }
  }
  // A handover into and straight out of the same region is no transition.
  table.rows.erase(std::remove_if(table.rows.begin(), table.rows.end(),
                                  [](const CriticalAngleRow& row) {
                                    return row.from == row.to;
                                  }),
                   table.rows.end());
  std::sort(table.rows.begin(), table.rows.end(),
            [](const CriticalAngleRow& a, const CriticalAngleRow& b) {
              return a.phi_deg < b.phi_deg;
            });
  return table;
}

std::vector<double> curve_transitions(const TransformFamily& family,
                                      const StandardFrame& frame,
                                      const CriticalAngleTable& table,
                                      double eta_min, double eta_max,
                                      double tol) {
  if (!(eta_max > eta_min)) {
    throw std::invalid_argument("empty parameter range");
  }
  const int n_scan = 4096;
  std::vector<double> etas(n_scan), phis(n_scan), norms(n_scan);
  for (int i = 0; i < n_scan; ++i) {
    etas[i] = eta_min + (eta_max - eta_min) * i / (n_scan - 1.0);
    const Eigen::Vector2d p = frame.transform_point(family(etas[i]));
    phis[i] = phi_deg_of(p);
    norms[i] = p.norm();
  }
  auto norm_at = [&](double eta) {
    return frame.transform_point(family(eta)).norm();
  };
  auto phi_at = [&](double eta) {
    return phi_deg_of(frame.transform_point(family(eta)));
  };

  std::vector<double> events;

  // Pole passages: the in-plane part vanishes and the azimuth flips.
  const double pole_scale = *std::max_element(norms.begin(), norms.end());
  if (pole_scale < 1e-12) {
    return events;  // the whole curve is pinned at the pole
  }
  for (int i = 1; i + 1 < n_scan; ++i) {
    if (norms[i] > 0.01 * pole_scale) continue;
    if (norms[i] > norms[i - 1] || norms[i] > norms[i + 1]) continue;
    double a = etas[i - 1], b = etas[i + 1];
    while (b - a > tol) {
      const double m1 = a + (b - a) / 3.0;
      const double m2 = b - (b - a) / 3.0;
      if (norm_at(m1) < norm_at(m2)) {
        b = m2;
      } else {
        a = m1;
      }
    }
    const double eta_star = 0.5 * (a + b);
    if (norm_at(eta_star) < 1e-8 * std::max(1.0, pole_scale)) {
      events.push_back(eta_star);
    }
  }

  // Crossings of the critical rays, away from poles. A family can also run
  // exactly along a ray between two pole passages (a squeezed spin 5/2
  // never separates the coherent and ghz sectors, so its trace lies on
  // their shared boundary); the azimuth then hovers within rounding noise
  // of the ray and its sign flips carry no information.
  constexpr double kMinRayOffsetDeg = 1e-6;
  for (const auto& row : table.rows) {
    for (int i = 0; i + 1 < n_scan; ++i) {
      // Too close to a pole the azimuth is numerical noise; genuine crossings
      // re-enter the scan once the in-plane part has grown back.
      if (norms[i] < 1e-4 * pole_scale || norms[i + 1] < 1e-4 * pole_scale) {
        continue;
      }
      const double g0 = wrap_diff_deg(phis[i], row.phi_deg);
      const double g1 = wrap_diff_deg(phis[i + 1], row.phi_deg);
      if (std::abs(g0) >= 90.0 || std::abs(g1) >= 90.0) continue;
      if (g0 == 0.0 || (g0 < 0.0) == (g1 < 0.0)) continue;
      if (std::abs(g0) < kMinRayOffsetDeg && std::abs(g1) < kMinRayOffsetDeg) {
        continue;
      }
      double lo = etas[i], hi = etas[i + 1];
      bool skip = false;
      for (double pole : events) {
        if (pole > lo - 1e-7 && pole < hi + 1e-7) skip = true;
      }
      if (skip) continue;
      const bool lo_neg = g0 < 0.0;
      while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if ((wrap_diff_deg(phi_at(mid), row.phi_deg) < 0.0) == lo_neg) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      events.push_back(0.5 * (lo + hi));
    }
  }

  std::sort(events.begin(), events.end());
  events.erase(std::unique(events.begin(), events.end(),
                           [](double a, double b) { return b - a < 1e-8; }),
               events.end());
  return events;
}

}  // namespace spinmetro
