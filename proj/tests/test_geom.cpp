#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "mofkit/geom.hpp"
#include "mofkit/rng.hpp"
#include "support/neldermead.hpp"

using namespace mofkit;
using namespace mofkit::geom;

namespace {

Points random_points(Rng& rng, int n, double scale = 2.0) {
  Points p;
  for (int i = 0; i < n; ++i)
    p.push_back({rng.normal() * scale, rng.normal() * scale, rng.normal() * scale});
  return p;
}

Mat3 euler_matrix(double a, double b, double c) {
  const Rotation rz1 = Rotation::from_axis_angle({0, 0, 1}, a);
  const Rotation ry = Rotation::from_axis_angle({0, 1, 0}, b);
  const Rotation rz2 = Rotation::from_axis_angle({0, 0, 1}, c);
  return (rz1 * ry * rz2).as_matrix();
}

// independent oracle: best-fit rmsd by Euler-angle grid search plus
// Nelder-Mead refinement (translation handled by centering)
double grid_rmsd_oracle(const Points& p, const Points& q) {
  const Points pc = centered(p), qc = centered(q);
  auto rmsd_at = [&](const std::vector<double>& ang) {
    const Mat3 r = euler_matrix(ang[0], ang[1], ang[2]);
    double ss = 0.0;
    for (size_t i = 0; i < pc.size(); ++i) ss += (r * pc[i] - qc[i]).norm2();
    return std::sqrt(ss / static_cast<double>(pc.size()));
  };
  const double step = 15.0 * M_PI / 180.0;
  std::vector<double> best = {0, 0, 0};
  double best_v = rmsd_at(best);
  for (double a = 0; a < 2 * M_PI; a += step)
    for (double b = 0; b <= M_PI + 1e-9; b += step)
      for (double c = 0; c < 2 * M_PI; c += step) {
        const double v = rmsd_at({a, b, c});
        if (v < best_v) {
          best_v = v;
          best = {a, b, c};
        }
      }
  auto refined = testsupport::nelder_mead(rmsd_at, best, 0.05);
  return rmsd_at(refined);
}

}  // namespace

TEST_CASE("rotation type invariants") {
  for (uint64_t s = 0; s < 20; ++s) {
    const Rotation r = Rotation::random(s);
    CHECK(std::fabs(r.norm() - 1.0) < 1e-9);
    const Mat3 m = r.as_matrix();
    const Mat3 mtm = m.transposed() * m;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        CHECK(std::fabs(mtm(i, j) - (i == j ? 1.0 : 0.0)) < 1e-7);
    CHECK(m.det() == doctest::Approx(1.0).epsilon(1e-7));
    const Rotation rt = Rotation::from_matrix(m);
    const Mat3 m2 = rt.as_matrix();
    for (int k = 0; k < 9; ++k) CHECK(std::fabs(m.m[k] - m2.m[k]) < 1e-9);
  }
}

TEST_CASE("kabsch: identical sets give zero rmsd and identity rotation") {
  Rng rng(1);
  const Points p = random_points(rng, 6);
  const KabschResult r = kabsch_align(p, p);
  CHECK(r.rmsd < 1e-10);
  const Mat3 m = r.rotation.as_matrix();
  for (int i = 0; i < 3; ++i) CHECK(m(i, i) == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("kabsch: recovers an exact rotation+translation, 1000 random cases") {
  Rng rng(2);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = rng.uniform_int(2, 8);
    const Points p = random_points(rng, n);
    const Rotation rot = Rotation::random(1000 + trial);
    const Vec3 t{rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)};
    const Points q = transformed(p, rot, t);
    const KabschResult r = kabsch_align(p, q);
    worst = std::max(worst, r.rmsd);
  }
  CHECK(worst < 1e-7);
}

TEST_CASE("kabsch: degenerate coincident points return identity and centroid shift") {
  Points p(4, Vec3{1, 1, 1}), q(4, Vec3{2, 0, 0});
  const KabschResult r = kabsch_align(p, q);
  const Mat3 m = r.rotation.as_matrix();
  for (int i = 0; i < 3; ++i) CHECK(m(i, i) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK((r.translation - Vec3{1, -1, -1}).norm() < 1e-9);
  CHECK(r.rmsd < 1e-12);
}

TEST_CASE("kabsch rmsd matches rotation-grid oracle on perturbed non-planar points") {
  Rng rng(3);
  Points p = {{0, 0, 0}, {1.5, 0, 0}, {0, 1.2, 0}, {0.3, 0.4, 1.7}};
  Points q = p;
  for (Vec3& v : q) v += Vec3{rng.normal() * 0.1, rng.normal() * 0.1, rng.normal() * 0.1};
  const Rotation rot = Rotation::random(77);
  const Vec3 t{0.4, -0.2, 0.9};
  apply_inplace(q, rot, t);

  const double fast = kabsch_align(p, q).rmsd;
  const double oracle = grid_rmsd_oracle(p, q);
  CHECK(std::fabs(fast - oracle) < 1e-3);
  CHECK(fast <= oracle + 1e-9);  // kabsch is the minimizer
}

TEST_CASE("unaligned_rmsd and chamfer basics") {
  const Points a = {{0, 0, 0}};
  const Points b = {{1, 0, 0}};
  CHECK(unaligned_rmsd(a, b) == doctest::Approx(1.0));
  CHECK(chamfer(a, b) == doctest::Approx(1.0));
  CHECK(unaligned_rmsd(a, a) == doctest::Approx(0.0));
  CHECK(chamfer(a, a) == doctest::Approx(0.0));
  CHECK_THROWS(unaligned_rmsd({}, {}));
  CHECK_THROWS(chamfer({}, {}));
}

TEST_CASE("chamfer equals an independent O(n^2) recompute on random 5-point sets") {
  Rng rng(4);
  const Points p = random_points(rng, 5), q = random_points(rng, 5);
  double s1 = 0.0;
  for (const Vec3& x : p) {
    double best = 1e300;
    for (const Vec3& y : q) best = std::min(best, (x - y).norm());
    s1 += best;
  }
  double s2 = 0.0;
  for (const Vec3& y : q) {
    double best = 1e300;
    for (const Vec3& x : p) best = std::min(best, (y - x).norm());
    s2 += best;
  }
  const double oracle = 0.5 * (s1 / 5.0 + s2 / 5.0);
  CHECK(chamfer(p, q) == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("principal_axis: collinear anchors and dominant-extent rectangle") {
  const Vec3 az = principal_axis({{0, 0, -2.5}, {0, 0, 2.5}});
  CHECK(std::fabs(az.z) == doctest::Approx(1.0));
  CHECK(az.z > 0);

  const Points rect = {{-5, -0.5, 0}, {5, -0.5, 0}, {-5, 0.5, 0}, {5, 0.5, 0}};
  const Vec3 ax = principal_axis(rect);
  CHECK(ax.x == doctest::Approx(1.0).epsilon(1e-9));

  CHECK_THROWS(principal_axis({{1, 1, 1}, {1, 1, 1}}));
  CHECK_THROWS(principal_axis({{1, 1, 1}}));
}

TEST_CASE("principal_axis matches a power-iteration covariance oracle") {
  Rng rng(5);
  Points cloud;
  for (int i = 0; i < 40; ++i)
    cloud.push_back({rng.normal() * 3.0, rng.normal() * 1.0, rng.normal() * 0.4});
  const Rotation rot = Rotation::random(9);
  apply_inplace(cloud, rot, {1, 2, 3});

  const Vec3 axis = principal_axis(cloud);

  // independent oracle: power iteration on the covariance matrix
  const Points c = centered(cloud);
  Mat3 cov;
  for (const Vec3& v : c) {
    cov(0, 0) += v.x * v.x; cov(0, 1) += v.x * v.y; cov(0, 2) += v.x * v.z;
    cov(1, 0) += v.y * v.x; cov(1, 1) += v.y * v.y; cov(1, 2) += v.y * v.z;
    cov(2, 0) += v.z * v.x; cov(2, 1) += v.z * v.y; cov(2, 2) += v.z * v.z;
  }
  Vec3 u{1, 0.5, 0.25};
  for (int it = 0; it < 3000; ++it) u = (cov * u).normalized();
  const double align = std::fabs(u.dot(axis));
  CHECK(align == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("principal_axis invariant under permutation, covariant under rotation") {
  Rng rng(6);
  Points cloud;
  for (int i = 0; i < 15; ++i)
    cloud.push_back({rng.normal() * 2.5, rng.normal() * 1.2, rng.normal() * 0.3});
  const Vec3 a0 = principal_axis(cloud);

  Points perm = cloud;
  std::reverse(perm.begin(), perm.end());
  const Vec3 a1 = principal_axis(perm);
  CHECK(std::fabs(a0.dot(a1)) == doctest::Approx(1.0).epsilon(1e-12));

  for (uint64_t s = 0; s < 30; ++s) {
    const Rotation rot = Rotation::random(100 + s);
    const Vec3 ar = principal_axis(transformed(cloud, rot, {0, 0, 0}));
    const Vec3 back = rot.inverse().apply(ar);
    CHECK(std::fabs(back.dot(a0)) == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("pbc cell construction and invariants") {
  const PBCCell cubic = PBCCell::cubic(10.0);
  CHECK(cubic.volume() == doctest::Approx(1000.0));
  const Mat3 prod = cubic.lattice * cubic.inv_lattice;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(std::fabs(prod(i, j) - (i == j ? 1.0 : 0.0)) < 1e-9);

  CHECK_THROWS(PBCCell(Mat3::from_rows({1, 0, 0}, {0, -1, 0}, {0, 0, 1})));

  // triclinic volume against the analytic formula
  const double a = 5, b = 6, c = 7, al = 80, be = 85, ga = 95;
  const PBCCell tri = PBCCell::from_parameters(a, b, c, al, be, ga);
  const double ca = std::cos(al * M_PI / 180), cb = std::cos(be * M_PI / 180),
               cg = std::cos(ga * M_PI / 180);
  const double vol = a * b * c * std::sqrt(1 - ca * ca - cb * cb - cg * cg + 2 * ca * cb * cg);
  CHECK(tri.volume() == doctest::Approx(vol).epsilon(1e-12));
}

TEST_CASE("min_image_distance: wraparound and identity") {
  const PBCCell cell = PBCCell::cubic(10.0);
  const MinImage wrap = min_image_distance(cell, {0.1, 0, 0}, {0.9, 0, 0});
  CHECK(wrap.distance == doctest::Approx(2.0));
  CHECK(wrap.shift == std::array<int, 3>{-1, 0, 0});

  const MinImage same = min_image_distance(cell, {0.3, 0.4, 0.5}, {0.3, 0.4, 0.5});
  CHECK(same.distance == doctest::Approx(0.0));
  CHECK(same.shift == std::array<int, 3>{0, 0, 0});
}

TEST_CASE("min_image_distance equals exhaustive search in a skewed cell") {
  const PBCCell cell = PBCCell::from_parameters(6.0, 7.5, 9.0, 65.0, 110.0, 80.0);
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const Vec3 fa{rng.uniform(-1, 2), rng.uniform(-1, 2), rng.uniform(-1, 2)};
    const Vec3 fb{rng.uniform(-1, 2), rng.uniform(-1, 2), rng.uniform(-1, 2)};
    const MinImage got = min_image_distance(cell, fa, fb);
    double best = 1e300;
    for (int sx = -3; sx <= 3; ++sx)
      for (int sy = -3; sy <= 3; ++sy)
        for (int sz = -3; sz <= 3; ++sz) {
          const Vec3 d = fb - fa + Vec3{double(sx), double(sy), double(sz)};
          best = std::min(best, cell.frac_to_cart(d).norm());
        }
    CHECK(got.distance == doctest::Approx(best).epsilon(1e-12));
    const Vec3 at_shift = cell.frac_to_cart(fb - fa + Vec3{double(got.shift[0]),
                                                           double(got.shift[1]),
                                                           double(got.shift[2])});
    CHECK(at_shift.norm() == doctest::Approx(got.distance).epsilon(1e-12));
  }
}

TEST_CASE("neighbor_list: single node self-images match brute-force shift count") {
  const PBCCell cell = PBCCell::cubic(10.0);
  const double cutoff = 35.0;
  const auto edges = neighbor_list(cell, {{0.25, 0.25, 0.25}}, cutoff);
  int expect = 0;
  for (int sx = -5; sx <= 5; ++sx)
    for (int sy = -5; sy <= 5; ++sy)
      for (int sz = -5; sz <= 5; ++sz) {
        if (sx == 0 && sy == 0 && sz == 0) continue;
        if (cell.frac_to_cart({double(sx), double(sy), double(sz)}).norm() <= cutoff)
          ++expect;
      }
  CHECK(static_cast<int>(edges.size()) == expect);
  for (const auto& e : edges) {
    CHECK(e.i == 0);
    CHECK(e.j == 0);
    CHECK(!(e.shift[0] == 0 && e.shift[1] == 0 && e.shift[2] == 0));
  }
}

TEST_CASE("neighbor_list: far-apart pair below cutoff gives empty list") {
  const PBCCell cell = PBCCell::cubic(100.0);
  const auto edges = neighbor_list(cell, {{0.0, 0, 0}, {0.04, 0, 0}}, 3.0);
  CHECK(edges.empty());
}

TEST_CASE("neighbor_list: symmetric under (i,j,s) <-> (j,i,-s)") {
  const PBCCell cell = PBCCell::from_parameters(12, 14, 11, 75, 95, 85);
  Rng rng(9);
  std::vector<Vec3> pos;
  for (int i = 0; i < 8; ++i)
    pos.push_back({rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(0, 1)});
  const auto edges = neighbor_list(cell, pos, 15.0);
  CHECK(!edges.empty());
  std::set<std::tuple<int, int, int, int, int>> keyset;
  for (const auto& e : edges)
    keyset.insert({e.i, e.j, e.shift[0], e.shift[1], e.shift[2]});
  for (const auto& e : edges) {
    CHECK(keyset.count({e.j, e.i, -e.shift[0], -e.shift[1], -e.shift[2]}) == 1);
  }
}

TEST_CASE("neighbor_list rejects cutoffs beyond 6x the smallest cell height") {
  const PBCCell cell = PBCCell::cubic(5.0);
  CHECK_THROWS_WITH_AS(static_cast<void>(neighbor_list(cell, {{0, 0, 0}}, 31.0)),
                       doctest::Contains("supercell"), std::invalid_argument);
}

TEST_CASE("neighbor_list distances invariant under unimodular lattice re-expression") {
  const PBCCell cell = PBCCell::from_parameters(9, 10, 11, 85, 92, 78);
  Rng rng(10);
  std::vector<Vec3> frac;
  for (int i = 0; i < 5; ++i)
    frac.push_back({rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(0, 1)});

  // L' = M L with integer unimodular M; fractional coords transform by M^-1
  const Mat3 mm = Mat3::from_rows({1, 1, 0}, {0, 1, 0}, {0, 1, 1});  // det 1
  const Mat3 minv = mm.inverse();
  const PBCCell cell2 = PBCCell(mm * cell.lattice);
  std::vector<Vec3> frac2;
  for (const Vec3& f : frac)
    frac2.push_back({f.x * minv(0, 0) + f.y * minv(1, 0) + f.z * minv(2, 0),
                     f.x * minv(0, 1) + f.y * minv(1, 1) + f.z * minv(2, 1),
                     f.x * minv(0, 2) + f.y * minv(1, 2) + f.z * minv(2, 2)});

  auto dists = [](const std::vector<NeighborEdge>& es) {
    std::vector<double> d;
    for (const auto& e : es) d.push_back(e.distance);
    std::sort(d.begin(), d.end());
    return d;
  };
  const auto d1 = dists(neighbor_list(cell, frac, 12.0));
  const auto d2 = dists(neighbor_list(cell2, frac2, 12.0));
  REQUIRE(d1.size() == d2.size());
  for (size_t k = 0; k < d1.size(); ++k) CHECK(d1[k] == doctest::Approx(d2[k]).epsilon(1e-9));
}

TEST_CASE("min_cost_assignment matches brute force on small instances") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = rng.uniform_int(1, 6);
    std::vector<std::vector<double>> cost(n, std::vector<double>(n));
    for (auto& row : cost)
      for (double& v : row) v = rng.uniform(0, 10);

    const auto got = min_cost_assignment(cost);
    double got_cost = 0.0;
    for (int i = 0; i < n; ++i) got_cost += cost[i][got[i]];

    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    double best = 1e300;
    do {
      double c = 0.0;
      for (int i = 0; i < n; ++i) c += cost[i][perm[i]];
      best = std::min(best, c);
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(got_cost == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("principal_frame co-rotates with generic data") {
  Rng rng(12);
  Points pts;
  for (int i = 0; i < 12; ++i)
    pts.push_back({rng.normal() * 2.0 + 0.3, rng.normal() * 1.1, rng.normal() * 0.5 - 0.2});
  const Vec3 c = centroid(pts);
  for (Vec3& v : pts) v -= c;

  const Mat3 f0 = principal_frame(pts);
  CHECK(f0.det() == doctest::Approx(1.0).epsilon(1e-9));
  for (uint64_t s = 0; s < 25; ++s) {
    const Rotation rot = Rotation::random(500 + s);
    const Mat3 rm = rot.as_matrix();
    const Mat3 fr = principal_frame(transformed(pts, rot, {0, 0, 0}));
    const Mat3 expect = rm * f0;
    for (int k = 0; k < 9; ++k) CHECK(std::fabs(fr.m[k] - expect.m[k]) < 1e-7);
  }
}
