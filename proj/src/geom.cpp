#include "mofkit/geom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mofkit/rng.hpp"

namespace mofkit::geom {

double Vec3::norm() const { return std::sqrt(norm2()); }

Vec3 Vec3::normalized() const {
  const double n = norm();
  if (n == 0.0) throw std::invalid_argument("normalized: zero vector");
  return *this / n;
}

Mat3 Mat3::identity() {
  Mat3 r;
  r(0, 0) = r(1, 1) = r(2, 2) = 1.0;
  return r;
}

Mat3 Mat3::from_rows(const Vec3& r0, const Vec3& r1, const Vec3& r2) {
  Mat3 r;
  r.m = {r0.x, r0.y, r0.z, r1.x, r1.y, r1.z, r2.x, r2.y, r2.z};
  return r;
}

Mat3 Mat3::from_cols(const Vec3& c0, const Vec3& c1, const Vec3& c2) {
  return from_rows({c0.x, c1.x, c2.x}, {c0.y, c1.y, c2.y}, {c0.z, c1.z, c2.z});
}

Mat3 Mat3::operator*(const Mat3& o) const {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += (*this)(i, k) * o(k, j);
      r(i, j) = s;
    }
  return r;
}

Vec3 Mat3::operator*(const Vec3& v) const {
  return {m[0] * v.x + m[1] * v.y + m[2] * v.z, m[3] * v.x + m[4] * v.y + m[5] * v.z,
          m[6] * v.x + m[7] * v.y + m[8] * v.z};
}

Mat3 Mat3::operator*(double s) const {
  Mat3 r = *this;
  for (double& v : r.m) v *= s;
  return r;
}

Mat3 Mat3::operator+(const Mat3& o) const {
  Mat3 r = *this;
  for (int k = 0; k < 9; ++k) r.m[k] += o.m[k];
  return r;
}

Mat3 Mat3::transposed() const {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r(i, j) = (*this)(j, i);
  return r;
}

double Mat3::det() const {
  return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
         m[2] * (m[3] * m[7] - m[4] * m[6]);
}

Mat3 Mat3::inverse() const {
  const double d = det();
  if (std::fabs(d) < 1e-300) throw std::invalid_argument("Mat3::inverse: singular matrix");
  Mat3 r;
  r(0, 0) = (m[4] * m[8] - m[5] * m[7]) / d;
  r(0, 1) = (m[2] * m[7] - m[1] * m[8]) / d;
  r(0, 2) = (m[1] * m[5] - m[2] * m[4]) / d;
  r(1, 0) = (m[5] * m[6] - m[3] * m[8]) / d;
  r(1, 1) = (m[0] * m[8] - m[2] * m[6]) / d;
  r(1, 2) = (m[2] * m[3] - m[0] * m[5]) / d;
  r(2, 0) = (m[3] * m[7] - m[4] * m[6]) / d;
  r(2, 1) = (m[1] * m[6] - m[0] * m[7]) / d;
  r(2, 2) = (m[0] * m[4] - m[1] * m[3]) / d;
  return r;
}

// ---------------------------------------------------------------------------
// Rotation

Rotation Rotation::from_axis_angle(const Vec3& axis, double angle) {
  const Vec3 u = axis.normalized();
  const double h = angle * 0.5;
  const double s = std::sin(h);
  return Rotation{std::cos(h), u.x * s, u.y * s, u.z * s};
}

double Rotation::norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

Rotation Rotation::normalized() const {
  const double n = norm();
  return {w / n, x / n, y / n, z / n};
}

Mat3 Rotation::as_matrix() const {
  const Rotation q = normalized();
  Mat3 r;
  r(0, 0) = 1 - 2 * (q.y * q.y + q.z * q.z);
  r(0, 1) = 2 * (q.x * q.y - q.w * q.z);
  r(0, 2) = 2 * (q.x * q.z + q.w * q.y);
  r(1, 0) = 2 * (q.x * q.y + q.w * q.z);
  r(1, 1) = 1 - 2 * (q.x * q.x + q.z * q.z);
  r(1, 2) = 2 * (q.y * q.z - q.w * q.x);
  r(2, 0) = 2 * (q.x * q.z - q.w * q.y);
  r(2, 1) = 2 * (q.y * q.z + q.w * q.x);
  r(2, 2) = 1 - 2 * (q.x * q.x + q.y * q.y);
  return r;
}

Rotation Rotation::from_matrix(const Mat3& m) {
  // Shepperd's method: pick the largest diagonal combination for stability.
  const double tr = m(0, 0) + m(1, 1) + m(2, 2);
  Rotation q;
  if (tr > 0) {
    double s = std::sqrt(tr + 1.0) * 2;
    q.w = 0.25 * s;
    q.x = (m(2, 1) - m(1, 2)) / s;
    q.y = (m(0, 2) - m(2, 0)) / s;
    q.z = (m(1, 0) - m(0, 1)) / s;
  } else if (m(0, 0) > m(1, 1) && m(0, 0) > m(2, 2)) {
    double s = std::sqrt(1.0 + m(0, 0) - m(1, 1) - m(2, 2)) * 2;
    q.w = (m(2, 1) - m(1, 2)) / s;
    q.x = 0.25 * s;
    q.y = (m(0, 1) + m(1, 0)) / s;
    q.z = (m(0, 2) + m(2, 0)) / s;
  } else if (m(1, 1) > m(2, 2)) {
    double s = std::sqrt(1.0 + m(1, 1) - m(0, 0) - m(2, 2)) * 2;
    q.w = (m(0, 2) - m(2, 0)) / s;
    q.x = (m(0, 1) + m(1, 0)) / s;
    q.y = 0.25 * s;
    q.z = (m(1, 2) + m(2, 1)) / s;
  } else {
    double s = std::sqrt(1.0 + m(2, 2) - m(0, 0) - m(1, 1)) * 2;
    q.w = (m(1, 0) - m(0, 1)) / s;
    q.x = (m(0, 2) + m(2, 0)) / s;
    q.y = (m(1, 2) + m(2, 1)) / s;
    q.z = 0.25 * s;
  }
  return q.normalized();
}

Rotation Rotation::between(const Vec3& a, const Vec3& b) {
  const Vec3 u = a.normalized(), v = b.normalized();
  const double c = u.dot(v);
  if (c > 1.0 - 1e-14) return identity();
  if (c < -1.0 + 1e-12) {
    // opposite vectors: rotate pi about any axis orthogonal to u
    Vec3 axis = u.cross(Vec3{1, 0, 0});
    if (axis.norm2() < 1e-12) axis = u.cross(Vec3{0, 1, 0});
    return from_axis_angle(axis, M_PI);
  }
  const Vec3 ax = u.cross(v);
  Rotation q{1.0 + c, ax.x, ax.y, ax.z};
  return q.normalized();
}

Rotation Rotation::random(uint64_t seed) {
  Rng rng(seed);
  // uniform over SO(3) via normalized 4D Gaussian
  Rotation q{rng.normal(), rng.normal(), rng.normal(), rng.normal()};
  return q.normalized();
}

Rotation Rotation::operator*(const Rotation& o) const {
  return Rotation{w * o.w - x * o.x - y * o.y - z * o.z,
                  w * o.x + x * o.w + y * o.z - z * o.y,
                  w * o.y - x * o.z + y * o.w + z * o.x,
                  w * o.z + x * o.y - y * o.x + z * o.w}
      .normalized();
}

// ---------------------------------------------------------------------------
// point-set utilities

Vec3 centroid(const Points& p) {
  if (p.empty()) throw std::invalid_argument("centroid: empty point set");
  Vec3 c;
  for (const Vec3& v : p) c += v;
  return c / static_cast<double>(p.size());
}

Points centered(const Points& p) {
  const Vec3 c = centroid(p);
  Points out = p;
  for (Vec3& v : out) v -= c;
  return out;
}

void apply_inplace(Points& p, const Rotation& r, const Vec3& t) {
  const Mat3 m = r.as_matrix();
  for (Vec3& v : p) v = m * v + t;
}

Points transformed(const Points& p, const Rotation& r, const Vec3& t) {
  Points out = p;
  apply_inplace(out, r, t);
  return out;
}

// ---------------------------------------------------------------------------
// symmetric eigen-decomposition (cyclic Jacobi)

namespace {

template <int N>
void jacobi_sym(std::array<double, N * N>& a, std::array<double, N * N>& v,
                std::array<double, N>& d) {
  for (int i = 0; i < N * N; ++i) v[i] = 0.0;
  for (int i = 0; i < N; ++i) v[i * N + i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < N; ++p)
      for (int q = p + 1; q < N; ++q) off += a[p * N + q] * a[p * N + q];
    if (off < 1e-30) break;
    for (int p = 0; p < N; ++p)
      for (int q = p + 1; q < N; ++q) {
        const double apq = a[p * N + q];
        if (std::fabs(apq) < 1e-300) continue;
        const double theta = (a[q * N + q] - a[p * N + p]) / (2.0 * apq);
        const double sgn = theta >= 0 ? 1.0 : -1.0;
        const double t = sgn / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < N; ++k) {
          const double akp = a[k * N + p], akq = a[k * N + q];
          a[k * N + p] = c * akp - s * akq;
          a[k * N + q] = s * akp + c * akq;
        }
        for (int k = 0; k < N; ++k) {
          const double apk = a[p * N + k], aqk = a[q * N + k];
          a[p * N + k] = c * apk - s * aqk;
          a[q * N + k] = s * apk + c * aqk;
        }
        for (int k = 0; k < N; ++k) {
          const double vkp = v[k * N + p], vkq = v[k * N + q];
          v[k * N + p] = c * vkp - s * vkq;
          v[k * N + q] = s * vkp + c * vkq;
        }
      }
  }
  for (int i = 0; i < N; ++i) d[i] = a[i * N + i];
}

}  // namespace

void sym_eig3(const Mat3& m, std::array<double, 3>& evals, Mat3& evecs) {
  std::array<double, 9> a = m.m, v{};
  std::array<double, 3> d{};
  jacobi_sym<3>(a, v, d);
  // sort descending
  std::array<int, 3> order = {0, 1, 2};
  std::sort(order.begin(), order.end(), [&](int i, int j) { return d[i] > d[j]; });
  Mat3 ve;
  for (int j = 0; j < 3; ++j) {
    evals[j] = d[order[j]];
    for (int i = 0; i < 3; ++i) ve(i, j) = v[i * 3 + order[j]];
  }
  evecs = ve;
}

// ---------------------------------------------------------------------------
// Kabsch via Horn's quaternion method (largest eigenvector of the 4x4 key
// matrix); always yields a proper rotation, robust for degenerate sets.

KabschResult kabsch_align(const Points& p, const Points& q) {
  if (p.empty() || p.size() != q.size())
    throw std::invalid_argument("kabsch_align: point sets must be non-empty and equal length");
  const Vec3 pc = centroid(p), qc = centroid(q);

  Mat3 h;  // cross-covariance sum p'_i q'_i^T
  for (size_t i = 0; i < p.size(); ++i) {
    const Vec3 a = p[i] - pc, b = q[i] - qc;
    h(0, 0) += a.x * b.x; h(0, 1) += a.x * b.y; h(0, 2) += a.x * b.z;
    h(1, 0) += a.y * b.x; h(1, 1) += a.y * b.y; h(1, 2) += a.y * b.z;
    h(2, 0) += a.z * b.x; h(2, 1) += a.z * b.y; h(2, 2) += a.z * b.z;
  }

  const double sxx = h(0, 0), sxy = h(0, 1), sxz = h(0, 2);
  const double syx = h(1, 0), syy = h(1, 1), syz = h(1, 2);
  const double szx = h(2, 0), szy = h(2, 1), szz = h(2, 2);
  std::array<double, 16> k = {
      sxx + syy + szz, syz - szy,        szx - sxz,        sxy - syx,
      syz - szy,       sxx - syy - szz,  sxy + syx,        szx + sxz,
      szx - sxz,       sxy + syx,        -sxx + syy - szz, syz + szy,
      sxy - syx,       szx + sxz,        syz + szy,        -sxx - syy + szz};
  std::array<double, 16> v{};
  std::array<double, 4> d{};
  jacobi_sym<4>(k, v, d);
  int best = 0;
  for (int i = 1; i < 4; ++i)
    if (d[i] > d[best]) best = i;
  Rotation rot = Rotation{v[0 * 4 + best], v[1 * 4 + best], v[2 * 4 + best], v[3 * 4 + best]}
                     .normalized();

  KabschResult res;
  res.rotation = rot;
  const Mat3 rm = rot.as_matrix();
  res.translation = qc - rm * pc;
  double ss = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    const Vec3 e = rm * p[i] + res.translation - q[i];
    ss += e.norm2();
  }
  res.rmsd = std::sqrt(ss / static_cast<double>(p.size()));
  return res;
}

double unaligned_rmsd(const Points& p, const Points& q) {
  if (p.empty() || p.size() != q.size())
    throw std::invalid_argument("unaligned_rmsd: point sets must be non-empty and equal length");
  double ss = 0.0;
  for (size_t i = 0; i < p.size(); ++i) ss += (p[i] - q[i]).norm2();
  return std::sqrt(ss / static_cast<double>(p.size()));
}

double chamfer(const Points& p, const Points& q) {
  if (p.empty() || q.empty()) throw std::invalid_argument("chamfer: empty point set");
  auto one_sided = [](const Points& a, const Points& b) {
    double s = 0.0;
    for (const Vec3& x : a) {
      double best = std::numeric_limits<double>::max();
      for (const Vec3& y : b) best = std::min(best, (x - y).norm2());
      s += std::sqrt(best);
    }
    return s / static_cast<double>(a.size());
  };
  return 0.5 * (one_sided(p, q) + one_sided(q, p));
}

Vec3 principal_axis(const Points& points) {
  if (points.size() < 2) throw std::invalid_argument("principal_axis: need >= 2 points");
  const Points c = centered(points);
  Mat3 gram;
  for (const Vec3& v : c) {
    gram(0, 0) += v.x * v.x; gram(0, 1) += v.x * v.y; gram(0, 2) += v.x * v.z;
    gram(1, 1) += v.y * v.y; gram(1, 2) += v.y * v.z;
    gram(2, 2) += v.z * v.z;
  }
  gram(1, 0) = gram(0, 1); gram(2, 0) = gram(0, 2); gram(2, 1) = gram(1, 2);

  std::array<double, 3> evals{};
  Mat3 evecs;
  sym_eig3(gram, evals, evecs);
  if (evals[0] < 1e-18)
    throw std::invalid_argument("principal_axis: all points coincident");

  // deterministic tie-break when the top two singular values coincide
  int pick = 0;
  if (evals[0] - evals[1] < 1e-9) {
    const Vec3 a = evecs.col(0), b = evecs.col(1);
    if (std::fabs(b.dot({1, 0, 0})) > std::fabs(a.dot({1, 0, 0})) + 1e-12)
      pick = 1;
    else if (std::fabs(std::fabs(b.dot({1, 0, 0})) - std::fabs(a.dot({1, 0, 0}))) <= 1e-12 &&
             std::fabs(b.dot({0, 1, 0})) > std::fabs(a.dot({0, 1, 0})) + 1e-12)
      pick = 1;
  }
  Vec3 axis = evecs.col(pick).normalized();
  // sign: largest-magnitude component positive
  double best = std::fabs(axis.x);
  double comp = axis.x;
  if (std::fabs(axis.y) > best) { best = std::fabs(axis.y); comp = axis.y; }
  if (std::fabs(axis.z) > best) { comp = axis.z; }
  if (comp < 0) axis = axis * -1.0;
  return axis;
}

Mat3 principal_frame(const Points& pts) {
  if (pts.size() < 2) throw std::invalid_argument("principal_frame: need >= 2 points");
  Mat3 gram;
  for (const Vec3& v : pts) {
    gram(0, 0) += v.x * v.x; gram(0, 1) += v.x * v.y; gram(0, 2) += v.x * v.z;
    gram(1, 1) += v.y * v.y; gram(1, 2) += v.y * v.z;
    gram(2, 2) += v.z * v.z;
  }
  gram(1, 0) = gram(0, 1); gram(2, 0) = gram(0, 2); gram(2, 1) = gram(1, 2);
  std::array<double, 3> evals{};
  Mat3 evecs;
  sym_eig3(gram, evals, evecs);

  auto fix_sign = [&](Vec3 v) {
    // flip so the skewness of projections is non-negative; fall back to a
    // fourth-moment weighted rule, then to the raw component rule
    double skew = 0.0, wsum = 0.0;
    for (const Vec3& x : pts) {
      const double d = x.dot(v);
      skew += d * d * d;
      wsum += d * x.norm2();
    }
    double key = std::fabs(skew) > 1e-9 ? skew : wsum;
    if (std::fabs(key) <= 1e-9) key = (std::fabs(v.x) >= std::fabs(v.y) && std::fabs(v.x) >= std::fabs(v.z))
                                          ? v.x
                                          : (std::fabs(v.y) >= std::fabs(v.z) ? v.y : v.z);
    return key < 0 ? v * -1.0 : v;
  };

  Vec3 a0 = fix_sign(evecs.col(0).normalized());
  Vec3 a1 = fix_sign(evecs.col(1).normalized());
  Vec3 a2 = a0.cross(a1);  // right-handed by construction
  return Mat3::from_cols(a0, a1, a2);
}

// ---------------------------------------------------------------------------
// periodic cells

PBCCell::PBCCell(const Mat3& l) : lattice(l) {
  if (l.det() <= 0.0)
    throw std::invalid_argument("PBCCell: lattice determinant must be positive");
  inv_lattice = l.inverse();
}

PBCCell PBCCell::cubic(double a) {
  return PBCCell(Mat3::from_rows({a, 0, 0}, {0, a, 0}, {0, 0, a}));
}

PBCCell PBCCell::from_parameters(double a, double b, double c, double alpha_deg,
                                 double beta_deg, double gamma_deg) {
  const double alpha = alpha_deg * M_PI / 180.0;
  const double beta = beta_deg * M_PI / 180.0;
  const double gamma = gamma_deg * M_PI / 180.0;
  const double cg = std::cos(gamma), sg = std::sin(gamma);
  const double ca = std::cos(alpha), cb = std::cos(beta);
  const double cy = (ca - cb * cg) / sg;
  const double arg = 1.0 - cb * cb - cy * cy;
  if (arg <= 0.0) throw std::invalid_argument("PBCCell: invalid cell angles");
  const Vec3 va{a, 0, 0};
  const Vec3 vb{b * cg, b * sg, 0};
  const Vec3 vc{c * cb, c * cy, c * std::sqrt(arg)};
  return PBCCell(Mat3::from_rows(va, vb, vc));
}

Vec3 PBCCell::frac_to_cart(const Vec3& f) const {
  // row-vector convention: r = f * L
  return {f.x * lattice(0, 0) + f.y * lattice(1, 0) + f.z * lattice(2, 0),
          f.x * lattice(0, 1) + f.y * lattice(1, 1) + f.z * lattice(2, 1),
          f.x * lattice(0, 2) + f.y * lattice(1, 2) + f.z * lattice(2, 2)};
}

Vec3 PBCCell::cart_to_frac(const Vec3& r) const {
  return {r.x * inv_lattice(0, 0) + r.y * inv_lattice(1, 0) + r.z * inv_lattice(2, 0),
          r.x * inv_lattice(0, 1) + r.y * inv_lattice(1, 1) + r.z * inv_lattice(2, 1),
          r.x * inv_lattice(0, 2) + r.y * inv_lattice(1, 2) + r.z * inv_lattice(2, 2)};
}

double PBCCell::plane_height(int k) const {
  // spacing between planes spanned by the other two cell vectors
  const Vec3 u = lattice.row((k + 1) % 3), v = lattice.row((k + 2) % 3);
  const Vec3 n = u.cross(v);
  return std::fabs(lattice.row(k).dot(n)) / n.norm();
}

double PBCCell::min_height() const {
  return std::min({plane_height(0), plane_height(1), plane_height(2)});
}

MinImage min_image_distance(const PBCCell& cell, const Vec3& frac_a, const Vec3& frac_b) {
  // wrap the delta near the origin, then search a fixed shell; the wrap makes
  // a +-2 shell sufficient for arbitrarily skewed cells
  Vec3 df = frac_b - frac_a;
  std::array<int, 3> base{};
  const double dfs[3] = {df.x, df.y, df.z};
  double wrapped[3];
  for (int k = 0; k < 3; ++k) {
    base[k] = static_cast<int>(std::floor(dfs[k] + 0.5));
    wrapped[k] = dfs[k] - base[k];
  }
  MinImage best;
  best.distance = std::numeric_limits<double>::max();
  for (int sx = -2; sx <= 2; ++sx)
    for (int sy = -2; sy <= 2; ++sy)
      for (int sz = -2; sz <= 2; ++sz) {
        const Vec3 f{wrapped[0] + sx, wrapped[1] + sy, wrapped[2] + sz};
        const double d = cell.frac_to_cart(f).norm();
        if (d < best.distance) {
          best.distance = d;
          best.shift = {sx - base[0], sy - base[1], sz - base[2]};
        }
      }
  return best;
}

std::vector<NeighborEdge> neighbor_list(const PBCCell& cell,
                                        const std::vector<Vec3>& frac_positions,
                                        double cutoff) {
  if (cutoff <= 0.0) throw std::invalid_argument("neighbor_list: cutoff must be positive");
  if (cutoff > 6.0 * cell.min_height())
    throw std::invalid_argument(
        "neighbor_list: cutoff exceeds 6x the smallest cell height; build an explicit "
        "supercell instead");

  int nmax[3];
  for (int k = 0; k < 3; ++k)
    nmax[k] = static_cast<int>(std::ceil(cutoff / cell.plane_height(k))) + 1;

  std::vector<NeighborEdge> edges;
  const int n = static_cast<int>(frac_positions.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Vec3 df = frac_positions[j] - frac_positions[i];
      for (int sx = -nmax[0]; sx <= nmax[0]; ++sx)
        for (int sy = -nmax[1]; sy <= nmax[1]; ++sy)
          for (int sz = -nmax[2]; sz <= nmax[2]; ++sz) {
            if (i == j && sx == 0 && sy == 0 && sz == 0) continue;
            const Vec3 f{df.x + sx, df.y + sy, df.z + sz};
            const double d = cell.frac_to_cart(f).norm();
            if (d <= cutoff) edges.push_back({i, j, {sx, sy, sz}, d});
          }
    }
  return edges;
}

// ---------------------------------------------------------------------------
// Hungarian assignment (shortest augmenting path, potentials form)

std::vector<int> min_cost_assignment(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  if (n == 0) return {};
  const int m = static_cast<int>(cost[0].size());
  if (m < n) throw std::invalid_argument("min_cost_assignment: need cols >= rows");
  const double inf = std::numeric_limits<double>::max();

  std::vector<double> u(n + 1), v(m + 1);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, false);
    do {
      used[j0] = true;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> result(n, -1);
  for (int j = 1; j <= m; ++j)
    if (p[j] > 0) result[p[j] - 1] = j - 1;
  return result;
}

}  // namespace mofkit::geom
