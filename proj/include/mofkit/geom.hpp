#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace mofkit::geom {

struct Vec3 {
  double x = 0, y = 0, z = 0;

  Vec3() = default;
  Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x; y += o.y; z += o.z;
    return *this;
  }
  Vec3& operator-=(const Vec3& o) {
    x -= o.x; y -= o.y; z -= o.z;
    return *this;
  }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm2() const { return dot(*this); }
  double norm() const;
  Vec3 normalized() const;
  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

// 3x3 matrix, row-major
struct Mat3 {
  std::array<double, 9> m{};

  static Mat3 identity();
  static Mat3 zero() { return Mat3{}; }
  static Mat3 from_rows(const Vec3& r0, const Vec3& r1, const Vec3& r2);
  static Mat3 from_cols(const Vec3& c0, const Vec3& c1, const Vec3& c2);

  double& operator()(int i, int j) { return m[i * 3 + j]; }
  double operator()(int i, int j) const { return m[i * 3 + j]; }

  Vec3 row(int i) const { return {m[i * 3], m[i * 3 + 1], m[i * 3 + 2]}; }
  Vec3 col(int j) const { return {m[j], m[3 + j], m[6 + j]}; }

  Mat3 operator*(const Mat3& o) const;
  Vec3 operator*(const Vec3& v) const;  // column-vector convention
  Mat3 operator*(double s) const;
  Mat3 operator+(const Mat3& o) const;

  Mat3 transposed() const;
  double det() const;
  Mat3 inverse() const;  // throws on singular
};

// Proper rotation stored as a unit quaternion (w, x, y, z).
struct Rotation {
  double w = 1, x = 0, y = 0, z = 0;

  static Rotation identity() { return {}; }
  static Rotation from_axis_angle(const Vec3& axis, double angle_rad);
  static Rotation from_matrix(const Mat3& r);
  // minimal rotation taking unit vector a onto unit vector b
  static Rotation between(const Vec3& a, const Vec3& b);
  static Rotation random(uint64_t seed);

  Rotation normalized() const;
  double norm() const;
  Mat3 as_matrix() const;
  Vec3 apply(const Vec3& v) const { return as_matrix() * v; }
  Rotation inverse() const { return {w, -x, -y, -z}; }
  Rotation operator*(const Rotation& o) const;  // composition: this after o
};

using Points = std::vector<Vec3>;

Vec3 centroid(const Points& p);
Points centered(const Points& p);
void apply_inplace(Points& p, const Rotation& r, const Vec3& t);
Points transformed(const Points& p, const Rotation& r, const Vec3& t);

// Jacobi eigen-decomposition of a symmetric 3x3; eigenvalues descending,
// eigenvectors as columns of the returned matrix.
void sym_eig3(const Mat3& a, std::array<double, 3>& evals, Mat3& evecs);

struct KabschResult {
  Rotation rotation;
  Vec3 translation;
  double rmsd = 0.0;
};

// Optimal rigid superposition of P onto Q (minimizes sum |R p + t - q|^2).
KabschResult kabsch_align(const Points& p, const Points& q);

double unaligned_rmsd(const Points& p, const Points& q);
double chamfer(const Points& p, const Points& q);

// Dominant right-singular direction of the centered point set; sign fixed so
// the largest-magnitude component is positive (ties broken toward +x, +y).
Vec3 principal_axis(const Points& points);

// Right-handed orthonormal frame (columns) aligned with the principal axes of
// a centered point set; sign of each axis fixed by the skewness of the
// projections so the frame co-rotates with the data. Canonical for generic
// (non-symmetric) inputs.
Mat3 principal_frame(const Points& centered_points);

struct PBCCell {
  Mat3 lattice;      // rows are the cell vectors (A)
  Mat3 inv_lattice;  // lattice * inv_lattice = I

  explicit PBCCell(const Mat3& l);
  static PBCCell cubic(double a);
  static PBCCell from_parameters(double a, double b, double c, double alpha_deg,
                                 double beta_deg, double gamma_deg);

  double volume() const { return lattice.det(); }
  Vec3 frac_to_cart(const Vec3& f) const;  // f * L (row-vector convention)
  Vec3 cart_to_frac(const Vec3& r) const;
  // spacing between lattice planes perpendicular to axis k
  double plane_height(int k) const;
  double min_height() const;
};

struct MinImage {
  double distance = 0.0;
  std::array<int, 3> shift{0, 0, 0};  // b + shift is the closest image to a
};

MinImage min_image_distance(const PBCCell& cell, const Vec3& frac_a, const Vec3& frac_b);

struct NeighborEdge {
  int i = 0;
  int j = 0;
  std::array<int, 3> shift{0, 0, 0};
  double distance = 0.0;
};

// All ordered pairs (i, j, shift) with periodic distance <= cutoff, including
// self-images (i == j, shift != 0) and excluding the zero-shift self pair.
// Throws if the cutoff exceeds 6x the smallest cell height.
std::vector<NeighborEdge> neighbor_list(const PBCCell& cell,
                                        const std::vector<Vec3>& frac_positions,
                                        double cutoff);

// Minimum-cost assignment (Hungarian, O(n^3)); cost is rectangular with
// rows <= cols; returns for each row the assigned column.
std::vector<int> min_cost_assignment(const std::vector<std::vector<double>>& cost);

}  // namespace mofkit::geom
