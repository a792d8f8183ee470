#ifndef IBSIM_VEC_HPP
#define IBSIM_VEC_HPP

#include <array>
#include <cmath>
#include <cstddef>

namespace ibsim {

// Spatial point/vector. Dimension d <= 3 lives in the containing object;
// unused trailing components are kept at exactly 0 so norms and arithmetic
// are dimension-agnostic.
using Vec = std::array<double, 3>;

// d x d matrix stored dense 3x3, unused rows/cols zero.
using Mat3 = std::array<std::array<double, 3>, 3>;

inline Vec operator+(const Vec& a, const Vec& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
inline Vec operator-(const Vec& a, const Vec& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
inline Vec operator*(double s, const Vec& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline Vec& operator+=(Vec& a, const Vec& b) {
  a[0] += b[0];
  a[1] += b[1];
  a[2] += b[2];
  return a;
}
inline Vec& operator-=(Vec& a, const Vec& b) {
  a[0] -= b[0];
  a[1] -= b[1];
  a[2] -= b[2];
  return a;
}

inline double dot(const Vec& a, const Vec& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm2(const Vec& a) { return dot(a, a); }
inline double norm(const Vec& a) { return std::sqrt(norm2(a)); }
inline double dist(const Vec& a, const Vec& b) { return norm(a - b); }

inline Mat3 zero_mat() { return {{{0, 0, 0}, {0, 0, 0}, {0, 0, 0}}}; }

inline Mat3 identity_mat(int d) {
  Mat3 m = zero_mat();
  for (int k = 0; k < d; ++k) m[k][k] = 1.0;
  return m;
}

inline Mat3 operator+(const Mat3& a, const Mat3& b) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r[i][j] = a[i][j] + b[i][j];
  return r;
}
inline Mat3 operator-(const Mat3& a, const Mat3& b) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r[i][j] = a[i][j] - b[i][j];
  return r;
}
inline Mat3 operator*(double s, const Mat3& a) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r[i][j] = s * a[i][j];
  return r;
}
inline Mat3& operator+=(Mat3& a, const Mat3& b) {
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a[i][j] += b[i][j];
  return a;
}

// Outer product r r^T.
inline Mat3 outer(const Vec& a, const Vec& b) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r[i][j] = a[i] * b[j];
  return r;
}

inline double frobenius_norm(const Mat3& a) {
  double s = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) s += a[i][j] * a[i][j];
  return std::sqrt(s);
}

inline bool lex_less(const Vec& a, const Vec& b) {
  for (int k = 0; k < 3; ++k) {
    if (a[k] < b[k]) return true;
    if (a[k] > b[k]) return false;
  }
  return false;
}

}  // namespace ibsim

#endif  // IBSIM_VEC_HPP
