// spin.hpp - complex 2x2 matrices over the jump-process spin space {u, d}
#pragma once

#include <array>
#include <complex>

#include "pcc/model.hpp"

namespace pcc {

struct SpinVector {
  complexd v[2]{};
  complexd& operator[](int i) { return v[i]; }
  const complexd& operator[](int i) const { return v[i]; }
};

// Row-major 2x2; index (row, col) with 0 = u, 1 = d.
struct SpinMatrix {
  complexd m[2][2]{};

  complexd& operator()(int r, int c) { return m[r][c]; }
  const complexd& operator()(int r, int c) const { return m[r][c]; }

  static SpinMatrix identity() {
    SpinMatrix I;
    I.m[0][0] = I.m[1][1] = 1.0;
    return I;
  }
  static SpinMatrix zero() { return {}; }

  friend SpinMatrix operator*(const SpinMatrix& a, const SpinMatrix& b) {
    SpinMatrix r;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        r.m[i][j] = a.m[i][0] * b.m[0][j] + a.m[i][1] * b.m[1][j];
    return r;
  }
  friend SpinVector operator*(const SpinMatrix& a, const SpinVector& x) {
    SpinVector r;
    r[0] = a.m[0][0] * x[0] + a.m[0][1] * x[1];
    r[1] = a.m[1][0] * x[0] + a.m[1][1] * x[1];
    return r;
  }
  friend SpinMatrix operator+(const SpinMatrix& a, const SpinMatrix& b) {
    SpinMatrix r;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) r.m[i][j] = a.m[i][j] + b.m[i][j];
    return r;
  }
  friend SpinMatrix operator*(complexd s, const SpinMatrix& a) {
    SpinMatrix r;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) r.m[i][j] = s * a.m[i][j];
    return r;
  }
};

inline double max_abs_diff(const SpinMatrix& a, const SpinMatrix& b) {
  double w = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) w = std::max(w, std::abs(a.m[i][j] - b.m[i][j]));
  return w;
}

}  // namespace pcc
