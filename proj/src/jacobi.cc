// jacobi.cc
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "divdecode/jacobi.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace divdecode {

double OffDiagonalFrobenius(const Matrix &m) {
  double sum = 0;
  for (size_t i = 0; i < m.size(); ++i) {
    for (size_t j = 0; j < m.size(); ++j) {
      if (i != j) sum += m[i][j] * m[i][j];
    }
  }
  return std::sqrt(sum);
}

EigenDecomposition JacobiEigen(const Matrix &symmetric, double tol,
                               int max_sweeps) {
  const size_t n = symmetric.size();
  for (const auto &row : symmetric) {
    if (row.size() != n) throw std::invalid_argument("matrix must be square");
  }
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      if (std::abs(symmetric[i][j] - symmetric[j][i]) > 1e-9)
        throw std::invalid_argument("matrix must be symmetric");
    }
  }

  Matrix a = symmetric;
  Matrix v(n, std::vector<double>(n, 0.0));
  for (size_t i = 0; i < n; ++i) v[i][i] = 1.0;

  for (int sweep = 0; sweep < max_sweeps && n > 1; ++sweep) {
    if (OffDiagonalFrobenius(a) < tol) break;
    for (size_t p = 0; p + 1 < n; ++p) {
      for (size_t q = p + 1; q < n; ++q) {
        const double apq = a[p][q];
        if (apq == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * apq);
        // Smaller-angle root of t^2 + 2 t theta - 1 = 0.
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (size_t k = 0; k < n; ++k) {
          const double akp = a[k][p];
          const double akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (size_t k = 0; k < n; ++k) {
          const double apk = a[p][k];
          const double aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (size_t k = 0; k < n; ++k) {
          const double vkp = v[k][p];
          const double vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&a](size_t x, size_t y) { return a[x][x] > a[y][y]; });

  EigenDecomposition out;
  out.values.reserve(n);
  out.vectors.assign(n, std::vector<double>(n));
  for (size_t r = 0; r < n; ++r) {
    out.values.push_back(a[order[r]][order[r]]);
    for (size_t k = 0; k < n; ++k) out.vectors[r][k] = v[k][order[r]];
  }
  return out;
}

}  // namespace divdecode
