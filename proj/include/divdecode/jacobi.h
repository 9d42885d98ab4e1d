// jacobi.h
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
//
// Cyclic Jacobi eigendecomposition for small dense symmetric matrices.

#ifndef DIVDECODE_JACOBI_H_
#define DIVDECODE_JACOBI_H_

#include <vector>

namespace divdecode {

using Matrix = std::vector<std::vector<double>>;

struct EigenDecomposition {
  std::vector<double> values;  // descending
  Matrix vectors;              // vectors[i] is the eigenvector of values[i]
};

// Sweeps Givens rotations over all off-diagonal pairs until the off-diagonal
// Frobenius norm drops below `tol` (or `max_sweeps` is hit; convergence is
// quadratic, so small matrices need only a handful of sweeps).  The input
// must be symmetric.
EigenDecomposition JacobiEigen(const Matrix &symmetric, double tol = 1e-12,
                               int max_sweeps = 64);

double OffDiagonalFrobenius(const Matrix &m);

}  // namespace divdecode

#endif  // DIVDECODE_JACOBI_H_
