#pragma once

#include <vector>

#include "pcps/matrix.hpp"

namespace pcps {

// Thin SVD truncated at numerical rank.
struct SvdFactors {
    Matrix u;      // n x r, orthonormal columns
    Vector sigma;  // r, nonincreasing, all > rank cutoff
    Matrix v;      // d x r, orthonormal columns

    Index rank() const { return sigma.size(); }
};

// Singular values below max(n, d) * sigma_max * 1e-12 are treated as zero and
// dropped together with their vectors.
SvdFactors svd(const Matrix& a);

// U_m Sigma_m V_m^T, the best rank-m approximation. m past the rank returns
// the full reconstruction.
Matrix truncated(const SvdFactors& f, Index m);

// Sum of squared singular values past the first m: the squared Frobenius norm
// of A minus its best rank-m approximation. m = 0 gives the full squared norm.
double tail_energy(const SvdFactors& f, Index m);
double tail_energy(const Matrix& a, Index m);

// sigma_1, within 1e-8 relative. Power iteration on the smaller Gram matrix
// with an SVD fallback when convergence stalls.
double spectral_norm(const Matrix& a);

// Z (d x r) with orthonormal columns spanning the row space of A:
// ||A - A Z Z^T||_F <= 1e-8 ||A||_F.
Matrix orthonormal_rowspace_basis(const Matrix& a);

// k eigenvalues of a symmetric matrix, largest in absolute value first,
// signs preserved. Rejects input with ||S - S^T||_F > 1e-10 ||S||_F.
std::vector<double> top_eigenvalues_sym(const Matrix& s, Index k);

}  // namespace pcps
