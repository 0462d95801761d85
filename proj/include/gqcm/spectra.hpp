#pragma once

#include <vector>

#include "gqcm/lattice.hpp"
#include "gqcm/types.hpp"

namespace gqcm {

// Full non-Hermitian eigendecomposition H = right * diag(eigenvalues) * left^dag
// with left^dag * right = identity (columns are matched biorthogonal pairs).
//
// Eigenvalues are sorted by (Re, Im) ascending. Each right column is phase
// fixed (largest-magnitude component real and positive) and the left matrix
// is the inverse-adjoint of the right one, so biorthonormality holds to
// rounding by construction.
struct BiorthogonalSystem {
    BasisPtr basis;  // may be null when a bare matrix was diagonalized
    Vec eigenvalues;
    Mat right;
    Mat left;
    double condition_number = 0.0;  // one-norm condition of the right matrix
    bool diagonalizable = false;

    long dimension() const { return eigenvalues.size(); }

    // k-th matched pair, normalized to <L|R> = 1. Throws
    // NotDiagonalizableError when the decomposition was rejected and
    // invalid_argument when no sector basis was attached.
    BiorthogonalPair pair(long k) const;

    // max_ij |left^dag right - identity|
    double biorthogonality_error() const;

    // ||right diag(eigenvalues) left^dag - H||_F / ||H||_F
    double reconstruction_error(const Mat& h) const;
};

// Dense general eigensolve (LAPACK zgeev). The decomposition is rejected
// (diagonalizable = false) when the right-eigenvector matrix has one-norm
// condition above cond_limit, which covers both defective matrices and
// near-degenerate clusters whose left vectors would be garbage.
BiorthogonalSystem diagonalize_nonhermitian(const Mat& h, BasisPtr basis = nullptr,
                                            double cond_limit = 1e12);
BiorthogonalSystem diagonalize_nonhermitian(const SpMat& h, BasisPtr basis = nullptr,
                                            double cond_limit = 1e12);

// Indices whose eigenvalue is real to within imag_tol (absolute).
std::vector<long> real_eigenvalue_indices(const BiorthogonalSystem& sys, double imag_tol = 1e-9);

struct HermitianSpectrum {
    RVec eigenvalues;  // ascending
    Mat vectors;       // orthonormal columns, same order
};

// Eigendecomposition of a Hermitian matrix. The input is symmetrized as
// (C + C^dag)/2 after checking that the asymmetry ||C - C^dag|| is below
// asymmetry_tol * max(1, ||C||); larger asymmetry means the caller passed
// something that is not actually Hermitian, which is rejected loudly instead
// of silently averaged away.
HermitianSpectrum diagonalize_hermitian(const Mat& c, double asymmetry_tol = 1e-10);

}  // namespace gqcm
