#include "gqcm/spectra.hpp"

#include <algorithm>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <string>

// lapack.h (pulled in by lapacke.h) honors pre-defined complex typedefs, so
// pin them to std::complex before the include; Eigen buffers can then be
// passed straight through.
#ifndef LAPACK_COMPLEX_CPP
#define LAPACK_COMPLEX_CPP
#endif
#ifndef lapack_complex_float
#define lapack_complex_float std::complex<float>
#endif
#ifndef lapack_complex_double
#define lapack_complex_double std::complex<double>
#endif
#include <lapacke.h>

namespace gqcm {

namespace {

double one_norm(const Mat& m) { return m.cwiseAbs().colwise().sum().maxCoeff(); }

}  // namespace

BiorthogonalPair BiorthogonalSystem::pair(long k) const {
    if (!diagonalizable)
        throw NotDiagonalizableError(
            "pair: eigenvector matrix condition " + std::to_string(condition_number) +
            " exceeded the acceptance limit; matched pairs are unreliable");
    if (k < 0 || k >= dimension())
        throw std::invalid_argument("pair: index " + std::to_string(k) + " outside [0, " +
                                    std::to_string(dimension()) + ")");
    if (!basis)
        throw std::invalid_argument("pair: no sector basis attached to this decomposition");
    return normalize_pair(make_ket(basis, left.col(k)), make_ket(basis, right.col(k)),
                          eigenvalues(k));
}

double BiorthogonalSystem::biorthogonality_error() const {
    const long n = dimension();
    return (left.adjoint() * right - Mat::Identity(n, n)).cwiseAbs().maxCoeff();
}

double BiorthogonalSystem::reconstruction_error(const Mat& h) const {
    const Mat rebuilt = right * eigenvalues.asDiagonal() * left.adjoint();
    return (rebuilt - h).norm() / h.norm();
}

BiorthogonalSystem diagonalize_nonhermitian(const Mat& h, BasisPtr basis, double cond_limit) {
    const long n = h.rows();
    if (h.cols() != n) throw std::invalid_argument("diagonalize_nonhermitian: matrix not square");
    if (n == 0) throw std::invalid_argument("diagonalize_nonhermitian: empty matrix");
    if (basis && basis->dimension() != n)
        throw std::invalid_argument("diagonalize_nonhermitian: basis dimension " +
                                    std::to_string(basis->dimension()) + " != matrix size " +
                                    std::to_string(n));

    Mat work = h;  // zgeev overwrites its input
    Vec evals(n);
    Mat vr(n, n);
    const lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'V', static_cast<lapack_int>(n),
                                          work.data(), static_cast<lapack_int>(n), evals.data(),
                                          nullptr, 1, vr.data(), static_cast<lapack_int>(n));
    if (info < 0)
        throw std::runtime_error("diagonalize_nonhermitian: zgeev rejected argument " +
                                 std::to_string(-info));
    if (info > 0)
        throw NotDiagonalizableError(
            "diagonalize_nonhermitian: eigenvalue iteration failed to converge");

    std::vector<long> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0L);
    std::sort(order.begin(), order.end(), [&](long a, long b) {
        if (evals(a).real() != evals(b).real()) return evals(a).real() < evals(b).real();
        return evals(a).imag() < evals(b).imag();
    });

    BiorthogonalSystem sys;
    sys.basis = std::move(basis);
    sys.eigenvalues.resize(n);
    sys.right.resize(n, n);
    for (long k = 0; k < n; ++k) {
        sys.eigenvalues(k) = evals(order[static_cast<std::size_t>(k)]);
        Vec col = vr.col(order[static_cast<std::size_t>(k)]);
        long imax = 0;
        col.cwiseAbs().maxCoeff(&imax);
        const cxd pivot = col(imax);
        if (std::abs(pivot) > 0.0) col /= pivot / std::abs(pivot);
        sys.right.col(k) = col;
    }

    const Mat inv = sys.right.partialPivLu().solve(Mat::Identity(n, n));
    sys.left = inv.adjoint();
    sys.condition_number = one_norm(sys.right) * one_norm(inv);
    sys.diagonalizable = std::isfinite(sys.condition_number) && sys.condition_number <= cond_limit;
    return sys;
}

BiorthogonalSystem diagonalize_nonhermitian(const SpMat& h, BasisPtr basis, double cond_limit) {
    return diagonalize_nonhermitian(Mat(h), std::move(basis), cond_limit);
}

std::vector<long> real_eigenvalue_indices(const BiorthogonalSystem& sys, double imag_tol) {
    std::vector<long> out;
    for (long k = 0; k < sys.dimension(); ++k)
        if (std::abs(sys.eigenvalues(k).imag()) < imag_tol) out.push_back(k);
    return out;
}

HermitianSpectrum diagonalize_hermitian(const Mat& c, double asymmetry_tol) {
    const long n = c.rows();
    if (c.cols() != n) throw std::invalid_argument("diagonalize_hermitian: matrix not square");
    const double asym = (c - c.adjoint()).norm();
    if (asym > asymmetry_tol * std::max(1.0, c.norm()))
        throw std::invalid_argument("diagonalize_hermitian: input asymmetry " +
                                    std::to_string(asym) + " exceeds the Hermitian tolerance");

    Eigen::SelfAdjointEigenSolver<Mat> solver((Mat((c + c.adjoint()) / 2.0)));
    if (solver.info() != Eigen::Success)
        throw NumericalError("diagonalize_hermitian: eigensolver did not converge");
    return HermitianSpectrum{solver.eigenvalues(), solver.eigenvectors()};
}

}  // namespace gqcm
