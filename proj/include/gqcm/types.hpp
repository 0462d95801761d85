#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace gqcm {

using cxd = std::complex<double>;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using Mat = Eigen::MatrixXcd;
using RMat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<cxd>;

// Numerical failures discovered at run time (as opposed to malformed input,
// which throws std::invalid_argument). The CLI maps invalid_argument to exit
// code 2 and NumericalError to exit code 3.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// <L|R> too close to zero for biorthogonal normalization.
struct SelfOrthogonalError : NumericalError {
    using NumericalError::NumericalError;
};

// Right-eigenvector matrix numerically singular; left eigenvectors unreliable.
struct NotDiagonalizableError : NumericalError {
    using NumericalError::NumericalError;
};

// Covariance matrix has no null space: no operator in the catalog span has the
// supplied state(s) as eigenstate(s).
struct EmptyNullSpaceError : NumericalError {
    using NumericalError::NumericalError;
};

// Integrator error estimate exceeded its budget; caller should lower dt.
struct StepSizeError : NumericalError {
    using NumericalError::NumericalError;
};

}  // namespace gqcm
