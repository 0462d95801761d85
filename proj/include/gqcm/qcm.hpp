#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gqcm/lattice.hpp"
#include "gqcm/operators.hpp"
#include "gqcm/spectra.hpp"
#include "gqcm/types.hpp"

namespace gqcm {

enum class QcmKind { Hermitian, Biorthogonal, EnsembleDistinct, EnsembleDegenerate };

// Covariance matrix of a catalog of candidate terms with respect to one or
// more (eigen)states. Hermitian and positive semidefinite by construction;
// both properties are re-checked numerically on assembly.
//
// Storage convention: `matrix` is the elementwise conjugate of the textbook
// biorthogonal covariance matrix. With this orientation both identities hold
// directly, with no conjugation at the call site:
//   * variance(w) = w^dag matrix w  is the eigenstate-deviation functional,
//   * matrix * w = 0 exactly when  sum_i w_i O_i  has the state(s) as
//     eigenstate(s), i.e. null eigenvectors ARE coefficient vectors.
// The Hermitian-state matrix is real symmetric, where the two conventions
// coincide.
struct CovarianceMatrix {
    QcmKind kind = QcmKind::Hermitian;
    Mat matrix;
    std::vector<std::string> labels;   // catalog labels in row/column order
    std::vector<double> weights;       // ensemble kinds only

    long size() const { return matrix.rows(); }
};

// Variance of the candidate Hamiltonian sum_i w_i O_i in the state(s) behind
// c. Real and >= 0 up to rounding.
double variance(const CovarianceMatrix& c, const Vec& w);

// Single Hermitian state |psi|; must arrive normalized (<psi|psi> = 1 within
// 1e-10, rejected otherwise). All catalog entries must be Hermitian.
// C_ij = Re( <O_i O_j> - <O_i><O_j> ).
CovarianceMatrix hermitian_qcm(const Ket& psi, const OperatorBasis& catalog);

// Single biorthogonal pair; must arrive normalized (<L|R> = 1 within 1e-10,
// rejected otherwise; see normalize_pair).
CovarianceMatrix generalized_qcm(const BiorthogonalPair& pair, const OperatorBasis& catalog);

// Ensemble of pairs with positive probability weights (uniform 1/n when
// empty). `degenerate = false` treats the pairs as belonging to distinct
// eigenvalues and sums their individual covariance matrices; the null space
// is then the intersection of the per-pair null spaces and does not depend
// on the weights. `degenerate = true` handles pairs spanning one degenerate
// eigenvalue: the subtraction uses one shared, ensemble-averaged scalar per
// catalog entry (weights must sum to 1), which keeps superpositions inside
// the degenerate subspace from contaminating the null space. With a single
// pair both variants reduce to generalized_qcm.
CovarianceMatrix multi_qcm(const std::vector<BiorthogonalPair>& pairs,
                           const OperatorBasis& catalog, std::vector<double> weights = {},
                           bool degenerate = false);

struct NullSpaceResult {
    HermitianSpectrum spectrum;       // full covariance spectrum, ascending
    double absolute_tolerance = 0.0;  // eigenvalues <= this count as null
    int null_dimension = 0;
    Mat null_vectors;                 // size() x null_dimension, orthonormal
    // Separation between the kept and rejected parts of the spectrum:
    // lambda_{k} / lambda_{k-1} at the cut (inf when the null part is exact
    // zero or the whole spectrum is null). Below 1e6 the cut is ambiguous and
    // low_confidence is set.
    double gap_ratio = 0.0;
    bool low_confidence = false;
};

// Thresholded eigendecomposition of a covariance matrix; eigenvalues below
// rel_tol * lambda_max are classified as null. A zero null dimension is a
// valid outcome here (the catalog span contains no parent Hamiltonian).
NullSpaceResult null_space(const CovarianceMatrix& c, double rel_tol = 1e-10);

// Relative distance ||w - proj_null(w)|| / ||w|| of a candidate coefficient
// vector from the null span; ~0 means w is a conserved combination.
double span_residual(const NullSpaceResult& nulls, const Vec& w);

// Largest principal angle between the column spans of two orthonormal bases,
// reported as its sine (stable near zero, unlike 1 - cos).
double subspace_angle_sine(const Mat& v1, const Mat& v2);

// Maximum entrywise relative error max_i |w_i - ref_i| / |ref_i|, taken over
// entries with |ref_i| > floor (the metric divides by the reference and is
// undefined at its zeros).
double max_relative_error(const Vec& w, const Vec& ref, double floor = 1e-8);

struct ReconstructionOptions {
    double rel_tol = 1e-10;  // null-space classification threshold
    long anchor = -1;        // coefficient fixed against the reference; -1 = auto
    // Coefficient vectors whose membership in the null span should be
    // measured (e.g. known conserved quantities).
    std::vector<Vec> span_checks;
};

struct ReconstructionReport {
    NullSpaceResult nulls;
    Vec coefficients;   // representative coefficient vector (see below)
    long anchor = -1;   // anchor entry used for rescaling
    bool compared_by_projection = false;
    double comparison_error = -1.0;  // max_relative_error vs reference; -1 without one
    std::vector<double> span_residuals;  // one per opts.span_checks entry
};

// Extracts coefficients from the covariance null space. With a reference
// (the planted Hamiltonian, when known):
//   * null dimension 1: the null vector is rescaled so its anchor entry
//     matches the reference (the anchor is the largest-|.| reference entry
//     unless overridden), then compared entrywise;
//   * null dimension > 1: the recovery is ambiguous up to the null span, so
//     the reference is projected onto the span, anchor-rescaled, and compared
//     (compared_by_projection = true). A small comparison_error certifies the
//     reference is recoverable from the span.
// Without a reference the first null vector is returned normalized, with its
// largest entry made real and positive.
// Throws EmptyNullSpaceError when the null dimension is zero.
ReconstructionReport reconstruct_coefficients(const CovarianceMatrix& c,
                                              const ReconstructionOptions& opts = {},
                                              const Vec* reference = nullptr);

// Operators (within the candidate catalog's span) that have every supplied
// pair as simultaneous eigenstates: the null space of the ensemble
// covariance matrix with uniform weights. Conserved quantities and the
// Hamiltonian itself land here; span_residual tells them apart.
NullSpaceResult discover_symmetries(const std::vector<BiorthogonalPair>& pairs,
                                    const OperatorBasis& candidates, double rel_tol = 1e-10);

struct PerturbationPoint {
    double epsilon = 0.0;
    double error = 0.0;  // max_relative_error of the recovered coefficients
    bool ok = false;     // false when recovery failed at this epsilon
};

struct PerturbationScan {
    std::vector<PerturbationPoint> points;
    // Least-squares fit error ~ slope * epsilon + intercept over the ok
    // points; r_squared near 1 confirms the first-order error response.
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    int null_dimension = 0;  // of the unperturbed covariance matrix
};

// Sensitivity of the reconstruction to state-preparation error; epsilons must
// lie in [0, 0.5). The right vector is displaced by epsilon along a fixed
// random complex direction (unit norm, seeded), the pair is re-normalized
// (the left vector stays put), and the reference
// coefficients are compared against their anchor-rescaled projection onto
// the lowest-k covariance eigenvectors, k being the unperturbed null
// dimension. Failed points are flagged, not fatal, and excluded from the fit.
PerturbationScan perturbation_scan(const BiorthogonalPair& pair, const OperatorBasis& catalog,
                                   const Vec& reference, const std::vector<double>& epsilons,
                                   std::uint64_t seed);

}  // namespace gqcm
