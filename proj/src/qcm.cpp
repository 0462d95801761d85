#include "gqcm/qcm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "gqcm/rng.hpp"

namespace gqcm {

namespace {

std::vector<std::string> catalog_labels(const OperatorBasis& catalog) {
    std::vector<std::string> labels;
    labels.reserve(static_cast<std::size_t>(catalog.size()));
    for (const auto& op : catalog.ops) labels.push_back(op.label);
    return labels;
}

// Symmetrize exactly and verify the assembled matrix is what the algebra
// promises: Hermitian to rounding and positive semidefinite.
CovarianceMatrix finalize_covariance(QcmKind kind, Mat c, const OperatorBasis& catalog) {
    const double scale = std::max(1.0, c.norm());
    const double asym = (c - c.adjoint()).norm();
    if (asym > 1e-12 * scale)
        throw NumericalError("covariance assembly lost Hermiticity (deviation " +
                             std::to_string(asym) + ")");
    c = ((c + c.adjoint()) / 2.0).eval();

    Eigen::SelfAdjointEigenSolver<Mat> es(c, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw NumericalError("covariance validation eigensolve failed");
    const double lmin = es.eigenvalues()(0);
    const double lmax = es.eigenvalues()(c.rows() - 1);
    if (lmin < -1e-10 * std::max(lmax, std::numeric_limits<double>::epsilon()))
        throw NumericalError("covariance matrix has a genuinely negative eigenvalue " +
                             std::to_string(lmin));

    CovarianceMatrix out;
    out.kind = kind;
    out.matrix = std::move(c);
    out.labels = catalog_labels(catalog);
    return out;
}

void require_catalog_state(const OperatorBasis& catalog, const BasisPtr& basis, const char* who) {
    if (catalog.size() == 0) throw std::invalid_argument(std::string(who) + ": empty catalog");
    if (!catalog.basis || !basis || !catalog.basis->same_sector(*basis))
        throw std::invalid_argument(std::string(who) +
                                    ": catalog and state live on different sectors");
}

// Columns (O_i - shifts_i) R.
Mat shifted_action(const OperatorBasis& catalog, const Vec& r, const Vec& shifts) {
    Mat psi(r.size(), catalog.size());
    for (int i = 0; i < catalog.size(); ++i)
        psi.col(i) = catalog[i].matrix * r - shifts(i) * r;
    return psi;
}

// Columns (O_j^dag - conj(shifts_j)) L.
Mat shifted_adjoint_action(const OperatorBasis& catalog, const Vec& l, const Vec& shifts) {
    Mat phi(l.size(), catalog.size());
    for (int j = 0; j < catalog.size(); ++j)
        phi.col(j) = catalog[j].matrix.adjoint() * l - std::conj(shifts(j)) * l;
    return phi;
}

Vec pair_shifts(const OperatorBasis& catalog, const Vec& l, const Vec& r) {
    Vec s(catalog.size());
    for (int i = 0; i < catalog.size(); ++i) s(i) = l.dot(catalog[i].matrix * r);
    return s;
}

// Covariance contribution of one pair given the subtraction scalars. In the
// stored (conjugated) orientation the right-state Gram enters directly and
// the left-state Gram transposed.
Mat pair_covariance(const OperatorBasis& catalog, const Vec& l, const Vec& r, const Vec& shifts) {
    const double rr = r.squaredNorm();
    const double ll = l.squaredNorm();
    const Mat psi = shifted_action(catalog, r, shifts);
    const Mat phi = shifted_adjoint_action(catalog, l, shifts);
    return Mat(psi.adjoint() * psi) / (2.0 * rr) +
           Mat(phi.adjoint() * phi).transpose() / (2.0 * ll);
}

}  // namespace

double variance(const CovarianceMatrix& c, const Vec& w) {
    if (w.size() != c.size())
        throw std::invalid_argument("variance: coefficient vector size mismatch");
    return (w.adjoint() * c.matrix * w).value().real();
}

CovarianceMatrix hermitian_qcm(const Ket& psi, const OperatorBasis& catalog) {
    require_catalog_state(catalog, psi.basis, "hermitian_qcm");
    for (const auto& op : catalog.ops)
        if (!op.hermitian)
            throw std::invalid_argument("hermitian_qcm: catalog entry '" + op.label +
                                        "' is not Hermitian");
    if (std::abs(psi.amp.norm() - 1.0) > 1e-10)
        throw std::invalid_argument("hermitian_qcm: state is not normalized");

    const Vec shifts = pair_shifts(catalog, psi.amp, psi.amp);
    const Mat block = shifted_action(catalog, psi.amp, shifts);
    const Mat gram = block.adjoint() * block;
    return finalize_covariance(QcmKind::Hermitian, gram.real().cast<cxd>(), catalog);
}

namespace {

void require_normalized(const BiorthogonalPair& pair, const char* who) {
    if (std::abs(inner(pair.left, pair.right) - cxd(1.0)) > 1e-10)
        throw std::invalid_argument(std::string(who) +
                                    ": pair is not biorthogonally normalized (<L|R> != 1); run "
                                    "normalize_pair first");
}

}  // namespace

CovarianceMatrix generalized_qcm(const BiorthogonalPair& pair, const OperatorBasis& catalog) {
    require_catalog_state(catalog, pair.right.basis, "generalized_qcm");
    require_normalized(pair, "generalized_qcm");
    const Vec shifts = pair_shifts(catalog, pair.left.amp, pair.right.amp);
    return finalize_covariance(
        QcmKind::Biorthogonal,
        pair_covariance(catalog, pair.left.amp, pair.right.amp, shifts), catalog);
}

CovarianceMatrix multi_qcm(const std::vector<BiorthogonalPair>& pairs,
                           const OperatorBasis& catalog, std::vector<double> weights,
                           bool degenerate) {
    if (pairs.empty()) throw std::invalid_argument("multi_qcm: no pairs");
    for (const auto& pr : pairs) {
        require_catalog_state(catalog, pr.right.basis, "multi_qcm");
        require_normalized(pr, "multi_qcm");
    }
    if (weights.empty()) weights.assign(pairs.size(), 1.0 / static_cast<double>(pairs.size()));
    if (weights.size() != pairs.size())
        throw std::invalid_argument("multi_qcm: weight count != pair count");
    double total = 0.0;
    for (double w : weights) {
        if (!(w > 0.0)) throw std::invalid_argument("multi_qcm: weights must be positive");
        total += w;
    }

    const long m = catalog.size();
    Mat c = Mat::Zero(m, m);
    if (!degenerate) {
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            const Vec shifts = pair_shifts(catalog, pairs[k].left.amp, pairs[k].right.amp);
            c += weights[k] *
                 pair_covariance(catalog, pairs[k].left.amp, pairs[k].right.amp, shifts);
        }
        CovarianceMatrix out =
            finalize_covariance(QcmKind::EnsembleDistinct, std::move(c), catalog);
        out.weights = std::move(weights);
        return out;
    }

    if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument(
            "multi_qcm: degenerate mode needs probability weights summing to 1");
    // Degenerate subspace: one ensemble-averaged scalar per catalog entry,
    // shared by every pair's subtraction.
    Vec shifts = Vec::Zero(m);
    for (std::size_t k = 0; k < pairs.size(); ++k)
        shifts += weights[k] * pair_shifts(catalog, pairs[k].left.amp, pairs[k].right.amp);
    for (std::size_t k = 0; k < pairs.size(); ++k)
        c += weights[k] * pair_covariance(catalog, pairs[k].left.amp, pairs[k].right.amp, shifts);
    CovarianceMatrix out = finalize_covariance(QcmKind::EnsembleDegenerate, std::move(c), catalog);
    out.weights = std::move(weights);
    return out;
}

NullSpaceResult null_space(const CovarianceMatrix& c, double rel_tol) {
    if (!(rel_tol >= 0.0)) throw std::invalid_argument("null_space: negative tolerance");
    NullSpaceResult out;
    out.spectrum = diagonalize_hermitian(c.matrix);
    const long m = c.size();
    const double lmax = out.spectrum.eigenvalues(m - 1);
    out.absolute_tolerance = rel_tol * std::max(lmax, 0.0);

    int k = 0;
    while (k < m && out.spectrum.eigenvalues(k) <= out.absolute_tolerance) ++k;
    out.null_dimension = k;
    out.null_vectors = out.spectrum.vectors.leftCols(k);

    if (k == 0) {
        out.gap_ratio = 0.0;
        out.low_confidence = true;
    } else if (k == static_cast<int>(m)) {
        out.gap_ratio = std::numeric_limits<double>::infinity();
        out.low_confidence = false;
    } else {
        const double below = out.spectrum.eigenvalues(k - 1);
        if (below <= 0.0) {
            // the null block is exact zero (or rounded below it), so the gap is
            // as clean as it can get
            out.gap_ratio = std::numeric_limits<double>::infinity();
            out.low_confidence = false;
        } else {
            out.gap_ratio = out.spectrum.eigenvalues(k) / below;
            out.low_confidence = out.gap_ratio < 1e6;
        }
    }
    return out;
}

double span_residual(const NullSpaceResult& nulls, const Vec& w) {
    const double nrm = w.norm();
    if (nrm <= 0.0) throw std::invalid_argument("span_residual: zero vector");
    if (nulls.null_dimension == 0) return 1.0;
    const Vec proj = nulls.null_vectors * (nulls.null_vectors.adjoint() * w);
    return (w - proj).norm() / nrm;
}

double subspace_angle_sine(const Mat& v1, const Mat& v2) {
    if (v1.rows() != v2.rows())
        throw std::invalid_argument("subspace_angle_sine: ambient dimensions differ");
    if (v1.cols() == 0 || v2.cols() == 0)
        throw std::invalid_argument("subspace_angle_sine: empty basis");
    const Mat rem = v2 - v1 * (v1.adjoint() * v2);
    Eigen::JacobiSVD<Mat> svd(rem);
    return std::min(svd.singularValues()(0), 1.0);
}

double max_relative_error(const Vec& w, const Vec& ref, double floor) {
    if (w.size() != ref.size())
        throw std::invalid_argument("max_relative_error: size mismatch");
    if (ref.cwiseAbs().maxCoeff() <= floor)
        throw std::invalid_argument("max_relative_error: no reference entry above the floor");
    double err = 0.0;
    for (long i = 0; i < ref.size(); ++i) {
        const double mag = std::abs(ref(i));
        if (mag > floor) err = std::max(err, std::abs(w(i) - ref(i)) / mag);
    }
    return err;
}

ReconstructionReport reconstruct_coefficients(const CovarianceMatrix& c,
                                              const ReconstructionOptions& opts,
                                              const Vec* reference) {
    ReconstructionReport rep;
    rep.nulls = null_space(c, opts.rel_tol);
    if (rep.nulls.null_dimension == 0)
        throw EmptyNullSpaceError(
            "reconstruct_coefficients: covariance matrix has no null space; the catalog span "
            "contains no operator with the supplied state(s) as eigenstate(s)");
    for (const auto& check : opts.span_checks)
        rep.span_residuals.push_back(span_residual(rep.nulls, check));

    const Mat& v = rep.nulls.null_vectors;
    if (!reference) {
        Vec w = v.col(0);
        long imax = 0;
        w.cwiseAbs().maxCoeff(&imax);
        const cxd pivot = w(imax);
        w *= std::abs(pivot) / pivot / w.norm();
        rep.coefficients = std::move(w);
        rep.anchor = imax;
        return rep;
    }

    const Vec& ref = *reference;
    if (ref.size() != c.size())
        throw std::invalid_argument("reconstruct_coefficients: reference size mismatch");
    long anchor = opts.anchor;
    if (anchor < 0) ref.cwiseAbs().maxCoeff(&anchor);
    if (anchor >= c.size())
        throw std::invalid_argument("reconstruct_coefficients: anchor index out of range");
    if (std::abs(ref(anchor)) <= 0.0)
        throw std::invalid_argument("reconstruct_coefficients: reference anchor entry is zero");

    Vec w;
    if (rep.nulls.null_dimension == 1) {
        w = v.col(0);
    } else {
        w = v * (v.adjoint() * ref);
        rep.compared_by_projection = true;
    }
    if (std::abs(w(anchor)) < 1e-12 * w.norm())
        throw NumericalError(
            "reconstruct_coefficients: recovered vector vanishes at the anchor entry; the "
            "reference is not recoverable from the null span");
    w *= ref(anchor) / w(anchor);
    rep.coefficients = std::move(w);
    rep.anchor = anchor;
    rep.comparison_error = max_relative_error(rep.coefficients, ref);
    return rep;
}

NullSpaceResult discover_symmetries(const std::vector<BiorthogonalPair>& pairs,
                                    const OperatorBasis& candidates, double rel_tol) {
    return null_space(multi_qcm(pairs, candidates), rel_tol);
}

PerturbationScan perturbation_scan(const BiorthogonalPair& pair, const OperatorBasis& catalog,
                                   const Vec& reference, const std::vector<double>& epsilons,
                                   std::uint64_t seed) {
    if (epsilons.empty()) throw std::invalid_argument("perturbation_scan: no epsilon values");
    for (double eps : epsilons)
        if (!(eps >= 0.0) || eps >= 0.5)
            throw std::invalid_argument("perturbation_scan: epsilon " + std::to_string(eps) +
                                        " outside [0, 0.5)");
    const BiorthogonalPair base = normalize_pair(pair.left, pair.right, pair.energy);

    const CovarianceMatrix c0 = generalized_qcm(base, catalog);
    const NullSpaceResult nulls0 = null_space(c0);
    const int k = nulls0.null_dimension;
    if (k == 0)
        throw EmptyNullSpaceError("perturbation_scan: unperturbed state does not reconstruct");

    std::mt19937_64 gen(seed);
    Vec dir(base.right.amp.size());
    for (long i = 0; i < dir.size(); ++i) {
        const auto [re, im] = rng::gaussian_pair(gen);
        dir(i) = cxd(re, im);
    }
    dir /= dir.norm();

    long anchor = 0;
    reference.cwiseAbs().maxCoeff(&anchor);

    PerturbationScan scan;
    scan.null_dimension = k;
    for (double eps : epsilons) {
        PerturbationPoint pt;
        pt.epsilon = eps;
        try {
            const Ket bumped = make_ket(base.right.basis, base.right.amp + eps * dir);
            const BiorthogonalPair pp = normalize_pair(base.left, bumped, base.energy);
            const CovarianceMatrix c = generalized_qcm(pp, catalog);
            // The perturbed matrix has no exact null space; take the lowest
            // k eigenvectors, k fixed by the unperturbed problem.
            const HermitianSpectrum es = diagonalize_hermitian(c.matrix);
            const Mat v = es.vectors.leftCols(k);
            Vec proj = v * (v.adjoint() * reference);
            if (std::abs(proj(anchor)) < 1e-12 * proj.norm())
                throw NumericalError("projection vanished at the anchor");
            proj *= reference(anchor) / proj(anchor);
            pt.error = max_relative_error(proj, reference);
            pt.ok = true;
        } catch (const NumericalError&) {
            pt.ok = false;
        }
        scan.points.push_back(pt);
    }

    // Least-squares line through the surviving points.
    double sx = 0, sy = 0;
    int n = 0;
    for (const auto& pt : scan.points)
        if (pt.ok) {
            sx += pt.epsilon;
            sy += pt.error;
            ++n;
        }
    if (n >= 2) {
        const double mx = sx / n, my = sy / n;
        double sxx = 0, sxy = 0, sstot = 0;
        for (const auto& pt : scan.points)
            if (pt.ok) {
                sxx += (pt.epsilon - mx) * (pt.epsilon - mx);
                sxy += (pt.epsilon - mx) * (pt.error - my);
                sstot += (pt.error - my) * (pt.error - my);
            }
        scan.slope = sxy / sxx;
        scan.intercept = my - scan.slope * mx;
        double ssres = 0;
        for (const auto& pt : scan.points)
            if (pt.ok) {
                const double pred = scan.slope * pt.epsilon + scan.intercept;
                ssres += (pt.error - pred) * (pt.error - pred);
            }
        scan.r_squared = sstot > 0 ? 1.0 - ssres / sstot : 0.0;
    }
    return scan;
}

}  // namespace gqcm
