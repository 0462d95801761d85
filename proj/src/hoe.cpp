#include "gqcm/hoe.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace gqcm {

namespace {

// Tr(T A) for sparse A and dense T: sum over the nonzeros of A.
cxd trace_right_sparse(const Mat& t, const SpMat& a) {
    cxd sum = 0.0;
    for (int k = 0; k < a.outerSize(); ++k)
        for (SpMat::InnerIterator it(a, k); it; ++it)
            sum += it.value() * t(it.col(), it.row());
    return sum;
}

// Tr(S A^dag) for sparse A and dense S.
cxd trace_right_sparse_adjoint(const Mat& s, const SpMat& a) {
    cxd sum = 0.0;
    for (int k = 0; k < a.outerSize(); ++k)
        for (SpMat::InnerIterator it(a, k); it; ++it)
            sum += std::conj(it.value()) * s(it.row(), it.col());
    return sum;
}

void require_same_sector(const BasisPtr& a, const BasisPtr& b, const char* who) {
    if (!a || !b || !a->same_sector(*b))
        throw std::invalid_argument(std::string(who) + ": sector mismatch");
}

}  // namespace

DensityMatrix pure_density(const Ket& psi) {
    const double nn = psi.amp.squaredNorm();
    if (nn <= 0.0) throw std::invalid_argument("pure_density: zero state");
    return DensityMatrix{psi.basis, Mat(psi.amp * psi.amp.adjoint() / nn), true};
}

DensityMatrix make_density(BasisPtr basis, Mat rho, double herm_tol) {
    if (!basis) throw std::invalid_argument("make_density: null basis");
    if (rho.rows() != basis->dimension() || rho.cols() != basis->dimension())
        throw std::invalid_argument("make_density: matrix does not match the sector dimension");
    const double dev = (rho - rho.adjoint()).norm();
    if (dev > herm_tol * std::max(1.0, rho.norm()))
        throw std::invalid_argument("make_density: matrix is not Hermitian (deviation " +
                                    std::to_string(dev) + ")");
    const bool unit_trace = std::abs(rho.trace() - cxd(1.0)) < 1e-9;
    if (unit_trace) {
        Eigen::SelfAdjointEigenSolver<Mat> es(Mat((rho + rho.adjoint()) / 2.0),
                                              Eigen::EigenvaluesOnly);
        if (es.eigenvalues()(0) < -1e-10)
            throw std::invalid_argument("make_density: unit-trace matrix is not PSD (eigenvalue " +
                                        std::to_string(es.eigenvalues()(0)) + ")");
    }
    return DensityMatrix{std::move(basis), std::move(rho), unit_trace};
}

Mat master_equation_rhs(const Mat& h, const Mat& rho, const std::vector<Mat>& jumps) {
    Mat out = cxd(0.0, -1.0) * (h * rho - rho * h.adjoint());
    for (const Mat& l : jumps) {
        const Mat ldl = l.adjoint() * l;
        out += l * rho * l.adjoint() - 0.5 * (ldl * rho + rho * ldl);
    }
    return out;
}

Trajectory evolve(const DensityMatrix& rho0, const OperatorBasis& ansatz,
                  const GeneratorFn& coefficients, const std::vector<LocalOperator>& jumps,
                  const EvolveOptions& opts) {
    require_same_sector(rho0.basis, ansatz.basis, "evolve");
    if (!(opts.t_end > opts.t_start)) throw std::invalid_argument("evolve: t_end <= t_start");
    if (!(opts.dt > 0.0)) throw std::invalid_argument("evolve: dt <= 0");
    if (opts.store_stride < 1) throw std::invalid_argument("evolve: store_stride < 1");
    if (!coefficients) throw std::invalid_argument("evolve: no generator");

    std::vector<Mat> jumpd;
    for (const auto& l : jumps) {
        require_same_sector(l.basis, rho0.basis, "evolve");
        jumpd.emplace_back(l.matrix);
    }

    const auto rhs_at = [&](double t, const Mat& r) {
        return master_equation_rhs(realize_dense(ansatz, coefficients(t)), r, jumpd);
    };
    const auto rk4 = [&](const Mat& r, double t, double h) {
        const Mat k1 = rhs_at(t, r);
        const Mat k2 = rhs_at(t + h / 2, Mat(r + (h / 2) * k1));
        const Mat k3 = rhs_at(t + h / 2, Mat(r + (h / 2) * k2));
        const Mat k4 = rhs_at(t + h, Mat(r + h * k3));
        return Mat(r + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4));
    };

    Trajectory traj;
    traj.generator_tag = opts.generator_tag;
    Mat rho = rho0.rho;
    double t = opts.t_start;
    traj.times.push_back(t);
    traj.states.push_back(rho);

    long step = 0;
    while (t < opts.t_end - 1e-12 * (opts.t_end - opts.t_start)) {
        const double h = std::min(opts.dt, opts.t_end - t);
        const Mat full = rk4(rho, t, h);
        const Mat halves = rk4(rk4(rho, t, h / 2), t + h / 2, h / 2);
        // Classic step doubling: the fifth-order error of the halved result
        // is the difference over 2^4 - 1.
        const double rate = (full - halves).norm() / 15.0 / h;
        traj.max_step_error_rate = std::max(traj.max_step_error_rate, rate);
        if (rate > opts.error_budget)
            throw StepSizeError("evolve: local error rate " + std::to_string(rate) +
                                " exceeds the budget " + std::to_string(opts.error_budget) +
                                " at t = " + std::to_string(t) + "; reduce dt");
        const Mat herm = (halves + halves.adjoint()) / 2.0;
        traj.max_hermitize_correction =
            std::max(traj.max_hermitize_correction, (halves - herm).norm());
        rho = herm;
        t += h;
        ++step;
        if (step % opts.store_stride == 0 || !(t < opts.t_end - 1e-12)) {
            traj.times.push_back(t);
            traj.states.push_back(rho);
        }
    }
    return traj;
}

Mat central_difference(const Trajectory& traj, std::size_t index) {
    if (index < 1 || index + 1 >= traj.states.size())
        throw std::invalid_argument("central_difference: index has no neighbors on both sides");
    const double span = traj.times[index + 1] - traj.times[index - 1];
    if (!(span > 0.0)) throw std::invalid_argument("central_difference: degenerate time span");
    return (traj.states[index + 1] - traj.states[index - 1]) / span;
}

RMat HoeBlocks::matrix() const {
    const long mk = num_probes(), mo = num_ansatz(), k2 = num_jump_sq();
    const Mat tminus = p - q;
    const Mat tplus = p + q;
    RMat g(2 * mk, 2 * mo + 2 * k2);
    g.block(0, 0, mk, mo) = tminus.real();
    g.block(0, mo, mk, mo) = -tplus.imag();
    g.block(mk, 0, mk, mo) = tminus.imag();
    g.block(mk, mo, mk, mo) = tplus.real();
    if (k2 > 0) {
        g.block(0, 2 * mo, mk, k2) = u.real();
        g.block(0, 2 * mo + k2, mk, k2) = -u.imag();
        g.block(mk, 2 * mo, mk, k2) = u.imag();
        g.block(mk, 2 * mo + k2, mk, k2) = u.real();
    }
    return g;
}

RVec HoeBlocks::rhs() const {
    RVec b(2 * num_probes());
    b.head(num_probes()) = xi.real();
    b.tail(num_probes()) = xi.imag();
    return b;
}

HoeBlocks assemble_hoe(const Ket& right_state, const OperatorBasis& probes,
                       const OperatorBasis& ansatz) {
    require_same_sector(right_state.basis, probes.basis, "assemble_hoe");
    require_same_sector(right_state.basis, ansatz.basis, "assemble_hoe");
    const Vec& r = right_state.amp;
    const double rr = r.squaredNorm();
    if (rr <= 0.0) throw std::invalid_argument("assemble_hoe: zero state");

    // Pure state: every trace collapses to vector contractions,
    //   <K O> = (K^dag R)^dag (O R) / <R|R>,  <O^dag K> = (O R)^dag (K R) / <R|R>.
    const long mo = ansatz.size(), mk = probes.size();
    Mat x(r.size(), mo), y(r.size(), mk), z(r.size(), mk);
    for (long i = 0; i < mo; ++i) x.col(i) = ansatz[static_cast<int>(i)].matrix * r;
    for (long m = 0; m < mk; ++m) {
        y.col(m) = probes[static_cast<int>(m)].matrix * r;
        z.col(m) = probes[static_cast<int>(m)].matrix.adjoint() * r;
    }
    HoeBlocks blocks;
    blocks.p = (z.adjoint() * x) / rr;
    blocks.q = Mat((y.adjoint() * x).conjugate()) / rr;
    blocks.u.resize(mk, 0);
    blocks.xi = Vec::Zero(mk);
    return blocks;
}

HoeBlocks assemble_hoe(const DensityMatrix& rho, const Mat& drho_dt, const OperatorBasis& probes,
                       const OperatorBasis& ansatz,
                       const std::vector<LocalOperator>& jump_basis) {
    require_same_sector(rho.basis, probes.basis, "assemble_hoe");
    require_same_sector(rho.basis, ansatz.basis, "assemble_hoe");
    if (drho_dt.rows() != rho.rho.rows() || drho_dt.cols() != rho.rho.cols())
        throw std::invalid_argument("assemble_hoe: drho/dt shape mismatch");
    for (const auto& s : jump_basis) require_same_sector(s.basis, rho.basis, "assemble_hoe");

    const long mo = ansatz.size(), mk = probes.size();
    const long nj = static_cast<long>(jump_basis.size());
    HoeBlocks blocks;
    blocks.p.resize(mk, mo);
    blocks.q.resize(mk, mo);
    blocks.u.resize(mk, nj * nj);
    blocks.xi.resize(mk);

    // Jump sandwich states S_k2 rho S_k1^dag, indexed p = k1 * nj + k2.
    std::vector<Mat> sandwich;
    sandwich.reserve(static_cast<std::size_t>(nj * nj));
    for (long k1 = 0; k1 < nj; ++k1) {
        const Mat s1d = Mat(jump_basis[static_cast<std::size_t>(k1)].matrix);
        for (long k2 = 0; k2 < nj; ++k2)
            sandwich.emplace_back(Mat(jump_basis[static_cast<std::size_t>(k2)].matrix) * rho.rho *
                                  s1d.adjoint());
    }

    for (long m = 0; m < mk; ++m) {
        const SpMat& km = probes[static_cast<int>(m)].matrix;
        const Mat rho_k = rho.rho * km;  // Tr(rho K O)  = Tr((rho K) O)
        const Mat k_rho = km * rho.rho;  // Tr(rho O+ K) = Tr((K rho) O+)
        for (long i = 0; i < mo; ++i) {
            const SpMat& oi = ansatz[static_cast<int>(i)].matrix;
            blocks.p(m, i) = trace_right_sparse(rho_k, oi);
            blocks.q(m, i) = trace_right_sparse_adjoint(k_rho, oi);
        }
        for (long pidx = 0; pidx < nj * nj; ++pidx)
            blocks.u(m, pidx) =
                cxd(0.0, 1.0) * trace_right_sparse(sandwich[static_cast<std::size_t>(pidx)], km);
        blocks.xi(m) = cxd(0.0, 1.0) * trace_right_sparse(drho_dt, km);
    }
    return blocks;
}

HoeSystem stack_hoe(const std::vector<HoeBlocks>& blocks) {
    if (blocks.empty()) throw std::invalid_argument("stack_hoe: no blocks");
    const long mo = blocks.front().num_ansatz();
    const long k2 = blocks.front().num_jump_sq();
    long rows = 0;
    for (const auto& b : blocks) {
        if (b.num_ansatz() != mo || b.num_jump_sq() != k2)
            throw std::invalid_argument("stack_hoe: inconsistent block shapes");
        rows += 2 * b.num_probes();
    }
    HoeSystem sys;
    sys.num_ansatz = mo;
    sys.num_jumps = static_cast<long>(std::lround(std::sqrt(static_cast<double>(k2))));
    sys.g.resize(rows, 2 * mo + 2 * k2);
    sys.rhs.resize(rows);
    long at = 0;
    for (const auto& b : blocks) {
        sys.g.middleRows(at, 2 * b.num_probes()) = b.matrix();
        sys.rhs.segment(at, 2 * b.num_probes()) = b.rhs();
        at += 2 * b.num_probes();
    }
    return sys;
}

double steady_state_residual(const HoeSystem& sys, const Vec& omega) {
    if (omega.size() != sys.num_ansatz)
        throw std::invalid_argument("steady_state_residual: coefficient size mismatch");
    if (sys.num_jumps != 0)
        throw std::invalid_argument("steady_state_residual: system has jump columns");
    RVec x(2 * sys.num_ansatz);
    x.head(sys.num_ansatz) = omega.real();
    x.tail(sys.num_ansatz) = omega.imag();
    return (sys.g * x).norm() / (sys.g.norm() * x.norm());
}

HoeSolution solve_hoe(const HoeSystem& sys, HoeSolveMode mode, double rcond) {
    const long mo = sys.num_ansatz;
    const long k2 = sys.num_jumps * sys.num_jumps;
    const long cols = sys.g.cols();

    Eigen::BDCSVD<RMat> svd(sys.g, Eigen::ComputeThinU | Eigen::ComputeFullV);
    const RVec& sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv(0) : 0.0;

    HoeSolution sol;
    sol.singular_values = sv;
    long rank = 0;
    for (long i = 0; i < sv.size(); ++i)
        if (sv(i) > rcond * smax) ++rank;
    sol.rank = rank;
    const long nfree = cols - rank;
    sol.free_directions = svd.matrixV().rightCols(nfree).cast<cxd>();
    sol.degenerate = (mode == HoeSolveMode::NullSpace) ? nfree > 1 : nfree > 0;

    RVec x;
    if (mode == HoeSolveMode::NullSpace) {
        x = svd.matrixV().col(cols - 1);
        sol.residual = smax > 0 ? sv(sv.size() - 1) / smax : 0.0;
    } else {
        svd.setThreshold(rcond);
        x = svd.solve(sys.rhs);
        const double bn = sys.rhs.norm();
        sol.residual = bn > 0 ? (sys.g * x - sys.rhs).norm() / bn : (sys.g * x).norm();
    }

    sol.omega = x.head(mo).cast<cxd>() + cxd(0.0, 1.0) * x.segment(mo, mo).cast<cxd>();
    if (k2 > 0) {
        sol.jump_matrix.resize(sys.num_jumps, sys.num_jumps);
        for (long k1 = 0; k1 < sys.num_jumps; ++k1)
            for (long kk = 0; kk < sys.num_jumps; ++kk) {
                const long pidx = k1 * sys.num_jumps + kk;
                sol.jump_matrix(k1, kk) =
                    cxd(x(2 * mo + pidx), x(2 * mo + k2 + pidx));
            }
    }
    return sol;
}

}  // namespace gqcm
