#pragma once

#include <functional>
#include <vector>

#include "gqcm/lattice.hpp"
#include "gqcm/operators.hpp"
#include "gqcm/types.hpp"

namespace gqcm {

struct DensityMatrix {
    BasisPtr basis;
    Mat rho;
    // True when the state entered with unit trace. Evolution under a
    // non-Hermitian generator does not preserve the trace, so this records
    // intent rather than an invariant.
    bool normalized = false;
};

// |psi><psi| / <psi|psi>
DensityMatrix pure_density(const Ket& psi);

// Validates shape and Hermiticity (relative deviation <= herm_tol); states
// arriving with unit trace are additionally required to be PSD (smallest
// eigenvalue >= -1e-10) and get the normalized flag.
DensityMatrix make_density(BasisPtr basis, Mat rho, double herm_tol = 1e-12);

// drho/dt = -i (H rho - rho H^dag) + sum_j ( L_j rho L_j^dag
//                                            - 1/2 {L_j^dag L_j, rho} ).
// H may be non-Hermitian, in which case the flow does not preserve the trace
// (the state is deliberately left unnormalized). With jump operators and a
// Hermitian H this is the standard Lindblad master equation; absorbing the
// anticommutator into H as H - i/2 sum_j L_j^dag L_j gives the equivalent
// effective non-Hermitian generator plus bare L rho L^dag recycling terms.
Mat master_equation_rhs(const Mat& h, const Mat& rho, const std::vector<Mat>& jumps);

// Ansatz coefficients as a function of time; realize(ansatz, fn(t)) is H(t).
using GeneratorFn = std::function<Vec(double)>;

struct EvolveOptions {
    double t_start = 0.0;
    double t_end = 1.0;
    double dt = 1e-3;
    int store_stride = 1;        // keep every k-th accepted step
    double error_budget = 1e-6;  // ceiling on local error per unit time
    std::string generator_tag;   // free-form provenance note kept with the data
};

struct Trajectory {
    std::vector<double> times;
    std::vector<Mat> states;
    std::string generator_tag;
    double max_step_error_rate = 0.0;       // worst (local error / dt) observed
    double max_hermitize_correction = 0.0;  // worst anti-Hermitian dust removed
};

// Fixed-step RK4 with step-doubling error control: every step is also taken
// as two half steps, the difference provides the local error estimate, and
// the halved result (the more accurate one) is kept. StepSizeError is thrown
// the moment the estimated error rate exceeds opts.error_budget; the state is
// re-Hermitized after every step since the exact flow preserves Hermiticity.
Trajectory evolve(const DensityMatrix& rho0, const OperatorBasis& ansatz,
                  const GeneratorFn& coefficients, const std::vector<LocalOperator>& jumps,
                  const EvolveOptions& opts);

// (states[i+1] - states[i-1]) / (times[i+1] - times[i-1]); needs both
// neighbors, so 1 <= index <= size - 2.
Mat central_difference(const Trajectory& traj, std::size_t index);

// One probe-row block of the operator recovery equation. For each probe K_m
// the data obeys
//   sum_i [ w_i <K_m O_i> - conj(w_i) <O_i^dag K_m> ] + sum_p c_p U_mp = xi_m,
// with <X> = Tr(rho X), xi_m = i Tr(K_m drho/dt), jump columns
// U_m,(k1,k2) = i <S_k1^dag K_m S_k2> for a jump operator basis {S_k}, and
// c the (Hermitian) jump coefficient matrix flattened row-major. Splitting
// w = a + ib turns each complex row into two real ones:
//   [ Re(P-Q)  -Im(P+Q) |  Re U  -Im U ] [a; b; Re c; Im c] = [Re xi]
//   [ Im(P-Q)   Re(P+Q) |  Im U   Re U ]                      [Im xi]
// (P - Q multiplies the real part and P + Q the imaginary part; the jump
// columns are genuinely complex-linear so they split in the usual way).
struct HoeBlocks {
    Mat p;   // <K_m O_i>
    Mat q;   // <O_i^dag K_m>
    Mat u;   // jump columns, zero width without a jump basis
    Vec xi;  // zero for a steady state

    long num_probes() const { return p.rows(); }
    long num_ansatz() const { return p.cols(); }
    long num_jump_sq() const { return u.cols(); }

    RMat matrix() const;  // (2 MK) x (2 MO + 2 K^2)
    RVec rhs() const;     // (2 MK)
};

// Steady-state block (xi = 0) for a pure state: only |R> is needed and every
// expectation reduces to vector contractions. Only meaningful when |R> is a
// right eigenstate with a real eigenvalue; the caller checks that.
HoeBlocks assemble_hoe(const Ket& right_state, const OperatorBasis& probes,
                       const OperatorBasis& ansatz);

// General block from a density matrix and its time derivative (exact, or a
// finite difference from a measured trajectory).
HoeBlocks assemble_hoe(const DensityMatrix& rho, const Mat& drho_dt, const OperatorBasis& probes,
                       const OperatorBasis& ansatz,
                       const std::vector<LocalOperator>& jump_basis = {});

// Rows from several snapshots stacked into one real system.
struct HoeSystem {
    RMat g;
    RVec rhs;
    long num_ansatz = 0;
    long num_jumps = 0;  // size of the jump operator basis (K, not K^2)
};

HoeSystem stack_hoe(const std::vector<HoeBlocks>& blocks);

// ||G [Re w; Im w]|| / (||G||_F ||w||): how well w solves the homogeneous
// steady-state system.
double steady_state_residual(const HoeSystem& sys, const Vec& omega);

enum class HoeSolveMode {
    NullSpace,     // homogeneous: right singular vector of the smallest sigma
    LeastSquares,  // inhomogeneous: minimum-norm solution, small sigmas cut
};

struct HoeSolution {
    Vec omega;        // recovered ansatz coefficients
    Mat jump_matrix;  // recovered K x K jump coefficient matrix (if any)
    long rank = 0;    // singular values above rcond * sigma_max
    double residual = 0.0;  // NullSpace: sigma_min/sigma_max; LeastSquares: |Gx-b|/|b|
    RVec singular_values;
    bool degenerate = false;  // solution not unique at the rcond threshold
    Mat free_directions;      // unconstrained right-singular directions (real, stacked layout)
};

HoeSolution solve_hoe(const HoeSystem& sys, HoeSolveMode mode, double rcond = 1e-10);

}  // namespace gqcm
