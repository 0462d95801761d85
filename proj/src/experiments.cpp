#include "gqcm/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gqcm/hoe.hpp"
#include "gqcm/models.hpp"
#include "gqcm/qcm.hpp"
#include "gqcm/rng.hpp"
#include "gqcm/spectra.hpp"

namespace gqcm {

namespace fs = std::filesystem;

namespace {

json block(const json& config, const char* key) {
    return config.contains(key) ? config.at(key) : json::object();
}

// ---------------------------------------------------------------------------
// model assembly

struct ModelContext {
    BasisPtr basis;
    OperatorBasis full_catalog;   // complete candidate set of the model family
    Vec reference_full;           // model coefficients over full_catalog
    OperatorBasis recon_catalog;  // full_catalog minus excluded tags
    Vec reference_recon;          // reference restricted to the kept entries
    Mat hamiltonian;              // realized from the full catalog
    bool fermionic = false;
    std::string type;
};

ModelContext build_model(const json& config) {
    const json model = config.at("model");
    const json cat = block(config, "catalog");
    ModelContext m;
    m.type = model.at("type").get<std::string>();
    const int n = model.at("num_sites").get<int>();
    const std::string kind = cat.value("kind", std::string("site"));
    const bool open_boundary = cat.value("open_boundary", false);
    const bool translation_invariant = kind == "translation-invariant";
    m.fermionic = m.type == "fermion" || m.type == "random-fermion";

    if (m.fermionic) {
        if (translation_invariant)
            throw std::invalid_argument(
                "catalog.kind: translation-invariant catalogs exist for spin models only");
        const int particles = model.value("num_particles", n / 2);
        m.basis = make_basis(SectorKind::FermionFixedNumber, n, particles);
        m.full_catalog = fermion_basis_catalog(m.basis, open_boundary);
    } else {
        m.basis = make_basis(SectorKind::SpinHalfChain, n);
        m.full_catalog = spin_basis_catalog(m.basis, translation_invariant, open_boundary);
    }

    if (m.type == "lee-yang") {
        if (open_boundary)
            throw std::invalid_argument("the lee-yang model is periodic; set open_boundary false");
        LeeYangParams p;
        p.num_sites = n;
        p.lambda = model.value("lambda", 0.5);
        p.hz = model.value("hz", 0.5);
        m.reference_full = lee_yang_coefficients(p, m.full_catalog);
    } else if (m.type == "fermion") {
        if (open_boundary)
            throw std::invalid_argument("the fermion model is periodic; set open_boundary false");
        FermionParams p;
        p.num_sites = n;
        p.J = model.value("J", 1.0);
        p.g = model.value("g", 0.15);
        p.U = model.value("U", 2.0);
        p.h = model.value("h", 0.5);
        p.seed = model.value("potential_seed", std::uint64_t{1});
        const std::string pot = model.value("potential", std::string("zero"));
        if (pot == "zero") p.potential = PotentialKind::Zero;
        else if (pot == "staggered") p.potential = PotentialKind::Staggered;
        else if (pot == "biased") p.potential = PotentialKind::Biased;
        else p.potential = PotentialKind::Random;
        m.reference_full = fermion_coefficients(p, m.full_catalog);
    } else {
        m.reference_full = random_local_coefficients(
            m.full_catalog, model.value("coefficient_seed", std::uint64_t{1}),
            model.value("real_coefficients", false));
    }
    m.hamiltonian = Mat(realize(m.full_catalog, m.reference_full));

    std::set<std::string> excluded;
    if (cat.contains("exclude_tags"))
        for (const json& t : cat.at("exclude_tags")) excluded.insert(t.get<std::string>());
    if (excluded.empty()) {
        m.recon_catalog = m.full_catalog;
        m.reference_recon = m.reference_full;
    } else {
        OperatorBasis kept;
        kept.kind = m.full_catalog.kind;
        kept.basis = m.basis;
        std::vector<long> kept_idx;
        for (int i = 0; i < m.full_catalog.size(); ++i)
            if (!excluded.count(m.full_catalog[i].tag)) {
                kept.ops.push_back(m.full_catalog[i]);
                kept_idx.push_back(i);
            }
        if (kept.ops.empty())
            throw std::invalid_argument("catalog.exclude_tags removed every candidate operator");
        m.recon_catalog = std::move(kept);
        m.reference_recon = Vec(static_cast<long>(kept_idx.size()));
        for (std::size_t i = 0; i < kept_idx.size(); ++i)
            m.reference_recon(static_cast<long>(i)) = m.reference_full(kept_idx[i]);
    }
    return m;
}

// Coefficient vector of the conserved total-number combination, when the
// catalog carries number terms.
bool total_number_vector(const OperatorBasis& catalog, Vec& out) {
    out = Vec::Zero(catalog.size());
    bool any = false;
    for (int i = 0; i < catalog.size(); ++i)
        if (catalog[i].tag == "number") {
            out(i) = 1.0;
            any = true;
        }
    return any;
}

// ---------------------------------------------------------------------------
// eigenpair selection

long draw_index(std::mt19937_64& g, long size) {
    return std::min<long>(size - 1, static_cast<long>(rng::uniform01(g) * static_cast<double>(size)));
}

// One position inside pool, honoring state.selector. The pool is the full
// spectrum ordering except for steady-state runs, where it holds only the
// real-eigenvalue positions.
long pick_single(const json& state, const std::vector<long>& pool) {
    const std::string selector = state.value("selector", std::string("random"));
    if (selector == "index") {
        if (!state.contains("index"))
            throw std::invalid_argument("state.index is required with state.selector = index");
        const long k = state.at("index").get<long>();
        if (k >= static_cast<long>(pool.size()))
            throw std::invalid_argument("state.index " + std::to_string(k) +
                                        " is out of range; only " + std::to_string(pool.size()) +
                                        " eigenpairs are available");
        return pool[static_cast<std::size_t>(k)];
    }
    std::mt19937_64 g(state.value("seed", std::uint64_t{1}));
    return pool[static_cast<std::size_t>(draw_index(g, static_cast<long>(pool.size())))];
}

std::vector<long> pick_many(const json& state, long dim) {
    std::vector<long> picked;
    if (state.contains("indices")) {
        for (const json& j : state.at("indices")) {
            const long k = j.get<long>();
            if (k >= dim)
                throw std::invalid_argument("state.indices: position " + std::to_string(k) +
                                            " is out of range for dimension " + std::to_string(dim));
            if (std::find(picked.begin(), picked.end(), k) != picked.end())
                throw std::invalid_argument("state.indices: position " + std::to_string(k) +
                                            " appears twice");
            picked.push_back(k);
        }
        return picked;
    }
    const long count = state.value("count", 4L);
    if (count > dim)
        throw std::invalid_argument("state.count exceeds the sector dimension " +
                                    std::to_string(dim));
    std::mt19937_64 g(state.value("seed", std::uint64_t{1}));
    std::set<long> seen;
    while (static_cast<long>(picked.size()) < count) {
        const long k = draw_index(g, dim);
        if (seen.insert(k).second) picked.push_back(k);
    }
    return picked;
}

std::vector<long> identity_pool(long dim) {
    std::vector<long> pool(static_cast<std::size_t>(dim));
    for (long i = 0; i < dim; ++i) pool[static_cast<std::size_t>(i)] = i;
    return pool;
}

// ---------------------------------------------------------------------------
// small shared helpers

json complex_json(cxd z) { return json::array({z.real(), z.imag()}); }

json gap_ratio_json(const NullSpaceResult& nulls) {
    if (std::isinf(nulls.gap_ratio)) return "inf";
    return nulls.gap_ratio;
}

void fill_null_summary(json& rep, const NullSpaceResult& nulls) {
    rep["nullDimension"] = nulls.null_dimension;
    rep["gapRatio"] = gap_ratio_json(nulls);
    rep["lowConfidence"] = nulls.low_confidence;
}

Vec anchor_rescale(const Vec& w, const Vec& ref) {
    long a = 0;
    ref.cwiseAbs().maxCoeff(&a);
    if (std::abs(w(a)) <= 1e-12 * w.norm())
        throw NumericalError("recovered coefficients vanish at the anchor entry " +
                             std::to_string(a) + "; no scale can be fixed");
    return w * (ref(a) / w(a));
}

std::vector<std::string> catalog_labels(const OperatorBasis& catalog) {
    std::vector<std::string> labels;
    labels.reserve(static_cast<std::size_t>(catalog.size()));
    for (int i = 0; i < catalog.size(); ++i) labels.push_back(catalog[i].label);
    return labels;
}

ReconstructionOptions reconstruction_options(const json& config) {
    const json qcm = block(config, "qcm");
    ReconstructionOptions opts;
    opts.rel_tol = qcm.value("rel_tol", 1e-10);
    opts.anchor = qcm.value("anchor", -1L);
    return opts;
}

void write_run_log(const std::string& out_dir, const json& config, std::uint64_t hash,
                   double wall_seconds) {
    std::ostringstream log;
    log << "experiment=" << config.at("experiment").get<std::string>() << "\n"
        << "config=" << hash_hex(hash) << "\n"
        << "wall_seconds=" << format_double(wall_seconds) << "\n";
    write_text_file((fs::path(out_dir) / "run.log").string(), log.str());
}

// ---------------------------------------------------------------------------
// experiments

json run_reconstruct(const json& config, const std::string& out, std::uint64_t hash) {
    ModelContext m = build_model(config);
    const BiorthogonalSystem sys = diagonalize_nonhermitian(m.hamiltonian, m.basis);
    const long k = pick_single(block(config, "state"), identity_pool(sys.dimension()));
    const BiorthogonalPair pair = sys.pair(k);

    const CovarianceMatrix c = generalized_qcm(pair, m.recon_catalog);
    ReconstructionOptions opts = reconstruction_options(config);
    opts.span_checks.push_back(m.reference_recon);
    Vec number_vec;
    const bool has_number = total_number_vector(m.recon_catalog, number_vec);
    if (has_number) opts.span_checks.push_back(number_vec);
    const ReconstructionReport rr = reconstruct_coefficients(c, opts, &m.reference_recon);

    // The experiment plants the model, so an unrecoverable reference is a
    // failure, not a finding.
    if (rr.span_residuals[0] > 1e-6)
        throw NumericalError(
            "the reference Hamiltonian lies outside the recovered null space (span residual " +
            format_double(rr.span_residuals[0]) + "); the catalog cannot express the model");

    write_spectrum_csv((fs::path(out) / "qcm_spectrum.csv").string(),
                       rr.nulls.spectrum.eigenvalues, hash);
    write_coefficients_csv((fs::path(out) / "coefficients.csv").string(),
                           catalog_labels(m.recon_catalog), rr.coefficients, &m.reference_recon,
                           hash);

    json rep;
    fill_null_summary(rep, rr.nulls);
    rep["comparisonError"] = rr.comparison_error;
    rep["comparedByProjection"] = rr.compared_by_projection;
    rep["anchor"] = rr.anchor;
    rep["eigenpair"] = {{"position", k}, {"energy", complex_json(sys.eigenvalues(k))}};
    json span;
    span["hamiltonian"] = rr.span_residuals[0];
    if (has_number) span["totalNumber"] = rr.span_residuals[1];
    rep["spanResiduals"] = std::move(span);
    return rep;
}

json run_spectrum(const json& config, const std::string& out, std::uint64_t hash) {
    ModelContext m = build_model(config);
    const BiorthogonalSystem sys = diagonalize_nonhermitian(m.hamiltonian, m.basis);
    write_complex_spectrum_csv((fs::path(out) / "spectrum.csv").string(), sys.eigenvalues, hash);
    json rep;
    rep["dimension"] = sys.dimension();
    rep["biorthogonalityError"] = sys.biorthogonality_error();
    rep["reconstructionError"] = sys.reconstruction_error(m.hamiltonian);
    rep["conditionNumber"] = sys.condition_number;
    rep["realEigenvalues"] = static_cast<long>(real_eigenvalue_indices(sys).size());
    return rep;
}

json run_multistate(const json& config, const std::string& out, std::uint64_t hash) {
    ModelContext m = build_model(config);
    const BiorthogonalSystem sys = diagonalize_nonhermitian(m.hamiltonian, m.basis);
    const json state = block(config, "state");
    const std::vector<long> picked = pick_many(state, sys.dimension());
    std::vector<BiorthogonalPair> pairs;
    pairs.reserve(picked.size());
    for (long k : picked) pairs.push_back(sys.pair(k));

    std::vector<double> weights;
    if (state.contains("weights")) weights = state.at("weights").get<std::vector<double>>();
    const bool degenerate = state.value("degenerate", false);
    const CovarianceMatrix c = multi_qcm(pairs, m.recon_catalog, weights, degenerate);

    ReconstructionOptions opts = reconstruction_options(config);
    opts.span_checks.push_back(m.reference_recon);
    Vec number_vec;
    const bool has_number = total_number_vector(m.recon_catalog, number_vec);
    if (has_number) opts.span_checks.push_back(number_vec);
    const ReconstructionReport rr = reconstruct_coefficients(c, opts, &m.reference_recon);
    if (rr.span_residuals[0] > 1e-6)
        throw NumericalError(
            "the reference Hamiltonian lies outside the shared null space (span residual " +
            format_double(rr.span_residuals[0]) + ")");

    write_spectrum_csv((fs::path(out) / "qcm_spectrum.csv").string(),
                       rr.nulls.spectrum.eigenvalues, hash);
    write_coefficients_csv((fs::path(out) / "coefficients.csv").string(),
                           catalog_labels(m.recon_catalog), rr.coefficients, &m.reference_recon,
                           hash);

    json rep;
    fill_null_summary(rep, rr.nulls);
    rep["comparisonError"] = rr.comparison_error;
    rep["comparedByProjection"] = rr.compared_by_projection;
    rep["pairPositions"] = picked;
    rep["degenerate"] = degenerate;
    if (!c.weights.empty()) rep["weights"] = c.weights;
    json span;
    span["hamiltonian"] = rr.span_residuals[0];
    if (has_number) span["totalNumber"] = rr.span_residuals[1];
    rep["spanResiduals"] = std::move(span);
    return rep;
}

json run_symmetries(const json& config, const std::string& out, std::uint64_t hash) {
    ModelContext m = build_model(config);
    const BiorthogonalSystem sys = diagonalize_nonhermitian(m.hamiltonian, m.basis);
    const std::vector<long> picked = pick_many(block(config, "state"), sys.dimension());
    std::vector<BiorthogonalPair> pairs;
    pairs.reserve(picked.size());
    for (long k : picked) pairs.push_back(sys.pair(k));

    const json qcm = block(config, "qcm");
    const NullSpaceResult nulls =
        discover_symmetries(pairs, m.recon_catalog, qcm.value("rel_tol", 1e-10));
    write_spectrum_csv((fs::path(out) / "qcm_spectrum.csv").string(), nulls.spectrum.eigenvalues,
                       hash);

    json rep;
    fill_null_summary(rep, nulls);
    rep["pairPositions"] = picked;
    json vectors = json::array();
    for (int v = 0; v < nulls.null_dimension; ++v) {
        json col = json::array();
        for (long i = 0; i < nulls.null_vectors.rows(); ++i)
            col.push_back(complex_json(nulls.null_vectors(i, v)));
        vectors.push_back(std::move(col));
    }
    rep["nullVectors"] = std::move(vectors);
    json span;
    span["hamiltonian"] = span_residual(nulls, m.reference_recon);
    Vec number_vec;
    if (total_number_vector(m.recon_catalog, number_vec))
        span["totalNumber"] = span_residual(nulls, number_vec);
    rep["spanResiduals"] = std::move(span);
    return rep;
}

json run_perturb(const json& config, const std::string& out, std::uint64_t hash) {
    ModelContext m = build_model(config);
    const BiorthogonalSystem sys = diagonalize_nonhermitian(m.hamiltonian, m.basis);
    const long k = pick_single(block(config, "state"), identity_pool(sys.dimension()));
    const BiorthogonalPair pair = sys.pair(k);

    const json p = config.at("perturbation");
    std::vector<double> epsilons;
    if (p.contains("epsilons")) {
        epsilons = p.at("epsilons").get<std::vector<double>>();
    } else {
        const double start = p.value("eps_start", 0.01);
        const double stop = p.value("eps_stop", 0.1);
        const long count = p.value("count", 10L);
        for (long i = 0; i < count; ++i)
            epsilons.push_back(start + (stop - start) * static_cast<double>(i) /
                                           static_cast<double>(count - 1));
    }
    const std::uint64_t seed = p.value("seed", std::uint64_t{1});
    const PerturbationScan scan =
        perturbation_scan(pair, m.recon_catalog, m.reference_recon, epsilons, seed);

    write_errors_csv((fs::path(out) / "errors.csv").string(), scan.points, hash);
    json rep;
    rep["slope"] = scan.slope;
    rep["intercept"] = scan.intercept;
    rep["rSquared"] = scan.r_squared;
    rep["nullDimension"] = scan.null_dimension;
    rep["eigenpair"] = {{"position", k}, {"energy", complex_json(sys.eigenvalues(k))}};
    rep["seed"] = seed;
    return rep;
}

// All 4^n Pauli strings (identity included), usable as an informationally
// complete probe set on small chains.
OperatorBasis pauli_string_probes(const BasisPtr& basis) {
    const int n = basis->num_sites();
    if (n > 6)
        throw std::invalid_argument("pauli-string probes grow as 4^n; limited to 6 sites");
    std::vector<LocalOperator> ops;
    const char axis[3] = {'x', 'y', 'z'};
    const long total = 1L << (2 * n);
    for (long code = 0; code < total; ++code) {
        std::vector<std::pair<int, char>> factors;
        long rest = code;
        for (int s = 0; s < n; ++s, rest /= 4) {
            const int digit = static_cast<int>(rest % 4);
            if (digit > 0) factors.emplace_back(s, axis[digit - 1]);
        }
        ops.push_back(pauli_string(basis, factors, "probe" + std::to_string(code)));
    }
    return custom_basis(basis, std::move(ops));
}

OperatorBasis choose_probes(const json& hoe, const ModelContext& m) {
    const std::string probes = hoe.value("probes", std::string("ansatz"));
    if (probes == "ansatz") return m.recon_catalog;
    if (m.fermionic)
        throw std::invalid_argument("pauli-string probes apply to spin sectors only");
    return pauli_string_probes(m.basis);
}

json run_hoe_steady(const json& config, const std::string& out, std::uint64_t hash) {
    ModelContext m = build_model(config);
    const BiorthogonalSystem sys = diagonalize_nonhermitian(m.hamiltonian, m.basis);
    const std::vector<long> pool = real_eigenvalue_indices(sys);
    if (pool.empty())
        throw NumericalError(
            "the spectrum contains no real eigenvalue, so no eigenstate is a steady state");
    const long k = pick_single(block(config, "state"), pool);
    const BiorthogonalPair pair = sys.pair(k);

    const json hoe = block(config, "hoe");
    const OperatorBasis probes = choose_probes(hoe, m);
    const HoeSystem sys_h = stack_hoe({assemble_hoe(pair.right, probes, m.recon_catalog)});
    const HoeSolution sol = solve_hoe(sys_h, HoeSolveMode::NullSpace);

    // A single steady state certifies rather than identifies: each Hermitian
    // probe yields one real equation, so the solution family is large. The
    // headline number is therefore the residual of the reference itself;
    // the projection comparison only confirms the reference sits inside the
    // recovered solution family.
    const double residual = steady_state_residual(sys_h, m.reference_recon);
    Vec recovered;
    const long nfree = sol.free_directions.cols();
    if (nfree > 1) {
        const long mo = sys_h.num_ansatz;
        RVec ref_stack(2 * mo);
        ref_stack << m.reference_recon.real(), m.reference_recon.imag();
        const RMat f = sol.free_directions.real();
        const RVec proj = f * (f.transpose() * ref_stack);
        recovered = proj.head(mo).cast<cxd>() + cxd(0, 1) * proj.tail(mo).cast<cxd>();
    } else {
        recovered = sol.omega;
    }
    recovered = anchor_rescale(recovered, m.reference_recon);
    const double err = max_relative_error(recovered, m.reference_recon);

    write_coefficients_csv((fs::path(out) / "coefficients.csv").string(),
                           catalog_labels(m.recon_catalog), recovered, &m.reference_recon, hash);
    json rep;
    rep["steadyResidual"] = residual;
    rep["comparisonError"] = err;
    rep["rank"] = sol.rank;
    rep["freeDirections"] = nfree;
    rep["comparedByProjection"] = nfree > 1;
    rep["eigenpair"] = {{"position", k}, {"energy", complex_json(sys.eigenvalues(k))}};
    return rep;
}

Ket random_ket(const BasisPtr& basis, std::uint64_t seed) {
    std::mt19937_64 g(seed);
    Vec v(basis->dimension());
    for (long i = 0; i < v.size(); ++i) {
        const auto [a, b] = rng::gaussian_pair(g);
        v(i) = cxd(a, b);
    }
    v /= v.norm();
    return make_ket(basis, v);
}

// Full-rank random density matrix (Wishart). A pure state is useless for
// single-snapshot recovery: its probe rows only constrain the generator up
// to every parent Hamiltonian of the instantaneous state vector.
DensityMatrix random_density(const BasisPtr& basis, std::uint64_t seed) {
    std::mt19937_64 g(seed);
    const long d = basis->dimension();
    Mat a(d, d);
    for (long r = 0; r < d; ++r)
        for (long c = 0; c < d; ++c) {
            const auto [x, y] = rng::gaussian_pair(g);
            a(r, c) = cxd(x, y);
        }
    Mat rho = a * a.adjoint();
    rho = 0.5 * (rho + rho.adjoint()).eval();
    rho /= rho.trace().real();
    return make_density(basis, std::move(rho), 1e-12);
}

LocalOperator lowering_op(const BasisPtr& basis, int site) {
    const LocalOperator x = pauli_string(basis, {{site, 'x'}});
    const LocalOperator y = pauli_string(basis, {{site, 'y'}});
    LocalOperator s;
    s.label = "lower" + std::to_string(site);
    s.basis = basis;
    s.matrix = SpMat(0.5 * x.matrix - cxd(0, 0.5) * y.matrix);
    s.support = {site};
    s.hermitian = false;
    s.tag = "lower";
    s.sites = {site};
    return s;
}

struct SampledTrajectory {
    Trajectory traj;
    std::vector<std::size_t> sample_indices;
    std::vector<double> sample_times;
};

SampledTrajectory evolve_and_sample(const ModelContext& m, const json& hoe,
                                    const DensityMatrix& rho0, const GeneratorFn& gen,
                                    const std::vector<LocalOperator>& jumps,
                                    const std::string& tag) {
    const auto t_samples = hoe.value("t_samples", std::vector<double>{0.0, 1.5, 3.0});
    EvolveOptions opts;
    opts.t_start = 0.0;
    opts.t_end = t_samples.back();
    opts.dt = hoe.value("dt", 0.01);
    opts.store_stride = 1;
    opts.error_budget = hoe.value("error_budget", 1e-6);
    opts.generator_tag = tag;

    SampledTrajectory s;
    s.traj = evolve(rho0, m.full_catalog, gen, jumps, opts);
    for (double t : t_samples) {
        std::size_t best = 0;
        double best_gap = std::abs(s.traj.times[0] - t);
        for (std::size_t i = 1; i < s.traj.times.size(); ++i) {
            const double gap = std::abs(s.traj.times[i] - t);
            if (gap < best_gap) {
                best = i;
                best_gap = gap;
            }
        }
        if (best_gap > 0.5 * opts.dt)
            throw std::invalid_argument("hoe.t_samples: " + format_double(t) +
                                        " does not land on the integration grid");
        s.sample_indices.push_back(best);
        s.sample_times.push_back(s.traj.times[best]);
    }
    return s;
}

Mat sample_derivative(const json& hoe, const SampledTrajectory& s, std::size_t which,
                      const OperatorBasis& ansatz, const GeneratorFn& gen,
                      const std::vector<LocalOperator>& jumps) {
    const std::string mode = hoe.value("derivative", std::string("exact"));
    const std::size_t idx = s.sample_indices[which];
    if (mode == "exact") {
        std::vector<Mat> jumpd;
        jumpd.reserve(jumps.size());
        for (const LocalOperator& j : jumps) jumpd.push_back(Mat(j.matrix));
        return master_equation_rhs(realize_dense(ansatz, gen(s.sample_times[which])),
                                   s.traj.states[idx], jumpd);
    }
    if (idx == 0 || idx + 1 >= s.traj.states.size())
        throw std::invalid_argument(
            "hoe.derivative = finite-difference needs interior sample times");
    return central_difference(s.traj, idx);
}

json run_hoe_timedep(const json& config, const std::string& out, std::uint64_t hash) {
    ModelContext m = build_model(config);
    const json hoe = block(config, "hoe");
    const std::string schedule = hoe.value("time_dependence", std::string("constant"));
    const Vec base = m.reference_full;
    const GeneratorFn gen = [base, schedule](double t) -> Vec {
        return schedule == "cosine" ? Vec(base * std::cos(t)) : base;
    };
    const DensityMatrix rho0 =
        random_density(m.basis, hoe.value("state_seed", std::uint64_t{11}));
    const SampledTrajectory s =
        evolve_and_sample(m, hoe, rho0, gen, {}, m.type + ";schedule=" + schedule);
    const OperatorBasis probes = choose_probes(hoe, m);

    json sample_reports = json::array();
    double worst = 0.0;
    Vec last_recovered, last_reference;
    for (std::size_t w = 0; w < s.sample_indices.size(); ++w) {
        const DensityMatrix rho = make_density(m.basis, s.traj.states[s.sample_indices[w]], 1e-9);
        const Mat drho = sample_derivative(hoe, s, w, m.full_catalog, gen, {});
        const HoeSystem sys_h = stack_hoe({assemble_hoe(rho, drho, probes, m.recon_catalog)});
        const HoeSolution sol = solve_hoe(sys_h, HoeSolveMode::LeastSquares);
        const Vec truth = [&] {
            const Vec full = gen(s.sample_times[w]);
            if (m.recon_catalog.size() == m.full_catalog.size()) return full;
            Vec cut(m.recon_catalog.size());
            for (int i = 0; i < m.recon_catalog.size(); ++i)
                cut(i) = full(m.full_catalog.index_of_label(m.recon_catalog[i].label));
            return cut;
        }();
        const double err = max_relative_error(sol.omega, truth);
        worst = std::max(worst, err);
        sample_reports.push_back({{"time", s.sample_times[w]},
                                  {"comparisonError", err},
                                  {"residual", sol.residual},
                                  {"rank", sol.rank}});
        last_recovered = sol.omega;
        last_reference = truth;
    }

    write_coefficients_csv((fs::path(out) / "coefficients.csv").string(),
                           catalog_labels(m.recon_catalog), last_recovered, &last_reference, hash);
    if (hoe.value("save_trajectory", false))
        save_trajectory((fs::path(out) / "trajectory").string(), s.traj, hash);

    json rep;
    rep["samples"] = std::move(sample_reports);
    rep["comparisonError"] = worst;
    rep["maxStepErrorRate"] = s.traj.max_step_error_rate;
    rep["maxHermitizeCorrection"] = s.traj.max_hermitize_correction;
    return rep;
}

json run_hoe_lindblad(const json& config, const std::string& out, std::uint64_t hash) {
    ModelContext m = build_model(config);
    if (m.fermionic)
        throw std::invalid_argument("the built-in jump operators are defined for spin sectors");
    const json hoe = config.at("hoe");
    const auto sites = hoe.at("jump_sites").get<std::vector<int>>();
    const int n = m.basis->num_sites();
    for (std::size_t a = 0; a < sites.size(); ++a)
        for (std::size_t b = a + 1; b < sites.size(); ++b) {
            const int gap = std::abs(sites[a] - sites[b]);
            if (gap != 1 && gap != n - 1)
                throw std::invalid_argument(
                    "hoe.jump_sites must be pairwise adjacent so the jump products stay inside "
                    "the nearest-neighbor ansatz");
        }

    const long nj = static_cast<long>(sites.size());
    Mat mixing(nj, nj);
    {
        const json& jm = hoe.at("jump_mixing");
        for (long r = 0; r < nj; ++r)
            for (long c = 0; c < nj; ++c)
                mixing(r, c) = cxd(jm[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)][0]
                                       .get<double>(),
                                   jm[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)][1]
                                       .get<double>());
    }
    std::vector<LocalOperator> jump_basis;
    for (int site : sites) jump_basis.push_back(lowering_op(m.basis, site));
    std::vector<LocalOperator> jumps;
    for (long j = 0; j < nj; ++j) {
        LocalOperator lj;
        lj.label = "jump" + std::to_string(j);
        lj.basis = m.basis;
        SpMat acc(m.basis->dimension(), m.basis->dimension());
        for (long k = 0; k < nj; ++k) acc = acc + SpMat(mixing(j, k) * jump_basis[k].matrix);
        lj.matrix = std::move(acc);
        lj.tag = "jump";
        jumps.push_back(std::move(lj));
    }

    // The ansatz needs the identity: the recovered generator is the
    // effective one, H - i/2 sum c_(k1,k2) S_k1^dag S_k2, and same-site
    // products contribute identity components.
    OperatorBasis ansatz;
    {
        std::vector<LocalOperator> ops;
        ops.push_back(pauli_string(m.basis, {}, "id"));
        const OperatorBasis site_cat = spin_basis_catalog(m.basis, false, false);
        for (const LocalOperator& op : site_cat.ops) ops.push_back(op);
        ansatz = custom_basis(m.basis, std::move(ops));
    }

    const GeneratorFn gen = [base = m.reference_full](double) { return base; };
    const DensityMatrix rho0 =
        pure_density(random_ket(m.basis, hoe.value("state_seed", std::uint64_t{11})));
    const SampledTrajectory s = evolve_and_sample(m, hoe, rho0, gen, jumps, m.type + ";jumps");
    const OperatorBasis probes =
        hoe.value("probes", std::string("ansatz")) == "ansatz" ? ansatz
                                                               : pauli_string_probes(m.basis);

    std::vector<HoeBlocks> blocks;
    for (std::size_t w = 0; w < s.sample_indices.size(); ++w) {
        const DensityMatrix rho = make_density(m.basis, s.traj.states[s.sample_indices[w]], 1e-9);
        std::vector<Mat> jumpd;
        for (const LocalOperator& j : jumps) jumpd.push_back(Mat(j.matrix));
        const Mat drho = hoe.value("derivative", std::string("exact")) == "exact"
                             ? master_equation_rhs(m.hamiltonian, s.traj.states[s.sample_indices[w]],
                                                   jumpd)
                             : central_difference(s.traj, s.sample_indices[w]);
        blocks.push_back(assemble_hoe(rho, drho, probes, ansatz, jump_basis));
    }
    const HoeSystem sys_h = stack_hoe(blocks);
    const HoeSolution sol = solve_hoe(sys_h, HoeSolveMode::LeastSquares);

    // Reference: expand the effective Hamiltonian in the ansatz (minimum-norm,
    // consistent with the minimum-norm recovery when the ansatz has linear
    // dependencies) and take the planted jump coefficient matrix.
    const Mat c_true = mixing.adjoint() * mixing;
    Mat h_eff = m.hamiltonian;
    for (long k1 = 0; k1 < nj; ++k1)
        for (long k2 = 0; k2 < nj; ++k2)
            h_eff -= cxd(0, 0.5) * c_true(k1, k2) *
                     Mat(SpMat(jump_basis[static_cast<std::size_t>(k1)].matrix.adjoint() *
                               jump_basis[static_cast<std::size_t>(k2)].matrix));
    const long dim2 = m.basis->dimension() * m.basis->dimension();
    Mat a(dim2, ansatz.size());
    for (int i = 0; i < ansatz.size(); ++i)
        a.col(i) = Mat(ansatz[i].matrix).reshaped(dim2, 1);
    Eigen::BDCSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-10);
    const Vec omega_ref = svd.solve(Vec(h_eff.reshaped(dim2, 1)));

    const double omega_err = max_relative_error(sol.omega, omega_ref);
    const Mat c_rec = sol.jump_matrix;
    const double jump_err = (c_rec - c_true).cwiseAbs().maxCoeff();
    const double herm_dev = (c_rec - c_rec.adjoint()).norm();
    const RVec c_eigs = diagonalize_hermitian(0.5 * (c_rec + c_rec.adjoint()), 1.0).eigenvalues;

    write_coefficients_csv((fs::path(out) / "coefficients.csv").string(), catalog_labels(ansatz),
                           sol.omega, &omega_ref, hash);
    if (hoe.value("save_trajectory", false))
        save_trajectory((fs::path(out) / "trajectory").string(), s.traj, hash);

    json rep;
    rep["comparisonError"] = omega_err;
    rep["jumpMatrixError"] = jump_err;
    rep["jumpHermitianDeviation"] = herm_dev;
    rep["jumpMinEigenvalue"] = c_eigs(0);
    rep["rank"] = sol.rank;
    rep["residual"] = sol.residual;
    json jm = json::array();
    for (long r = 0; r < nj; ++r) {
        json row = json::array();
        for (long c2 = 0; c2 < nj; ++c2) row.push_back(complex_json(c_rec(r, c2)));
        jm.push_back(std::move(row));
    }
    rep["jumpMatrix"] = std::move(jm);
    rep["maxStepErrorRate"] = s.traj.max_step_error_rate;
    return rep;
}

json run_roundtrip(const json& config, const std::string&, std::uint64_t) {
    const json rt = config.at("roundtrip");
    const long count = rt.value("count", 20L);
    const auto sizes = rt.value("sizes", std::vector<int>{4, 5, 6});
    const std::string sector = rt.value("sector", std::string("spin"));
    std::mt19937_64 g(rt.value("seed", std::uint64_t{1}));

    json instances = json::array();
    double worst = 0.0;
    for (long inst = 0; inst < count; ++inst) {
        const int n = sizes[static_cast<std::size_t>(inst) % sizes.size()];
        const bool fermionic = sector == "fermion" || (sector == "mixed" && inst % 2 == 1);
        const std::uint64_t coeff_seed = g();
        BasisPtr basis = fermionic ? make_basis(SectorKind::FermionFixedNumber, n, n / 2)
                                   : make_basis(SectorKind::SpinHalfChain, n);
        const OperatorBasis catalog =
            fermionic ? fermion_basis_catalog(basis) : spin_basis_catalog(basis);
        const Vec reference = random_local_coefficients(catalog, coeff_seed);
        const BiorthogonalSystem sys =
            diagonalize_nonhermitian(Mat(realize(catalog, reference)), basis);

        // A single eigenpair contributes at most 2(D-1) to the rank, so small
        // chains with rich catalogs need several pooled pairs before the null
        // space collapses to the one-dimensional span of the input.
        const long num_ops = catalog.size();
        const long dim = sys.dimension();
        const long rank_per_pair = 2 * (dim - 1);
        const long pairs_needed =
            std::max<long>(1, (num_ops - 1 + rank_per_pair - 1) / rank_per_pair);

        std::vector<long> picks;
        while (static_cast<long>(picks.size()) < std::min(pairs_needed, dim)) {
            const long k = draw_index(g, dim);
            if (std::find(picks.begin(), picks.end(), k) == picks.end())
                picks.push_back(k);
        }
        std::vector<BiorthogonalPair> pairs;
        for (const long k : picks) pairs.push_back(sys.pair(k));
        const CovarianceMatrix c = pairs.size() == 1
                                       ? generalized_qcm(pairs[0], catalog)
                                       : multi_qcm(pairs, catalog);
        const ReconstructionReport rr = reconstruct_coefficients(c, {}, &reference);
        worst = std::max(worst, rr.comparison_error);
        instances.push_back({{"sites", n},
                             {"sector", fermionic ? "fermion" : "spin"},
                             {"eigenpairs", picks},
                             {"nullDimension", rr.nulls.null_dimension},
                             {"comparisonError", rr.comparison_error}});
    }
    json rep;
    rep["instances"] = std::move(instances);
    rep["maxComparisonError"] = worst;
    return rep;
}

}  // namespace

json apply_seed_override(json config, std::uint64_t seed) {
    const std::string experiment =
        config.contains("experiment") && config["experiment"].is_string()
            ? config["experiment"].get<std::string>()
            : "";
    if (experiment == "perturb")
        config["perturbation"]["seed"] = seed;
    else if (experiment == "hoe-timedep" || experiment == "hoe-lindblad")
        config["hoe"]["state_seed"] = seed;
    else if (experiment == "roundtrip")
        config["roundtrip"]["seed"] = seed;
    else
        config["state"]["seed"] = seed;
    return config;
}

json run_experiment(const json& config, const std::string& out_dir) {
    {
        const std::vector<std::string> problems = validate_config(config);
        if (!problems.empty()) {
            std::string joined;
            for (const std::string& p : problems) joined += "\n  " + p;
            throw std::invalid_argument("invalid configuration:" + joined);
        }
    }
    fs::create_directories(out_dir);
    const std::uint64_t hash = config_hash(config);
    const std::string experiment = config.at("experiment").get<std::string>();

    const auto t0 = std::chrono::steady_clock::now();
    json rep;
    if (experiment == "reconstruct") rep = run_reconstruct(config, out_dir, hash);
    else if (experiment == "spectrum") rep = run_spectrum(config, out_dir, hash);
    else if (experiment == "multistate") rep = run_multistate(config, out_dir, hash);
    else if (experiment == "symmetries") rep = run_symmetries(config, out_dir, hash);
    else if (experiment == "perturb") rep = run_perturb(config, out_dir, hash);
    else if (experiment == "hoe-steady") rep = run_hoe_steady(config, out_dir, hash);
    else if (experiment == "hoe-timedep") rep = run_hoe_timedep(config, out_dir, hash);
    else if (experiment == "hoe-lindblad") rep = run_hoe_lindblad(config, out_dir, hash);
    else rep = run_roundtrip(config, out_dir, hash);
    const auto t1 = std::chrono::steady_clock::now();

    rep["config"] = hash_hex(hash);
    rep["experiment"] = experiment;
    write_json_file((fs::path(out_dir) / "report.json").string(), rep);
    write_run_log(out_dir, config, hash, std::chrono::duration<double>(t1 - t0).count());
    return rep;
}

}  // namespace gqcm
