#include "gqcm/serialize.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace gqcm {

namespace fs = std::filesystem;

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= static_cast<std::uint64_t>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

std::uint64_t config_hash(const json& config) { return fnv1a64(config.dump()); }

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw std::runtime_error("failed to format a double");
    return std::string(buf, end);
}

// ---------------------------------------------------------------------------
// basis / ket / catalog round trips

namespace {

std::string sector_kind_name(SectorKind kind) {
    return kind == SectorKind::SpinHalfChain ? "spin" : "fermion";
}

SectorKind sector_kind_from_name(const std::string& name) {
    if (name == "spin") return SectorKind::SpinHalfChain;
    if (name == "fermion") return SectorKind::FermionFixedNumber;
    throw std::invalid_argument("unknown sector kind '" + name + "'");
}

std::string catalog_kind_name(BasisKind kind) {
    switch (kind) {
        case BasisKind::SpinSiteResolved: return "spin-site";
        case BasisKind::SpinTranslationInvariant: return "spin-translation-invariant";
        case BasisKind::FermionSiteResolved: return "fermion-site";
        case BasisKind::Custom: break;
    }
    throw std::invalid_argument("custom operator catalogs carry no rebuild recipe and do not serialize");
}

BasisKind catalog_kind_from_name(const std::string& name) {
    if (name == "spin-site") return BasisKind::SpinSiteResolved;
    if (name == "spin-translation-invariant") return BasisKind::SpinTranslationInvariant;
    if (name == "fermion-site") return BasisKind::FermionSiteResolved;
    throw std::invalid_argument("unknown catalog kind '" + name + "'");
}

json complex_to_json(cxd z) { return json::array({z.real(), z.imag()}); }

cxd complex_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw std::invalid_argument("complex entries must be [re, im] number pairs");
    return {j[0].get<double>(), j[1].get<double>()};
}

json vec_to_json(const Vec& v) {
    json arr = json::array();
    for (long i = 0; i < v.size(); ++i) arr.push_back(complex_to_json(v(i)));
    return arr;
}

Vec vec_from_json(const json& j) {
    if (!j.is_array()) throw std::invalid_argument("expected an array of [re, im] pairs");
    Vec v(static_cast<long>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<long>(i)) = complex_from_json(j[i]);
    return v;
}

json mat_to_json(const Mat& m) {
    json rows = json::array();
    for (long r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (long c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
        rows.push_back(std::move(row));
    }
    return rows;
}

Mat mat_from_json(const json& j) {
    if (!j.is_array() || j.empty()) throw std::invalid_argument("expected a non-empty matrix array");
    const long rows = static_cast<long>(j.size());
    const long cols = static_cast<long>(j[0].size());
    Mat m(rows, cols);
    for (long r = 0; r < rows; ++r) {
        if (static_cast<long>(j[r].size()) != cols)
            throw std::invalid_argument("matrix rows have inconsistent lengths");
        for (long c = 0; c < cols; ++c) m(r, c) = complex_from_json(j[r][c]);
    }
    return m;
}

}  // namespace

json basis_to_json(const SectorBasis& basis) {
    json j;
    j["kind"] = sector_kind_name(basis.kind());
    j["num_sites"] = basis.num_sites();
    if (basis.kind() == SectorKind::FermionFixedNumber) j["num_particles"] = basis.num_particles();
    return j;
}

BasisPtr basis_from_json(const json& j) {
    const SectorKind kind = sector_kind_from_name(j.at("kind").get<std::string>());
    const int sites = j.at("num_sites").get<int>();
    const int particles =
        kind == SectorKind::FermionFixedNumber ? j.at("num_particles").get<int>() : -1;
    return make_basis(kind, sites, particles);
}

json ket_to_json(const Ket& k) {
    if (!k.basis) throw std::invalid_argument("cannot serialize a ket without a basis");
    json j;
    j["basis"] = basis_to_json(*k.basis);
    j["amplitudes"] = vec_to_json(k.amp);
    return j;
}

Ket ket_from_json(const json& j) {
    return make_ket(basis_from_json(j.at("basis")), vec_from_json(j.at("amplitudes")));
}

json catalog_to_json(const OperatorBasis& catalog) {
    if (!catalog.basis) throw std::invalid_argument("cannot serialize a catalog without a basis");
    json j;
    j["kind"] = catalog_kind_name(catalog.kind);
    j["basis"] = basis_to_json(*catalog.basis);
    json ops = json::array();
    for (const LocalOperator& op : catalog.ops) {
        json entry;
        entry["label"] = op.label;
        entry["tag"] = op.tag;
        entry["sites"] = op.sites;
        if (!op.axes.empty()) entry["axes"] = op.axes;
        ops.push_back(std::move(entry));
    }
    j["operators"] = std::move(ops);
    return j;
}

namespace {

LocalOperator operator_from_json(const BasisPtr& basis, const json& jop) {
    const std::string tag = jop.at("tag").get<std::string>();
    const std::string label = jop.value("label", std::string{});
    const auto sites = jop.value("sites", std::vector<int>{});
    const std::string axes = jop.value("axes", std::string{});
    if (tag == "pauli" || tag == "pauli_sum") {
        if (axes.size() != sites.size())
            throw std::invalid_argument("operator '" + label + "': sites and axes lengths differ");
        std::vector<std::pair<int, char>> factors;
        factors.reserve(sites.size());
        for (std::size_t k = 0; k < sites.size(); ++k) factors.emplace_back(sites[k], axes[k]);
        return tag == "pauli" ? pauli_string(basis, factors, label)
                              : pauli_string_sum(basis, factors, label);
    }
    if (tag == "number") return fermion_term(basis, FermionTermKind::Number, sites.at(0), sites.at(0), label);
    if (tag == "hop") return fermion_term(basis, FermionTermKind::Hop, sites.at(0), sites.at(1), label);
    if (tag == "density_density")
        return fermion_term(basis, FermionTermKind::DensityDensity, sites.at(0), sites.at(1), label);
    throw std::invalid_argument("unknown operator tag '" + tag + "'");
}

}  // namespace

OperatorBasis catalog_from_json(const json& j) {
    BasisPtr basis = basis_from_json(j.at("basis"));
    OperatorBasis out;
    out.kind = catalog_kind_from_name(j.at("kind").get<std::string>());
    out.basis = basis;
    for (const json& jop : j.at("operators")) out.ops.push_back(operator_from_json(basis, jop));
    return out;
}

// ---------------------------------------------------------------------------
// files

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

void write_json_file(const std::string& path, const json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

json read_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
    return json::parse(in);
}

namespace {

std::string csv_header(std::uint64_t hash) { return "# config=" + hash_hex(hash) + "\n"; }

}  // namespace

void write_spectrum_csv(const std::string& path, const RVec& values, std::uint64_t hash) {
    std::ostringstream out;
    out << csv_header(hash) << "index,eigenvalue\n";
    for (long i = 0; i < values.size(); ++i)
        out << i << "," << format_double(values(i)) << "\n";
    write_text_file(path, out.str());
}

void write_complex_spectrum_csv(const std::string& path, const Vec& values, std::uint64_t hash) {
    std::ostringstream out;
    out << csv_header(hash) << "index,re,im\n";
    for (long i = 0; i < values.size(); ++i)
        out << i << "," << format_double(values(i).real()) << "," << format_double(values(i).imag())
            << "\n";
    write_text_file(path, out.str());
}

void write_coefficients_csv(const std::string& path, const std::vector<std::string>& labels,
                            const Vec& recovered, const Vec* reference, std::uint64_t hash) {
    if (static_cast<long>(labels.size()) != recovered.size())
        throw std::invalid_argument("coefficient labels and values have different lengths");
    if (reference && reference->size() != recovered.size())
        throw std::invalid_argument("reference and recovered coefficient lengths differ");
    std::ostringstream out;
    out << csv_header(hash);
    if (reference) {
        out << "label,reference_re,reference_im,recovered_re,recovered_im\n";
        for (long i = 0; i < recovered.size(); ++i)
            out << labels[static_cast<std::size_t>(i)] << ","
                << format_double((*reference)(i).real()) << ","
                << format_double((*reference)(i).imag()) << ","
                << format_double(recovered(i).real()) << "," << format_double(recovered(i).imag())
                << "\n";
    } else {
        out << "label,recovered_re,recovered_im\n";
        for (long i = 0; i < recovered.size(); ++i)
            out << labels[static_cast<std::size_t>(i)] << "," << format_double(recovered(i).real())
                << "," << format_double(recovered(i).imag()) << "\n";
    }
    write_text_file(path, out.str());
}

void write_errors_csv(const std::string& path, const std::vector<PerturbationPoint>& points,
                      std::uint64_t hash) {
    std::ostringstream out;
    out << csv_header(hash) << "epsilon,error,ok\n";
    for (const PerturbationPoint& p : points)
        out << format_double(p.epsilon) << "," << format_double(p.error) << ","
            << (p.ok ? 1 : 0) << "\n";
    write_text_file(path, out.str());
}

// ---------------------------------------------------------------------------
// trajectory persistence

namespace {

std::string snapshot_name(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "snapshot_%04zu.json", index);
    return std::string(buf);
}

}  // namespace

void save_trajectory(const std::string& directory, const Trajectory& traj, std::uint64_t hash) {
    if (traj.times.size() != traj.states.size())
        throw std::invalid_argument("trajectory times and states have different lengths");
    fs::create_directories(directory);
    json manifest;
    manifest["version"] = 1;
    manifest["config"] = hash_hex(hash);
    manifest["generator"] = traj.generator_tag;
    manifest["times"] = traj.times;
    manifest["max_step_error_rate"] = traj.max_step_error_rate;
    manifest["max_hermitize_correction"] = traj.max_hermitize_correction;
    json names = json::array();
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        const std::string name = snapshot_name(i);
        names.push_back(name);
        json snap;
        snap["time"] = traj.times[i];
        snap["rho"] = mat_to_json(traj.states[i]);
        write_json_file((fs::path(directory) / name).string(), snap);
    }
    manifest["snapshots"] = std::move(names);
    write_json_file((fs::path(directory) / "manifest.json").string(), manifest);
}

Trajectory load_trajectory(const std::string& directory) {
    const json manifest = read_json_file((fs::path(directory) / "manifest.json").string());
    Trajectory traj;
    traj.generator_tag = manifest.at("generator").get<std::string>();
    traj.times = manifest.at("times").get<std::vector<double>>();
    traj.max_step_error_rate = manifest.value("max_step_error_rate", 0.0);
    traj.max_hermitize_correction = manifest.value("max_hermitize_correction", 0.0);
    const auto names = manifest.at("snapshots").get<std::vector<std::string>>();
    if (names.size() != traj.times.size())
        throw std::runtime_error("trajectory manifest lists " + std::to_string(names.size()) +
                                 " snapshots for " + std::to_string(traj.times.size()) + " times");
    traj.states.reserve(names.size());
    for (std::size_t i = 0; i < names.size(); ++i) {
        const json snap = read_json_file((fs::path(directory) / names[i]).string());
        if (snap.at("time").get<double>() != traj.times[i])
            throw std::runtime_error("snapshot '" + names[i] + "' time disagrees with the manifest");
        traj.states.push_back(mat_from_json(snap.at("rho")));
    }
    return traj;
}

// ---------------------------------------------------------------------------
// configuration schema

json config_schema() {
    json s;
    s["version"] = "integer, must be 1";
    s["experiment"] =
        "string, one of: reconstruct | spectrum | multistate | symmetries | perturb | "
        "hoe-steady | hoe-timedep | hoe-lindblad | roundtrip";
    s["model"] = {
        {"type", "string: lee-yang | fermion | random-spin | random-fermion"},
        {"num_sites", "integer in [2, 16]"},
        {"lambda", "number, lee-yang coupling (default 0.5)"},
        {"hz", "number, lee-yang imaginary field (default 0.5)"},
        {"J", "number, fermion hopping scale (default 1)"},
        {"g", "number, fermion hopping asymmetry (default 0.15)"},
        {"U", "number, fermion interaction (default 2)"},
        {"num_particles", "integer in [0, num_sites], fermion sector (default num_sites/2)"},
        {"potential", "string: zero | staggered | biased | random (default zero)"},
        {"h", "number, potential amplitude (default 0.5)"},
        {"potential_seed", "non-negative integer, random potential seed (default 1)"},
        {"coefficient_seed", "non-negative integer, random-* coefficient seed (default 1)"},
        {"real_coefficients", "boolean, draw real coefficients for random-* (default false)"},
    };
    s["catalog"] = {
        {"kind", "string: site | translation-invariant (default site; spin models only)"},
        {"open_boundary", "boolean (default false)"},
        {"exclude_tags",
         "array of operator tag strings to drop from the catalog (pauli | pauli_sum | number | "
         "hop | density_density)"},
    };
    s["state"] = {
        {"selector", "string: index | random (default random)"},
        {"index", "integer >= 0, eigenpair picked by sorted position (selector = index)"},
        {"seed", "non-negative integer, eigenpair draw seed (selector = random, default 1)"},
        {"count", "integer >= 1, number of eigenpairs (multistate / symmetries, default 4)"},
        {"indices", "array of integers >= 0, explicit eigenpair positions (overrides count)"},
        {"weights", "array of positive numbers, ensemble weights (default uniform)"},
        {"degenerate", "boolean, treat the ensemble as one degenerate level (default false)"},
    };
    s["qcm"] = {
        {"rel_tol", "positive number, null-space tolerance relative to the largest eigenvalue "
                    "(default 1e-10)"},
        {"anchor", "integer >= 0, fixed coefficient index used to scale the recovered vector "
                   "(default: largest reference entry)"},
    };
    s["perturbation"] = {
        {"epsilons", "array of numbers in [0, 0.5), explicit perturbation strengths"},
        {"eps_start", "number in [0, 0.5), first strength (with eps_stop/count, default 0.01)"},
        {"eps_stop", "number in [0, 0.5), last strength (default 0.1)"},
        {"count", "integer >= 2, number of strengths (default 10)"},
        {"seed", "non-negative integer, perturbation direction seed (default 1)"},
    };
    s["hoe"] = {
        {"probes", "string: ansatz | pauli-strings (default ansatz)"},
        {"derivative", "string: exact | finite-difference (default exact)"},
        {"fd_dt", "positive number, finite-difference half step (default 1e-3)"},
        {"t_samples", "array of increasing times where probe rows are collected "
                      "(default [0, 1.5, 3])"},
        {"time_dependence", "string: constant | cosine, coefficient schedule (default constant)"},
        {"state_seed", "non-negative integer, initial state seed; hoe-timedep draws a full-rank "
                       "mixed state, hoe-lindblad a pure one (default 11)"},
        {"dt", "positive number, integrator step (default 0.01)"},
        {"error_budget", "positive number, local error ceiling per unit time (default 1e-6)"},
        {"jump_sites", "array of site indices carrying lowering jump operators (hoe-lindblad)"},
        {"jump_mixing", "square complex matrix [[..,[re,im],..],..] mixing the site lowering "
                        "operators into jump operators, size matching jump_sites (hoe-lindblad)"},
        {"save_trajectory", "boolean, persist the evolved states (default false)"},
    };
    s["roundtrip"] = {
        {"count", "integer >= 1, number of random instances (default 20)"},
        {"sizes", "array of integers in [2, 16], chain lengths to cycle through (default [4,5,6])"},
        {"seed", "non-negative integer, instance seed (default 1)"},
        {"sector", "string: spin | fermion | mixed (default spin)"},
    };
    s["output"] = {
        {"directory", "string, output directory (the --out flag overrides it)"},
    };
    return s;
}

// ---------------------------------------------------------------------------
// configuration validation

namespace {

struct Checker {
    std::vector<std::string> problems;

    void bad(const std::string& path, const std::string& msg) { problems.push_back(path + ": " + msg); }

    // Flags keys outside the allowed set so typos fail loudly instead of
    // silently falling back to defaults.
    void known_keys(const json& block, const std::string& path, const std::set<std::string>& allowed) {
        for (const auto& [key, value] : block.items()) {
            (void)value;
            if (!allowed.count(key)) bad(path + "." + key, "unknown key");
        }
    }

    bool is_uint(const json& v) {
        return v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0);
    }

    void check_number(const json& block, const std::string& path, const std::string& key) {
        if (block.contains(key) && !block[key].is_number())
            bad(path + "." + key, "must be a number");
    }

    void check_positive(const json& block, const std::string& path, const std::string& key) {
        if (!block.contains(key)) return;
        if (!block[key].is_number() || block[key].get<double>() <= 0.0)
            bad(path + "." + key, "must be a positive number");
    }

    void check_uint(const json& block, const std::string& path, const std::string& key) {
        if (block.contains(key) && !is_uint(block[key]))
            bad(path + "." + key, "must be a non-negative integer");
    }

    void check_bool(const json& block, const std::string& path, const std::string& key) {
        if (block.contains(key) && !block[key].is_boolean())
            bad(path + "." + key, "must be a boolean");
    }

    void check_int_range(const json& block, const std::string& path, const std::string& key,
                         long lo, long hi) {
        if (!block.contains(key)) return;
        if (!block[key].is_number_integer() || block[key].get<long>() < lo ||
            block[key].get<long>() > hi)
            bad(path + "." + key,
                "must be an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }

    void check_choice(const json& block, const std::string& path, const std::string& key,
                      const std::set<std::string>& choices) {
        if (!block.contains(key)) return;
        if (!block[key].is_string() || !choices.count(block[key].get<std::string>())) {
            std::string joined;
            for (const std::string& c : choices) joined += (joined.empty() ? "" : " | ") + c;
            bad(path + "." + key, "must be one of: " + joined);
        }
    }
};

void validate_model(Checker& c, const json& model) {
    c.known_keys(model, "model",
                 {"type", "num_sites", "lambda", "hz", "J", "g", "U", "num_particles", "potential",
                  "h", "potential_seed", "coefficient_seed", "real_coefficients"});
    if (!model.contains("type"))
        c.bad("model.type", "required");
    else
        c.check_choice(model, "model", "type", {"lee-yang", "fermion", "random-spin", "random-fermion"});
    if (!model.contains("num_sites"))
        c.bad("model.num_sites", "required");
    else
        c.check_int_range(model, "model", "num_sites", 2, 16);
    c.check_number(model, "model", "lambda");
    c.check_number(model, "model", "hz");
    c.check_number(model, "model", "J");
    c.check_number(model, "model", "g");
    c.check_number(model, "model", "U");
    c.check_number(model, "model", "h");
    c.check_int_range(model, "model", "num_particles", 0, 16);
    c.check_choice(model, "model", "potential", {"zero", "staggered", "biased", "random"});
    c.check_uint(model, "model", "potential_seed");
    c.check_uint(model, "model", "coefficient_seed");
    c.check_bool(model, "model", "real_coefficients");
}

void validate_catalog(Checker& c, const json& catalog) {
    c.known_keys(catalog, "catalog", {"kind", "open_boundary", "exclude_tags"});
    c.check_choice(catalog, "catalog", "kind", {"site", "translation-invariant"});
    c.check_bool(catalog, "catalog", "open_boundary");
    if (catalog.contains("exclude_tags")) {
        const json& tags = catalog["exclude_tags"];
        if (!tags.is_array()) {
            c.bad("catalog.exclude_tags", "must be an array of tag strings");
        } else {
            const std::set<std::string> known{"pauli", "pauli_sum", "number", "hop",
                                              "density_density"};
            for (std::size_t i = 0; i < tags.size(); ++i)
                if (!tags[i].is_string() || !known.count(tags[i].get<std::string>()))
                    c.bad("catalog.exclude_tags[" + std::to_string(i) + "]",
                          "must be one of: pauli | pauli_sum | number | hop | density_density");
        }
    }
}

void validate_state(Checker& c, const json& state) {
    c.known_keys(state, "state",
                 {"selector", "index", "seed", "count", "indices", "weights", "degenerate"});
    c.check_choice(state, "state", "selector", {"index", "random"});
    if (state.contains("index") &&
        (!state["index"].is_number_integer() || state["index"].get<long>() < 0))
        c.bad("state.index", "must be an integer >= 0");
    c.check_uint(state, "state", "seed");
    if (state.contains("count") &&
        (!state["count"].is_number_integer() || state["count"].get<long>() < 1))
        c.bad("state.count", "must be an integer >= 1");
    if (state.contains("indices")) {
        const json& idx = state["indices"];
        if (!idx.is_array() || idx.empty()) {
            c.bad("state.indices", "must be a non-empty array of integers >= 0");
        } else {
            for (std::size_t i = 0; i < idx.size(); ++i)
                if (!idx[i].is_number_integer() || idx[i].get<long>() < 0)
                    c.bad("state.indices[" + std::to_string(i) + "]", "must be an integer >= 0");
        }
    }
    if (state.contains("weights")) {
        const json& w = state["weights"];
        if (!w.is_array() || w.empty()) {
            c.bad("state.weights", "must be a non-empty array of positive numbers");
        } else {
            for (std::size_t i = 0; i < w.size(); ++i)
                if (!w[i].is_number() || w[i].get<double>() <= 0.0)
                    c.bad("state.weights[" + std::to_string(i) + "]", "must be a positive number");
        }
    }
    c.check_bool(state, "state", "degenerate");
}

void validate_qcm(Checker& c, const json& qcm) {
    c.known_keys(qcm, "qcm", {"rel_tol", "anchor"});
    c.check_positive(qcm, "qcm", "rel_tol");
    if (qcm.contains("anchor") &&
        (!qcm["anchor"].is_number_integer() || qcm["anchor"].get<long>() < 0))
        c.bad("qcm.anchor", "must be an integer >= 0");
}

void validate_perturbation(Checker& c, const json& p) {
    c.known_keys(p, "perturbation", {"epsilons", "eps_start", "eps_stop", "count", "seed"});
    auto in_range = [](const json& v) {
        return v.is_number() && v.get<double>() >= 0.0 && v.get<double>() < 0.5;
    };
    if (p.contains("epsilons")) {
        const json& eps = p["epsilons"];
        if (!eps.is_array() || eps.empty()) {
            c.bad("perturbation.epsilons", "must be a non-empty array of numbers in [0, 0.5)");
        } else {
            for (std::size_t i = 0; i < eps.size(); ++i)
                if (!in_range(eps[i]))
                    c.bad("perturbation.epsilons[" + std::to_string(i) + "]",
                          "must be a number in [0, 0.5)");
        }
    }
    if (p.contains("eps_start") && !in_range(p["eps_start"]))
        c.bad("perturbation.eps_start", "must be a number in [0, 0.5)");
    if (p.contains("eps_stop") && !in_range(p["eps_stop"]))
        c.bad("perturbation.eps_stop", "must be a number in [0, 0.5)");
    if (p.contains("count") && (!p["count"].is_number_integer() || p["count"].get<long>() < 2))
        c.bad("perturbation.count", "must be an integer >= 2");
    c.check_uint(p, "perturbation", "seed");
}

void validate_hoe(Checker& c, const json& hoe, const std::string& experiment) {
    c.known_keys(hoe, "hoe",
                 {"probes", "derivative", "fd_dt", "t_samples", "time_dependence", "state_seed",
                  "dt", "error_budget", "jump_sites", "jump_mixing", "save_trajectory"});
    c.check_choice(hoe, "hoe", "probes", {"ansatz", "pauli-strings"});
    c.check_choice(hoe, "hoe", "derivative", {"exact", "finite-difference"});
    c.check_positive(hoe, "hoe", "fd_dt");
    c.check_choice(hoe, "hoe", "time_dependence", {"constant", "cosine"});
    c.check_uint(hoe, "hoe", "state_seed");
    c.check_positive(hoe, "hoe", "dt");
    c.check_positive(hoe, "hoe", "error_budget");
    c.check_bool(hoe, "hoe", "save_trajectory");
    if (hoe.contains("t_samples")) {
        const json& ts = hoe["t_samples"];
        if (!ts.is_array() || ts.empty()) {
            c.bad("hoe.t_samples", "must be a non-empty array of increasing times");
        } else {
            double prev = -1.0;
            for (std::size_t i = 0; i < ts.size(); ++i) {
                if (!ts[i].is_number() || ts[i].get<double>() < 0.0 ||
                    (i > 0 && ts[i].get<double>() <= prev)) {
                    c.bad("hoe.t_samples[" + std::to_string(i) + "]",
                          "times must be non-negative and strictly increasing");
                    break;
                }
                prev = ts[i].get<double>();
            }
        }
    }
    std::size_t num_jumps = 0;
    if (hoe.contains("jump_sites")) {
        const json& js = hoe["jump_sites"];
        if (!js.is_array() || js.empty()) {
            c.bad("hoe.jump_sites", "must be a non-empty array of site indices");
        } else {
            num_jumps = js.size();
            for (std::size_t i = 0; i < js.size(); ++i)
                if (!js[i].is_number_integer() || js[i].get<long>() < 0)
                    c.bad("hoe.jump_sites[" + std::to_string(i) + "]", "must be an integer >= 0");
        }
    } else if (experiment == "hoe-lindblad") {
        c.bad("hoe.jump_sites", "required for hoe-lindblad");
    }
    if (hoe.contains("jump_mixing")) {
        const json& g = hoe["jump_mixing"];
        bool shape_ok = g.is_array() && !g.empty();
        if (shape_ok)
            for (const json& row : g) shape_ok = shape_ok && row.is_array() && row.size() == g.size();
        if (!shape_ok) {
            c.bad("hoe.jump_mixing", "must be a square matrix of [re, im] pairs");
        } else if (num_jumps != 0 && g.size() != num_jumps) {
            c.bad("hoe.jump_mixing", "size must match jump_sites");
        } else {
            for (std::size_t r = 0; r < g.size() && shape_ok; ++r)
                for (std::size_t k = 0; k < g.size(); ++k)
                    if (!g[r][k].is_array() || g[r][k].size() != 2 || !g[r][k][0].is_number() ||
                        !g[r][k][1].is_number()) {
                        c.bad("hoe.jump_mixing[" + std::to_string(r) + "][" + std::to_string(k) + "]",
                              "must be an [re, im] number pair");
                        shape_ok = false;
                        break;
                    }
        }
    } else if (experiment == "hoe-lindblad") {
        c.bad("hoe.jump_mixing", "required for hoe-lindblad");
    }
}

void validate_roundtrip(Checker& c, const json& rt) {
    c.known_keys(rt, "roundtrip", {"count", "sizes", "seed", "sector"});
    if (rt.contains("count") && (!rt["count"].is_number_integer() || rt["count"].get<long>() < 1))
        c.bad("roundtrip.count", "must be an integer >= 1");
    if (rt.contains("sizes")) {
        const json& sz = rt["sizes"];
        if (!sz.is_array() || sz.empty()) {
            c.bad("roundtrip.sizes", "must be a non-empty array of integers in [2, 16]");
        } else {
            for (std::size_t i = 0; i < sz.size(); ++i)
                if (!sz[i].is_number_integer() || sz[i].get<long>() < 2 || sz[i].get<long>() > 16)
                    c.bad("roundtrip.sizes[" + std::to_string(i) + "]",
                          "must be an integer in [2, 16]");
        }
    }
    c.check_uint(rt, "roundtrip", "seed");
    c.check_choice(rt, "roundtrip", "sector", {"spin", "fermion", "mixed"});
}

}  // namespace

std::vector<std::string> validate_config(const json& config) {
    Checker c;
    if (!config.is_object()) {
        c.bad("$", "configuration must be a JSON object");
        return c.problems;
    }
    c.known_keys(config, "$",
                 {"version", "experiment", "model", "catalog", "state", "qcm", "perturbation",
                  "hoe", "roundtrip", "output"});

    if (!config.contains("version"))
        c.bad("version", "required");
    else if (!config["version"].is_number_integer() || config["version"].get<long>() != 1)
        c.bad("version", "must be the integer 1");

    static const std::set<std::string> experiments{
        "reconstruct", "spectrum",  "multistate",  "symmetries", "perturb",
        "hoe-steady",  "hoe-timedep", "hoe-lindblad", "roundtrip"};
    std::string experiment;
    if (!config.contains("experiment")) {
        c.bad("experiment", "required");
    } else if (!config["experiment"].is_string() ||
               !experiments.count(config["experiment"].get<std::string>())) {
        std::string joined;
        for (const std::string& e : experiments) joined += (joined.empty() ? "" : " | ") + e;
        c.bad("experiment", "must be one of: " + joined);
    } else {
        experiment = config["experiment"].get<std::string>();
    }

    auto block = [&](const char* key) -> const json* {
        if (!config.contains(key)) return nullptr;
        if (!config[key].is_object()) {
            c.bad(key, "must be an object");
            return nullptr;
        }
        return &config[key];
    };

    const json* model = block("model");
    const json* catalog = block("catalog");
    const json* state = block("state");
    const json* qcm = block("qcm");
    const json* perturbation = block("perturbation");
    const json* hoe = block("hoe");
    const json* roundtrip = block("roundtrip");
    const json* output = block("output");

    if (model) validate_model(c, *model);
    if (catalog) validate_catalog(c, *catalog);
    if (state) validate_state(c, *state);
    if (qcm) validate_qcm(c, *qcm);
    if (perturbation) validate_perturbation(c, *perturbation);
    if (hoe) validate_hoe(c, *hoe, experiment);
    if (roundtrip) validate_roundtrip(c, *roundtrip);
    if (output) {
        c.known_keys(*output, "output", {"directory"});
        if (output->contains("directory") && !(*output)["directory"].is_string())
            c.bad("output.directory", "must be a string");
    }

    if (!experiment.empty()) {
        const bool needs_model = experiment != "roundtrip";
        if (needs_model && !model) c.bad("model", "required for experiment '" + experiment + "'");
        if (experiment == "perturb" && !perturbation)
            c.bad("perturbation", "required for experiment 'perturb'");
        if (experiment == "hoe-lindblad" && !hoe)
            c.bad("hoe", "required for experiment 'hoe-lindblad'");
        if (experiment == "roundtrip" && !roundtrip)
            c.bad("roundtrip", "required for experiment 'roundtrip'");
    }
    return c.problems;
}

}  // namespace gqcm
