#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "doctest.h"
#include "gqcm/hoe.hpp"
#include "gqcm/models.hpp"
#include "gqcm/rng.hpp"
#include "gqcm/serialize.hpp"

using namespace gqcm;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("gqcm_test_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("fnv1a64 matches published reference digests") {
    // reference values for the 64-bit FNV-1a test vectors
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("config_hash ignores key order but sees every value") {
    json a = {{"alpha", 1}, {"beta", {{"x", 2.5}, {"y", "s"}}}};
    json b = {{"beta", {{"y", "s"}, {"x", 2.5}}}, {"alpha", 1}};
    CHECK(config_hash(a) == config_hash(b));
    json c = a;
    c["beta"]["x"] = 2.5000001;
    CHECK(config_hash(a) != config_hash(c));
    CHECK(hash_hex(0x00ffULL) == "00000000000000ff");
    CHECK(hash_hex(config_hash(a)).size() == 16);
}

TEST_CASE("format_double round-trips exactly") {
    for (double v : {0.0, 1.0, -1.5, 0.1, 1e-300, -2.2250738585072014e-308,
                     3.141592653589793, 1e17, 123456789.123456789}) {
        CHECK(std::stod(format_double(v)) == v);
    }
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(-3.0) == "-3");
}

TEST_CASE("basis and ket survive a JSON round trip") {
    BasisPtr b = make_basis(SectorKind::FermionFixedNumber, 5, 2);
    BasisPtr b2 = basis_from_json(basis_to_json(*b));
    CHECK(b->same_sector(*b2));
    CHECK(b2->dimension() == b->dimension());

    std::mt19937_64 g(5);
    Vec amp(b->dimension());
    for (long i = 0; i < amp.size(); ++i) {
        const auto [x, y] = rng::gaussian_pair(g);
        amp[i] = cxd(x, y);
    }
    Ket k = make_ket(b, amp);
    Ket k2 = ket_from_json(ket_to_json(k));
    CHECK(k2.basis->same_sector(*b));
    CHECK((k2.amp - amp).norm() == 0.0);  // bit-exact through shortest round-trip text
}

TEST_CASE("catalogs rebuild from their recipes with identical matrices") {
    BasisPtr spin = make_basis(SectorKind::SpinHalfChain, 4);
    BasisPtr ferm = make_basis(SectorKind::FermionFixedNumber, 4, 2);
    for (const OperatorBasis& cat :
         {spin_basis_catalog(spin), spin_basis_catalog(spin, true),
          spin_basis_catalog(spin, false, true), fermion_basis_catalog(ferm),
          fermion_basis_catalog(ferm, true)}) {
        OperatorBasis back = catalog_from_json(catalog_to_json(cat));
        REQUIRE(back.size() == cat.size());
        CHECK(back.kind == cat.kind);
        for (int i = 0; i < cat.size(); ++i) {
            CHECK(back[i].label == cat[i].label);
            CHECK((Mat(back[i].matrix) - Mat(cat[i].matrix)).norm() == 0.0);
        }
    }

    // hand-assembled custom catalogs have no rebuild recipe and refuse to
    // serialize, loudly
    OperatorBasis custom = custom_basis(
        spin, {pauli_string(spin, {{0, 'x'}}, "a"), pauli_string(spin, {{1, 'y'}}, "b")});
    CHECK_THROWS_AS(catalog_to_json(custom), std::invalid_argument);
}

TEST_CASE("JSON files write and read back") {
    TempDir tmp;
    json doc = {{"x", 1}, {"y", {1, 2, 3}}};
    write_json_file(tmp.file("doc.json"), doc);
    CHECK(read_json_file(tmp.file("doc.json")) == doc);
    const std::string raw = slurp(tmp.file("doc.json"));
    CHECK(raw.back() == '\n');
    CHECK_THROWS(read_json_file(tmp.file("missing.json")));
}

TEST_CASE("CSV writers stamp the config hash on the first line") {
    TempDir tmp;
    RVec vals(3);
    vals << 0.5, 1.25, 2.0;
    write_spectrum_csv(tmp.file("s.csv"), vals, 0xabcULL);
    std::string s = slurp(tmp.file("s.csv"));
    CHECK(s.rfind("# config=0000000000000abc\n", 0) == 0);
    CHECK(s.find("index,eigenvalue") != std::string::npos);
    CHECK(s.find("1,1.25") != std::string::npos);

    Vec cvals(2);
    cvals << cxd(1, -2), cxd(0.5, 0);
    write_complex_spectrum_csv(tmp.file("c.csv"), cvals, 1);
    std::string c = slurp(tmp.file("c.csv"));
    CHECK(c.find("index,re,im") != std::string::npos);
    CHECK(c.find("0,1,-2") != std::string::npos);

    Vec rec(2), ref(2);
    rec << cxd(1, 0), cxd(0, 1);
    ref << cxd(1, 0), cxd(0, 1.5);
    write_coefficients_csv(tmp.file("w.csv"), {"a", "b"}, rec, &ref, 2);
    std::string w = slurp(tmp.file("w.csv"));
    CHECK(w.find("label,reference_re,reference_im,recovered_re,recovered_im") !=
          std::string::npos);
    CHECK(w.find("b,0,1.5,0,1") != std::string::npos);
    write_coefficients_csv(tmp.file("w2.csv"), {"a", "b"}, rec, nullptr, 2);
    CHECK(slurp(tmp.file("w2.csv")).find("label,recovered_re,recovered_im") !=
          std::string::npos);

    std::vector<PerturbationPoint> pts = {{0.01, 0.007, true}, {0.02, 0.014, true}};
    write_errors_csv(tmp.file("e.csv"), pts, 3);
    std::string e = slurp(tmp.file("e.csv"));
    CHECK(e.find("epsilon,error,ok") != std::string::npos);
    CHECK(e.find("0.01,0.007,1") != std::string::npos);
}

TEST_CASE("trajectories persist with exact times and states") {
    BasisPtr b = make_basis(SectorKind::SpinHalfChain, 2);
    OperatorBasis cat = spin_basis_catalog(b);
    Vec w = Vec::Zero(cat.size());
    w[2] = 0.35;  // sz at site 0
    EvolveOptions opts;
    opts.t_end = 0.2;
    opts.dt = 0.05;
    opts.generator_tag = "test-tag";
    Vec amp(4);
    amp << 1, cxd(0, 0.5), -0.25, 0.1;
    Trajectory traj =
        evolve(pure_density(make_ket(b, amp)), cat, [&](double) { return w; }, {}, opts);

    TempDir tmp;
    save_trajectory(tmp.file("traj"), traj, 0x77ULL);
    Trajectory back = load_trajectory(tmp.file("traj"));
    REQUIRE(back.times.size() == traj.times.size());
    CHECK(back.generator_tag == "test-tag");
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        CHECK(back.times[i] == traj.times[i]);
        CHECK((back.states[i] - traj.states[i]).norm() == 0.0);
    }
    json manifest = read_json_file(tmp.file("traj") + "/manifest.json");
    CHECK(manifest["config"] == "0000000000000077");

    // a missing snapshot is noticed on load
    fs::remove(fs::path(tmp.file("traj")) / "snapshot_0001.json");
    CHECK_THROWS(load_trajectory(tmp.file("traj")));
}

TEST_CASE("validate_config reports every offending path at once") {
    json cfg = {{"version", 3},
                {"experiment", "reconstruct"},
                {"model",
                 {{"type", "lee-yang"},
                  {"num_sites", 99},
                  {"lambda", "half"},
                  {"mystery", true}}},
                {"state", {{"selector", "psychic"}}},
                {"qcm", {{"rel_tol", 0.0}}}};
    std::vector<std::string> problems = validate_config(cfg);
    auto has = [&](const std::string& needle) {
        for (const std::string& p : problems)
            if (p.find(needle) != std::string::npos) return true;
        return false;
    };
    CHECK(problems.size() >= 5);
    CHECK(has("version"));
    CHECK(has("model.num_sites"));
    CHECK(has("model.lambda"));
    CHECK(has("model.mystery"));
    CHECK(has("state.selector"));
    CHECK(has("qcm.rel_tol"));
}

TEST_CASE("validate_config accepts the documented experiments") {
    json ok = {{"version", 1},
               {"experiment", "reconstruct"},
               {"model", {{"type", "lee-yang"}, {"num_sites", 6}, {"lambda", 0.5}, {"hz", 0.7}}},
               {"state", {{"selector", "random"}, {"seed", 1}}},
               {"output", {{"directory", "out"}}}};
    CHECK(validate_config(ok).empty());

    // experiment-specific requirements
    json perturb = ok;
    perturb["experiment"] = "perturb";
    CHECK_FALSE(validate_config(perturb).empty());  // missing perturbation block
    perturb["perturbation"] = {{"seed", 3}};
    CHECK(validate_config(perturb).empty());

    json lind = ok;
    lind["experiment"] = "hoe-lindblad";
    CHECK_FALSE(validate_config(lind).empty());  // needs jump_sites + jump_mixing
    lind["hoe"] = {{"jump_sites", {0, 1}},
                   {"jump_mixing", {{{0.6, 0.0}, {0.2, 0.1}}, {{0.0, -0.3}, {0.8, 0.0}}}}};
    CHECK(validate_config(lind).empty());

    json rt = {{"version", 1}, {"experiment", "roundtrip"}, {"roundtrip", {{"seed", 1}}}};
    CHECK(validate_config(rt).empty());

    json unknown_top = ok;
    unknown_top["extra"] = 1;
    CHECK_FALSE(validate_config(unknown_top).empty());
}

TEST_CASE("config_schema documents every config block") {
    json schema = config_schema();
    for (const char* key :
         {"version", "experiment", "model", "catalog", "state", "qcm", "perturbation",
          "hoe", "roundtrip", "output"}) {
        CAPTURE(key);
        CHECK(schema.contains(key));
    }
}
