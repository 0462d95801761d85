#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "gqcm/hoe.hpp"
#include "gqcm/lattice.hpp"
#include "gqcm/operators.hpp"
#include "gqcm/qcm.hpp"
#include "gqcm/types.hpp"

namespace gqcm {

using json = nlohmann::json;

std::uint64_t fnv1a64(std::string_view bytes);

// Hash of the canonical (sorted-key, whitespace-free) dump; identifies a run
// configuration in every output file it produced.
std::uint64_t config_hash(const json& config);
std::string hash_hex(std::uint64_t h);

// Shortest decimal representation that round-trips the double exactly.
std::string format_double(double v);

json ket_to_json(const Ket& k);
Ket ket_from_json(const json& j);

json basis_to_json(const SectorBasis& basis);
BasisPtr basis_from_json(const json& j);

// Catalogs serialize as rebuild recipes (tag + sites + axes per entry), not
// matrix entries; Custom catalogs have no recipe and are rejected.
json catalog_to_json(const OperatorBasis& catalog);
OperatorBasis catalog_from_json(const json& j);

void write_text_file(const std::string& path, const std::string& content);
void write_json_file(const std::string& path, const json& j);
json read_json_file(const std::string& path);

// CSV writers. Every file starts with "# config=<hash>" followed by a column
// header row; all floats are written with format_double.
void write_spectrum_csv(const std::string& path, const RVec& values, std::uint64_t hash);
void write_complex_spectrum_csv(const std::string& path, const Vec& values, std::uint64_t hash);
void write_coefficients_csv(const std::string& path, const std::vector<std::string>& labels,
                            const Vec& recovered, const Vec* reference, std::uint64_t hash);
void write_errors_csv(const std::string& path, const std::vector<PerturbationPoint>& points,
                      std::uint64_t hash);

// A trajectory persists as a directory: manifest.json (times, file names,
// generator provenance, config hash) plus one JSON snapshot per stored state.
void save_trajectory(const std::string& directory, const Trajectory& traj, std::uint64_t hash);
Trajectory load_trajectory(const std::string& directory);

// Human-readable description of the accepted configuration document:
// every key with its type, allowed values, and which experiments need it.
json config_schema();

// All schema violations as "path: problem" strings; empty means valid.
std::vector<std::string> validate_config(const json& config);

}  // namespace gqcm
