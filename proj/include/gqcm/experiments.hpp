#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "gqcm/serialize.hpp"

namespace gqcm {

// Rewrites the experiment's primary seed (state.seed, perturbation.seed,
// hoe.state_seed or roundtrip.seed, depending on the experiment) so that the
// config hash reflects what actually ran.
json apply_seed_override(json config, std::uint64_t seed);

// Runs the configured experiment and writes its artifacts (report.json plus
// experiment-specific CSV/trajectory files and a run.log with the wall time)
// into out_dir. Returns the report. The configuration must already have
// passed validate_config; contradictions that only surface at runtime (e.g.
// a translation-invariant catalog on a fermion model) throw
// std::invalid_argument, numerical failures throw NumericalError.
json run_experiment(const json& config, const std::string& out_dir);

}  // namespace gqcm
