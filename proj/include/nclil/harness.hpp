// Copyright 2026 The nclil Authors

// Licensed under the Apache License, Version 2.0 (the License);
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

// http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an AS IS BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

// Command-line front end: configuration resolution, seeding, the verifier
// suites, and report emission.
//
// A run is described by one JSON document. Defaults for the command are
// overlaid by --config, then by explicit flags; keys unknown to the command
// are schema errors. The fully resolved document is written as
// resolved-config.json and reproduces the run on its own.
//
// Exit codes: 0 all checks hold / experiment completed, 1 configuration
// error, 2 an inequality was violated (reproducer.json is written first).

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "nclil/io.hpp"
#include "nclil/martingale.hpp"

namespace nclil::harness {

using io::Json;

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitViolation = 2 };

/// The nine subcommands, in help order.
const std::vector<std::string>& commands();
bool is_verifier(std::string_view command);

/// Complete default document for `command`; ConfigError if unknown.
Json default_config(std::string_view command);

/// Overlays `patch` onto `base`. Objects merge key by key, everything else is
/// replaced. Keys absent from `base` and type changes (other than between
/// number kinds, or null <-> number) raise ConfigError naming the JSON path.
Json merge_config(Json base, const Json& patch, const std::string& where = "");

/// Range and guard checks for a resolved document (dense-dimension cap,
/// positive counts, parameter gates). Throws ConfigError.
void validate_config(const Json& cfg);

/// Key of replica r: derive_key(seed, r, hash_label("replica")).
std::uint64_t replica_seed(std::uint64_t seed, std::uint64_t replica);
/// Per-trial stream key inside a replica.
std::uint64_t trial_seed(std::uint64_t replica_key, std::string_view suite, std::size_t trial);

struct TrialRow {
  std::size_t replica = 0;
  std::size_t trial = 0;
  std::string model;
  std::size_t n = 0;
  std::string params;  // "k=v;k=v"
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // > 0 when the check holds with room
  std::string verdict;  // holds | inconclusive | violated
  bool holds() const { return verdict == "holds"; }
};

struct SuiteResult {
  std::string command;
  std::vector<TrialRow> rows;
  std::size_t trials = 0;
  std::size_t violations = 0;
  std::size_t inconclusive = 0;
  double min_margin = std::numeric_limits<double>::infinity();
  Json extra = Json::object();  // suite-specific aggregates
  /// First violated row, when any.
  const TrialRow* first_violation() const;
};

/// Runs a verifier suite for one replica. `cfg` must be resolved; trials run
/// on `threads` workers and are folded in trial order.
SuiteResult run_suite(const Json& cfg, std::size_t replica, int threads);

/// Appends `more` to `into` and recomputes the aggregates.
void fold(SuiteResult& into, SuiteResult more);

Json summary_json(const SuiteResult& r);
void write_trial_csv(const SuiteResult& r, const std::filesystem::path& path);
/// Columns n, s2, u, dnorm, alpha.
void write_path_summary_csv(const PathSummary& s, const std::filesystem::path& path);

/// Entry point behind the `nclil` executable.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nclil::harness
