#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gcomb/embedding.hpp"
#include "gcomb/graph.hpp"
#include "gcomb/learning.hpp"
#include "gcomb/problems.hpp"

namespace gcomb {

inline constexpr const char* kVersion = "0.3.0";

struct SizeRange {
  int lo = 15;
  int hi = 20;

  static SizeRange parse(std::string_view text);  // "15-20" or "40"
  std::string str() const;
  bool operator==(const SizeRange&) const = default;
};
std::vector<SizeRange> parse_size_list(std::string_view text);  // "15-20,40-50"

/// Instance family. `family` is er | ba for MVC and MAXCUT, random | clustered for
/// TSP, and scp for SCP.
struct FamilySpec {
  std::string family = "er";
  double edge_prob = 0.15;
  int ba_m = 4;
  int knn_k = 10;
  double grid_extent = kDefaultGridExtent;
};

struct ExperimentConfig {
  ProblemKind problem = ProblemKind::mvc;
  FamilySpec graph;
  SizeRange train_sizes;
  std::vector<SizeRange> test_sizes{SizeRange{}};
  // 0: a fresh instance every episode; otherwise a fixed pool cycled in seeded order
  int train_instances = 0;
  int validation_count = 100;
  int test_count = 1000;
  TrainConfig train;
  std::vector<std::string> methods;  // empty: every method available for the problem
  int threads = 0;                   // 0: hardware concurrency
  std::filesystem::path out = "out";
  std::uint64_t seed = 1;

  // Defaults for a problem, with every key echoed by dump().
  static ExperimentConfig defaults(ProblemKind problem);
  // Canonical `key = value` listing with sections; the config hash covers all of it but `out`.
  std::string dump() const;
  std::string hash() const;
  void validate() const;
};

// Parses the line-oriented config format. Unknown keys are argument errors.
ExperimentConfig parse_config(std::istream& in, std::string_view source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);
// key is "section.name"; throws ArgumentError for unknown keys or bad values.
void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);

// ---- instances ------------------------------------------------------------------------

struct InstanceRecord {
  std::string set;
  int index = 0;
  int n = 0;
  std::uint64_t seed = 0;
  std::string file;  // relative to the output directory, empty when not written
};

struct InstanceSet {
  std::string name;
  SizeRange sizes;
  std::vector<InstanceRecord> records;
  std::vector<GraphPtr> graphs;
};

// Deterministic instance i of a named set: size drawn uniformly from the range, then the
// graph generated from its own seed.
InstanceRecord instance_record(const ExperimentConfig& cfg, const std::string& set, SizeRange sizes, int index);
GraphPtr make_instance(const ExperimentConfig& cfg, int n, std::uint64_t seed);
InstanceSet make_set(const ExperimentConfig& cfg, const std::string& set, SizeRange sizes, int count);

std::string validation_set_name();
std::string test_set_name(SizeRange sizes);

// ---- methods and metrics --------------------------------------------------------------

// Method names accepted by eval, in output order.
std::vector<std::string> available_methods(ProblemKind problem);
std::vector<std::string> resolve_methods(const ExperimentConfig& cfg, bool have_model);

struct MethodRun {
  std::string method;
  double value = 0.0;  // natural positive objective
  double seconds = 0.0;
  bool feasible = true;
};

// Runs one method on one instance. "s2v" needs params.
MethodRun run_method(const std::string& method, const WeightedGraph& g, ProblemKind problem,
                     const EmbedParams* params, std::uint64_t seed);

struct MetricsRow {
  int instance = 0;
  int n = 0;
  std::string method;
  double value = 0.0;
  double reference = 0.0;
  std::string reference_kind;            // exact | best-known
  std::optional<double> ratio;           // present iff reference_kind is exact
  std::optional<double> best_known_ratio;
  double seconds = 0.0;
};

struct EvalSummary {
  std::vector<MetricsRow> rows;             // sorted by instance, then method order
  std::map<std::string, double> mean_ratio;  // over rows with a ratio
  std::map<std::string, double> mean_best_known_ratio;
  std::vector<std::string> methods;
  bool all_exact = true;
};

// Evaluates the methods on a set, in parallel over instances with deterministic output.
EvalSummary evaluate(const ExperimentConfig& cfg, const InstanceSet& set, const std::vector<std::string>& methods,
                     const EmbedParams* params);

// Ratio of a value against an exact optimum; 1 when both are zero.
double ratio_or_one(double value, double opt);

// ---- commands ---------------------------------------------------------------------------

struct CommandOptions {
  std::optional<std::filesystem::path> init;      // warm start for train
  std::optional<std::filesystem::path> model;     // model for eval-type commands
  std::optional<std::filesystem::path> manifest;  // regenerate from a manifest
  std::optional<std::filesystem::path> instance;  // active search input
  std::ostream* log = nullptr;                    // progress and summaries
};

int cmd_generate(const ExperimentConfig& cfg, const CommandOptions& opt);
int cmd_train(const ExperimentConfig& cfg, const CommandOptions& opt);
int cmd_eval(const ExperimentConfig& cfg, const CommandOptions& opt);
int cmd_generalize(const ExperimentConfig& cfg, const CommandOptions& opt);
int cmd_timesweep(const ExperimentConfig& cfg, const CommandOptions& opt);
int cmd_active_search(const ExperimentConfig& cfg, const CommandOptions& opt);

// Reads a graph file: TSPLIB when the extension is .tsp, the native format otherwise.
GraphPtr load_instance(const std::filesystem::path& path, int knn_k = 10);

// Best-known optimal tour lengths of bundled TSPLIB instances, by NAME.
std::optional<double> tsplib_optimum(std::string_view name);

// CSV data rows of a file, skipping comment lines (for reproducibility checks).
std::string csv_data_rows(const std::filesystem::path& path);

}  // namespace gcomb
