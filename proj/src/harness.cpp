#include "gcomb/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "gcomb/baselines.hpp"
#include "gcomb/errors.hpp"
#include "gcomb/exact.hpp"

namespace gcomb {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    const std::string item = trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (!item.empty()) out.push_back(item);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex16(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string num(double x) {
  if (std::isnan(x)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long x = std::stol(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ArgumentError("config " + key + ": expected an integer, got '" + v + "'");
  }
}

double parse_real(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ArgumentError("config " + key + ": expected a number, got '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ArgumentError("config " + key + ": expected a boolean, got '" + v + "'");
}

std::string join(const std::vector<std::string>& items, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

std::string optimizer_name(TrainConfig::Optimizer o) { return o == TrainConfig::Optimizer::adam ? "adam" : "sgd"; }

bool minimizing(ProblemKind k) { return k != ProblemKind::maxcut; }

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::string& meta, const std::vector<std::string>& header) : path_(path) {
    ensure_dir(path.parent_path().empty() ? fs::path(".") : path.parent_path());
    out_.open(path);
    if (!out_) throw IoError("cannot write " + path.string());
    out_ << "# " << meta << '\n';
    row(header);
  }
  void row(const std::vector<std::string>& cells) {
    out_ << join(cells, ",") << '\n';
    if (!out_) throw IoError("write failed for " + path_.string());
  }

 private:
  fs::path path_;
  std::ofstream out_;
};

std::string meta_line(const ExperimentConfig& cfg, const std::string& command) {
  return "gcomb " + std::string(kVersion) + " command=" + command + " config_hash=" + cfg.hash() +
         " seed=" + std::to_string(cfg.seed) + " problem=" + std::string(to_string(cfg.problem)) +
         " family=" + cfg.graph.family;
}

void say(const CommandOptions& opt, const std::string& line) {
  if (opt.log) *opt.log << line << '\n';
}

}  // namespace

// ---- sizes ----------------------------------------------------------------------------

SizeRange SizeRange::parse(std::string_view text) {
  const std::string t = trim(text);
  const auto dash = t.find('-');
  SizeRange r;
  try {
    std::size_t used = 0;
    if (dash == std::string::npos) {
      r.lo = r.hi = std::stoi(t, &used);
      if (used != t.size()) throw std::invalid_argument(t);
    } else {
      const std::string a = trim(t.substr(0, dash));
      const std::string b = trim(t.substr(dash + 1));
      r.lo = std::stoi(a, &used);
      if (used != a.size()) throw std::invalid_argument(a);
      r.hi = std::stoi(b, &used);
      if (used != b.size()) throw std::invalid_argument(b);
    }
  } catch (const std::exception&) {
    throw ArgumentError("bad size range '" + t + "' (expected lo-hi)");
  }
  if (r.lo < 2 || r.hi < r.lo) throw ArgumentError("bad size range '" + t + "' (need 2 <= lo <= hi)");
  return r;
}

std::string SizeRange::str() const { return std::to_string(lo) + "-" + std::to_string(hi); }

std::vector<SizeRange> parse_size_list(std::string_view text) {
  std::vector<SizeRange> out;
  for (const auto& item : split(text, ',')) out.push_back(SizeRange::parse(item));
  if (out.empty()) throw ArgumentError("empty size list");
  return out;
}

// ---- config -----------------------------------------------------------------------------

ExperimentConfig ExperimentConfig::defaults(ProblemKind problem) {
  ExperimentConfig c;
  c.problem = problem;
  c.train = TrainConfig::defaults(problem);
  switch (problem) {
    case ProblemKind::mvc:
    case ProblemKind::maxcut:
      c.graph.family = "er";
      c.graph.edge_prob = 0.15;
      break;
    case ProblemKind::tsp:
      c.graph.family = "random";
      c.test_sizes = {SizeRange{10, 15}};
      c.train_sizes = SizeRange{10, 15};
      break;
    case ProblemKind::scp:
      c.graph.family = "scp";
      c.graph.edge_prob = 0.1;
      break;
  }
  return c;
}

std::string ExperimentConfig::dump() const {
  std::ostringstream o;
  std::vector<std::string> tests;
  for (const auto& r : test_sizes) tests.push_back(r.str());
  o << "[experiment]\n"
    << "problem = " << to_string(problem) << '\n'
    << "seed = " << seed << '\n'
    << "methods = " << join(methods, ",") << '\n'
    << "threads = " << threads << '\n'
    << "[graph]\n"
    << "family = " << graph.family << '\n'
    << "edge_prob = " << num(graph.edge_prob) << '\n'
    << "ba_m = " << graph.ba_m << '\n'
    << "knn_k = " << graph.knn_k << '\n'
    << "grid_extent = " << num(graph.grid_extent) << '\n'
    << "[sizes]\n"
    << "train = " << train_sizes.str() << '\n'
    << "test = " << join(tests, ",") << '\n'
    << "train_instances = " << train_instances << '\n'
    << "validation_count = " << validation_count << '\n'
    << "test_count = " << test_count << '\n'
    << "[train]\n"
    << "episodes = " << train.episodes << '\n'
    << "n_step = " << train.n_step << '\n'
    << "batch_size = " << train.batch_size << '\n'
    << "capacity = " << train.capacity << '\n'
    << "lr0 = " << num(train.lr0) << '\n'
    << "lr_decay_factor = " << num(train.lr_decay_factor) << '\n'
    << "lr_decay_steps = " << train.lr_decay_steps << '\n'
    << "eps_start = " << num(train.eps_start) << '\n'
    << "eps_end = " << num(train.eps_end) << '\n'
    << "eps_anneal_fraction = " << num(train.eps_anneal_fraction) << '\n'
    << "gamma = " << num(train.gamma) << '\n'
    << "reward_norm = " << num(train.reward_norm) << '\n'
    << "reward_sign = " << num(train.reward_sign) << '\n'
    << "target_sync_interval = " << train.target_sync_interval << '\n'
    << "optimizer = " << optimizer_name(train.optimizer) << '\n'
    << "momentum = " << num(train.momentum) << '\n'
    << "adam_beta1 = " << num(train.adam_beta1) << '\n'
    << "adam_beta2 = " << num(train.adam_beta2) << '\n'
    << "grad_clip = " << num(train.grad_clip) << '\n'
    << "init_scale = " << num(train.init_scale) << '\n'
    << "p = " << train.p << '\n'
    << "T = " << train.T << '\n'
    << "extra_layer = " << (train.extra_layer ? "true" : "false") << '\n'
    << "covered_edges = " << (train.covered_edges ? "true" : "false") << '\n'
    << "validation_interval = " << train.validation_interval << '\n'
    << "checkpoint_interval = " << train.checkpoint_interval << '\n';
  return o.str();
}

std::string ExperimentConfig::hash() const { return hex16(fnv1a(dump())); }

void ExperimentConfig::validate() const {
  const auto& f = graph.family;
  const bool fam_ok = [&] {
    switch (problem) {
      case ProblemKind::mvc:
      case ProblemKind::maxcut:
        return f == "er" || f == "ba";
      case ProblemKind::tsp:
        return f == "random" || f == "clustered";
      case ProblemKind::scp:
        return f == "scp";
    }
    return false;
  }();
  if (!fam_ok) throw ArgumentError("graph family '" + f + "' does not fit problem " + std::string(to_string(problem)));
  if (!(graph.edge_prob >= 0.0 && graph.edge_prob <= 1.0)) throw ArgumentError("edge_prob must be in [0, 1]");
  if (graph.ba_m < 1) throw ArgumentError("ba_m must be >= 1");
  if (graph.knn_k < 1) throw ArgumentError("knn_k must be >= 1");
  if (test_sizes.empty()) throw ArgumentError("no test sizes");
  if (validation_count < 1 || test_count < 1) throw ArgumentError("instance counts must be >= 1");
  if (train_instances < 0) throw ArgumentError("train_instances must be >= 0");
  if (threads < 0) throw ArgumentError("threads must be >= 0");
  if (f == "ba") {
    if (train_sizes.lo <= graph.ba_m) throw ArgumentError("ba: sizes must exceed ba_m");
    for (const auto& r : test_sizes) {
      if (r.lo <= graph.ba_m) throw ArgumentError("ba: sizes must exceed ba_m");
    }
  }
  if (problem == ProblemKind::scp) {
    if (train_sizes.lo < 10) throw ArgumentError("scp: sizes must be >= 10");
    for (const auto& r : test_sizes) {
      if (r.lo < 10) throw ArgumentError("scp: sizes must be >= 10");
    }
  }
  for (const auto& m : methods) {
    const auto all = available_methods(problem);
    if (std::find(all.begin(), all.end(), m) == all.end()) {
      throw ArgumentError("method '" + m + "' is not available for " + std::string(to_string(problem)));
    }
  }
  TrainConfig t = train;
  if (t.reward_norm == 0.0) t.reward_norm = 1.0;
  t.validate();
}

void set_config_value(ExperimentConfig& c, const std::string& key, const std::string& v) {
  auto& t = c.train;
  if (key == "experiment.problem") {
    if (problem_kind_from_string(v) != c.problem) throw ArgumentError("experiment.problem must come first");
  } else if (key == "experiment.seed") {
    c.seed = static_cast<std::uint64_t>(parse_int(key, v));
  } else if (key == "experiment.methods") {
    c.methods = split(v, ',');
  } else if (key == "experiment.threads") {
    c.threads = static_cast<int>(parse_int(key, v));
  } else if (key == "experiment.out") {
    c.out = v;
  } else if (key == "graph.family") {
    c.graph.family = v;
  } else if (key == "graph.edge_prob") {
    c.graph.edge_prob = parse_real(key, v);
  } else if (key == "graph.ba_m") {
    c.graph.ba_m = static_cast<int>(parse_int(key, v));
  } else if (key == "graph.knn_k") {
    c.graph.knn_k = static_cast<int>(parse_int(key, v));
  } else if (key == "graph.grid_extent") {
    c.graph.grid_extent = parse_real(key, v);
  } else if (key == "sizes.train") {
    c.train_sizes = SizeRange::parse(v);
  } else if (key == "sizes.test") {
    c.test_sizes = parse_size_list(v);
  } else if (key == "sizes.train_instances") {
    c.train_instances = static_cast<int>(parse_int(key, v));
  } else if (key == "sizes.validation_count") {
    c.validation_count = static_cast<int>(parse_int(key, v));
  } else if (key == "sizes.test_count") {
    c.test_count = static_cast<int>(parse_int(key, v));
  } else if (key == "train.episodes") {
    t.episodes = static_cast<int>(parse_int(key, v));
  } else if (key == "train.n_step") {
    t.n_step = static_cast<int>(parse_int(key, v));
  } else if (key == "train.batch_size") {
    t.batch_size = static_cast<int>(parse_int(key, v));
  } else if (key == "train.capacity") {
    const long cap = parse_int(key, v);
    if (cap < 1) throw ArgumentError("train.capacity must be >= 1");
    t.capacity = static_cast<std::size_t>(cap);
  } else if (key == "train.lr0") {
    t.lr0 = parse_real(key, v);
  } else if (key == "train.lr_decay_factor") {
    t.lr_decay_factor = parse_real(key, v);
  } else if (key == "train.lr_decay_steps") {
    t.lr_decay_steps = static_cast<int>(parse_int(key, v));
  } else if (key == "train.eps_start") {
    t.eps_start = parse_real(key, v);
  } else if (key == "train.eps_end") {
    t.eps_end = parse_real(key, v);
  } else if (key == "train.eps_anneal_fraction") {
    t.eps_anneal_fraction = parse_real(key, v);
  } else if (key == "train.gamma") {
    t.gamma = parse_real(key, v);
  } else if (key == "train.reward_norm") {
    t.reward_norm = parse_real(key, v);
  } else if (key == "train.reward_sign") {
    t.reward_sign = parse_real(key, v);
  } else if (key == "train.target_sync_interval") {
    t.target_sync_interval = static_cast<int>(parse_int(key, v));
  } else if (key == "train.optimizer") {
    if (v == "sgd") {
      t.optimizer = TrainConfig::Optimizer::sgd;
    } else if (v == "adam") {
      t.optimizer = TrainConfig::Optimizer::adam;
    } else {
      throw ArgumentError("train.optimizer must be sgd or adam");
    }
  } else if (key == "train.momentum") {
    t.momentum = parse_real(key, v);
  } else if (key == "train.adam_beta1") {
    t.adam_beta1 = parse_real(key, v);
  } else if (key == "train.adam_beta2") {
    t.adam_beta2 = parse_real(key, v);
  } else if (key == "train.grad_clip") {
    t.grad_clip = parse_real(key, v);
  } else if (key == "train.init_scale") {
    t.init_scale = parse_real(key, v);
  } else if (key == "train.p") {
    t.p = static_cast<int>(parse_int(key, v));
  } else if (key == "train.T") {
    t.T = static_cast<int>(parse_int(key, v));
  } else if (key == "train.extra_layer") {
    t.extra_layer = parse_bool(key, v);
  } else if (key == "train.covered_edges") {
    t.covered_edges = parse_bool(key, v);
  } else if (key == "train.validation_interval") {
    t.validation_interval = static_cast<int>(parse_int(key, v));
  } else if (key == "train.checkpoint_interval") {
    t.checkpoint_interval = static_cast<int>(parse_int(key, v));
  } else {
    throw ArgumentError("unknown config key '" + key + "'");
  }
}

ExperimentConfig parse_config(std::istream& in, std::string_view source) {
  std::vector<std::pair<std::string, std::string>> items;
  std::vector<int> lines;
  std::string section;
  std::string line;
  int lineno = 0;
  std::optional<ProblemKind> problem;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    auto where = [&] { return std::string(source) + ":" + std::to_string(lineno) + ": "; };
    if (body.front() == '[') {
      if (body.back() != ']') throw ArgumentError(where() + "bad section header '" + body + "'");
      section = trim(body.substr(1, body.size() - 2));
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ArgumentError(where() + "expected key = value, got '" + body + "'");
    if (section.empty()) throw ArgumentError(where() + "key outside a section");
    const std::string key = section + "." + trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key == "experiment.problem") {
      try {
        problem = problem_kind_from_string(value);
      } catch (const ArgumentError& e) {
        throw ArgumentError(where() + e.what());
      }
      continue;
    }
    items.emplace_back(key, value);
    lines.push_back(lineno);
  }
  ExperimentConfig cfg = ExperimentConfig::defaults(problem.value_or(ProblemKind::mvc));
  for (std::size_t i = 0; i < items.size(); ++i) {
    try {
      set_config_value(cfg, items[i].first, items[i].second);
    } catch (const ArgumentError& e) {
      throw ArgumentError(std::string(source) + ":" + std::to_string(lines[i]) + ": " + e.what());
    }
  }
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  return parse_config(in, path.string());
}

// ---- instances ---------------------------------------------------------------------------

std::string validation_set_name() { return "validation"; }
std::string test_set_name(SizeRange sizes) { return "test_" + sizes.str(); }

InstanceRecord instance_record(const ExperimentConfig& cfg, const std::string& set, SizeRange sizes, int index) {
  Rng r = Rng(cfg.seed).split(fnv1a(set)).split(static_cast<std::uint64_t>(index));
  InstanceRecord rec;
  rec.set = set;
  rec.index = index;
  rec.n = sizes.lo + static_cast<int>(r.below(static_cast<std::size_t>(sizes.hi - sizes.lo + 1)));
  rec.seed = r.next_u64();
  return rec;
}

GraphPtr make_instance(const ExperimentConfig& cfg, int n, std::uint64_t seed) {
  const auto& f = cfg.graph;
  switch (cfg.problem) {
    case ProblemKind::mvc:
    case ProblemKind::maxcut: {
      WeightedGraph g = f.family == "ba" ? gen_barabasi_albert(n, f.ba_m, seed) : gen_erdos_renyi(n, f.edge_prob, seed);
      if (cfg.problem == ProblemKind::maxcut) g = gen_maxcut_weights(g, Rng::mix(seed ^ 0x6d61786375740000ULL));
      return std::make_shared<const WeightedGraph>(std::move(g));
    }
    case ProblemKind::tsp: {
      const PointSet ps = gen_tsp_points(n, point_mode_from_string(f.family), seed, f.grid_extent);
      return std::make_shared<const WeightedGraph>(knn_graph(ps, f.knn_k));
    }
    case ProblemKind::scp:
      return std::make_shared<const WeightedGraph>(gen_scp(n, f.edge_prob, seed));
  }
  throw ArgumentError("unknown problem");
}

InstanceSet make_set(const ExperimentConfig& cfg, const std::string& set, SizeRange sizes, int count) {
  InstanceSet s;
  s.name = set;
  s.sizes = sizes;
  for (int i = 0; i < count; ++i) {
    s.records.push_back(instance_record(cfg, set, sizes, i));
    s.graphs.push_back(make_instance(cfg, s.records.back().n, s.records.back().seed));
  }
  return s;
}

GraphPtr load_instance(const fs::path& path, int knn_k) {
  if (path.extension() == ".tsp") {
    const PointSet ps = parse_tsplib(path.string());
    return std::make_shared<const WeightedGraph>(knn_graph(ps, knn_k));
  }
  return std::make_shared<const WeightedGraph>(load_graph(path.string()));
}

std::optional<double> tsplib_optimum(std::string_view name) {
  static const std::map<std::string, double, std::less<>> known = {
      {"eil51", 426},      {"berlin52", 7542},  {"st70", 675},       {"eil76", 538},     {"pr76", 108159},
      {"rat99", 1211},     {"kroA100", 21282},  {"kroB100", 22141},  {"kroC100", 20749}, {"kroD100", 21294},
      {"kroE100", 22068},  {"rd100", 7910},     {"eil101", 629},     {"lin105", 14379},  {"pr107", 44303},
      {"pr124", 59030},    {"bier127", 118282}, {"ch130", 6110},     {"pr136", 96772},   {"pr144", 58537},
      {"ch150", 6528},     {"kroA150", 26524},  {"kroB150", 26130},  {"pr152", 73682},   {"u159", 42080},
      {"rat195", 2323},    {"d198", 15780},     {"kroA200", 29368},  {"kroB200", 29437}, {"ts225", 126643},
      {"tsp225", 3916},    {"pr226", 80369},    {"gil262", 2378},    {"pr264", 49135},   {"a280", 2579},
      {"pr299", 48191},    {"lin318", 42029},   {"linhp318", 41345},
  };
  const auto it = known.find(name);
  if (it == known.end()) return std::nullopt;
  return it->second;
}

// ---- methods --------------------------------------------------------------------------------

std::vector<std::string> available_methods(ProblemKind problem) {
  switch (problem) {
    case ProblemKind::mvc:
      return {"s2v", "mvc_approx", "mvc_greedy", "exact"};
    case ProblemKind::maxcut:
      return {"s2v", "maxcut_approx", "exact"};
    case ProblemKind::tsp:
      return {"s2v", "tsp_nearest", "tsp_farthest", "tsp_cheapest", "tsp_closest", "tsp_mst", "tsp_2opt", "exact"};
    case ProblemKind::scp:
      return {"s2v", "scp_greedy", "exact"};
  }
  return {};
}

std::vector<std::string> resolve_methods(const ExperimentConfig& cfg, bool have_model) {
  std::vector<std::string> out;
  if (cfg.methods.empty()) {
    for (const auto& m : available_methods(cfg.problem)) {
      if (m != "s2v" || have_model) out.push_back(m);
    }
    return out;
  }
  // Keep the canonical order whatever order the user listed them in.
  for (const auto& m : available_methods(cfg.problem)) {
    if (std::find(cfg.methods.begin(), cfg.methods.end(), m) != cfg.methods.end()) out.push_back(m);
  }
  if (!have_model && std::find(out.begin(), out.end(), "s2v") != out.end()) {
    throw ArgumentError("method s2v needs a model (--model)");
  }
  return out;
}

namespace {

bool exact_fits(ProblemKind problem, const WeightedGraph& g) {
  const int n = g.node_count();
  switch (problem) {
    case ProblemKind::mvc: return n <= kMvcExactLimit;
    case ProblemKind::maxcut: return n <= kMaxcutExactLimit;
    case ProblemKind::tsp: return n >= 2 && n <= kTspExactLimit;
    case ProblemKind::scp: return n <= kScpExactLimit && n - g.cover_count() <= 64;
  }
  return false;
}

double exact_value(ProblemKind problem, const WeightedGraph& g) {
  switch (problem) {
    case ProblemKind::mvc: return mvc_exact(g).value;
    case ProblemKind::maxcut: return maxcut_exact(g).value;
    case ProblemKind::tsp: return tsp_exact(g).value;
    case ProblemKind::scp: return scp_exact(g).value;
  }
  return 0.0;
}

double seconds_since(Clock::time_point start) {
  // Clamp so a solve faster than the clock tick still reports a positive time.
  return std::max(std::chrono::duration<double>(Clock::now() - start).count(), 1e-9);
}

}  // namespace

MethodRun run_method(const std::string& method, const WeightedGraph& g, ProblemKind problem, const EmbedParams* params,
                     std::uint64_t seed) {
  MethodRun run;
  run.method = method;
  const auto start = Clock::now();
  if (method == "s2v") {
    if (!params) throw ArgumentError("method s2v needs a model");
    const EpisodeState s = greedy_rollout(g, problem, *params);
    run.seconds = seconds_since(start);
    run.feasible = terminated(g, s);
    run.value = natural_value(problem, recompute_cost(g, s));
    return run;
  }
  if (method == "exact") {
    run.value = exact_value(problem, g);
    run.seconds = seconds_since(start);
    return run;
  }
  std::vector<int> nodes;
  switch (problem) {
    case ProblemKind::mvc:
      if (method == "mvc_approx") {
        nodes = mvc_approx(g, seed);
      } else if (method == "mvc_greedy") {
        nodes = mvc_approx_greedy(g);
      } else {
        break;
      }
      run.seconds = seconds_since(start);
      run.feasible = is_vertex_cover(g, nodes);
      run.value = static_cast<double>(nodes.size());
      return run;
    case ProblemKind::maxcut:
      if (method == "maxcut_approx") {
        const auto side = maxcut_approx(g);
        run.seconds = seconds_since(start);
        run.value = cut_weight(g, side);
        return run;
      }
      break;
    case ProblemKind::tsp:
      if (method == "tsp_nearest") {
        nodes = tsp_nearest_neighbor(g);
      } else if (method == "tsp_farthest") {
        nodes = tsp_insertion(g, InsertionStrategy::farthest);
      } else if (method == "tsp_cheapest") {
        nodes = tsp_insertion(g, InsertionStrategy::cheapest);
      } else if (method == "tsp_closest") {
        nodes = tsp_insertion(g, InsertionStrategy::closest);
      } else if (method == "tsp_mst") {
        nodes = tsp_mst(g);
      } else if (method == "tsp_2opt") {
        nodes = tsp_two_opt(g, tsp_nearest_neighbor(g));
      } else {
        break;
      }
      run.seconds = seconds_since(start);
      run.feasible = is_tour(nodes, g.node_count());
      run.value = tour_length(g, nodes);
      return run;
    case ProblemKind::scp:
      if (method == "scp_greedy") {
        nodes = scp_greedy(g);
        run.seconds = seconds_since(start);
        run.feasible = is_set_cover(g, nodes);
        run.value = static_cast<double>(nodes.size());
        return run;
      }
      break;
  }
  throw ArgumentError("method '" + method + "' is not available for " + std::string(to_string(problem)));
}

double ratio_or_one(double value, double opt) {
  if (value == 0.0 && opt == 0.0) return 1.0;
  if (value == 0.0 || opt == 0.0) return std::numeric_limits<double>::infinity();
  return approx_ratio(value, opt);
}

EvalSummary evaluate(const ExperimentConfig& cfg, const InstanceSet& set, const std::vector<std::string>& methods,
                     const EmbedParams* params) {
  EvalSummary out;
  out.methods = methods;
  const std::size_t count = set.graphs.size();
  std::vector<std::vector<MetricsRow>> per(count);
  std::vector<char> exact_ok(count, 0);
  const bool want_exact = std::find(methods.begin(), methods.end(), "exact") != methods.end();

  auto work = [&](std::size_t i) {
    const WeightedGraph& g = *set.graphs[i];
    const InstanceRecord& rec = set.records[i];
    std::vector<MetricsRow> rows;
    std::optional<MethodRun> exact;
    if (exact_fits(cfg.problem, g)) exact = run_method("exact", g, cfg.problem, params, rec.seed);
    for (const auto& m : methods) {
      if (m == "exact") continue;
      const MethodRun run = run_method(m, g, cfg.problem, params, Rng::mix(rec.seed ^ 0x617070726f78ULL));
      if (!run.feasible) throw ContractViolation("method " + m + " returned an infeasible solution");
      MetricsRow row;
      row.instance = rec.index;
      row.n = g.node_count();
      row.method = m;
      row.value = run.value;
      row.seconds = run.seconds;
      rows.push_back(row);
    }
    if (exact && want_exact) {
      MetricsRow row;
      row.instance = rec.index;
      row.n = g.node_count();
      row.method = "exact";
      row.value = exact->value;
      row.seconds = exact->seconds;
      rows.push_back(row);
    }
    double best = exact ? exact->value : std::numeric_limits<double>::quiet_NaN();
    if (!exact) {
      for (const auto& r : rows) {
        if (std::isnan(best) || (minimizing(cfg.problem) ? r.value < best : r.value > best)) best = r.value;
      }
    }
    for (auto& r : rows) {
      r.reference = best;
      r.reference_kind = exact ? "exact" : "best-known";
      if (!std::isnan(best)) r.best_known_ratio = ratio_or_one(r.value, best);
      if (exact) r.ratio = r.best_known_ratio;
    }
    // Canonical method order within the instance.
    std::vector<MetricsRow> ordered;
    for (const auto& m : methods) {
      for (auto& r : rows) {
        if (r.method == m) ordered.push_back(r);
      }
    }
    per[i] = std::move(ordered);
    exact_ok[i] = exact ? 1 : 0;
  };

  unsigned threads = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads) : std::thread::hardware_concurrency();
  threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= count) return;
          try {
            work(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next.store(count);
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }

  std::map<std::string, std::pair<double, int>> sums;
  std::map<std::string, std::pair<double, int>> bk_sums;
  for (std::size_t i = 0; i < count; ++i) {
    if (!exact_ok[i]) out.all_exact = false;
    for (auto& r : per[i]) {
      if (r.ratio) {
        sums[r.method].first += *r.ratio;
        sums[r.method].second += 1;
      }
      if (r.best_known_ratio) {
        bk_sums[r.method].first += *r.best_known_ratio;
        bk_sums[r.method].second += 1;
      }
      out.rows.push_back(std::move(r));
    }
  }
  for (const auto& [m, s] : sums) out.mean_ratio[m] = s.first / s.second;
  for (const auto& [m, s] : bk_sums) out.mean_best_known_ratio[m] = s.first / s.second;
  return out;
}

// ---- commands ------------------------------------------------------------------------------

namespace {

TrainConfig resolved_train(const ExperimentConfig& cfg, int max_nodes) {
  TrainConfig t = cfg.train;
  t.kind = cfg.problem;
  t.seed = cfg.seed;
  if (t.reward_norm == 0.0) t.reward_norm = static_cast<double>(max_nodes);
  return t;
}

EmbedParams load_checked_model(const fs::path& path, ProblemKind problem) {
  if (!fs::exists(path)) throw IoError("model not found: " + path.string());
  EmbedParams params = load_model(path.string());
  const fs::path sidecar = path.string() + ".json";
  if (fs::exists(sidecar)) {
    const ModelInfo info = load_model_info(sidecar.string());
    if (info.problem != problem) {
      throw ArgumentError("model " + path.string() + " was trained for " + std::string(to_string(info.problem)) +
                          ", not " + std::string(to_string(problem)));
    }
  }
  const FeatureDims d = feature_dims(problem);
  const FeatureDims c = feature_dims(problem, true);
  if (params.d_node != d.d_node || (params.d_edge != d.d_edge && params.d_edge != c.d_edge)) {
    throw ArgumentError("model " + path.string() + " does not match the feature layout of " +
                        std::string(to_string(problem)));
  }
  return params;
}

void write_set_manifest(nlohmann::json& sets, const InstanceSet& s) {
  nlohmann::json j;
  j["name"] = s.name;
  j["sizes"] = s.sizes.str();
  j["instances"] = nlohmann::json::array();
  for (const auto& r : s.records) {
    j["instances"].push_back({{"index", r.index}, {"n", r.n}, {"seed", r.seed}, {"file", r.file}});
  }
  sets.push_back(j);
}

void write_eval_csvs(const ExperimentConfig& cfg, const EvalSummary& sum, const fs::path& data_path,
                     const fs::path& timing_path, const std::string& command) {
  CsvWriter data(data_path, meta_line(cfg, command),
                 {"instance", "n", "method", "value", "reference", "reference_kind", "ratio"});
  CsvWriter timing(timing_path, meta_line(cfg, command), {"instance", "method", "seconds"});
  for (const auto& r : sum.rows) {
    data.row({std::to_string(r.instance), std::to_string(r.n), r.method, num(r.value), num(r.reference),
              r.reference_kind, r.ratio ? num(*r.ratio) : ""});
    timing.row({std::to_string(r.instance), r.method, num(r.seconds)});
  }
  for (const auto& m : sum.methods) {
    const auto it = sum.mean_ratio.find(m);
    if (it == sum.mean_ratio.end()) continue;
    data.row({"mean", "", m, "", "", "exact", num(it->second)});
  }
}

}  // namespace

int cmd_generate(const ExperimentConfig& cfg_in, const CommandOptions& opt) {
  ExperimentConfig cfg = cfg_in;
  std::vector<InstanceSet> sets;
  if (opt.manifest) {
    std::ifstream in(*opt.manifest);
    if (!in) throw IoError("cannot open manifest " + opt.manifest->string());
    nlohmann::json m;
    try {
      in >> m;
      cfg = ExperimentConfig::defaults(problem_kind_from_string(m.at("problem").get<std::string>()));
      cfg.seed = m.at("seed").get<std::uint64_t>();
      const auto& g = m.at("graph");
      cfg.graph.family = g.at("family").get<std::string>();
      cfg.graph.edge_prob = g.at("edge_prob").get<double>();
      cfg.graph.ba_m = g.at("ba_m").get<int>();
      cfg.graph.knn_k = g.at("knn_k").get<int>();
      cfg.graph.grid_extent = g.at("grid_extent").get<double>();
      cfg.out = cfg_in.out;
      for (const auto& sj : m.at("sets")) {
        InstanceSet s;
        s.name = sj.at("name").get<std::string>();
        s.sizes = SizeRange::parse(sj.at("sizes").get<std::string>());
        for (const auto& ij : sj.at("instances")) {
          InstanceRecord r;
          r.set = s.name;
          r.index = ij.at("index").get<int>();
          r.n = ij.at("n").get<int>();
          r.seed = ij.at("seed").get<std::uint64_t>();
          s.records.push_back(r);
          s.graphs.push_back(make_instance(cfg, r.n, r.seed));
        }
        sets.push_back(std::move(s));
      }
    } catch (const nlohmann::json::exception& e) {
      throw ArgumentError("bad manifest " + opt.manifest->string() + ": " + e.what());
    }
  } else {
    cfg.validate();
    if (cfg.train_instances > 0) sets.push_back(make_set(cfg, "train", cfg.train_sizes, cfg.train_instances));
    sets.push_back(make_set(cfg, validation_set_name(), cfg.train_sizes, cfg.validation_count));
    for (const auto& r : cfg.test_sizes) sets.push_back(make_set(cfg, test_set_name(r), r, cfg.test_count));
  }

  ensure_dir(cfg.out);
  nlohmann::json manifest;
  manifest["format"] = "gcomb-manifest";
  manifest["version"] = kVersion;
  manifest["problem"] = std::string(to_string(cfg.problem));
  manifest["seed"] = cfg.seed;
  manifest["graph"] = {{"family", cfg.graph.family},
                       {"edge_prob", cfg.graph.edge_prob},
                       {"ba_m", cfg.graph.ba_m},
                       {"knn_k", cfg.graph.knn_k},
                       {"grid_extent", cfg.graph.grid_extent}};
  manifest["sets"] = nlohmann::json::array();
  std::size_t files = 0;
  for (auto& s : sets) {
    const fs::path dir = cfg.out / "instances" / s.name;
    ensure_dir(dir);
    for (std::size_t i = 0; i < s.records.size(); ++i) {
      auto& r = s.records[i];
      char name[32];
      std::snprintf(name, sizeof name, "%05d.graph", r.index);
      r.file = (fs::path("instances") / s.name / name).generic_string();
      save_graph((cfg.out / r.file).string(), *s.graphs[i]);
      ++files;
    }
    write_set_manifest(manifest["sets"], s);
  }
  const fs::path mpath = cfg.out / "manifest.json";
  std::ofstream mout(mpath);
  if (!mout) throw IoError("cannot write " + mpath.string());
  mout << manifest.dump(2) << '\n';
  if (!mout) throw IoError("write failed for " + mpath.string());
  say(opt, "wrote " + std::to_string(files) + " instances and " + mpath.string());
  return 0;
}

int cmd_train(const ExperimentConfig& cfg, const CommandOptions& opt) {
  cfg.validate();
  ensure_dir(cfg.out);
  {
    const fs::path echo = cfg.out / "config.txt";
    std::ofstream out(echo);
    if (!out) throw IoError("cannot write " + echo.string());
    out << cfg.dump();
  }
  const TrainConfig tcfg = resolved_train(cfg, cfg.train_sizes.hi);
  std::optional<EmbedParams> init;
  if (opt.init) init = load_checked_model(*opt.init, cfg.problem);

  // Validation references, computed once.
  const InstanceSet val = make_set(cfg, validation_set_name(), cfg.train_sizes, cfg.validation_count);
  std::vector<double> refs;
  for (std::size_t i = 0; i < val.graphs.size(); ++i) {
    const WeightedGraph& g = *val.graphs[i];
    if (exact_fits(cfg.problem, g)) {
      refs.push_back(exact_value(cfg.problem, g));
      continue;
    }
    double best = std::numeric_limits<double>::quiet_NaN();
    for (const auto& m : available_methods(cfg.problem)) {
      if (m == "s2v" || m == "exact") continue;
      const double v = run_method(m, g, cfg.problem, nullptr, val.records[i].seed).value;
      if (std::isnan(best) || (minimizing(cfg.problem) ? v < best : v > best)) best = v;
    }
    refs.push_back(best);
  }

  std::vector<GraphPtr> pool;
  if (cfg.train_instances > 0) pool = make_set(cfg, "train", cfg.train_sizes, cfg.train_instances).graphs;
  const Rng pick(Rng(cfg.seed).split(fnv1a("train-order")));
  Sampler sampler = [&](int e) -> GraphPtr {
    if (!pool.empty()) return pool[pick.split(static_cast<std::uint64_t>(e)).below(pool.size())];
    const InstanceRecord r = instance_record(cfg, "train", cfg.train_sizes, e);
    return make_instance(cfg, r.n, r.seed);
  };

  TrainHooks hooks;
  hooks.validate = [&](const EmbedParams& params) {
    double sum = 0.0;
    for (std::size_t i = 0; i < val.graphs.size(); ++i) {
      const EpisodeState s = greedy_rollout(*val.graphs[i], cfg.problem, params);
      sum += ratio_or_one(natural_value(cfg.problem, recompute_cost(*val.graphs[i], s)), refs[i]);
    }
    return sum / static_cast<double>(val.graphs.size());
  };
  const fs::path ckdir = cfg.out / "checkpoints";
  hooks.checkpoint = [&](int episode, const EmbedParams& params) {
    ensure_dir(ckdir);
    char name[32];
    std::snprintf(name, sizeof name, "ep%06d.bin", episode + 1);
    save_model((ckdir / name).string(), params);
  };

  TrainResult res;
  try {
    res = train(sampler, tcfg, init, hooks);
  } catch (const TrainingError& e) {
    say(opt, std::string("training aborted: ") + e.what());
    throw;
  }

  const std::string meta = meta_line(cfg, "train");
  CsvWriter log(cfg.out / "train_log.csv", meta,
                {"episode", "step", "epsilon", "lr", "loss", "validation_ratio", "best_validation_ratio"});
  for (const auto& r : res.log) {
    log.row({std::to_string(r.episode), std::to_string(r.step), num(r.epsilon), num(r.lr), num(r.loss),
             num(r.validation_ratio), num(r.best_validation_ratio)});
  }
  ModelInfo info;
  info.problem = cfg.problem;
  info.config_hash = cfg.hash();
  info.max_nodes = cfg.train_sizes.hi;
  const fs::path model = cfg.out / "model.bin";
  save_model(model.string(), res.best_params);
  save_model_info(model.string() + ".json", info, res.best_params);
  save_model((cfg.out / "model_final.bin").string(), res.params);
  say(opt, "episodes=" + std::to_string(tcfg.episodes) + " updates=" + std::to_string(res.updates) +
               " best_validation_ratio=" + num(res.best_validation_ratio) + " model_hash=" + model_hash(res.best_params));
  say(opt, "wrote " + model.string());
  return 0;
}

namespace {

struct EvalInputs {
  std::optional<EmbedParams> params;
  std::vector<std::string> methods;
};

EvalInputs eval_inputs(const ExperimentConfig& cfg, const CommandOptions& opt) {
  cfg.validate();
  EvalInputs in;
  if (opt.model) in.params = load_checked_model(*opt.model, cfg.problem);
  in.methods = resolve_methods(cfg, in.params.has_value());
  if (in.methods.empty()) throw ArgumentError("no methods to run");
  return in;
}

}  // namespace

int cmd_eval(const ExperimentConfig& cfg, const CommandOptions& opt) {
  const EvalInputs in = eval_inputs(cfg, opt);
  ensure_dir(cfg.out);
  for (const auto& sizes : cfg.test_sizes) {
    const InstanceSet set = make_set(cfg, test_set_name(sizes), sizes, cfg.test_count);
    const EvalSummary sum = evaluate(cfg, set, in.methods, in.params ? &*in.params : nullptr);
    const std::string stem = "eval_" + sizes.str();
    write_eval_csvs(cfg, sum, cfg.out / (stem + ".csv"), cfg.out / (stem + "_timing.csv"), "eval");
    for (const auto& m : in.methods) {
      const auto it = sum.mean_ratio.find(m);
      say(opt, "sizes=" + sizes.str() + " method=" + m + " mean_ratio=" +
                   (it == sum.mean_ratio.end() ? std::string("n/a") : num(it->second)));
    }
  }
  return 0;
}

int cmd_generalize(const ExperimentConfig& cfg, const CommandOptions& opt) {
  const EvalInputs in = eval_inputs(cfg, opt);
  ensure_dir(cfg.out);
  CsvWriter out(cfg.out / "generalize.csv", meta_line(cfg, "generalize"),
                {"train_sizes", "test_sizes", "method", "reference_kind", "mean_ratio", "instances"});
  for (const auto& sizes : cfg.test_sizes) {
    const InstanceSet set = make_set(cfg, test_set_name(sizes), sizes, cfg.test_count);
    const EvalSummary sum = evaluate(cfg, set, in.methods, in.params ? &*in.params : nullptr);
    for (const auto& m : in.methods) {
      if (m == "exact" && !sum.all_exact) continue;
      const auto& means = sum.all_exact ? sum.mean_ratio : sum.mean_best_known_ratio;
      const auto it = means.find(m);
      if (it == means.end()) continue;
      out.row({cfg.train_sizes.str(), sizes.str(), m, sum.all_exact ? "exact" : "best-known", num(it->second),
               std::to_string(set.graphs.size())});
      say(opt, "train=" + cfg.train_sizes.str() + " test=" + sizes.str() + " method=" + m + " mean_ratio=" +
                   num(it->second) + (sum.all_exact ? "" : " (best-known)"));
    }
  }
  return 0;
}

int cmd_timesweep(const ExperimentConfig& cfg, const CommandOptions& opt) {
  const EvalInputs in = eval_inputs(cfg, opt);
  ensure_dir(cfg.out);
  CsvWriter out(cfg.out / "timesweep.csv", meta_line(cfg, "timesweep"),
                {"test_sizes", "method", "instance", "n", "seconds", "ratio", "reference_kind"});
  for (const auto& sizes : cfg.test_sizes) {
    const InstanceSet set = make_set(cfg, test_set_name(sizes), sizes, cfg.test_count);
    const EvalSummary sum = evaluate(cfg, set, in.methods, in.params ? &*in.params : nullptr);
    for (const auto& m : in.methods) {
      for (const auto& r : sum.rows) {
        if (r.method != m) continue;
        const double ratio = r.ratio ? *r.ratio : r.best_known_ratio.value_or(std::numeric_limits<double>::quiet_NaN());
        out.row({sizes.str(), m, std::to_string(r.instance), std::to_string(r.n), num(r.seconds), num(ratio),
                 r.reference_kind});
      }
    }
  }
  say(opt, "wrote " + (cfg.out / "timesweep.csv").string());
  return 0;
}

int cmd_active_search(const ExperimentConfig& cfg, const CommandOptions& opt) {
  cfg.validate();
  if (!opt.instance) throw ArgumentError("active-search needs an instance file");
  if (!fs::exists(*opt.instance)) throw IoError("instance not found: " + opt.instance->string());
  const GraphPtr g = load_instance(*opt.instance, cfg.graph.knn_k);
  check_compatible(*g, cfg.problem);
  std::optional<EmbedParams> init;
  if (opt.init) init = load_checked_model(*opt.init, cfg.problem);
  const TrainConfig tcfg = resolved_train(cfg, g->node_count());
  const ActiveSearchResult res = active_search(g, tcfg, init);
  if (res.best.solution.empty() && g->node_count() > 0 && !terminated(*g, res.best)) {
    throw TrainingError("active search finished no episode");
  }
  const double value = natural_value(cfg.problem, res.best_value);

  std::optional<double> reference;
  std::string ref_kind;
  if (g->points() && !g->points()->name.empty()) {
    reference = tsplib_optimum(g->points()->name);
    if (reference) ref_kind = "tsplib-optimum";
  }
  if (!reference && exact_fits(cfg.problem, *g)) {
    reference = exact_value(cfg.problem, *g);
    ref_kind = "exact";
  }

  ensure_dir(cfg.out);
  CsvWriter log(cfg.out / "active_search.csv", meta_line(cfg, "active-search"), {"episode", "best_value"});
  for (std::size_t e = 0; e < res.best_so_far.size(); ++e) {
    log.row({std::to_string(e), num(natural_value(cfg.problem, res.best_so_far[e]))});
  }
  const std::vector<int>& nodes = cfg.problem == ProblemKind::tsp ? res.best.tour : res.best.solution;
  std::vector<std::string> ids;
  for (int v : nodes) ids.push_back(std::to_string(v));
  {
    const fs::path sol = cfg.out / "active_search_solution.txt";
    std::ofstream s(sol);
    if (!s) throw IoError("cannot write " + sol.string());
    s << join(ids, " ") << '\n';
  }
  std::string line = "best_value=" + num(value);
  if (reference) line += " reference=" + num(*reference) + " reference_kind=" + ref_kind + " ratio=" + num(ratio_or_one(value, *reference));
  say(opt, line);
  say(opt, std::string(cfg.problem == ProblemKind::tsp ? "tour=" : "solution=") + join(ids, " "));
  return 0;
}

std::string csv_data_rows(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.front() == '#') continue;
    out += line;
    out += '\n';
  }
  return out;
}

}  // namespace gcomb
