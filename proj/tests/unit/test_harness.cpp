#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gcomb/errors.hpp"
#include "gcomb/exact.hpp"
#include "gcomb/harness.hpp"
#include "support.hpp"

using namespace gcomb;
using namespace gcomb::testing;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("gcomb_harness_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::vector<std::string>> csv_rows(const fs::path& p) {
  std::istringstream in(csv_data_rows(p));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

ExperimentConfig tiny(ProblemKind problem, const fs::path& out) {
  ExperimentConfig cfg = ExperimentConfig::defaults(problem);
  cfg.out = out;
  cfg.validation_count = 5;
  cfg.test_count = 6;
  cfg.threads = 1;
  cfg.train.episodes = 20;
  cfg.train.p = 8;
  cfg.train.batch_size = 8;
  cfg.train.validation_interval = 10;
  return cfg;
}

CommandOptions quiet(std::ostream* log = nullptr) {
  CommandOptions o;
  o.log = log;
  return o;
}

}  // namespace

TEST_CASE("size ranges") {
  CHECK(SizeRange::parse("15-20") == SizeRange{15, 20});
  CHECK(SizeRange::parse(" 40 ") == SizeRange{40, 40});
  CHECK(SizeRange::parse("40-50").str() == "40-50");
  CHECK_THROWS_AS(SizeRange::parse("20-15"), ArgumentError);
  CHECK_THROWS_AS(SizeRange::parse("a-b"), ArgumentError);
  CHECK_THROWS_AS(SizeRange::parse("0-3"), ArgumentError);
  const auto list = parse_size_list("15-20,40-50");
  REQUIRE(list.size() == 2);
  CHECK(list[1] == SizeRange{40, 50});
  CHECK_THROWS_AS(parse_size_list(""), ArgumentError);
}

TEST_CASE("config files") {
  const auto mvc = ExperimentConfig::defaults(ProblemKind::mvc);
  const std::string dump = mvc.dump();
  for (const char* key : {"problem = mvc", "family = er", "edge_prob = 0.15", "p = 64", "n_step = 5",
                          "batch_size = 128", "gamma = 1", "lr_decay_factor = 0.95", "eps_end = 0.05"}) {
    CAPTURE(key);
    CHECK(dump.find(key) != std::string::npos);
  }
  std::istringstream again(dump);
  CHECK(parse_config(again).dump() == dump);

  std::istringstream text(
      "# comment\n[train]\nepisodes = 7   # trailing\nlr0 = 0.01\n[experiment]\nproblem = tsp\nseed = 9\n"
      "[sizes]\ntest = 10-12,13-14\n");
  const auto cfg = parse_config(text);
  CHECK(cfg.problem == ProblemKind::tsp);
  CHECK(cfg.train.gamma == 0.1);
  CHECK(cfg.train.episodes == 7);
  CHECK(cfg.train.lr0 == 0.01);
  CHECK(cfg.seed == 9);
  CHECK(cfg.test_sizes.size() == 2);

  std::istringstream unknown("[train]\nepisodez = 3\n");
  CHECK_THROWS_AS(parse_config(unknown), ArgumentError);
  std::istringstream bad("[train]\nepisodes = many\n");
  CHECK_THROWS_AS(parse_config(bad), ArgumentError);
  std::istringstream orphan("episodes = 3\n");
  CHECK_THROWS_AS(parse_config(orphan), ArgumentError);
  CHECK_THROWS_AS(load_config("/nonexistent/gcomb.cfg"), IoError);

  ExperimentConfig a = mvc;
  ExperimentConfig b = mvc;
  b.out = "elsewhere";
  CHECK(a.hash() == b.hash());
  set_config_value(b, "train.episodes", "5");
  CHECK(a.hash() != b.hash());
  CHECK_THROWS_AS(set_config_value(b, "graph.colour", "red"), ArgumentError);

  ExperimentConfig wrong = mvc;
  wrong.graph.family = "random";
  CHECK_THROWS_AS(wrong.validate(), ArgumentError);

  ExperimentConfig cut = ExperimentConfig::defaults(ProblemKind::maxcut);
  set_config_value(cut, "train.covered_edges", "true");
  CHECK_THROWS_AS(cut.validate(), ArgumentError);
}

TEST_CASE("instance sets") {
  const auto cfg = ExperimentConfig::defaults(ProblemKind::mvc);
  for (int i = 0; i < 200; ++i) {
    const auto r = instance_record(cfg, "test_15-20", SizeRange{15, 20}, i);
    CHECK(r.n >= 15);
    CHECK(r.n <= 20);
  }
  const auto a = make_set(cfg, "validation", SizeRange{15, 20}, 10);
  const auto b = make_set(cfg, "validation", SizeRange{15, 20}, 10);
  for (int i = 0; i < 10; ++i) CHECK(*a.graphs[i] == *b.graphs[i]);
  const auto other = make_set(cfg, "test_15-20", SizeRange{15, 20}, 10);
  CHECK(a.records[0].seed != other.records[0].seed);
  CHECK(test_set_name(SizeRange{40, 50}) == "test_40-50");
}

TEST_CASE("methods") {
  CHECK(available_methods(ProblemKind::mvc) == std::vector<std::string>{"s2v", "mvc_approx", "mvc_greedy", "exact"});
  auto cfg = ExperimentConfig::defaults(ProblemKind::tsp);
  CHECK(resolve_methods(cfg, false).front() == "tsp_nearest");
  cfg.methods = {"exact", "tsp_mst"};
  CHECK(resolve_methods(cfg, false) == std::vector<std::string>{"tsp_mst", "exact"});
  cfg.methods = {"s2v"};
  CHECK_THROWS_AS(resolve_methods(cfg, false), ArgumentError);

  const auto g = gen_erdos_renyi(14, 0.2, 3);
  const auto run = run_method("exact", g, ProblemKind::mvc, nullptr, 1);
  CHECK(run.value == brute_mvc(g));
  CHECK(run.seconds > 0.0);
  CHECK_THROWS_AS(run_method("s2v", g, ProblemKind::mvc, nullptr, 1), ArgumentError);
  CHECK_THROWS_AS(run_method("tsp_mst", g, ProblemKind::mvc, nullptr, 1), ArgumentError);

  CHECK(ratio_or_one(0.0, 0.0) == 1.0);
  CHECK(ratio_or_one(3.0, 2.0) == 1.5);
}

TEST_CASE("evaluation") {
  auto cfg = ExperimentConfig::defaults(ProblemKind::mvc);
  cfg.threads = 1;
  const auto set = make_set(cfg, "test_15-20", SizeRange{15, 20}, 12);

  const auto only_exact = evaluate(cfg, set, {"exact"}, nullptr);
  CHECK(only_exact.rows.size() == 12);
  for (const auto& r : only_exact.rows) CHECK(r.ratio == 1.0);

  const std::vector<std::string> methods{"mvc_approx", "mvc_greedy", "exact"};
  const auto sum = evaluate(cfg, set, methods, nullptr);
  CHECK(sum.all_exact);
  double total = 0.0;
  int count = 0;
  for (const auto& r : sum.rows) {
    CHECK(r.reference_kind == "exact");
    REQUIRE(r.ratio.has_value());
    CHECK(*r.ratio >= 1.0);
    if (r.method == "mvc_greedy") {
      total += *r.ratio;
      ++count;
    }
  }
  CHECK(sum.mean_ratio.at("mvc_greedy") == doctest::Approx(total / count));

  cfg.threads = 4;
  const auto parallel = evaluate(cfg, set, methods, nullptr);
  REQUIRE(parallel.rows.size() == sum.rows.size());
  for (std::size_t i = 0; i < sum.rows.size(); ++i) {
    CHECK(parallel.rows[i].instance == sum.rows[i].instance);
    CHECK(parallel.rows[i].method == sum.rows[i].method);
    CHECK(parallel.rows[i].value == sum.rows[i].value);
  }

  const auto big = make_set(cfg, "test_70-72", SizeRange{kMvcExactLimit + 6, kMvcExactLimit + 8}, 3);
  const auto far = evaluate(cfg, big, methods, nullptr);
  CHECK_FALSE(far.all_exact);
  for (const auto& r : far.rows) {
    CHECK(r.reference_kind == "best-known");
    CHECK_FALSE(r.ratio.has_value());
    CHECK(r.method != "exact");
  }
}

TEST_CASE("generate and regenerate from the manifest") {
  const fs::path out = scratch("generate");
  auto cfg = tiny(ProblemKind::mvc, out);
  cfg.validation_count = 3;
  cfg.test_count = 10;
  REQUIRE(cmd_generate(cfg, quiet()) == 0);
  const fs::path test_dir = out / "instances" / "test_15-20";
  int files = 0;
  for (const auto& e : fs::directory_iterator(test_dir)) {
    const auto g = load_graph(e.path().string());
    CHECK(g.node_count() >= 15);
    CHECK(g.node_count() <= 20);
    ++files;
  }
  CHECK(files == 10);
  const std::string first = slurp(test_dir / "00004.graph");
  const std::string manifest = slurp(out / "manifest.json");
  CHECK(manifest.find("\"seed\"") != std::string::npos);

  fs::remove_all(out / "instances");
  CommandOptions regen = quiet();
  const fs::path copy = scratch("generate_copy");
  fs::create_directories(copy);
  fs::copy_file(out / "manifest.json", copy / "manifest.json");
  regen.manifest = copy / "manifest.json";
  ExperimentConfig other = ExperimentConfig::defaults(ProblemKind::tsp);
  other.out = out;
  REQUIRE(cmd_generate(other, regen) == 0);
  CHECK(slurp(test_dir / "00004.graph") == first);
  CHECK(slurp(out / "manifest.json") == manifest);

  cfg.out = "/proc/gcomb_cannot_write_here";
  CHECK_THROWS_AS(cmd_generate(cfg, quiet()), IoError);
}

TEST_CASE("train, eval and friends") {
  const fs::path out = scratch("train");
  auto cfg = tiny(ProblemKind::mvc, out);
  cfg.train_sizes = SizeRange{8, 10};
  cfg.test_sizes = {SizeRange{8, 10}};
  REQUIRE(cmd_train(cfg, quiet()) == 0);
  CHECK(fs::exists(out / "model.bin"));
  CHECK(fs::exists(out / "model.bin.json"));
  CHECK(fs::exists(out / "model_final.bin"));
  CHECK(load_config(out / "config.txt").dump() == cfg.dump());

  const auto log = csv_rows(out / "train_log.csv");
  CHECK(log.size() == 20);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& row : log) {
    if (row.size() > 6 && !row[6].empty() && row[6] != "nan") {
      const double b = std::stod(row[6]);
      CHECK(b <= best);
      best = b;
    }
  }
  const std::string meta = slurp(out / "train_log.csv").substr(0, 200);
  CHECK(meta.rfind("# gcomb ", 0) == 0);
  CHECK(meta.find("config_hash=" + cfg.hash()) != std::string::npos);

  SUBCASE("zero episodes keep the initialization") {
    auto zero = cfg;
    zero.out = scratch("train_zero");
    zero.train.episodes = 0;
    REQUIRE(cmd_train(zero, quiet()) == 0);
    const auto dims = feature_dims(ProblemKind::mvc);
    const auto init = init_params(8, dims.d_node, dims.d_edge, zero.train.T, Rng(zero.seed).split(0).seed(),
                                  zero.train.extra_layer);
    CHECK(load_model((zero.out / "model.bin").string()) == init);
  }

  SUBCASE("covered edges widen the edge features") {
    auto wide = cfg;
    wide.out = scratch("train_wide");
    wide.train.episodes = 20;
    wide.train.covered_edges = true;
    REQUIRE(cmd_train(wide, quiet()) == 0);
    CHECK(load_model((wide.out / "model.bin").string()).d_edge == 2);
    CommandOptions o = quiet();
    o.model = wide.out / "model.bin";
    auto ecfg = wide;
    ecfg.methods = {"s2v"};
    CHECK(cmd_eval(ecfg, o) == 0);
  }

  SUBCASE("eval writes per-instance rows and means") {
    CommandOptions o = quiet();
    o.model = out / "model.bin";
    auto ecfg = cfg;
    ecfg.methods = {"s2v", "mvc_greedy", "exact"};
    REQUIRE(cmd_eval(ecfg, o) == 0);
    const auto rows = csv_rows(out / "eval_8-10.csv");
    CHECK(rows.size() == 6 * 3 + 3);
    std::map<std::string, std::pair<double, int>> sums;
    for (const auto& r : rows) {
      if (r[0] == "mean") {
        CHECK(std::stod(r[6]) == doctest::Approx(sums[r[2]].first / sums[r[2]].second));
        continue;
      }
      CHECK(r[5] == "exact");
      CHECK(std::stod(r[6]) >= 1.0);
      sums[r[2]].first += std::stod(r[6]);
      sums[r[2]].second += 1;
    }
    const auto timing = csv_rows(out / "eval_8-10_timing.csv");
    CHECK(timing.size() == 6 * 3);
    for (const auto& r : timing) CHECK(std::stod(r[2]) > 0.0);

    auto gcfg = ecfg;
    REQUIRE(cmd_generalize(gcfg, o) == 0);
    const auto grid = csv_rows(out / "generalize.csv");
    for (const auto& r : grid) {
      for (const auto& m : rows) {
        if (m[0] == "mean" && m[2] == r[2]) CHECK(r[4] == m[6]);
      }
    }

    auto tcfg = ecfg;
    tcfg.methods = {"s2v", "mvc_approx"};
    REQUIRE(cmd_timesweep(tcfg, o) == 0);
    const auto sweep = csv_rows(out / "timesweep.csv");
    CHECK(sweep.size() == 2 * 6);
    for (const auto& r : sweep) CHECK(std::stod(r[4]) > 0.0);
  }

  SUBCASE("beyond the exact limit references are best-known") {
    CommandOptions o = quiet();
    o.model = out / "model.bin";
    auto gcfg = cfg;
    gcfg.test_count = 2;
    gcfg.methods = {"s2v", "mvc_greedy", "exact"};
    gcfg.test_sizes = {SizeRange{8, 10}, SizeRange{kMvcExactLimit + 2, kMvcExactLimit + 4}};
    REQUIRE(cmd_generalize(gcfg, o) == 0);
    for (const auto& r : csv_rows(out / "generalize.csv")) {
      CHECK(r[3] == (r[1] == "8-10" ? "exact" : "best-known"));
    }
  }

  SUBCASE("a model for another problem is rejected") {
    CommandOptions o = quiet();
    o.model = out / "model.bin";
    auto tsp = tiny(ProblemKind::tsp, out);
    CHECK_THROWS_AS(cmd_eval(tsp, o), ArgumentError);
    o.model = out / "missing.bin";
    CHECK_THROWS_AS(cmd_eval(cfg, o), IoError);
  }
}

TEST_CASE("train and eval reproduce byte for byte") {
  std::string rows[2];
  std::string hashes[2];
  for (int run = 0; run < 2; ++run) {
    auto cfg = tiny(ProblemKind::scp, scratch("repro" + std::to_string(run)));
    cfg.train_sizes = SizeRange{12, 14};
    cfg.test_sizes = {SizeRange{12, 14}};
    cfg.threads = run == 0 ? 1 : 3;
    REQUIRE(cmd_train(cfg, quiet()) == 0);
    CommandOptions o = quiet();
    o.model = cfg.out / "model.bin";
    REQUIRE(cmd_eval(cfg, o) == 0);
    rows[run] = csv_data_rows(cfg.out / "train_log.csv") + csv_data_rows(cfg.out / "eval_12-14.csv");
    hashes[run] = model_hash(load_model((cfg.out / "model.bin").string()));
  }
  CHECK(rows[0] == rows[1]);
  CHECK(hashes[0] == hashes[1]);
}

TEST_CASE("active search") {
  SUBCASE("generated instance against the exact tour") {
    const fs::path out = scratch("active");
    fs::create_directories(out);
    const auto g = knn_graph(gen_tsp_points(5, PointMode::random, 3), 4);
    save_graph((out / "five.graph").string(), g);
    std::string logs[2];
    for (auto& text : logs) {
      auto cfg = tiny(ProblemKind::tsp, out);
      cfg.train.episodes = 30;
      std::ostringstream log;
      CommandOptions o = quiet(&log);
      o.instance = out / "five.graph";
      REQUIRE(cmd_active_search(cfg, o) == 0);
      text = log.str();
    }
    CHECK(logs[0] == logs[1]);
    CHECK(logs[0].find("reference_kind=exact") != std::string::npos);
    CHECK(csv_rows(out / "active_search.csv").size() == 30);
  }
  SUBCASE("tsplib instance against its known optimum") {
    CHECK(tsplib_optimum("berlin52") == 7542.0);
    CHECK(tsplib_optimum("eil51") == 426.0);
    CHECK_FALSE(tsplib_optimum("nowhere1").has_value());
    const fs::path out = scratch("active_tsplib");
    auto cfg = tiny(ProblemKind::tsp, out);
    cfg.train.episodes = 2;
    std::ostringstream log;
    CommandOptions o = quiet(&log);
    o.instance = fs::path(GCOMB_TEST_DATA) / "berlin52.tsp";
    REQUIRE(cmd_active_search(cfg, o) == 0);
    CHECK(log.str().find("reference=7542 reference_kind=tsplib-optimum") != std::string::npos);
  }
  SUBCASE("missing instance") {
    auto cfg = tiny(ProblemKind::tsp, scratch("active_missing"));
    CommandOptions o = quiet();
    o.instance = "/nonexistent/x.tsp";
    CHECK_THROWS_AS(cmd_active_search(cfg, o), IoError);
  }
}

TEST_CASE("instance loading") {
  const auto g = load_instance(fs::path(GCOMB_TEST_DATA) / "eil51.tsp");
  CHECK(g->node_count() == 51);
  CHECK(g->kind() == GraphKind::euclidean);
}
