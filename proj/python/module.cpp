#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "gcomb/baselines.hpp"
#include "gcomb/errors.hpp"
#include "gcomb/exact.hpp"
#include "gcomb/harness.hpp"
#include "gcomb/learning.hpp"

namespace py = pybind11;
using namespace gcomb;

namespace {

ProblemKind kind_of(const std::string& name) { return problem_kind_from_string(name); }

py::dict opt_dict(const OptResult& r) {
  py::dict d;
  d["value"] = r.value;
  d["nodes"] = r.nodes;
  d["side"] = std::vector<int>(r.side.begin(), r.side.end());
  d["proven_optimal"] = r.proven_optimal;
  d["elapsed"] = r.elapsed;
  return d;
}

ExperimentConfig make_config(const std::string& problem, const std::optional<std::string>& config,
                             const std::map<std::string, std::string>& overrides) {
  ExperimentConfig cfg = config ? load_config(*config) : ExperimentConfig::defaults(kind_of(problem));
  for (const auto& [k, v] : overrides) set_config_value(cfg, k, v);
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Learned greedy heuristics for graph optimization problems";
  m.attr("__version__") = kVersion;

  py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<TrainingError>(m, "TrainingError", PyExc_RuntimeError);
  py::register_exception<InfeasibleError>(m, "InfeasibleError", PyExc_ValueError);
  py::register_exception<SizeLimitError>(m, "SizeLimitError", PyExc_ValueError);
  py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_RuntimeError);

  py::class_<WeightedGraph, std::shared_ptr<WeightedGraph>>(m, "Graph")
      .def_property_readonly("node_count", &WeightedGraph::node_count)
      .def_property_readonly("edge_count", &WeightedGraph::edge_count)
      .def_property_readonly("kind", [](const WeightedGraph& g) { return std::string(to_string(g.kind())); })
      .def_property_readonly("cover_count", &WeightedGraph::cover_count)
      .def("degree", &WeightedGraph::degree)
      .def("distance", &WeightedGraph::distance)
      .def("edges",
           [](const WeightedGraph& g) {
             std::vector<std::tuple<int, int, double>> out;
             for (const auto& e : g.edges()) out.emplace_back(e.u, e.v, e.weight);
             return out;
           })
      .def("points",
           [](const WeightedGraph& g) {
             std::vector<std::pair<double, double>> out;
             if (g.points()) {
               for (const auto& p : g.points()->points) out.emplace_back(p.x, p.y);
             }
             return out;
           })
      .def("__repr__", [](const WeightedGraph& g) {
        std::ostringstream o;
        o << "<Graph n=" << g.node_count() << " m=" << g.edge_count() << " kind=" << to_string(g.kind()) << ">";
        return o.str();
      });

  auto share = [](WeightedGraph g) { return std::make_shared<WeightedGraph>(std::move(g)); };
  m.def("erdos_renyi", [share](int n, double p, std::uint64_t seed) { return share(gen_erdos_renyi(n, p, seed)); },
        py::arg("n"), py::arg("edge_prob"), py::arg("seed"));
  m.def("barabasi_albert", [share](int n, int m_, std::uint64_t seed) { return share(gen_barabasi_albert(n, m_, seed)); },
        py::arg("n"), py::arg("m"), py::arg("seed"));
  m.def("maxcut_weights", [share](const WeightedGraph& g, std::uint64_t seed) { return share(gen_maxcut_weights(g, seed)); },
        py::arg("graph"), py::arg("seed"));
  m.def("tsp_instance",
        [share](int n, const std::string& mode, std::uint64_t seed, int k) {
          return share(knn_graph(gen_tsp_points(n, point_mode_from_string(mode), seed), k));
        },
        py::arg("n"), py::arg("mode") = "random", py::arg("seed") = 1, py::arg("k") = 10);
  m.def("scp_instance", [share](int n, double p, std::uint64_t seed) { return share(gen_scp(n, p, seed)); },
        py::arg("n"), py::arg("edge_prob"), py::arg("seed"));
  m.def("load_graph", [share](const std::string& path) { return share(load_graph(path)); });
  m.def("save_graph", [](const std::string& path, const WeightedGraph& g) { save_graph(path, g); });
  m.def("load_instance", [share](const std::string& path, int k) { return share(*load_instance(path, k)); },
        py::arg("path"), py::arg("k") = 10);

  m.def("mvc_exact", [](const WeightedGraph& g) { return opt_dict(mvc_exact(g)); });
  m.def("maxcut_exact", [](const WeightedGraph& g) { return opt_dict(maxcut_exact(g)); });
  m.def("tsp_exact", [](const WeightedGraph& g) { return opt_dict(tsp_exact(g)); });
  m.def("scp_exact", [](const WeightedGraph& g) { return opt_dict(scp_exact(g)); });
  m.def("approx_ratio", &approx_ratio, py::arg("value"), py::arg("opt"));

  m.def("methods", [](const std::string& problem) { return available_methods(kind_of(problem)); });
  m.def("run_method",
        [](const std::string& method, const WeightedGraph& g, const std::string& problem,
           const std::optional<std::string>& model, std::uint64_t seed) {
          std::optional<EmbedParams> params;
          if (model) params = load_model(*model);
          const MethodRun r = run_method(method, g, kind_of(problem), params ? &*params : nullptr, seed);
          return py::make_tuple(r.value, r.seconds);
        },
        py::arg("method"), py::arg("graph"), py::arg("problem"), py::arg("model") = py::none(), py::arg("seed") = 1);

  m.def("greedy_rollout",
        [](const WeightedGraph& g, const std::string& problem, const std::string& model) {
          const EpisodeState s = greedy_rollout(g, kind_of(problem), load_model(model));
          py::dict d;
          d["solution"] = s.solution;
          d["tour"] = s.tour;
          d["value"] = natural_value(s.kind, s.cost);
          return d;
        },
        py::arg("graph"), py::arg("problem"), py::arg("model"));

  m.def("model_hash", [](const std::string& path) { return model_hash(load_model(path)); });

  m.def("config_dump",
        [](const std::string& problem, const std::optional<std::string>& config,
           const std::map<std::string, std::string>& overrides) {
          return make_config(problem, config, overrides).dump();
        },
        py::arg("problem") = "mvc", py::arg("config") = py::none(),
        py::arg("overrides") = std::map<std::string, std::string>{});

  // run("train", out="dir", problem="mvc", overrides={"train.episodes": "50"}) and friends.
  m.def("run",
        [](const std::string& command, const std::string& out, const std::string& problem,
           const std::optional<std::string>& config, const std::map<std::string, std::string>& overrides,
           const std::optional<std::string>& model, const std::optional<std::string>& init,
           const std::optional<std::string>& instance, const std::optional<std::string>& manifest) {
          ExperimentConfig cfg = make_config(problem, config, overrides);
          cfg.out = out;
          CommandOptions opt;
          if (model) opt.model = *model;
          if (init) opt.init = *init;
          if (instance) opt.instance = *instance;
          if (manifest) opt.manifest = *manifest;
          std::ostringstream log;
          opt.log = &log;
          int rc = 0;
          {
            py::gil_scoped_release release;
            if (command == "generate") {
              rc = cmd_generate(cfg, opt);
            } else if (command == "train") {
              rc = cmd_train(cfg, opt);
            } else if (command == "eval") {
              rc = cmd_eval(cfg, opt);
            } else if (command == "generalize") {
              rc = cmd_generalize(cfg, opt);
            } else if (command == "timesweep") {
              rc = cmd_timesweep(cfg, opt);
            } else if (command == "active-search") {
              rc = cmd_active_search(cfg, opt);
            } else {
              throw ArgumentError("unknown command '" + command + "'");
            }
          }
          return py::make_tuple(rc, log.str());
        },
        py::arg("command"), py::arg("out"), py::arg("problem") = "mvc", py::arg("config") = py::none(),
        py::arg("overrides") = std::map<std::string, std::string>{}, py::arg("model") = py::none(),
        py::arg("init") = py::none(), py::arg("instance") = py::none(), py::arg("manifest") = py::none());
}
