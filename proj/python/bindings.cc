// Copyright 2026 The Trajshield Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Python bindings. Cells are plain ints, distributions are lists of floats.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "trajshield/adversary.h"
#include "trajshield/budget.h"
#include "trajshield/error.h"
#include "trajshield/grid_map.h"
#include "trajshield/ingest.h"
#include "trajshield/mechanisms.h"
#include "trajshield/metrics.h"
#include "trajshield/mobility.h"
#include "trajshield/pipeline.h"
#include "trajshield/pls.h"
#include "trajshield/scenario.h"
#include "trajshield/version.h"

namespace py = pybind11;

namespace trajshield {
namespace {

std::vector<CellId> ToCells(const std::vector<int>& ids) {
  std::vector<CellId> out;
  out.reserve(ids.size());
  for (int i : ids) out.push_back(Cell(i));
  return out;
}

std::vector<int> ToInts(const std::vector<CellId>& cells) {
  std::vector<int> out;
  out.reserve(cells.size());
  for (CellId c : cells) out.push_back(Index(c));
  return out;
}

ProbVector ToProb(std::vector<double> p) { return ProbVector::FromWeights(std::move(p)); }

py::dict DistributionDict(const PerturbationDistribution& d) {
  py::dict out;
  out["support"] = ToInts(d.support);
  out["probs"] = d.probs;
  out["mechanism"] = std::string(MechanismName(d.tag));
  return out;
}

PerturbationDistribution Mechanism(const std::string& name, int true_cell,
                                   const std::vector<int>& cells, double epsilon,
                                   const GridMap& map) {
  const auto set = ToCells(cells);
  switch (ParseMechanism(name)) {
    case MechanismTag::kPf:
      return PfDistribution(Cell(true_cell), set, epsilon, map);
    case MechanismTag::kExp:
      return ExpMechanismDistribution(Cell(true_cell), set, epsilon, map);
    case MechanismTag::kUniform:
      break;
  }
  DeltaLocationSet d;
  d.cells = set;
  return UniformDlsDistribution(Cell(true_cell), d);
}

py::dict SweepRowDict(const SweepRow& r) {
  py::dict out;
  out["epsilon_s"] = r.epsilon_s;
  out["e_m"] = r.e_m;
  out["delta"] = r.delta;
  out["seed"] = r.seed;
  out["p_mean"] = r.p_mean;
  out["p_std"] = r.p_std;
  out["q_mean"] = r.q_mean;
  out["q_std"] = r.q_std;
  out["dset_size_mean"] = r.dset_size_mean;
  out["pls_diam_mean"] = r.pls_diam_mean;
  out["attack_success_mean"] = r.attack_success_mean;
  out["trials_ok"] = r.trials_ok;
  out["status"] = r.status;
  return out;
}

}  // namespace
}  // namespace trajshield

PYBIND11_MODULE(_trajshield, m) {
  using namespace trajshield;
  m.doc() = "Correlation-aware trajectory location privacy";
  m.attr("__version__") = std::string(kVersion);
  m.attr("DEFAULT_CELL_SIZE_M") = kDefaultCellSizeM;
  m.attr("DEFAULT_TIME_STEP_S") = kDefaultTimeStepS;

  static py::exception<Error> error_type(m, "TrajshieldError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const py::object cls = error_type;
      py::object exc = cls(e.what());
      exc.attr("code") = std::string(ErrorCodeName(e.code()));
      exc.attr("step") = e.step();
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  py::class_<GridMap>(m, "GridMap")
      .def(py::init([](int rows, int cols, double cell_size_m, double lat, double lon,
                       double time_step_s) {
             return GridMap(rows, cols, cell_size_m, {lat, lon}, time_step_s);
           }),
           py::arg("rows"), py::arg("cols"), py::arg("cell_size_m") = kDefaultCellSizeM,
           py::arg("origin_lat") = 0.0, py::arg("origin_lon") = 0.0,
           py::arg("time_step_s") = kDefaultTimeStepS)
      .def_property_readonly("rows", &GridMap::rows)
      .def_property_readonly("cols", &GridMap::cols)
      .def_property_readonly("cell_size_m", &GridMap::cell_size_m)
      .def_property_readonly("time_step_s", &GridMap::time_step_s)
      .def_property_readonly("num_cells", &GridMap::num_cells)
      .def("coord_of",
           [](const GridMap& g, int c) {
             g.CheckCell(Cell(c));
             const GridCoord at = g.CoordOf(Cell(c));
             return py::make_tuple(at.row, at.col);
           })
      .def("cell_at",
           [](const GridMap& g, int row, int col) {
             const CellId c = g.CellAt(row, col);
             g.CheckCell(c);
             return Index(c);
           })
      .def("distance",
           [](const GridMap& g, int a, int b) {
             g.CheckCell(Cell(a));
             g.CheckCell(Cell(b));
             return g.Distance(Cell(a), Cell(b));
           })
      .def("cell_of_coords", [](const GridMap& g, double lat,
                                double lon) { return Index(g.CellOfCoords(lat, lon)); })
      .def("to_json", &GridMap::ToJson)
      .def_static("from_json", &GridMap::FromJson);

  m.def(
      "delta_location_set",
      [](std::vector<double> prior, double delta) {
        return ToInts(ComputeDeltaLocationSet(ToProb(std::move(prior)), delta).cells);
      },
      py::arg("prior"), py::arg("delta"),
      "Smallest set of cells holding at least 1 - delta of the prior.");

  m.def(
      "propagate",
      [](std::vector<double> belief, std::vector<double> matrix) {
        const int n = static_cast<int>(belief.size());
        const TransitionMatrix tm =
            TransitionMatrix::FromProbabilities(n, std::move(matrix));
        const ProbVector out = PropagatePrior(ToProb(std::move(belief)), tm);
        return std::vector<double>(out.values().begin(), out.values().end());
      },
      py::arg("belief"), py::arg("matrix"),
      "One step of the mobility chain; `matrix` is row-major n x n.");

  m.def(
      "conditional_error",
      [](const std::vector<int>& cells, std::vector<double> prior, const GridMap& map) {
        return ConditionalError(ToCells(cells), ToProb(std::move(prior)), map);
      },
      py::arg("cells"), py::arg("prior"), py::arg("map"));

  m.def(
      "search_protection_set",
      [](int anchor, const std::vector<int>& pool, std::vector<double> prior,
         double epsilon, double e_m, const GridMap& map) {
        const ProtectionLocationSet s = SearchPls(
            Cell(anchor), ToCells(pool), ToProb(std::move(prior)), epsilon, e_m, map);
        py::dict out;
        out["cells"] = ToInts(s.cells);
        out["diameter_m"] = s.diameter_m;
        out["e_value"] = s.e_value;
        return out;
      },
      py::arg("anchor"), py::arg("pool"), py::arg("prior"), py::arg("epsilon"),
      py::arg("e_m"), py::arg("map"));

  m.def(
      "perturbation_distribution",
      [](int true_cell, const std::vector<int>& cells, double epsilon, const GridMap& map,
         const std::string& mechanism) {
        return DistributionDict(Mechanism(mechanism, true_cell, cells, epsilon, map));
      },
      py::arg("true_cell"), py::arg("cells"), py::arg("epsilon"), py::arg("map"),
      py::arg("mechanism") = "pf");

  m.def(
      "max_dp_ratio",
      [](const std::vector<int>& cells, double epsilon, const GridMap& map,
         const std::string& mechanism) {
        const MechanismBuilder build = [mechanism](CellId x, std::span<const CellId> s,
                                                   double e, const GridMap& g) {
          return Mechanism(mechanism, Index(x), ToInts({s.begin(), s.end()}), e, g);
        };
        return VerifyDpRatio(build, ToCells(cells), epsilon, map).max_ratio;
      },
      py::arg("cells"), py::arg("epsilon"), py::arg("map"), py::arg("mechanism") = "pf");

  m.def(
      "optimal_inference",
      [](std::vector<double> posterior, const GridMap& map) {
        const Inference inf = OptimalInference(ToProb(std::move(posterior)), map);
        return py::make_tuple(Index(inf.inferred), inf.expected_error_m);
      },
      py::arg("posterior"), py::arg("map"));

  m.def(
      "bayesian_inference",
      [](std::vector<double> posterior) {
        return Index(BayesianInference(ToProb(std::move(posterior))));
      },
      py::arg("posterior"));

  m.def(
      "allocate_sensitive",
      [](const std::map<int, double>& sensitivities, double epsilon_s) {
        std::map<CellId, double> in;
        for (const auto& [c, s] : sensitivities) in[Cell(c)] = s;
        std::map<int, double> out;
        for (const auto& [c, e] : AllocateSensitive(in, epsilon_s)) out[Index(c)] = e;
        return out;
      },
      py::arg("sensitivities"), py::arg("epsilon_s"));

  m.def(
      "allocate_adjacent",
      [](double eps_sensitive, const std::map<int, double>& distances_m) {
        std::map<CellId, double> in;
        for (const auto& [c, d] : distances_m) in[Cell(c)] = d;
        std::map<int, double> out;
        for (const auto& [c, e] : AllocateAdjacent(eps_sensitive, in)) out[Index(c)] = e;
        return out;
      },
      py::arg("eps_sensitive"), py::arg("distances_m"));

  m.def(
      "ingest",
      [](const std::string& text, const GridMap& map, const std::string& format) {
        std::istringstream in(text);
        const ParseReport report = ParseGpsLines(in, ParseGpsFormat(format));
        py::list errors;
        for (const auto& e : report.errors)
          errors.append(py::make_tuple(e.line, e.reason));
        py::dict trajectories;
        if (!report.records.empty()) {
          for (const auto& t : DiscretizeById(report.records, map)) {
            std::vector<int> cells;
            for (const auto& s : t.steps) cells.push_back(Index(s.cell));
            trajectories[py::str(t.user_id)] = cells;
          }
        }
        py::dict out;
        out["trajectories"] = trajectories;
        out["errors"] = errors;
        out["records"] = report.records.size();
        return out;
      },
      py::arg("text"), py::arg("map"), py::arg("format") = "tdrive",
      "Parses a GPS log and discretizes each id; malformed lines are listed in "
      "'errors'.");

  m.def(
      "run_sweep",
      [](const std::string& scenario_json, const std::string& sweep_json, int workers) {
        const Scenario s = BuildScenario(ScenarioConfig::FromJson(scenario_json));
        const SweepSpec spec = SweepSpec::FromJson(sweep_json);
        std::vector<SweepRow> rows;
        {
          py::gil_scoped_release release;
          rows = RunSweep(s, spec, workers);
        }
        py::list out;
        for (const auto& r : rows) out.append(SweepRowDict(r));
        return out;
      },
      py::arg("scenario_json"), py::arg("sweep_json"), py::arg("workers") = 1,
      "Runs a sweep on a synthetic scenario; returns one dict per grid point and seed.");
}
