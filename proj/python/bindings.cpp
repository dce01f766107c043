#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <optional>
#include <sstream>

#include "epiland/commands.hpp"
#include "epiland/config.hpp"
#include "epiland/errors.hpp"
#include "epiland/ldp.hpp"
#include "epiland/noise.hpp"
#include "epiland/solver.hpp"

namespace py = pybind11;
using namespace epiland;

namespace {

Settings load(const std::string& path, const std::vector<std::string>& overrides) {
  ConfigTable t = ConfigTable::load(path);
  for (const auto& o : overrides) t.set_override(o);
  return resolve(t);
}

template <class T>
py::array_t<T> column(const std::vector<T>& v) {
  py::array_t<T> a(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), a.mutable_data());
  return a;
}

py::dict trajectory_dict(const Trajectory& t) {
  std::vector<double> au, av, mu, mv;
  for (const auto& p : t.avg_series) {
    au.push_back(p.u);
    av.push_back(p.v);
  }
  for (const auto& p : t.mean_series) {
    mu.push_back(p.u);
    mv.push_back(p.v);
  }
  py::dict d;
  d["t"] = column(t.times);
  d["avg_u"] = column(au);
  d["avg_v"] = column(av);
  d["mean_u"] = column(mu);
  d["mean_v"] = column(mv);
  d["basin"] = column(t.basin_series);
  return d;
}

py::dict stats_dict(const ChannelStats& s) {
  py::dict d;
  d["mean"] = s.mean;
  d["stddev"] = s.stddev;
  d["standard_error"] = s.standard_error;
  d["bin_edges"] = column(s.bin_edges);
  d["counts"] = column(s.counts);
  return d;
}

py::tuple point(Point p) { return py::make_tuple(p.u, p.v); }

}  // namespace

PYBIND11_MODULE(_epiland, m) {
  m.doc() = "Stochastic reaction-diffusion dynamics on a smoothed multi-well landscape";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
  py::register_exception<SimulationAbort>(m, "SimulationAbort", PyExc_RuntimeError);

  py::class_<Model>(m, "Model")
      .def(py::init([](const std::string& path, const std::vector<std::string>& overrides) {
             return build_model(load(path, overrides));
           }),
           py::arg("config"), py::arg("overrides") = std::vector<std::string>{})
      .def_property_readonly("labels", [](const Model& md) { return md.landscape->source().labels(); })
      .def_property_readonly("centers",
                             [](const Model& md) {
                               py::list out;
                               for (const auto& w : md.landscape->source().wells()) out.append(point(w.center));
                               return out;
                             })
      .def_property_readonly("weights",
                             [](const Model& md) {
                               std::vector<double> out;
                               for (const auto& w : md.landscape->source().wells()) out.push_back(w.weight);
                               return out;
                             })
      .def_property_readonly("seed", [](const Model& md) { return md.settings.seed; })
      .def_property_readonly("grad_tol", [](const Model& md) { return md.landscape->grad_tol(); })
      .def_property_readonly("warnings", [](const Model& md) { return md.warnings; })
      .def("config_text", [](const Model& md) { return to_config_text(md.settings); })
      .def("potential", [](const Model& md, double u, double v) { return md.landscape->potential({u, v}); })
      .def("drift", [](const Model& md, double u, double v) { return point(md.landscape->drift({u, v})); })
      .def("classify", [](const Model& md, double u, double v) { return md.landscape->source().classify({u, v}); })
      .def("limit_measure", [](const Model& md) { return limit_measure(md.landscape->source()).weights; })
      .def(
          "barrier",
          [](const Model& md, std::size_t from, std::size_t to) {
            const auto r = barrier(*md.landscape, from, to, md.disc->domain_length());
            py::dict d;
            d["barrier"] = r.barrier;
            d["saddle_value"] = r.saddle_value;
            d["saddle_point"] = point(r.saddle_point);
            return d;
          },
          py::arg("from_well"), py::arg("to_well"))
      .def(
          "simulate",
          [](const Model& md, std::optional<double> sigma, std::optional<double> t_end,
             std::optional<std::uint64_t> seed, std::uint64_t stream) {
            SimConfig cfg = md.sim_config();
            if (sigma) cfg.sigma = *sigma;
            if (t_end) cfg.t_end = *t_end;
            Trajectory t;
            {
              py::gil_scoped_release release;
              t = simulate(cfg, make_stream(seed.value_or(md.settings.seed), stream));
            }
            return trajectory_dict(t);
          },
          py::arg("sigma") = py::none(), py::arg("t_end") = py::none(), py::arg("seed") = py::none(),
          py::arg("stream") = 0)
      .def(
          "ensemble_histogram",
          [](const Model& md, std::size_t n, std::optional<double> sigma, std::size_t jobs) {
            SimConfig cfg = md.sim_config();
            if (sigma) cfg.sigma = *sigma;
            HistogramReport h;
            {
              py::gil_scoped_release release;
              const auto trajs = simulate_ensemble(cfg, n, md.settings.seed, jobs);
              h = stationary_histogram(trajs, md.settings.run.burn_in, md.settings.run.histogram_bins);
            }
            py::dict d;
            d["samples"] = h.samples;
            d["avg_u"] = stats_dict(h.u);
            d["avg_v"] = stats_dict(h.v);
            return d;
          },
          py::arg("n"), py::arg("sigma") = py::none(), py::arg("jobs") = 1)
      .def(
          "exit_study",
          [](const Model& md, std::vector<double> sigmas, std::size_t n_traj, double t_max, std::size_t jobs) {
            ExitStudyInputs in;
            in.base = md.sim_config();
            in.sigmas = std::move(sigmas);
            in.n_traj = n_traj;
            in.t_max = t_max;
            in.start_well = md.settings.study.start_well;
            in.dwell = md.settings.run.dwell;
            if (md.settings.study.exit_radius > 0.0) in.exit_radius = md.settings.study.exit_radius;
            in.seed = md.settings.seed;
            in.jobs = jobs;
            ExitStudy r;
            {
              py::gil_scoped_release release;
              r = exit_rate_fit(in);
            }
            py::dict d;
            d["sigmas"] = r.sigmas;
            d["mean_exit"] = r.mean_exit;
            d["censoring"] = r.censoring;
            d["fitted_slope"] = r.fitted_slope;
            d["predicted_slope"] = r.predicted_slope;
            d["barrier"] = r.barrier;
            d["reliable"] = r.reliable;
            return d;
          },
          py::arg("sigmas"), py::arg("n_traj") = 20, py::arg("t_max") = 1000.0, py::arg("jobs") = 1);

  m.def(
      "limit_measure",
      [](const std::vector<double>& weights) {
        std::vector<Well> wells;
        for (std::size_t k = 0; k < weights.size(); ++k) wells.push_back({{double(k), 0.0}, weights[k]});
        return limit_measure(build_landscape(std::move(wells))).weights;
      },
      py::arg("weights"), "Small-noise limit weights for wells with the given curvature weights.");

  m.def(
      "sample_increments",
      [](double l, std::size_t n, double h, double dt, std::size_t draws, std::uint64_t seed) {
        std::vector<double> x(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = double(i + 1) * h;
        auto nm = std::make_shared<const NoiseModel>(NoiseModel::qwiener(l, x));
        IncrementSampler sampler(nm);
        Rng rng = make_stream(seed, 0);
        py::array_t<double> out({draws, std::size_t{2}, n});
        auto buf = out.mutable_unchecked<3>();
        NoiseIncrement inc;
        for (std::size_t k = 0; k < draws; ++k) {
          sampler.sample(dt, rng, inc);
          for (std::size_t i = 0; i < n; ++i) {
            buf(k, 0, i) = inc.dw1[i];
            buf(k, 1, i) = inc.dw2[i];
          }
        }
        return out;
      },
      py::arg("correlation_length"), py::arg("n"), py::arg("h"), py::arg("dt"), py::arg("draws"),
      py::arg("seed") = 0, "Q-Wiener increments, shape (draws, 2, n).");

  m.def(
      "cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = run_cli(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line tool in-process; returns (exit_code, stdout, stderr).");

  m.attr("__version__") = EPILAND_VERSION;
}
