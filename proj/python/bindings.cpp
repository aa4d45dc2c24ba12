#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "bac/cartpole.hpp"
#include "bac/config.hpp"
#include "bac/csv.hpp"
#include "bac/gradcheck.hpp"
#include "bac/harness.hpp"
#include "bac/response_induction.hpp"

namespace py = pybind11;
using namespace bac;

namespace {

py::dict trial_dict(const TrialRecord& t) {
  py::dict d;
  d["trial"] = t.trial_index;
  d["steps"] = t.steps;
  d["terminal_reason"] = to_string(t.reason);
  d["mean_delta_plan"] = t.mean_delta_plan;
  return d;
}

py::list trial_list(const std::vector<TrialRecord>& ts) {
  py::list out;
  for (const auto& t : ts) out.append(trial_dict(t));
  return out;
}

py::dict summary_dict(const RunSummary& s) {
  py::dict d;
  d["architecture"] = to_string(s.architecture);
  d["servo_rate_hz"] = s.servo_rate_hz;
  d["ll_mode"] = to_string(s.ll_mode);
  d["experiments"] = s.experiments;
  d["successes"] = s.successes;
  d["n_ave"] = s.n_ave ? py::cast(*s.n_ave) : py::none();
  d["m_ave"] = s.m_ave ? py::cast(*s.m_ave) : py::none();
  d["numeric_faults"] = s.numeric_faults;
  return d;
}

py::dict result_dict(const ExperimentResult& r) {
  py::dict d;
  d["seed"] = r.seed;
  d["success"] = r.success;
  d["failure_reason"] = r.failure_reason;
  d["numeric_fault"] = r.numeric_fault;
  d["trials"] = trial_list(r.trials);
  d["ll_trials"] = trial_list(r.ll_trials);
  py::list phases;
  for (const auto& p : r.phases) {
    py::dict pd;
    pd["phase"] = p.phase;
    pd["trials"] = p.trials;
    pd["steps"] = p.steps;
    pd["converged"] = p.converged;
    pd["final_metric"] = p.final_metric;
    phases.append(pd);
  }
  d["phases"] = phases;
  py::list bins;
  for (const auto& b : r.series.bins)
    bins.append(py::make_tuple(b.bin_index, b.mean_steps, b.mean_delta, b.partial));
  d["series"] = bins;
  return d;
}

std::string value_text(const py::handle& v) {
  if (py::isinstance<py::bool_>(v)) return v.cast<bool>() ? "true" : "false";
  return py::str(v).cast<std::string>();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Backpropagated Adaptive Critic experiments";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<TrainingFault>(m, "TrainingFault", PyExc_ArithmeticError);

  py::class_<CartPoleState>(m, "CartPoleState")
      .def(py::init<>())
      .def(py::init([](double x, double xd, double th, double thd) {
             return CartPoleState{x, xd, th, thd};
           }),
           py::arg("x"), py::arg("x_dot"), py::arg("theta"), py::arg("theta_dot"))
      .def_readwrite("x", &CartPoleState::x)
      .def_readwrite("x_dot", &CartPoleState::x_dot)
      .def_readwrite("theta", &CartPoleState::theta)
      .def_readwrite("theta_dot", &CartPoleState::theta_dot)
      .def("as_tuple", [](const CartPoleState& s) {
        return py::make_tuple(s.x, s.x_dot, s.theta, s.theta_dot);
      })
      .def("__eq__", [](const CartPoleState& a, const CartPoleState& b) { return a == b; })
      .def("__repr__", [](const CartPoleState& s) {
        std::ostringstream o;
        o << "CartPoleState(" << s.x << ", " << s.x_dot << ", " << s.theta << ", "
          << s.theta_dot << ")";
        return o.str();
      });

  py::class_<ExperimentConfig>(m, "Config")
      .def(py::init([](py::kwargs kw) {
        ExperimentConfig c;
        for (auto item : kw)
          apply_setting(c, item.first.cast<std::string>(), value_text(item.second));
        return c;
      }))
      .def_static("parse", &parse_config, py::arg("text"))
      .def_static("load", &load_config, py::arg("path"))
      .def("set", [](ExperimentConfig& c, const std::string& k, const py::object& v) {
        apply_setting(c, k, value_text(v));
      })
      .def("apply_profile", [](ExperimentConfig& c, const std::string& p) { apply_profile(c, p); })
      .def("validate", &ExperimentConfig::validate)
      .def_property_readonly("architecture", [](const ExperimentConfig& c) { return to_string(c.architecture); })
      .def_property_readonly("ll_mode", [](const ExperimentConfig& c) { return to_string(c.ll_mode); })
      .def_property_readonly("seeds", &ExperimentConfig::effective_seeds)
      .def_property_readonly("trial_limit", &ExperimentConfig::effective_trial_limit)
      .def_readonly("servo_rate_hz", &ExperimentConfig::servo_rate_hz)
      .def_readonly("success_steps", &ExperimentConfig::success_steps)
      .def_readonly("gamma", &ExperimentConfig::gamma);

  m.def("accelerations", [](const CartPoleState& s, double force) {
    const auto a = accelerations(s, force, PhysicsParams{});
    return py::make_tuple(a.x_ddot, a.theta_ddot);
  }, py::arg("state"), py::arg("force"), "(x_ddot, theta_ddot) for the default plant");
  m.def("balancing_force", [](double theta) { return balancing_force(theta, PhysicsParams{}); },
        py::arg("theta"));
  m.def("step", [](const CartPoleState& s, double action, double servo_rate_hz) {
    return step(s, action, PhysicsParams::at_servo_rate(servo_rate_hz));
  }, py::arg("state"), py::arg("action"), py::arg("servo_rate_hz") = 50.0);

  m.def("influence_error", [](const Vector& d, double k1, double k2) {
    RIParams ri;
    ri.k1 = k1;
    ri.k2 = k2;
    return influence_error(d, ri);
  }, py::arg("delta_plan"), py::arg("k1") = 0.35, py::arg("k2") = 0.14);
  m.def("induction_term", [](double di, double dj, double k1, double k2) {
    RIParams ri;
    ri.k1 = k1;
    ri.k2 = k2;
    return induction_term(di, dj, ri);
  }, py::arg("delta_i"), py::arg("delta_j"), py::arg("k1") = 0.35, py::arg("k2") = 0.14);

  m.def("gradcheck", [](std::uint64_t seed, std::size_t configs) {
    py::list out;
    for (const auto& r : run_all_gradchecks(seed, configs)) {
      py::dict d;
      d["suite"] = r.suite;
      d["configurations"] = r.configurations;
      d["max_rel_error"] = r.max_rel_error;
      d["tolerance"] = r.tolerance;
      d["passed"] = r.passed();
      out.append(d);
    }
    return out;
  }, py::arg("seed") = 1, py::arg("configs") = 50);

  m.def("run_experiment", [](const ExperimentConfig& c, std::uint64_t seed) {
    ExperimentResult r;
    {
      py::gil_scoped_release release;
      r = run_experiment(c, seed);
    }
    return result_dict(r);
  }, py::arg("config"), py::arg("seed"));

  m.def("run_batch", [](const ExperimentConfig& c, const std::string& out_dir) {
    BatchResult b;
    {
      py::gil_scoped_release release;
      b = run_batch(c);
      if (!out_dir.empty()) export_batch(out_dir, b);
    }
    py::dict d;
    d["summary"] = summary_dict(b.summary);
    py::list exps;
    for (const auto& e : b.experiments) exps.append(result_dict(e));
    d["experiments"] = exps;
    return d;
  }, py::arg("config"), py::arg("out_dir") = "",
     "Runs every seed; writes trials/series/summary CSVs when out_dir is given.");
}
