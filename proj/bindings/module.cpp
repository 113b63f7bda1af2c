#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fplab/boolean.hpp"
#include "fplab/criteria.hpp"
#include "fplab/hermite.hpp"
#include "fplab/mcmc.hpp"
#include "fplab/overlap.hpp"
#include "fplab/potential.hpp"
#include "fplab/sparsereg.hpp"

namespace py = pybind11;
using namespace fplab;

namespace {

py::dict point_to_dict(const CriterionPoint& p) {
    py::dict d;
    d["degree"] = p.degree;
    d["lambda"] = p.lambda;
    d["delta_used"] = p.delta_used;
    d["value"] = p.value;
    d["overflowed"] = p.overflowed;
    d["log_value"] = p.log_value;
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Low-degree and Franz-Parisi hardness criteria laboratory";

    py::enum_<OverlapMode>(m, "OverlapMode")
        .value("EXACT", OverlapMode::Exact)
        .value("EMPIRICAL", OverlapMode::Empirical);

    py::class_<PriorSpec>(m, "PriorSpec")
        .def_static("sparse_binary", &PriorSpec::sparse_binary, py::arg("n"), py::arg("k"))
        .def_static("sparse_rademacher", &PriorSpec::sparse_rademacher, py::arg("n"),
                    py::arg("rho"))
        .def_static("tensor_power", &PriorSpec::tensor_power, py::arg("base"), py::arg("power"))
        .def_static("biased_boolean", &PriorSpec::biased_boolean, py::arg("n"), py::arg("eps"),
                    py::arg("bias"))
        .def_static("custom", &PriorSpec::custom, py::arg("sampler_id"), py::arg("dim") = 0)
        .def("to_json", &PriorSpec::to_json)
        .def_static("from_json", &PriorSpec::from_json);

    py::class_<DeviationThreshold>(m, "DeviationThreshold")
        .def_readonly("deviations", &DeviationThreshold::deviations)
        .def_readonly("delta", &DeviationThreshold::delta);

    py::class_<OverlapDistribution>(m, "OverlapDistribution")
        .def_readonly("support", &OverlapDistribution::support)
        .def_readonly("pmf", &OverlapDistribution::pmf)
        .def_readonly("samples", &OverlapDistribution::samples)
        .def_property_readonly("max_norm_sq",
                               [](const OverlapDistribution& d) -> py::object {
                                   if (d.max_norm_sq) return py::float_(*d.max_norm_sq);
                                   return py::none();
                               })
        .def("tail_prob", &OverlapDistribution::tail_prob, py::arg("eps"))
        .def("moment", &OverlapDistribution::moment, py::arg("d"))
        .def("delta_of_d", &OverlapDistribution::delta_of_d, py::arg("deviations"));

    m.def("overlap_distribution", &overlap_distribution, py::arg("prior"), py::arg("mode"),
          py::arg("n_samples") = 0, py::arg("seed") = 0);

    m.def("truncated_exp", &truncated_exp, py::arg("x"), py::arg("degree"));
    m.def("truncated_exp_log", &truncated_exp_log, py::arg("x"), py::arg("degree"));
    m.def("ld", [](const OverlapDistribution& d, int degree, double lam) {
        return point_to_dict(ld(d, degree, lam));
    });
    m.def("lo", [](const OverlapDistribution& d, double delta, double lam) {
        return point_to_dict(lo(d, delta, lam));
    });
    m.def("fp", [](const OverlapDistribution& d, double deviations, double lam) {
        return point_to_dict(fp(d, deviations, lam));
    });
    m.def("chi2_plus_one", [](const OverlapDistribution& d, double lam) {
        return point_to_dict(chi2_plus_one(d, lam));
    });
    m.def("equiv_easy_check",
          [](const OverlapDistribution& d, int degree, double lam, py::object bound) {
              std::optional<double> b;
              if (!bound.is_none()) b = bound.cast<double>();
              const EquivalenceReport rep = equiv_easy_check(d, degree, lam, b);
              py::dict out;
              out["degree"] = rep.degree;
              out["lambda"] = rep.lambda;
              out["norm_bound"] = rep.norm_bound;
              out["degree_tilde"] = rep.degree_tilde;
              out["lhs"] = rep.lhs;
              out["rhs"] = rep.rhs;
              out["holds"] = rep.holds;
              return out;
          },
          py::arg("dist"), py::arg("degree"), py::arg("lambda"), py::arg("norm_bound") = py::none());
    m.def("equiv_hard_check",
          [](const OverlapDistribution& d, int degree, double lam, double eps) {
              const HardDirectionReport rep = equiv_hard_check(d, degree, lam, eps);
              py::dict out;
              out["ld"] = rep.ld_value;
              out["fp"] = rep.fp_value;
              out["premise_rhs"] = rep.premise_rhs;
              out["premise_holds"] = rep.premise_holds;
              out["conclusion_holds"] = rep.conclusion_holds;
              return out;
          });

    py::class_<HermiteBasis>(m, "HermiteBasis")
        .def(py::init<int>(), py::arg("max_degree"))
        .def("coeffs", &HermiteBasis::coeffs, py::arg("k"))
        .def("evaluate", &HermiteBasis::evaluate, py::arg("k"), py::arg("x"))
        .def("shifted_mean", &HermiteBasis::shifted_mean, py::arg("k"), py::arg("mean"))
        .def("quadrature_inner", &HermiteBasis::quadrature_inner, py::arg("j"), py::arg("k"));
    m.def("projected_inner",
          [](const HermiteBasis& basis, const std::vector<double>& a,
             const std::vector<double>& b, int degree) {
              return projected_inner(basis, a, b, degree);
          });
    m.def("projected_inner_exact_degree",
          [](const HermiteBasis& basis, const std::vector<double>& a,
             const std::vector<double>& b, int degree) {
              return projected_inner_exact_degree(basis, a, b, degree);
          });
    m.def("norm_upper_check", &norm_upper_check);
    m.def("factorial_bounds_check", &factorial_bounds_check);

    py::class_<WignerParams>(m, "WignerParams")
        .def(py::init([](double lam, double rho) {
                 WignerParams p{lam, rho};
                 p.validate();
                 return p;
             }),
             py::arg("lambda"), py::arg("rho"))
        .def_readonly("rho", &WignerParams::rho);
    m.def("ternary_entropy", &ternary_entropy);
    m.def("phi", [](double x, const WignerParams& p) {
        const PhiPoint r = phi(x, p);
        return py::make_tuple(r.value, r.p0_star);
    });
    m.def("curvature_at_zero", &curvature_at_zero);
    m.def("classify_landscape", [](const WignerParams& p, int grid) {
        return landscape_name(classify_landscape(p, grid));
    });

    m.def("boolean_inner", [](const std::vector<double>& u, const std::vector<double>& v) {
        return boolean_inner(u, v);
    });
    py::class_<BiasedProductPrior>(m, "BiasedProductPrior")
        .def(py::init([](int n, double eps, double bias) {
                 BiasedProductPrior p{n, eps, bias};
                 p.validate();
                 return p;
             }),
             py::arg("n"), py::arg("eps"), py::arg("bias"));
    m.def("ld_boolean", &ld_boolean, py::arg("prior"), py::arg("degree"));
    m.def("fp_biased_exact", &fp_biased_exact, py::arg("prior"), py::arg("deviations"));

    m.def("r_ld", &r_ld, py::arg("theta"));
    m.def("q_of_tau", &q_of_tau, py::arg("tau"));
    m.def("choose_constants", [](double theta, double rate) {
        const TestConstants tc = choose_constants(theta, rate);
        return py::make_tuple(tc.c, tc.c_tilde);
    });
    m.def("detect_trial",
          [](int n, double theta, double rate, bool planted, std::uint64_t seed) {
              const SRParams params = SRParams::from_theta_rate(n, theta, rate);
              const SRInstance inst = sample(params, planted, seed);
              const DetectReport rep = detect(inst, theta, rate);
              py::dict out;
              out["tau"] = rep.tau;
              out["t_value"] = rep.t_value;
              out["threshold"] = rep.threshold;
              out["planted_decision"] = rep.planted_decision;
              return out;
          },
          py::arg("n"), py::arg("theta"), py::arg("rate"), py::arg("planted"), py::arg("seed"));
    m.def("hypergeom_tail_check", &hypergeom_tail_check, py::arg("n"), py::arg("k"));

    py::class_<StateSpace>(m, "StateSpace")
        .def_static("subset_sphere", &StateSpace::subset_sphere, py::arg("n"), py::arg("k"))
        .def_static("rademacher_tensor", &StateSpace::rademacher_tensor, py::arg("n"),
                    py::arg("power"))
        .def("state_count", &StateSpace::state_count)
        .def("uniform_overlap_law", &StateSpace::uniform_overlap_law);
    m.def("chain_overlap_trace",
          [](const StateSpace& space, double lam, double beta, double delta_locality,
             std::size_t steps, std::uint64_t seed) {
              const GibbsSystem sys =
                  make_system(space, space.canonical_state(), lam, beta, seed);
              return run_chain(sys, delta_locality, steps, space.canonical_state(), 0).overlaps;
          },
          py::arg("space"), py::arg("lambda"), py::arg("beta"), py::arg("delta_locality"),
          py::arg("steps"), py::arg("seed"));
}
