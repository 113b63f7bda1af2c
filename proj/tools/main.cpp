// Command-line laboratory: every experiment is a subcommand driven by a JSON
// config, deterministic under --seed, emitting CSV/JSON artifacts.
//
// Exit codes: 0 success, 2 config error, 3 numerical failure, 4 a check
// subcommand found a violated inequality.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fplab/boolean.hpp"
#include "fplab/criteria.hpp"
#include "fplab/hermite.hpp"
#include "fplab/mcmc.hpp"
#include "fplab/overlap.hpp"
#include "fplab/parallel.hpp"
#include "fplab/potential.hpp"
#include "fplab/sparsereg.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitViolation = 4;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ViolationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunContext {
    json config;
    std::uint64_t seed = 0;
    std::filesystem::path out_dir;
    int threads = 1;
    bool dry_run = false;
};

void require_object(const json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
}

// Strict schema: every present key must be declared.
void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
    require_object(j, where);
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (!allowed.count(key))
            throw ConfigError("unknown key '" + key + "' in " + where);
    }
}

void check_schema_version(const json& j) {
    if (!j.contains("schema_version") || !j["schema_version"].is_number_integer() ||
        j["schema_version"].get<int>() != 1)
        throw ConfigError("config requires \"schema_version\": 1");
}

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::ofstream open_output(const RunContext& ctx, const std::string& name) {
    const std::filesystem::path path = ctx.out_dir / name;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file " + path.string());
    return out;
}

fplab::PriorSpec prior_from_config(const json& j) {
    require_object(j, "prior");
    const std::string kind = j.value("kind", "");
    if (kind == "sparse_binary") {
        reject_unknown_keys(j, {"kind", "n", "k"}, "prior");
        return fplab::PriorSpec::sparse_binary(j.at("n").get<int>(), j.at("k").get<int>());
    }
    if (kind == "sparse_rademacher") {
        reject_unknown_keys(j, {"kind", "n", "rho"}, "prior");
        return fplab::PriorSpec::sparse_rademacher(j.at("n").get<int>(),
                                                   j.at("rho").get<double>());
    }
    if (kind == "biased_boolean") {
        reject_unknown_keys(j, {"kind", "n", "eps", "bias"}, "prior");
        return fplab::PriorSpec::biased_boolean(j.at("n").get<int>(), j.at("eps").get<double>(),
                                                j.at("bias").get<double>());
    }
    if (kind == "tensor_power") {
        reject_unknown_keys(j, {"kind", "power", "base"}, "prior");
        return fplab::PriorSpec::tensor_power(prior_from_config(j.at("base")),
                                              j.at("power").get<int>());
    }
    if (kind == "custom") {
        reject_unknown_keys(j, {"kind", "sampler_id", "dim"}, "prior");
        return fplab::PriorSpec::custom(j.at("sampler_id").get<std::string>(),
                                        j.value("dim", 0));
    }
    throw ConfigError("unknown prior kind '" + kind + "'");
}

fplab::OverlapDistribution distribution_from_config(const RunContext& ctx, const json& j) {
    const fplab::PriorSpec prior = prior_from_config(j.at("prior"));
    const std::string mode = j.value("mode", "exact");
    if (mode == "exact")
        return fplab::overlap_distribution(prior, fplab::OverlapMode::Exact);
    if (mode == "empirical") {
        const std::size_t n_samples = j.value("n_samples", 0ULL);
        return fplab::overlap_distribution(prior, fplab::OverlapMode::Empirical, n_samples,
                                           ctx.seed);
    }
    throw ConfigError("mode must be 'exact' or 'empirical'");
}

std::vector<double> grid_from(const json& j, const std::string& key) {
    if (!j.contains(key)) return {};
    std::vector<double> out;
    for (const auto& v : j.at(key)) out.push_back(v.get<double>());
    return out;
}

// ---------------------------------------------------------------------------
// overlap

int cmd_overlap(const RunContext& ctx) {
    const json& cfg = ctx.config;
    reject_unknown_keys(cfg, {"schema_version", "seed", "prior", "mode", "n_samples",
                              "deviations_grid", "moment_orders", "output"}, "config");
    const fplab::OverlapDistribution dist = distribution_from_config(ctx, cfg);
    const std::vector<double> deviations = grid_from(cfg, "deviations_grid");
    if (ctx.dry_run) return kExitOk;

    json outputs = json::object();
    const json out_cfg = cfg.value("output", json::object());
    reject_unknown_keys(out_cfg, {"distribution_csv", "delta_csv"}, "output");

    if (out_cfg.contains("distribution_csv")) {
        const std::string name = out_cfg["distribution_csv"].get<std::string>();
        std::ofstream out = open_output(ctx, name);
        if (dist.mode == fplab::OverlapMode::Exact) {
            out << "value,pmf\n";
            for (std::size_t i = 0; i < dist.support.size(); ++i)
                out << fmt17(dist.support[i]) << "," << fmt17(dist.pmf[i]) << "\n";
        } else {
            out << "value\n";
            for (const double s : dist.samples) out << fmt17(s) << "\n";
        }
        outputs["distribution_csv"] = name;
    }
    if (out_cfg.contains("delta_csv")) {
        const std::string name = out_cfg["delta_csv"].get<std::string>();
        std::ofstream out = open_output(ctx, name);
        out << "D,delta\n";
        for (const double d : deviations)
            out << fmt17(d) << "," << fmt17(dist.delta_of_d(d).delta) << "\n";
        outputs["delta_csv"] = name;
    }

    json summary = {{"subcommand", "overlap"},
                    {"seed", ctx.seed},
                    {"mode", dist.mode == fplab::OverlapMode::Exact ? "exact" : "empirical"},
                    {"atoms", dist.mode == fplab::OverlapMode::Exact ? dist.support.size()
                                                                     : dist.samples.size()},
                    {"mean", dist.moment(1)},
                    {"outputs", outputs}};
    if (cfg.contains("moment_orders")) {
        json moments = json::object();
        for (const auto& v : cfg.at("moment_orders"))
            moments[std::to_string(v.get<int>())] = dist.moment(v.get<int>());
        summary["moments"] = moments;
    }
    std::cout << summary.dump() << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// criteria

int cmd_criteria(const RunContext& ctx) {
    const json& cfg = ctx.config;
    reject_unknown_keys(cfg, {"schema_version", "seed", "prior", "mode", "n_samples",
                              "criterion", "degree_grid", "lambda_grid", "equiv_easy",
                              "equiv_hard", "output"}, "config");
    const fplab::OverlapDistribution dist = distribution_from_config(ctx, cfg);
    const std::string which = cfg.value("criterion", "ld");
    fplab::Criterion criterion;
    if (which == "ld") criterion = fplab::Criterion::LD;
    else if (which == "fp") criterion = fplab::Criterion::FP;
    else if (which == "lo") criterion = fplab::Criterion::LO;
    else if (which == "chi2") criterion = fplab::Criterion::CHI2;
    else throw ConfigError("criterion must be one of ld, fp, lo, chi2");

    const std::vector<double> degrees = grid_from(cfg, "degree_grid");
    const std::vector<double> lambdas = grid_from(cfg, "lambda_grid");
    if (ctx.dry_run) return kExitOk;

    const fplab::CriterionCurve curve = fplab::curve_scan(dist, criterion, degrees, lambdas);

    json outputs = json::object();
    const json out_cfg = cfg.value("output", json::object());
    reject_unknown_keys(out_cfg, {"curve_csv", "equiv_json"}, "output");
    if (out_cfg.contains("curve_csv")) {
        const std::string name = out_cfg["curve_csv"].get<std::string>();
        std::ofstream out = open_output(ctx, name);
        out << "criterion,D,lambda,delta,value\n";
        for (const auto& p : curve.points)
            out << which << "," << fmt17(p.degree) << "," << fmt17(p.lambda) << ","
                << fmt17(p.delta_used) << "," << fmt17(p.value) << "\n";
        outputs["curve_csv"] = name;
    }

    bool violation = false;
    json equiv_reports = json::array();
    if (cfg.contains("equiv_easy")) {
        for (const auto& e : cfg.at("equiv_easy")) {
            reject_unknown_keys(e, {"degree", "lambda", "norm_bound"}, "equiv_easy entry");
            std::optional<double> bound;
            if (e.contains("norm_bound")) bound = e["norm_bound"].get<double>();
            const auto rep = fplab::equiv_easy_check(dist, e.at("degree").get<int>(),
                                                     e.at("lambda").get<double>(), bound);
            equiv_reports.push_back({{"direction", "easy"},
                                     {"degree", rep.degree},
                                     {"lambda", rep.lambda},
                                     {"norm_bound", rep.norm_bound},
                                     {"degree_tilde", rep.degree_tilde},
                                     {"lhs", rep.lhs},
                                     {"rhs", rep.rhs},
                                     {"holds", rep.holds}});
            if (!rep.holds) violation = true;
        }
    }
    if (cfg.contains("equiv_hard")) {
        // The converse direction only reports: its minimum degree D0(eps) is
        // not explicit, so a failed conclusion at small D is not fatal.
        for (const auto& e : cfg.at("equiv_hard")) {
            reject_unknown_keys(e, {"degree", "lambda", "eps"}, "equiv_hard entry");
            const auto rep = fplab::equiv_hard_check(dist, e.at("degree").get<int>(),
                                                     e.at("lambda").get<double>(),
                                                     e.at("eps").get<double>());
            equiv_reports.push_back({{"direction", "hard"},
                                     {"degree", rep.degree},
                                     {"lambda", rep.lambda},
                                     {"eps", rep.eps},
                                     {"ld", rep.ld_value},
                                     {"fp", rep.fp_value},
                                     {"premise_rhs", rep.premise_rhs},
                                     {"premise_holds", rep.premise_holds},
                                     {"conclusion_holds", rep.conclusion_holds}});
        }
    }
    if (out_cfg.contains("equiv_json")) {
        const std::string name = out_cfg["equiv_json"].get<std::string>();
        std::ofstream out = open_output(ctx, name);
        out << equiv_reports.dump(2) << "\n";
        outputs["equiv_json"] = name;
    }

    const json summary = {{"subcommand", "criteria"}, {"seed", ctx.seed},
                          {"points", curve.points.size()},
                          {"equiv_checks", equiv_reports.size()},
                          {"outputs", outputs}};
    std::cout << summary.dump() << "\n";
    if (violation) throw ViolationError("an equivalence inequality failed");
    return kExitOk;
}

// ---------------------------------------------------------------------------
// potential

int cmd_potential(const RunContext& ctx) {
    const json& cfg = ctx.config;
    reject_unknown_keys(cfg, {"schema_version", "seed", "lambda", "rho", "grid_size", "output"},
                        "config");
    const fplab::WignerParams params{cfg.at("lambda").get<double>(), cfg.at("rho").get<double>()};
    params.validate();
    const int grid_size = cfg.value("grid_size", 401);
    if (ctx.dry_run) return kExitOk;

    const fplab::PotentialCurve curve = fplab::scan_potential(params, grid_size);
    const double curvature = fplab::curvature_at_zero(params);

    json outputs = json::object();
    const json out_cfg = cfg.value("output", json::object());
    reject_unknown_keys(out_cfg, {"curve_csv", "summary_json"}, "output");
    if (out_cfg.contains("curve_csv")) {
        const std::string name = out_cfg["curve_csv"].get<std::string>();
        std::ofstream out = open_output(ctx, name);
        out << "x,phi,p0_star\n";
        for (std::size_t i = 0; i < curve.xs.size(); ++i)
            out << fmt17(curve.xs[i]) << "," << fmt17(curve.values[i]) << ","
                << fmt17(curve.p0_star[i]) << "\n";
        outputs["curve_csv"] = name;
    }
    const json summary = {{"subcommand", "potential"},
                          {"lambda", params.lambda},
                          {"rho", params.rho},
                          {"classification", fplab::landscape_name(curve.classification)},
                          {"curvature_at_zero", curvature},
                          {"phi_at_one", curve.values.back()},
                          {"outputs", outputs}};
    if (out_cfg.contains("summary_json")) {
        const std::string name = out_cfg["summary_json"].get<std::string>();
        std::ofstream out = open_output(ctx, name);
        out << summary.dump(2) << "\n";
    }
    std::cout << summary.dump() << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// mcmc

fplab::StateSpace space_from_config(const json& j) {
    require_object(j, "space");
    const std::string kind = j.value("kind", "");
    if (kind == "subset_sphere") {
        reject_unknown_keys(j, {"kind", "n", "k"}, "space");
        return fplab::StateSpace::subset_sphere(j.at("n").get<int>(), j.at("k").get<int>());
    }
    if (kind == "rademacher_tensor") {
        reject_unknown_keys(j, {"kind", "n", "power"}, "space");
        return fplab::StateSpace::rademacher_tensor(j.at("n").get<int>(),
                                                    j.at("power").get<int>());
    }
    throw ConfigError("space kind must be subset_sphere or rademacher_tensor");
}

int cmd_mcmc(const RunContext& ctx) {
    const json& cfg = ctx.config;
    reject_unknown_keys(cfg, {"schema_version", "seed", "space", "lambda", "beta",
                              "experiment", "deviations", "eps", "seeds", "trials",
                              "t_budget", "delta_locality", "init", "checkpoints", "steps",
                              "output"}, "config");
    const fplab::StateSpace space = space_from_config(cfg.at("space"));
    const double lambda = cfg.at("lambda").get<double>();
    const double beta = cfg.at("beta").get<double>();
    const std::string experiment = cfg.value("experiment", "trace");
    if (ctx.dry_run) return kExitOk;

    json outputs = json::object();
    const json out_cfg = cfg.value("output", json::object());
    reject_unknown_keys(out_cfg, {"report_json", "trace_csv"}, "output");
    json report;

    if (experiment == "barrier") {
        const double deviations = cfg.at("deviations").get<double>();
        const double eps = cfg.at("eps").get<double>();
        const int seeds = cfg.value("seeds", 1);
        const fplab::GibbsSystem probe =
            fplab::make_system(space, space.canonical_state(), lambda, beta, ctx.seed);
        const double lam_tilde = fplab::barrier_lambda_tilde(probe, eps);
        const double fp_value =
            fplab::fp(space.uniform_overlap_law(), deviations + std::log(2.0), lam_tilde).value;

        std::vector<char> holds(seeds, 0);
        std::vector<double> ratios(seeds, 0.0);
        fplab::parallel_for(seeds, ctx.threads, [&](std::size_t i) {
            const fplab::GibbsSystem sys = fplab::make_system(
                space, space.canonical_state(), lambda, beta, ctx.seed + i);
            const fplab::BarrierReport rep =
                fplab::barrier_ratio(sys, deviations, eps, fp_value);
            holds[i] = rep.bound_holds ? 1 : 0;
            ratios[i] = rep.ratio;
        });
        int violations = 0;
        double max_ratio = 0.0;
        for (int i = 0; i < seeds; ++i) {
            if (!holds[i]) ++violations;
            max_ratio = std::max(max_ratio, ratios[i]);
        }
        const fplab::BarrierReport first = fplab::barrier_ratio(probe, deviations, eps, fp_value);
        report = {{"experiment", "barrier"},
                  {"deviations", deviations},
                  {"eps", eps},
                  {"delta", first.delta},
                  {"lambda_tilde", lam_tilde},
                  {"fp_value", fp_value},
                  {"theorem_bound", first.theorem_bound},
                  {"seeds", seeds},
                  {"violations", violations},
                  {"violation_rate", static_cast<double>(violations) / seeds},
                  {"allowed_rate", std::exp(-eps * deviations)},
                  {"max_ratio", max_ratio}};
    } else if (experiment == "hitting") {
        const double deviations = cfg.at("deviations").get<double>();
        const double eps = cfg.at("eps").get<double>();
        const std::size_t trials = cfg.value("trials", std::size_t{100});
        const std::size_t t_budget = cfg.value("t_budget", std::size_t{1000});
        const double delta_locality = cfg.at("delta_locality").get<double>();
        const std::string init = cfg.value("init", "stationary");
        std::vector<std::size_t> checkpoints;
        for (const auto& v : cfg.value("checkpoints", json::array()))
            checkpoints.push_back(v.get<std::size_t>());
        if (checkpoints.empty()) checkpoints = {10, 100, 1000};
        const fplab::GibbsSystem sys =
            fplab::make_system(space, space.canonical_state(), lambda, beta, ctx.seed);
        const fplab::HittingReport rep = fplab::hitting_experiment(
            sys, delta_locality, deviations, eps, trials, t_budget,
            init == "worst" ? fplab::HittingInit::WorstInA
                            : fplab::HittingInit::StationaryRestrictedToA,
            checkpoints);
        report = {{"experiment", "hitting"},
                  {"delta", rep.delta},
                  {"eps", rep.eps},
                  {"delta_locality", rep.delta_locality},
                  {"trials", rep.trials},
                  {"t_budget", rep.t_budget},
                  {"checkpoints", rep.checkpoints},
                  {"empirical", rep.empirical},
                  {"conductance_bound", rep.conductance_bound},
                  {"b_over_a", rep.b_over_a},
                  {"bound_holds", rep.bound_holds}};
    } else if (experiment == "trace") {
        const std::size_t steps = cfg.value("steps", std::size_t{1000});
        const double delta_locality = cfg.at("delta_locality").get<double>();
        const fplab::GibbsSystem sys =
            fplab::make_system(space, space.canonical_state(), lambda, beta, ctx.seed);
        const fplab::ChainTrace trace =
            fplab::run_chain(sys, delta_locality, steps, space.canonical_state(), 0);
        if (out_cfg.contains("trace_csv")) {
            const std::string name = out_cfg["trace_csv"].get<std::string>();
            std::ofstream out = open_output(ctx, name);
            out << "t,overlap\n";
            for (std::size_t t = 0; t < trace.overlaps.size(); ++t)
                out << t << "," << fmt17(trace.overlaps[t]) << "\n";
            outputs["trace_csv"] = name;
        }
        report = {{"experiment", "trace"},
                  {"steps", steps},
                  {"accepted", trace.accepted},
                  {"final_overlap", trace.overlaps.back()}};
    } else {
        throw ConfigError("experiment must be barrier, hitting or trace");
    }

    if (out_cfg.contains("report_json")) {
        const std::string name = out_cfg["report_json"].get<std::string>();
        std::ofstream out = open_output(ctx, name);
        out << report.dump(2) << "\n";
        outputs["report_json"] = name;
    }
    const json summary = {{"subcommand", "mcmc"}, {"seed", ctx.seed}, {"report", report},
                          {"outputs", outputs}};
    std::cout << summary.dump() << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// sparsereg

int cmd_sparsereg(const RunContext& ctx) {
    const json& cfg = ctx.config;
    reject_unknown_keys(cfg, {"schema_version", "seed", "experiment", "n", "theta", "rate",
                              "sigma2", "trials", "theta_grid", "rate_grid", "output"},
                        "config");
    const std::string experiment = cfg.value("experiment", "detect");
    if (ctx.dry_run) return kExitOk;

    json outputs = json::object();
    const json out_cfg = cfg.value("output", json::object());
    reject_unknown_keys(out_cfg, {"report_json", "phase_csv", "instance_bin"}, "output");
    json report;

    const auto params_from = [&](double theta, double rate) {
        std::optional<double> sigma2;
        if (cfg.contains("sigma2") && !cfg.at("sigma2").is_null())
            sigma2 = cfg.at("sigma2").get<double>();
        return fplab::SRParams::from_theta_rate(cfg.at("n").get<int>(), theta, rate, sigma2);
    };

    const auto run_cell = [&](double theta, double rate, int trials, bool planted) {
        const fplab::SRParams params = params_from(theta, rate);
        std::vector<char> decisions(trials, 0);
        std::vector<long long> t_values(trials, 0);
        fplab::parallel_for(trials, ctx.threads, [&](std::size_t i) {
            const fplab::SRInstance inst =
                fplab::sample(params, planted, ctx.seed + 1000 + i);
            const fplab::DetectReport rep = fplab::detect(inst, theta, rate);
            decisions[i] = rep.planted_decision ? 1 : 0;
            t_values[i] = rep.t_value;
        });
        int positive = 0;
        long long t_sum = 0;
        for (int i = 0; i < trials; ++i) {
            positive += decisions[i];
            t_sum += t_values[i];
        }
        const fplab::DetectReport probe =
            fplab::detect(fplab::sample(params, false, ctx.seed), theta, rate);
        return json{{"theta", theta},
                    {"rate", rate},
                    {"k", params.k},
                    {"m", params.m},
                    {"sigma2", params.sigma2},
                    {"trials", trials},
                    {"positive_rate", static_cast<double>(positive) / trials},
                    {"mean_t", static_cast<double>(t_sum) / trials},
                    {"q", probe.q},
                    {"qn", probe.q * params.n}};
    };

    if (experiment == "detect" || experiment == "null_calibration") {
        const double theta = cfg.at("theta").get<double>();
        const double rate = cfg.at("rate").get<double>();
        const int trials = cfg.value("trials", 100);
        const bool planted = experiment == "detect";
        report = run_cell(theta, rate, trials, planted);
        report["experiment"] = experiment;
        if (out_cfg.contains("instance_bin")) {
            const fplab::SRParams params = params_from(theta, rate);
            const fplab::SRInstance inst = fplab::sample(params, planted, ctx.seed + 1000);
            const std::string name = out_cfg["instance_bin"].get<std::string>();
            const std::filesystem::path path = ctx.out_dir / name;
            if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
            fplab::write_instance(inst, path.string());
            outputs["instance_bin"] = name;
        }
    } else if (experiment == "recover") {
        const double theta = cfg.at("theta").get<double>();
        const double rate = cfg.at("rate").get<double>();
        const int trials = cfg.value("trials", 100);
        const fplab::SRParams params = params_from(theta, rate);
        std::vector<long long> errors(trials, 0);
        fplab::parallel_for(trials, ctx.threads, [&](std::size_t i) {
            const fplab::SRInstance inst = fplab::sample(params, true, ctx.seed + 1000 + i);
            errors[i] = fplab::recover(inst, theta, rate).support_errors;
        });
        double mean_err = 0.0;
        for (const long long e : errors) mean_err += static_cast<double>(e);
        mean_err /= trials;
        report = {{"experiment", "recover"},
                  {"theta", theta},
                  {"rate", rate},
                  {"k", params.k},
                  {"m", params.m},
                  {"sigma2", params.sigma2},
                  {"trials", trials},
                  {"mean_support_errors", mean_err},
                  {"error_budget_03k", 0.3 * params.k}};
    } else if (experiment == "phase") {
        const std::vector<double> thetas = grid_from(cfg, "theta_grid");
        const std::vector<double> rates = grid_from(cfg, "rate_grid");
        const int trials = cfg.value("trials", 20);
        json cells = json::array();
        std::string csv = "theta,R,power,fpr,trials\n";
        for (const double theta : thetas) {
            for (const double rate : rates) {
                if (rate <= fplab::r_ld(theta) + 1e-9) {
                    csv += fmt17(theta) + "," + fmt17(rate) + ",,," + std::to_string(trials) +
                           "\n";
                    continue;
                }
                const json planted = run_cell(theta, rate, trials, true);
                const json nulls = run_cell(theta, rate, trials, false);
                csv += fmt17(theta) + "," + fmt17(rate) + "," +
                       fmt17(planted["positive_rate"].get<double>()) + "," +
                       fmt17(nulls["positive_rate"].get<double>()) + "," +
                       std::to_string(trials) + "\n";
                cells.push_back({{"theta", theta},
                                 {"rate", rate},
                                 {"power", planted["positive_rate"]},
                                 {"fpr", nulls["positive_rate"]}});
            }
        }
        if (out_cfg.contains("phase_csv")) {
            const std::string name = out_cfg["phase_csv"].get<std::string>();
            std::ofstream out = open_output(ctx, name);
            out << csv;
            outputs["phase_csv"] = name;
        }
        report = {{"experiment", "phase"}, {"cells", cells}};
    } else if (experiment == "checks") {
        // Deterministic inequality checks; violations exit with code 4.
        bool ok = true;
        json checks = json::object();
        bool hyper = true;
        for (int n = 2; n <= 60 && hyper; ++n)
            for (int k = 1; k <= std::min(n, 8); ++k)
                if (!fplab::hypergeom_tail_check(n, k)) hyper = false;
        checks["hypergeom_tails"] = hyper;
        ok &= hyper;
        const fplab::BernsteinReport bern =
            fplab::bernstein_gg_tail_check(0.0, 1.0, 100, 2.0, 20000, ctx.seed);
        checks["bernstein_gg"] = bern.holds;
        ok &= bern.holds;
        report = {{"experiment", "checks"}, {"checks", checks}, {"all_hold", ok}};
        if (!ok) {
            std::cout << json{{"subcommand", "sparsereg"}, {"report", report}}.dump() << "\n";
            throw ViolationError("a sparse-regression check failed");
        }
    } else {
        throw ConfigError("unknown sparsereg experiment '" + experiment + "'");
    }

    if (out_cfg.contains("report_json")) {
        const std::string name = out_cfg["report_json"].get<std::string>();
        std::ofstream out = open_output(ctx, name);
        out << report.dump(2) << "\n";
        outputs["report_json"] = name;
    }
    const json summary = {{"subcommand", "sparsereg"}, {"seed", ctx.seed}, {"report", report},
                          {"outputs", outputs}};
    std::cout << summary.dump() << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// boolean

int cmd_boolean(const RunContext& ctx) {
    const json& cfg = ctx.config;
    reject_unknown_keys(cfg, {"schema_version", "seed", "experiment", "n", "alpha", "eps",
                              "bias", "deviations_grid", "delta", "c", "trials", "output"},
                        "config");
    const std::string experiment = cfg.value("experiment", "biased_sweep");
    if (ctx.dry_run) return kExitOk;

    json outputs = json::object();
    const json out_cfg = cfg.value("output", json::object());
    reject_unknown_keys(out_cfg, {"sweep_csv", "report_json"}, "output");
    json report;

    if (experiment == "biased_sweep") {
        const int n = cfg.at("n").get<int>();
        double eps, bias;
        if (cfg.contains("alpha")) {
            const double alpha = cfg.at("alpha").get<double>();
            eps = std::pow(n, -(0.25 - 2.0 * alpha));
            bias = std::pow(n, -(0.25 - alpha));
        } else {
            eps = cfg.at("eps").get<double>();
            bias = cfg.at("bias").get<double>();
        }
        const fplab::BiasedProductPrior prior{n, eps, bias};
        std::vector<double> deviations = grid_from(cfg, "deviations_grid");
        if (deviations.empty()) deviations = {1.0, 2.0, 4.0, 8.0};
        std::string csv = "D,FP,LD\n";
        json rows = json::array();
        for (const double d : deviations) {
            const double fp_val = fplab::fp_biased_exact(prior, d);
            const double ld_val =
                fplab::ld_boolean(prior, std::max(0, static_cast<int>(std::llround(d))));
            csv += fmt17(d) + "," + fmt17(fp_val) + "," + fmt17(ld_val) + "\n";
            rows.push_back({{"D", d}, {"FP", fp_val}, {"LD", ld_val}});
        }
        if (out_cfg.contains("sweep_csv")) {
            const std::string name = out_cfg["sweep_csv"].get<std::string>();
            std::ofstream out = open_output(ctx, name);
            out << csv;
            outputs["sweep_csv"] = name;
        }
        report = {{"experiment", "biased_sweep"},
                  {"n", n},
                  {"eps", eps},
                  {"bias", bias},
                  {"ld1_excess", fplab::ld_boolean(prior, 1) - 1.0},
                  {"rows", rows}};
    } else if (experiment == "dense_sparse") {
        const int n = cfg.at("n").get<int>();
        const double delta = cfg.at("delta").get<double>();
        const double c = cfg.at("c").get<double>();
        const int trials = cfg.value("trials", 1000);
        const fplab::DenseSparseSpec spec{n, delta, c, 0.9};
        // Monte Carlo over pair draws of the log inner product.
        double mean_log = 0.0;
        for (int t = 0; t < trials; ++t) {
            fplab::Rng rng(ctx.seed, "dense_sparse_pairs", t);
            const fplab::VertexPair a = fplab::sample_dense_sparse(spec, rng);
            const fplab::VertexPair b = fplab::sample_dense_sparse(spec, rng);
            mean_log += fplab::dense_sparse_inner_log(spec, a, b);
        }
        mean_log /= trials;
        const double edge_mean = fplab::dense_sparse_edge_mean(spec);
        const double ld1_excess =
            0.5 * static_cast<double>(n) * (n - 1) * edge_mean * edge_mean;
        report = {{"experiment", "dense_sparse"},
                  {"n", n},
                  {"delta", delta},
                  {"c", c},
                  {"trials", trials},
                  {"mean_log_inner", mean_log},
                  {"edge_mean", edge_mean},
                  {"ld1_excess", ld1_excess}};
    } else {
        throw ConfigError("unknown boolean experiment '" + experiment + "'");
    }

    if (out_cfg.contains("report_json")) {
        const std::string name = out_cfg["report_json"].get<std::string>();
        std::ofstream out = open_output(ctx, name);
        out << report.dump(2) << "\n";
        outputs["report_json"] = name;
    }
    const json summary = {{"subcommand", "boolean"}, {"seed", ctx.seed}, {"report", report},
                          {"outputs", outputs}};
    std::cout << summary.dump() << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// oracle

int cmd_oracle(const RunContext& ctx) {
    const json& cfg = ctx.config;
    reject_unknown_keys(cfg, {"schema_version", "seed", "max_degree", "n_pairs", "dim_cap",
                              "degree_cap", "tolerance", "output"}, "config");
    const int max_degree = cfg.value("max_degree", 8);
    const int n_pairs = cfg.value("n_pairs", 200);
    const int dim_cap = cfg.value("dim_cap", 3);
    const int degree_cap = cfg.value("degree_cap", 6);
    const double tolerance = cfg.value("tolerance", 1e-8);
    if (ctx.dry_run) return kExitOk;

    const fplab::HermiteBasis basis(max_degree);
    fplab::Rng rng(ctx.seed, "oracle_pairs");
    double worst_total = 0.0, worst_slice = 0.0;
    int failures = 0;
    for (int t = 0; t < n_pairs; ++t) {
        const int dim = 1 + static_cast<int>(rng.next_below(dim_cap));
        const int degree = static_cast<int>(rng.next_below(degree_cap + 1));
        std::vector<double> a(dim), b(dim);
        double dot = 0.0;
        for (int i = 0; i < dim; ++i) {
            a[i] = 3.0 * rng.next_double() - 1.5;
            b[i] = 3.0 * rng.next_double() - 1.5;
            dot += a[i] * b[i];
        }
        const double err_total = std::abs(fplab::projected_inner(basis, a, b, degree) -
                                          fplab::truncated_exp(dot, degree));
        const double err_slice =
            std::abs(fplab::projected_inner_exact_degree(basis, a, b, degree) -
                     std::pow(dot, degree) / std::tgamma(degree + 1.0));
        worst_total = std::max(worst_total, err_total);
        worst_slice = std::max(worst_slice, err_slice);
        if (err_total > tolerance || err_slice > tolerance) ++failures;
    }

    json outputs = json::object();
    const json out_cfg = cfg.value("output", json::object());
    reject_unknown_keys(out_cfg, {"report_json", "basis_csv"}, "output");
    if (out_cfg.contains("basis_csv")) {
        const std::string name = out_cfg["basis_csv"].get<std::string>();
        std::ofstream out = open_output(ctx, name);
        out << "degree,monomial,coefficient\n";
        for (int k = 0; k <= max_degree; ++k) {
            const auto& coeffs = basis.coeffs(k);
            for (std::size_t i = 0; i < coeffs.size(); ++i)
                out << k << "," << i << "," << fmt17(coeffs[i]) << "\n";
        }
        outputs["basis_csv"] = name;
    }
    const json report = {{"n_pairs", n_pairs},
                         {"dim_cap", dim_cap},
                         {"degree_cap", degree_cap},
                         {"tolerance", tolerance},
                         {"worst_projection_error", worst_total},
                         {"worst_slice_error", worst_slice},
                         {"failures", failures}};
    if (out_cfg.contains("report_json")) {
        const std::string name = out_cfg["report_json"].get<std::string>();
        std::ofstream out = open_output(ctx, name);
        out << report.dump(2) << "\n";
        outputs["report_json"] = name;
    }
    const json summary = {{"subcommand", "oracle"}, {"seed", ctx.seed}, {"report", report},
                          {"outputs", outputs}};
    std::cout << summary.dump() << "\n";
    if (failures > 0) throw ViolationError("projection oracle mismatch");
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical laboratory for low-degree and free-energy hardness criteria"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string out_dir = ".";
    int threads = 1;
    bool dry_run = false;

    const std::vector<std::pair<std::string, int (*)(const RunContext&)>> commands = {
        {"overlap", cmd_overlap},     {"criteria", cmd_criteria},
        {"potential", cmd_potential}, {"mcmc", cmd_mcmc},
        {"sparsereg", cmd_sparsereg}, {"boolean", cmd_boolean},
        {"oracle", cmd_oracle},
    };

    for (const auto& [name, fn] : commands) {
        (void)fn;
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON experiment config")->required();
        sub->add_option("--seed", seed, "global seed")->each([&](const std::string&) {
            seed_given = true;
        });
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--threads", threads, "worker threads for trial fan-out");
        sub->add_flag("--dry-run", dry_run, "validate the config and exit");
    }

    CLI11_PARSE(app, argc, argv);

    RunContext ctx;
    try {
        std::ifstream in(config_path);
        if (!in) throw ConfigError("cannot open config file " + config_path);
        ctx.config = json::parse(in);
        check_schema_version(ctx.config);
        ctx.seed = seed_given ? seed : ctx.config.value("seed", std::uint64_t{0});
        ctx.out_dir = out_dir;
        ctx.threads = std::max(1, threads);
        ctx.dry_run = dry_run;
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    for (const auto& [name, fn] : commands) {
        if (!app.get_subcommand(name)->parsed()) continue;
        try {
            return fn(ctx);
        } catch (const ConfigError& e) {
            std::cerr << "config error: " << e.what() << "\n";
            return kExitConfig;
        } catch (const json::exception& e) {
            std::cerr << "config error: " << e.what() << "\n";
            return kExitConfig;
        } catch (const ViolationError& e) {
            std::cerr << "check violation: " << e.what() << "\n";
            return kExitViolation;
        } catch (const std::exception& e) {
            std::cerr << "numerical failure: " << e.what() << "\n";
            return kExitNumerical;
        }
    }
    return kExitConfig;
}
