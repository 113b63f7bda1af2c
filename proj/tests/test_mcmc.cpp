#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <vector>

#include "fplab/criteria.hpp"
#include "fplab/mcmc.hpp"

using namespace fplab;

namespace {

GibbsSystem subset_system(int n, int k, double lambda, double beta, std::uint64_t seed) {
    const StateSpace space = StateSpace::subset_sphere(n, k);
    return make_system(space, space.canonical_state(), lambda, beta, seed);
}

} // namespace

TEST_CASE("uniform overlap law of the subset sphere is hypergeometric over k") {
    const StateSpace space = StateSpace::subset_sphere(16, 3);
    const auto law = space.uniform_overlap_law();
    REQUIRE(law.support.size() == 4);
    for (int l = 0; l <= 3; ++l) {
        CHECK(law.support[l] == doctest::Approx(l / 3.0));
        CHECK(law.pmf[l] == doctest::Approx(hypergeom_pmf(16, 3, l)).epsilon(1e-12));
    }
}

TEST_CASE("observation dimensions and zero-SNR symmetry") {
    const StateSpace space = StateSpace::subset_sphere(8, 2);
    const State u = space.canonical_state();
    CHECK(draw_observation(space, u, 0.0, 1).size() == 8);

    // E <u, Y> = 0 at lambda = 0, checked over many seeds at 3 sigma.
    const int trials = 5000;
    double sum = 0.0;
    for (int t = 0; t < trials; ++t) {
        const auto y = draw_observation(space, u, 0.0, 1000 + t);
        double dot = 0.0;
        for (const int i : u.subset) dot += y[i];
        sum += dot / std::sqrt(2.0);
    }
    const double mean = sum / trials;
    CHECK(std::abs(mean) <= 3.0 / std::sqrt(static_cast<double>(trials)));
}

TEST_CASE("high SNR puts the truth at the top of the likelihood") {
    const StateSpace space = StateSpace::subset_sphere(12, 3);
    const State u = space.canonical_state();
    int correct = 0;
    for (int t = 0; t < 100; ++t) {
        const GibbsSystem sys = make_system(space, u, 10.0, 1.0, 500 + t);
        const GibbsTable table = gibbs_exact(sys);
        std::size_t best = 0;
        for (std::size_t i = 1; i < table.states.size(); ++i)
            if (table.energy[i] > table.energy[best]) best = i;
        if (space.overlap(table.states[best], u) == doctest::Approx(1.0)) ++correct;
    }
    CHECK(correct >= 95);
}

TEST_CASE("gibbs_exact normalizes and is uniform at beta = 0") {
    const GibbsSystem sys = subset_system(6, 2, 1.0, 0.0, 3);
    const GibbsTable table = gibbs_exact(sys);
    REQUIRE(table.states.size() == 15);
    double total = 0.0;
    for (const double p : table.prob) {
        CHECK(p == doctest::Approx(1.0 / 15.0).epsilon(1e-12));
        total += p;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("noiseless system gives equal mass to equal-overlap states") {
    const StateSpace space = StateSpace::subset_sphere(6, 2);
    GibbsSystem sys;
    sys.space = space;
    sys.truth = space.canonical_state();
    sys.lambda = 1.0;
    sys.beta = 1.0;
    sys.observation.assign(6, 0.0);  // Z = 0
    const double scale = sys.lambda / std::sqrt(2.0);
    for (const int i : sys.truth.subset) sys.observation[i] = scale;
    const GibbsTable table = gibbs_exact(sys);
    std::map<double, double> mass_by_overlap;
    std::map<double, int> count_by_overlap;
    for (std::size_t i = 0; i < table.states.size(); ++i) {
        const double ov = space.overlap(sys.truth, table.states[i]);
        mass_by_overlap[ov] += table.prob[i];
        ++count_by_overlap[ov];
    }
    for (const auto& [ov, mass] : mass_by_overlap) {
        const double per_state = mass / count_by_overlap[ov];
        // All states at this overlap share the same energy, so same mass.
        for (std::size_t i = 0; i < table.states.size(); ++i)
            if (space.overlap(sys.truth, table.states[i]) == doctest::Approx(ov))
                CHECK(table.prob[i] == doctest::Approx(per_state).epsilon(1e-12));
    }
    const double sum =
        std::accumulate(table.prob.begin(), table.prob.end(), 0.0);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("regions on the subset sphere") {
    const GibbsSystem sys = subset_system(10, 3, 1.0, 1.0, 5);
    const GibbsTable table = gibbs_exact(sys);
    const Regions reg = regions(sys, table, 2.0, 0.2);
    CHECK(reg.delta == doctest::Approx(2.0 / 3.0));
    // B = (2/3, 0.8]: no overlap atom lies there, so B is empty.
    CHECK(reg.b_index.empty());
    CHECK(reg.a_index.size() == table.states.size() - 1);  // everything but u

    const BarrierReport rep = barrier_ratio(sys, 2.0, 0.2, 1.0);
    CHECK(rep.ratio == doctest::Approx(0.0));
    CHECK(rep.bound_holds);
}

TEST_CASE("nontrivial barrier region and beta = 0 counting ratio") {
    const GibbsSystem sys = subset_system(12, 6, 1.0, 0.0, 6);
    const GibbsTable table = gibbs_exact(sys);
    const Regions reg = regions(sys, table, 2.0, 0.3);
    CHECK(reg.delta == doctest::Approx(4.0 / 6.0));
    CHECK(reg.b_index.size() == 36);   // overlap exactly 5/6
    CHECK(reg.a_index.size() == 887);  // all but B and u itself

    const BarrierReport rep = barrier_ratio(sys, 2.0, 0.3, 1.0);
    CHECK(rep.ratio == doctest::Approx(36.0 / 887.0).epsilon(1e-12));
}

TEST_CASE("barrier bound holds at the theorem's claimed rate over seeds") {
    const StateSpace space = StateSpace::subset_sphere(12, 6);
    const double lambda = 1.5, beta = 1.5, deviations = 2.0, eps = 0.3;
    const auto law = space.uniform_overlap_law();
    const GibbsSystem probe = make_system(space, space.canonical_state(), lambda, beta, 0);
    const double lam_tilde = barrier_lambda_tilde(probe, eps);
    const double fp_value = fp(law, deviations + std::log(2.0), lam_tilde).value;

    const int seeds = 300;
    int violations = 0;
    for (int s = 0; s < seeds; ++s) {
        const GibbsSystem sys =
            make_system(space, space.canonical_state(), lambda, beta, 40000 + s);
        if (!barrier_ratio(sys, deviations, eps, fp_value).bound_holds) ++violations;
    }
    const double rate = std::exp(-eps * deviations);
    const double sigma = std::sqrt(rate * (1.0 - rate) / seeds);
    CHECK(static_cast<double>(violations) / seeds <= rate + 3.0 * sigma);
}

TEST_CASE("long-run chain occupancy matches the exact Gibbs masses") {
    const StateSpace space = StateSpace::subset_sphere(10, 3);
    const GibbsSystem sys = make_system(space, space.canonical_state(), 1.0, 1.0, 321);
    const GibbsTable table = gibbs_exact(sys);

    // Exact mass per overlap class with the truth.
    std::map<double, double> exact_mass;
    for (std::size_t i = 0; i < table.states.size(); ++i)
        exact_mass[space.overlap(sys.truth, table.states[i])] += table.prob[i];

    const std::size_t steps = 200000, burn_in = 10000;
    const ChainTrace trace =
        run_chain(sys, std::sqrt(2.0 / 3.0) + 1e-9, steps, space.canonical_state(), 0);
    std::map<double, double> emp_mass;
    for (std::size_t t = burn_in; t < trace.overlaps.size(); ++t)
        emp_mass[trace.overlaps[t]] += 1.0;
    for (auto& [ov, mass] : emp_mass) mass /= static_cast<double>(steps + 1 - burn_in);

    for (const auto& [ov, mass] : exact_mass) {
        if (mass < 0.02) continue;  // skip classes too rare to resolve
        CHECK(std::abs(emp_mass[ov] - mass) <= 0.05);
    }
}

TEST_CASE("the truth joins region A only once delta reaches one") {
    const GibbsSystem sys = subset_system(10, 3, 1.0, 1.0, 15);
    const GibbsTable table = gibbs_exact(sys);
    const Regions far = regions(sys, table, 1e6, 0.2);
    CHECK(far.delta == doctest::Approx(1.0));
    CHECK(far.a_index.size() == table.states.size());  // everything, u included
}

TEST_CASE("chain at beta = 0 accepts everything and mixes to uniform") {
    const GibbsSystem sys = subset_system(6, 2, 1.0, 0.0, 7);
    const double delta_loc = std::sqrt(2.0 / 2.0) + 1e-9;
    const std::size_t steps = 150000;
    const ChainTrace trace =
        run_chain(sys, delta_loc, steps, sys.space.canonical_state(), 0, true);
    CHECK(trace.accepted == steps);

    std::map<std::vector<int>, int> visits;
    for (const State& s : trace.states) ++visits[s.subset];
    CHECK(visits.size() == 15);
    const double expected = static_cast<double>(steps + 1) / 15.0;
    for (const auto& [subset, count] : visits) {
        // Correlated samples: allow a generous multiple of the iid sigma.
        CHECK(std::abs(count - expected) <= 8.0 * std::sqrt(expected));
    }
}

TEST_CASE("locality bound restricts proposals to single swaps") {
    const GibbsSystem sys = subset_system(9, 3, 1.2, 0.7, 8);
    const double delta_loc = std::sqrt(2.0 / 3.0) + 1e-9;
    const ChainTrace trace = run_chain(sys, delta_loc, 5000, sys.space.canonical_state(), 1, true);
    for (std::size_t t = 1; t < trace.states.size(); ++t) {
        const double ov = sys.space.overlap(trace.states[t - 1], trace.states[t]);
        const double dist = std::sqrt(std::max(0.0, 2.0 - 2.0 * ov));
        CHECK(dist <= delta_loc + 1e-9);
        CHECK(std::abs(trace.overlaps[t] - trace.overlaps[t - 1]) <= delta_loc + 1e-9);
    }
}

TEST_CASE("chains replay exactly from the same stream") {
    const GibbsSystem sys = subset_system(10, 3, 1.1, 0.9, 9);
    const double delta_loc = std::sqrt(2.0 / 3.0) + 1e-9;
    const ChainTrace a = run_chain(sys, delta_loc, 2000, sys.space.canonical_state(), 5);
    const ChainTrace b = run_chain(sys, delta_loc, 2000, sys.space.canonical_state(), 5);
    CHECK(a.overlaps == b.overlaps);
    CHECK(a.accepted == b.accepted);
}

TEST_CASE("too-small locality bound throws") {
    const GibbsSystem sys = subset_system(8, 2, 1.0, 1.0, 10);
    CHECK_THROWS(run_chain(sys, 0.5, 10, sys.space.canonical_state(), 0));
}

TEST_CASE("detailed balance residual is tiny on the small sphere") {
    for (const double beta : {0.0, 0.7, 1.5}) {
        const GibbsSystem sys = subset_system(6, 2, 1.0, beta, 11);
        CHECK(detailed_balance_residual(sys, 1.0 + 1e-9) <= 1e-10);
    }
}

TEST_CASE("detailed balance also holds on a tensor space") {
    const StateSpace space = StateSpace::rademacher_tensor(5, 2);
    const GibbsSystem sys = make_system(space, space.canonical_state(), 1.1, 0.9, 22);
    CHECK(detailed_balance_residual(sys, space.min_move_norm() + 1e-9) <= 1e-10);
}

TEST_CASE("hitting probabilities respect the conductance bound") {
    const StateSpace space = StateSpace::subset_sphere(12, 6);
    const GibbsSystem sys = make_system(space, space.canonical_state(), 1.0, 1.0, 12);
    const double delta_loc = std::sqrt(2.0 / 6.0) + 1e-9;
    const HittingReport rep =
        hitting_experiment(sys, delta_loc, 2.0, 0.3, 300, 2000,
                           HittingInit::StationaryRestrictedToA, {1, 10, 100, 1000, 2000});
    CHECK(rep.bound_holds);
    // Empirical CDF is nondecreasing in t.
    for (std::size_t i = 1; i < rep.empirical.size(); ++i)
        CHECK(rep.empirical[i] >= rep.empirical[i - 1]);
}

TEST_CASE("empty shell means the hitting time never fires") {
    const GibbsSystem sys = subset_system(14, 3, 1.5, 1.5, 13);
    const double delta_loc = std::sqrt(2.0 / 3.0) + 1e-9;
    const HittingReport rep = hitting_experiment(sys, delta_loc, 3.0, 0.2, 50, 500,
                                                 HittingInit::StationaryRestrictedToA,
                                                 {10, 100, 500});
    CHECK(rep.b_over_a == doctest::Approx(0.0));
    for (const double p : rep.empirical) CHECK(p == doctest::Approx(0.0));
    CHECK(rep.bound_holds);
}

TEST_CASE("start at the truth trivially exceeds delta from step zero") {
    const GibbsSystem sys = subset_system(10, 3, 10.0, 1.0, 14);
    const double delta = sys.space.uniform_overlap_law().delta_of_d(2.0).delta;
    const ChainTrace trace =
        run_chain(sys, std::sqrt(2.0 / 3.0) + 1e-9, 100, sys.truth, 0);
    CHECK(trace.overlaps[0] == doctest::Approx(1.0));
    CHECK(trace.overlaps[0] > delta);
}

TEST_CASE("rademacher tensor space basics") {
    const StateSpace space = StateSpace::rademacher_tensor(6, 2);
    CHECK(space.ambient_dim() == 36);
    CHECK(space.state_count() == doctest::Approx(32.0));
    CHECK(space.nonnegative_overlaps());

    const auto states = space.enumerate_states();
    REQUIRE(states.size() == 32);
    for (const State& s : states) {
        const double ov = space.overlap(states[0], s);
        CHECK(ov >= 0.0);
        CHECK(ov <= 1.0);
    }

    const auto law = space.uniform_overlap_law();
    CHECK(law.moment(0) == doctest::Approx(1.0).epsilon(1e-12));
    for (const double s : law.support) CHECK(s >= 0.0);

    // Tensor energies agree between the flattened form and a direct chain.
    const GibbsSystem sys = make_system(space, space.canonical_state(), 1.3, 0.8, 21);
    const GibbsTable table = gibbs_exact(sys);
    const double total = std::accumulate(table.prob.begin(), table.prob.end(), 0.0);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    const ChainTrace trace = run_chain(sys, 1.2, 3000, space.canonical_state(), 2);
    CHECK(trace.accepted > 0);
    for (const double ov : trace.overlaps) CHECK(ov >= -1e-12);
}
