#pragma once

#include <cstdint>
#include <vector>

#include "fplab/overlap.hpp"

namespace fplab {

// A point of the finite transitive-symmetric state space. Exactly one of
// the two representations is populated, matching the space kind.
struct State {
    std::vector<int> subset;          // SubsetSphere: sorted support of size k
    std::vector<std::int8_t> signs;   // RademacherTensor: n entries in {-1,+1}
};

struct StateSpace {
    enum class Kind { SubsetSphere, RademacherTensor };

    Kind kind = Kind::SubsetSphere;
    int n = 0;
    int k = 0;      // SubsetSphere support size
    int power = 2;  // RademacherTensor power (even)

    static StateSpace subset_sphere(int n, int k);
    static StateSpace rademacher_tensor(int n, int power);

    double state_count() const;
    bool enumerable() const;  // state count <= 1e6
    int ambient_dim() const;  // n, or n^power
    bool nonnegative_overlaps() const;
    double overlap(const State& a, const State& b) const;  // states are unit vectors
    double min_move_norm() const;  // smallest nonzero distance between states
    std::vector<State> enumerate_states() const;
    State canonical_state() const;
    State random_state(Rng& rng) const;
    OverlapDistribution uniform_overlap_law() const;
};

// Observation Y = lambda * u + Z together with the Gibbs temperature.
struct GibbsSystem {
    StateSpace space;
    State truth;
    double lambda = 0.0;
    double beta = 0.0;
    std::vector<double> observation;
    std::uint64_t seed = 0;
};

std::vector<double> draw_observation(const StateSpace& space, const State& truth, double lambda,
                                     std::uint64_t seed);
GibbsSystem make_system(StateSpace space, State truth, double lambda, double beta,
                        std::uint64_t seed);

// <v, Y>; the Hamiltonian is its negation.
double state_energy(const GibbsSystem& system, const State& v);

struct GibbsTable {
    std::vector<State> states;
    std::vector<double> energy;  // <v, Y>
    std::vector<double> prob;    // exp(beta <v,Y>) / Z
    double log_z = 0.0;
};

GibbsTable gibbs_exact(const GibbsSystem& system);

struct Regions {
    double delta = 0.0;                // delta(D) of the uniform overlap law
    double eps = 0.0;
    std::vector<std::size_t> a_index;  // |<u,v>| <= delta
    std::vector<std::size_t> b_index;  // <u,v> in (delta, (1+eps) delta]
};

Regions regions(const GibbsSystem& system, const GibbsTable& table, double deviations,
                double eps);

struct BarrierReport {
    double deviations = 0.0;
    double eps = 0.0;
    double delta = 0.0;
    double a_mass = 0.0;
    double b_mass = 0.0;
    double ratio = 0.0;           // nu(B)/nu(A)
    double lambda_tilde = 0.0;
    double fp_value = 0.0;        // FP(D + log 2, lambda_tilde), supplied by the caller
    double theorem_bound = 0.0;   // 2 (2 fp)^{1-2eps} e^{-eps D}
    bool bound_holds = false;
};

double barrier_lambda_tilde(const GibbsSystem& system, double eps);
BarrierReport barrier_ratio(const GibbsSystem& system, double deviations, double eps,
                            double fp_value);

struct ChainTrace {
    std::vector<double> overlaps;  // <u, X_t> for t = 0..steps
    std::size_t accepted = 0;
    std::vector<State> states;     // populated only when record_states is set
};

// Metropolis chain with uniform proposals on the Delta-ball
// {v' : 0 < ||v - v'|| <= Delta}; stationary for nu_beta by detailed balance.
ChainTrace run_chain(const GibbsSystem& system, double delta_locality, std::size_t steps,
                     const State& start, std::uint64_t chain_stream, bool record_states = false);

enum class HittingInit { WorstInA, StationaryRestrictedToA };

struct HittingReport {
    double delta = 0.0;
    double eps = 0.0;
    double delta_locality = 0.0;
    std::size_t trials = 0;
    std::size_t t_budget = 0;
    std::vector<std::size_t> checkpoints;
    std::vector<double> empirical;          // Pr(tau_B <= t) at each checkpoint
    std::vector<double> conductance_bound;  // t nu(B)/nu(A)
    double b_over_a = 0.0;
    bool bound_holds = false;  // empirical <= bound + 3 sigma at every checkpoint
};

HittingReport hitting_experiment(const GibbsSystem& system, double delta_locality,
                                 double deviations, double eps, std::size_t trials,
                                 std::size_t t_budget, HittingInit init,
                                 std::vector<std::size_t> checkpoints);

// Sum over state pairs of |nu(v) P(v,v') - nu(v') P(v',v)|.
double detailed_balance_residual(const GibbsSystem& system, double delta_locality);

} // namespace fplab
