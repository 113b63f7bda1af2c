#include "fplab/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fplab {

namespace {

double log_add(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(std::min(a, b) - m));
}

double choose(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
}

// Distinct draws without replacement from [0, n), sorted (Floyd's method).
std::vector<int> sample_positions(int n, int k, Rng& rng) {
    std::vector<int> out;
    out.reserve(k);
    for (int j = n - k; j < n; ++j) {
        const int t = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(j) + 1));
        if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
        else out.push_back(j);
    }
    std::sort(out.begin(), out.end());
    return out;
}

int signs_dot(const std::vector<std::int8_t>& a, const std::vector<std::int8_t>& b) {
    int s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<int>(a[i]) * b[i];
    return s;
}

// Move classes reachable within the locality bound: ell-swaps for
// SubsetSphere, d-flips for RademacherTensor, with cumulative proposal
// weights. The ball size is state-independent, so uniform proposals on it
// are symmetric.
struct MoveTable {
    std::vector<int> sizes;       // ell (or d) per class
    std::vector<double> weight;   // neighborhood count per class
    double total = 0.0;
    int pick(Rng& rng) const {
        const double u = rng.next_double() * total;
        double acc = 0.0;
        for (std::size_t i = 0; i < sizes.size(); ++i) {
            acc += weight[i];
            if (u < acc) return sizes[i];
        }
        return sizes.back();
    }
};

MoveTable move_table(const StateSpace& space, double delta_locality) {
    MoveTable table;
    if (space.kind == StateSpace::Kind::SubsetSphere) {
        const int swap_cap = std::min(space.k, space.n - space.k);
        for (int ell = 1; ell <= swap_cap; ++ell) {
            const double dist = std::sqrt(2.0 * ell / space.k);
            if (dist > delta_locality + 1e-12) break;
            table.sizes.push_back(ell);
            table.weight.push_back(choose(space.k, ell) * choose(space.n - space.k, ell));
        }
    } else {
        // For even powers the flip distance is not monotone in d (flipping
        // everything returns the same state), so scan all classes and keep
        // the ones that actually move within the bound.
        for (int d = 1; d <= space.n; ++d) {
            const double ov = std::pow((space.n - 2.0 * d) / space.n, space.power);
            const double dist = std::sqrt(std::max(0.0, 2.0 - 2.0 * ov));
            if (dist <= 1e-12 || dist > delta_locality + 1e-12) continue;
            table.sizes.push_back(d);
            table.weight.push_back(choose(space.n, d));
        }
    }
    for (const double w : table.weight) table.total += w;
    if (table.sizes.empty())
        throw std::invalid_argument("locality bound admits no moves on this space");
    return table;
}

} // namespace

StateSpace StateSpace::subset_sphere(int n, int k) {
    if (n < 1 || k < 1 || k >= n) throw std::invalid_argument("subset sphere requires 1 <= k < n");
    StateSpace s;
    s.kind = Kind::SubsetSphere;
    s.n = n;
    s.k = k;
    return s;
}

StateSpace StateSpace::rademacher_tensor(int n, int power) {
    if (n < 1) throw std::invalid_argument("tensor space requires n >= 1");
    if (power < 2 || power % 2 != 0)
        throw std::invalid_argument("tensor power must be even and >= 2");
    StateSpace s;
    s.kind = Kind::RademacherTensor;
    s.n = n;
    s.power = power;
    return s;
}

double StateSpace::state_count() const {
    if (kind == Kind::SubsetSphere) return choose(n, k);
    return std::pow(2.0, n - 1);  // x and -x flatten to the same tensor
}

bool StateSpace::enumerable() const { return state_count() <= 1e6; }

int StateSpace::ambient_dim() const {
    if (kind == Kind::SubsetSphere) return n;
    double d = 1.0;
    for (int i = 0; i < power; ++i) d *= n;
    if (d > 1e8) throw std::invalid_argument("tensor ambient dimension too large");
    return static_cast<int>(d);
}

bool StateSpace::nonnegative_overlaps() const {
    // Subset indicators are entrywise nonnegative; even tensor powers square
    // the sign of the base overlap.
    return true;
}

double StateSpace::overlap(const State& a, const State& b) const {
    if (kind == Kind::SubsetSphere) {
        std::size_t i = 0, j = 0;
        int c = 0;
        while (i < a.subset.size() && j < b.subset.size()) {
            if (a.subset[i] < b.subset[j]) ++i;
            else if (a.subset[i] > b.subset[j]) ++j;
            else { ++c; ++i; ++j; }
        }
        return static_cast<double>(c) / k;
    }
    return std::pow(static_cast<double>(signs_dot(a.signs, b.signs)) / n, power);
}

double StateSpace::min_move_norm() const {
    if (kind == Kind::SubsetSphere) return std::sqrt(2.0 / k);
    const double ov = std::pow((n - 2.0) / n, power);
    return std::sqrt(2.0 - 2.0 * ov);
}

State StateSpace::canonical_state() const {
    State s;
    if (kind == Kind::SubsetSphere) {
        s.subset.resize(k);
        for (int i = 0; i < k; ++i) s.subset[i] = i;
    } else {
        s.signs.assign(n, 1);
    }
    return s;
}

State StateSpace::random_state(Rng& rng) const {
    State s;
    if (kind == Kind::SubsetSphere) {
        s.subset = sample_positions(n, k, rng);
    } else {
        s.signs.resize(n);
        s.signs[0] = 1;
        for (int i = 1; i < n; ++i) s.signs[i] = rng.next_double() < 0.5 ? 1 : -1;
    }
    return s;
}

std::vector<State> StateSpace::enumerate_states() const {
    if (!enumerable()) throw std::invalid_argument("state space too large to enumerate");
    std::vector<State> states;
    if (kind == Kind::SubsetSphere) {
        State s = canonical_state();
        for (;;) {
            states.push_back(s);
            int i = k - 1;
            while (i >= 0 && s.subset[i] == n - k + i) --i;
            if (i < 0) break;
            ++s.subset[i];
            for (int j = i + 1; j < k; ++j) s.subset[j] = s.subset[j - 1] + 1;
        }
    } else {
        // Fix the first sign to +1; for even powers -x is the same state.
        const std::size_t half = static_cast<std::size_t>(1) << (n - 1);
        for (std::size_t mask = 0; mask < half; ++mask) {
            State s;
            s.signs.resize(n);
            s.signs[0] = 1;
            for (int i = 1; i < n; ++i) s.signs[i] = (mask >> (i - 1)) & 1 ? -1 : 1;
            states.push_back(std::move(s));
        }
    }
    return states;
}

OverlapDistribution StateSpace::uniform_overlap_law() const {
    std::vector<std::pair<double, double>> atoms;
    if (kind == Kind::SubsetSphere) {
        for (int l = 0; l <= k; ++l)
            atoms.emplace_back(static_cast<double>(l) / k, hypergeom_pmf(n, k, l));
    } else {
        const double scale = std::pow(2.0, -n);
        for (int d = 0; d <= n; ++d)
            atoms.emplace_back(std::pow((n - 2.0 * d) / n, power), choose(n, d) * scale);
    }
    std::sort(atoms.begin(), atoms.end());
    OverlapDistribution law;
    law.mode = OverlapMode::Exact;
    for (const auto& [v, p] : atoms) {
        if (!law.support.empty() && v - law.support.back() <= 1e-12) law.pmf.back() += p;
        else {
            law.support.push_back(v);
            law.pmf.push_back(p);
        }
    }
    law.max_norm_sq = 1.0;
    law.validate();
    return law;
}

std::vector<double> draw_observation(const StateSpace& space, const State& truth, double lambda,
                                     std::uint64_t seed) {
    const int dim = space.ambient_dim();
    std::vector<double> y(dim);
    Rng rng(seed, "observation");
    for (int i = 0; i < dim; ++i) y[i] = rng.next_gaussian();
    if (space.kind == StateSpace::Kind::SubsetSphere) {
        const double scale = lambda / std::sqrt(static_cast<double>(space.k));
        for (const int i : truth.subset) y[i] += scale;
    } else {
        const double scale = lambda / std::pow(static_cast<double>(space.n), space.power / 2.0);
        // Flattened rank-one tensor x^{otimes p}.
        std::vector<int> idx(space.power, 0);
        for (int flat = 0; flat < dim; ++flat) {
            int sign = 1, rem = flat;
            for (int axis = 0; axis < space.power; ++axis) {
                sign *= truth.signs[rem % space.n];
                rem /= space.n;
            }
            y[flat] += scale * sign;
        }
    }
    return y;
}

GibbsSystem make_system(StateSpace space, State truth, double lambda, double beta,
                        std::uint64_t seed) {
    if (lambda < 0.0 || beta < 0.0) throw std::invalid_argument("lambda and beta must be >= 0");
    GibbsSystem sys;
    sys.space = space;
    sys.truth = std::move(truth);
    sys.lambda = lambda;
    sys.beta = beta;
    sys.seed = seed;
    sys.observation = draw_observation(space, sys.truth, lambda, seed);
    return sys;
}

double state_energy(const GibbsSystem& system, const State& v) {
    const StateSpace& space = system.space;
    if (space.kind == StateSpace::Kind::SubsetSphere) {
        double s = 0.0;
        for (const int i : v.subset) s += system.observation[i];
        return s / std::sqrt(static_cast<double>(space.k));
    }
    const int dim = space.ambient_dim();
    double s = 0.0;
    for (int flat = 0; flat < dim; ++flat) {
        int sign = 1, rem = flat;
        for (int axis = 0; axis < space.power; ++axis) {
            sign *= v.signs[rem % space.n];
            rem /= space.n;
        }
        s += sign * system.observation[flat];
    }
    return s / std::pow(static_cast<double>(space.n), space.power / 2.0);
}

GibbsTable gibbs_exact(const GibbsSystem& system) {
    GibbsTable table;
    table.states = system.space.enumerate_states();
    table.energy.resize(table.states.size());
    double lz = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < table.states.size(); ++i) {
        table.energy[i] = state_energy(system, table.states[i]);
        lz = log_add(lz, system.beta * table.energy[i]);
    }
    table.log_z = lz;
    table.prob.resize(table.states.size());
    for (std::size_t i = 0; i < table.states.size(); ++i)
        table.prob[i] = std::exp(system.beta * table.energy[i] - lz);
    return table;
}

Regions regions(const GibbsSystem& system, const GibbsTable& table, double deviations,
                double eps) {
    if (!(eps > 0.0 && eps < 0.5)) throw std::invalid_argument("eps must lie in (0, 1/2)");
    if (deviations < 2.0) throw std::invalid_argument("deviations must be >= 2");
    Regions out;
    out.eps = eps;
    out.delta = system.space.uniform_overlap_law().delta_of_d(deviations).delta;
    const double hi = (1.0 + eps) * out.delta;
    for (std::size_t i = 0; i < table.states.size(); ++i) {
        const double ov = system.space.overlap(system.truth, table.states[i]);
        if (std::abs(ov) <= out.delta + 1e-12) out.a_index.push_back(i);
        else if (ov > out.delta && ov <= hi + 1e-12) out.b_index.push_back(i);
    }
    if (out.a_index.empty()) throw std::runtime_error("region A is empty");
    return out;
}

double barrier_lambda_tilde(const GibbsSystem& system, double eps) {
    const double factor = system.space.nonnegative_overlaps() ? (1.0 + eps) / (1.0 - 2.0 * eps)
                                                              : (2.0 + eps) / (1.0 - 2.0 * eps);
    return std::sqrt(system.beta * system.lambda * factor);
}

BarrierReport barrier_ratio(const GibbsSystem& system, double deviations, double eps,
                            double fp_value) {
    const GibbsTable table = gibbs_exact(system);
    const Regions reg = regions(system, table, deviations, eps);
    BarrierReport rep;
    rep.deviations = deviations;
    rep.eps = eps;
    rep.delta = reg.delta;
    for (const std::size_t i : reg.a_index) rep.a_mass += table.prob[i];
    for (const std::size_t i : reg.b_index) rep.b_mass += table.prob[i];
    rep.ratio = reg.b_index.empty() ? 0.0 : rep.b_mass / rep.a_mass;
    rep.lambda_tilde = barrier_lambda_tilde(system, eps);
    rep.fp_value = fp_value;
    rep.theorem_bound = 2.0 * std::pow(2.0 * fp_value, 1.0 - 2.0 * eps) *
                        std::exp(-eps * deviations);
    rep.bound_holds = rep.ratio <= rep.theorem_bound * (1.0 + 1e-12);
    return rep;
}

namespace {

// Chain state with O(1) membership queries and incremental bookkeeping.
struct ChainCursor {
    const GibbsSystem* system = nullptr;
    State current;
    std::vector<char> member;        // SubsetSphere membership mask
    std::vector<char> truth_member;  // mask of the planted support
    double energy = 0.0;
    int common_with_truth = 0;       // SubsetSphere overlap counter

    void init(const GibbsSystem& sys, const State& start) {
        system = &sys;
        current = start;
        energy = state_energy(sys, current);
        if (sys.space.kind == StateSpace::Kind::SubsetSphere) {
            member.assign(sys.space.n, 0);
            for (const int i : current.subset) member[i] = 1;
            truth_member.assign(sys.space.n, 0);
            for (const int i : sys.truth.subset) truth_member[i] = 1;
            common_with_truth = 0;
            for (const int i : current.subset) common_with_truth += truth_member[i];
        }
    }

    double overlap_with_truth() const {
        if (system->space.kind == StateSpace::Kind::SubsetSphere)
            return static_cast<double>(common_with_truth) / system->space.k;
        return system->space.overlap(system->truth, current);
    }
};

} // namespace

ChainTrace run_chain(const GibbsSystem& system, double delta_locality, std::size_t steps,
                     const State& start, std::uint64_t chain_stream, bool record_states) {
    const StateSpace& space = system.space;
    const MoveTable moves = move_table(space, delta_locality);
    Rng rng(system.seed, "chain", chain_stream);

    ChainCursor cur;
    cur.init(system, start);

    ChainTrace trace;
    trace.overlaps.reserve(steps + 1);
    trace.overlaps.push_back(cur.overlap_with_truth());
    if (record_states) trace.states.push_back(cur.current);

    std::vector<int> removed, added;
    for (std::size_t t = 0; t < steps; ++t) {
        if (space.kind == StateSpace::Kind::SubsetSphere) {
            const int ell = moves.pick(rng);
            removed.clear();
            const std::vector<int> pos = sample_positions(space.k, ell, rng);
            for (const int p : pos) removed.push_back(cur.current.subset[p]);
            added.clear();
            while (static_cast<int>(added.size()) < ell) {
                const int cand = static_cast<int>(rng.next_below(space.n));
                if (cur.member[cand]) continue;
                if (std::find(added.begin(), added.end(), cand) != added.end()) continue;
                added.push_back(cand);
            }
            double delta_e = 0.0;
            for (const int i : added) delta_e += system.observation[i];
            for (const int i : removed) delta_e -= system.observation[i];
            delta_e /= std::sqrt(static_cast<double>(space.k));
            const bool accept =
                delta_e >= 0.0 || rng.next_double() < std::exp(system.beta * delta_e);
            if (accept) {
                for (const int i : removed) {
                    cur.member[i] = 0;
                    cur.common_with_truth -= cur.truth_member[i];
                }
                for (const int i : added) {
                    cur.member[i] = 1;
                    cur.common_with_truth += cur.truth_member[i];
                }
                std::vector<int>& sub = cur.current.subset;
                sub.erase(std::remove_if(sub.begin(), sub.end(),
                                         [&](int i) {
                                             return std::find(removed.begin(), removed.end(), i) !=
                                                    removed.end();
                                         }),
                          sub.end());
                sub.insert(sub.end(), added.begin(), added.end());
                std::sort(sub.begin(), sub.end());
                cur.energy += delta_e;
                ++trace.accepted;
            }
        } else {
            const int d = moves.pick(rng);
            State proposal = cur.current;
            for (const int i : sample_positions(space.n, d, rng))
                proposal.signs[i] = static_cast<std::int8_t>(-proposal.signs[i]);
            const double e_new = state_energy(system, proposal);
            const double delta_e = e_new - cur.energy;
            const bool accept =
                delta_e >= 0.0 || rng.next_double() < std::exp(system.beta * delta_e);
            if (accept) {
                cur.current = std::move(proposal);
                cur.energy = e_new;
                ++trace.accepted;
            }
        }
        trace.overlaps.push_back(cur.overlap_with_truth());
        if (record_states) trace.states.push_back(cur.current);
    }
    return trace;
}

HittingReport hitting_experiment(const GibbsSystem& system, double delta_locality,
                                 double deviations, double eps, std::size_t trials,
                                 std::size_t t_budget, HittingInit init,
                                 std::vector<std::size_t> checkpoints) {
    const GibbsTable table = gibbs_exact(system);
    const Regions reg = regions(system, table, deviations, eps);
    std::sort(checkpoints.begin(), checkpoints.end());

    HittingReport rep;
    rep.delta = reg.delta;
    rep.eps = eps;
    rep.delta_locality = delta_locality;
    rep.trials = trials;
    rep.t_budget = t_budget;
    rep.checkpoints = checkpoints;

    double a_mass = 0.0, b_mass = 0.0;
    for (const std::size_t i : reg.a_index) a_mass += table.prob[i];
    for (const std::size_t i : reg.b_index) b_mass += table.prob[i];
    rep.b_over_a = b_mass / a_mass;

    // Initial state: either the lowest-energy state of A, or a draw from
    // the stationary measure conditioned on A (fresh draw per trial).
    std::size_t worst = reg.a_index.front();
    for (const std::size_t i : reg.a_index)
        if (table.energy[i] < table.energy[worst]) worst = i;

    const double hi = (1.0 + eps) * reg.delta;
    std::vector<std::size_t> tau(trials, t_budget + 1);
    for (std::size_t trial = 0; trial < trials; ++trial) {
        std::size_t start_index = worst;
        if (init == HittingInit::StationaryRestrictedToA) {
            Rng init_rng(system.seed, "hitting_init", trial);
            double target = init_rng.next_double() * a_mass;
            for (const std::size_t i : reg.a_index) {
                target -= table.prob[i];
                start_index = i;
                if (target <= 0.0) break;
            }
        }
        ChainTrace trace = run_chain(system, delta_locality, t_budget, table.states[start_index],
                                     trial);
        for (std::size_t t = 0; t < trace.overlaps.size(); ++t) {
            const double ov = trace.overlaps[t];
            if (ov > reg.delta && ov <= hi + 1e-12) {
                tau[trial] = t;
                break;
            }
        }
    }

    rep.empirical.resize(checkpoints.size());
    rep.conductance_bound.resize(checkpoints.size());
    rep.bound_holds = true;
    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
        std::size_t hits = 0;
        for (const std::size_t t : tau)
            if (t <= checkpoints[c]) ++hits;
        rep.empirical[c] = static_cast<double>(hits) / static_cast<double>(trials);
        rep.conductance_bound[c] = static_cast<double>(checkpoints[c]) * rep.b_over_a;
        const double capped = std::min(1.0, rep.conductance_bound[c]);
        const double sigma = std::sqrt(capped * (1.0 - capped) / static_cast<double>(trials));
        if (rep.empirical[c] > rep.conductance_bound[c] + 3.0 * sigma + 1e-12)
            rep.bound_holds = false;
    }
    return rep;
}

double detailed_balance_residual(const GibbsSystem& system, double delta_locality) {
    const GibbsTable table = gibbs_exact(system);
    const MoveTable moves = move_table(system.space, delta_locality);
    const std::size_t count = table.states.size();
    double residual = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t j = i + 1; j < count; ++j) {
            const double ov = system.space.overlap(table.states[i], table.states[j]);
            const double dist = std::sqrt(std::max(0.0, 2.0 - 2.0 * ov));
            if (dist > delta_locality + 1e-12) continue;
            const double prop = 1.0 / moves.total;
            const double p_ij =
                prop * std::min(1.0, std::exp(system.beta * (table.energy[j] - table.energy[i])));
            const double p_ji =
                prop * std::min(1.0, std::exp(system.beta * (table.energy[i] - table.energy[j])));
            residual += std::abs(table.prob[i] * p_ij - table.prob[j] * p_ji);
        }
    }
    return residual;
}

} // namespace fplab
