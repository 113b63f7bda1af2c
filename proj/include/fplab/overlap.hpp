#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fplab/rng.hpp"

namespace fplab {

enum class PriorKind { SparseBinary, SparseRademacher, TensorPower, BiasedBoolean, CustomSampler };

// Declarative description of a signal prior. Only the fields relevant to
// `kind` are meaningful.
struct PriorSpec {
    PriorKind kind = PriorKind::SparseBinary;
    int n = 0;                        // dimension (SparseBinary, SparseRademacher, BiasedBoolean)
    int k = 0;                        // sparsity (SparseBinary)
    double rho = 1.0;                 // density in (0,1] (SparseRademacher)
    double eps = 0.0;                 // coordinate magnitude in (0,1) (BiasedBoolean)
    double bias = 0.0;                // coordinate bias in (0,1) (BiasedBoolean)
    int power = 1;                    // tensor power >= 1 (TensorPower)
    std::shared_ptr<PriorSpec> base;  // base prior (TensorPower)
    std::string sampler_id;           // registered sampler (CustomSampler)
    int dim = 0;                      // ambient dimension (CustomSampler)

    static PriorSpec sparse_binary(int n, int k);
    static PriorSpec sparse_rademacher(int n, double rho);
    static PriorSpec tensor_power(PriorSpec base, int power);
    static PriorSpec biased_boolean(int n, double eps, double bias);
    static PriorSpec custom(std::string sampler_id, int dim);

    void validate() const;
    std::string to_json() const;
    static PriorSpec from_json(const std::string& text);
};

// Samplers for CustomSampler priors. A sampler draws one signal vector; it
// may also declare an exact overlap law (support/pmf/M) when one is known.
struct CustomPrior {
    std::function<std::vector<double>(Rng&)> sample;
    bool has_exact_law = false;
    std::vector<double> exact_support;
    std::vector<double> exact_pmf;
    std::optional<double> max_norm_sq;
};

void register_custom_prior(const std::string& id, CustomPrior prior);
const CustomPrior& lookup_custom_prior(const std::string& id);
// Registered by default: "point_mass_unit" (a fixed unit-norm vector).

struct DeviationThreshold {
    double deviations = 0.0;  // D
    double delta = 0.0;       // sup{eps >= 0 : P(|s| >= eps) >= exp(-D)}
};

enum class OverlapMode { Exact, Empirical };

// Law of the overlap s = <u,v> for independent u,v from a prior.
struct OverlapDistribution {
    OverlapMode mode = OverlapMode::Exact;
    std::vector<double> support;           // strictly increasing (Exact)
    std::vector<double> pmf;               // sums to 1 within 1e-12 (Exact)
    std::vector<double> samples;           // i.i.d. draws (Empirical)
    std::uint64_t seed = 0;                // seed used for Empirical draws
    std::optional<double> max_norm_sq;     // sup of ||u||^2 when known

    double tail_prob(double eps) const;    // P(|s| >= eps)
    double moment(int d) const;            // E[s^d]
    double max_abs() const;                // max |s| over support/samples
    DeviationThreshold delta_of_d(double deviations) const;

    void validate() const;
};

// Materializes the overlap law. Exact mode requires an enumerable law
// (SparseBinary, BiasedBoolean, SparseRademacher up to the atom cap,
// TensorPower of an exact base, or a CustomSampler with a declared law).
OverlapDistribution overlap_distribution(const PriorSpec& prior, OverlapMode mode,
                                         std::size_t n_samples = 0, std::uint64_t seed = 0);

DeviationThreshold delta_of_d(const OverlapDistribution& dist, double deviations);
double tail_prob(const OverlapDistribution& dist, double eps);
double moment(const OverlapDistribution& dist, int d);

// Exact hypergeometric pmf P(Hypergeom(n,k,k) = l): overlap of two uniform
// k-subsets of [n]. Used both by the SparseBinary law and the tail checks.
double hypergeom_pmf(int n, int k, int l);

} // namespace fplab
