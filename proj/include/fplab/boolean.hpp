#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "fplab/rng.hpp"

namespace fplab {

// Likelihood inner product for biased product measures on the hypercube:
// <L_u, L_v> = prod_i (1 + u_i v_i) for bias vectors u, v in [-1,1]^n.
double boolean_inner(std::span<const double> u, std::span<const double> v);

// i.i.d. coordinates: +eps with probability (1+bias)/2, -eps otherwise.
struct BiasedProductPrior {
    int n = 0;
    double eps = 0.0;
    double bias = 0.0;
    void validate() const;
};

// LD(D) = sum over subsets |S| <= D of E[prod_S u_i]E[prod_S v_i]; for the
// i.i.d. prior this collapses to sum_d C(n,d) (eps*bias)^(2d). Note the d = 0
// (empty set) term contributes 1, so the returned value is 1 + the
// nonconstant mass n (eps*bias)^2 + ... .
double ld_boolean(const BiasedProductPrior& prior, int degree);

// Exact FP(D) for the biased product prior, via the agreement-count
// binomial law; all products are accumulated in log domain.
double fp_biased_exact(const BiasedProductPrior& prior, double deviations);

// Planted dense-and-sparse subgraph: dense set of density delta, sparse set
// of density c*delta, entries +/-0.9 on the respective planted blocks.
struct DenseSparseSpec {
    int n = 0;
    double delta = 0.0;  // dense-set density
    double c = 0.0;      // sparse-set ratio (c*delta is the sparse density)
    double signal = 0.9;
    void validate() const;
};

struct VertexPair {
    std::vector<int> dense;   // S
    std::vector<int> sparse;  // T
};

// log <L_u, L_v> from the four pruned-set overlap counts; the pruning
// convention S' = S \ T, T' = T \ S is applied to both pairs first.
double dense_sparse_inner_log(const DenseSparseSpec& spec, const VertexPair& a,
                              const VertexPair& b);
double dense_sparse_inner(const DenseSparseSpec& spec, const VertexPair& a, const VertexPair& b);

VertexPair sample_dense_sparse(const DenseSparseSpec& spec, Rng& rng);

// Expected edge bias E[u_ij] under the pruned-set convention; LD(1)-1 equals
// C(n,2) times its square.
double dense_sparse_edge_mean(const DenseSparseSpec& spec);

// Subsampled support: T draws, returned only if no unordered pair of draws
// triggers the event.
template <typename Item>
struct SubsampleResult {
    bool success = false;
    std::vector<Item> support;
    std::pair<std::size_t, std::size_t> offending_pair{0, 0};
};

template <typename Item>
SubsampleResult<Item> subsample_prior(const std::function<Item(Rng&)>& sampler,
                                      const std::function<bool(const Item&, const Item&)>& pair_event,
                                      std::size_t draws, std::uint64_t seed) {
    SubsampleResult<Item> out;
    out.support.reserve(draws);
    for (std::size_t i = 0; i < draws; ++i) {
        Rng rng(seed, "subsample_prior", i);
        out.support.push_back(sampler(rng));
    }
    for (std::size_t i = 0; i < out.support.size(); ++i) {
        for (std::size_t j = i + 1; j < out.support.size(); ++j) {
            if (pair_event(out.support[i], out.support[j])) {
                out.success = false;
                out.offending_pair = {i, j};
                return out;
            }
        }
    }
    out.success = true;
    return out;
}

} // namespace fplab
