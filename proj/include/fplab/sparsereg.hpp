#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fplab/rng.hpp"

namespace fplab {

// Sparse linear regression testing problem: X is m x n i.i.d. standard
// Gaussian; under the planted model Y = (k + sigma^2)^{-1/2} (X u + W) for a
// uniform k-sparse binary u and W ~ N(0, sigma^2 I).
struct SRParams {
    int n = 0;
    int k = 0;
    int m = 0;
    double sigma2 = 1.0;
    std::optional<double> theta;  // sparsity exponent, bookkeeping only
    std::optional<double> rate;   // sample-rate constant R, bookkeeping only

    // Finite-size rendering of the scaling regime: k = round(n^theta),
    // m = round(R (1-theta) k log n), sigma^2 = k / log k unless overridden.
    static SRParams from_theta_rate(int n, double theta, double rate,
                                    std::optional<double> sigma2 = std::nullopt);
    void validate() const;
    double realized_theta() const;
    double realized_rate() const;
};

struct SRInstance {
    SRParams params;
    std::vector<double> x;        // row-major m x n
    std::vector<double> y;        // length m
    std::vector<std::uint8_t> u;  // planted support indicator (planted only)
    bool planted = false;
    std::uint64_t seed = 0;
};

// Phase boundary for detection by degree-o(k) polynomials.
double r_ld(double theta);

SRInstance sample(const SRParams& params, bool planted, std::uint64_t seed);

// Gaussian upper tail P(N(0,1) >= tau).
double q_of_tau(double tau);

struct TestConstants {
    double c = 0.0;
    double c_tilde = 0.0;
    double eta = 0.0;
};

// Constants for the counting test, valid when R > r_ld(theta): chooses the
// branch by R vs 2(1-sqrt(theta))/(1+sqrt(theta)) and backs off by eta (5% of
// the minimum slack, floored at 1e-3), then verifies the four proof-side
// conditions strictly.
TestConstants choose_constants(double theta, double rate);

struct DetectReport {
    double tau = 0.0;
    double c = 0.0;
    double q = 0.0;
    double null_mean = 0.0;  // q n
    double null_sd = 0.0;    // sqrt(q(1-q)n)
    double threshold = 0.0;  // null_mean + 3 null_sd
    long long t_value = 0;   // count statistic T_tau
    bool planted_decision = false;
};

DetectReport detect(const SRInstance& instance, double theta, double rate);

struct RecoverReport {
    double c = 0.0;
    double tau = 0.0;
    std::vector<std::uint8_t> u_hat;
    long long false_positives = 0;
    long long false_negatives = 0;
    long long support_errors = 0;  // ||u_hat - u||_0
};

// Thresholding estimator; requires R > 2 (the window for c is empty below).
RecoverReport recover(const SRInstance& instance, double theta, double rate);

struct GoodEventReport {
    bool holds = false;
    double worst_margin = 0.0;  // min over (ell, S) of Delta(ell) - inner product
    int worst_ell = 0;
    bool exhaustive = true;
    std::size_t splits_checked = 0;
};

// Verifies the cross-inner-product bound over subset splits of the planted
// support: exhaustively for k <= 24, by a random-subset audit of
// `audit_samples` splits for larger k.
GoodEventReport good_event_check(const std::vector<double>& x_row_major, int m, int n,
                                 const std::vector<std::uint8_t>& u,
                                 std::size_t audit_samples = 20000,
                                 std::uint64_t audit_seed = 0);

// Both displayed hypergeometric tail bounds, all ell in [1, k]; the union
// tail bound only applies when k^2/(n-k) <= 1.
bool hypergeom_tail_check(int n, int k);

struct BernsteinReport {
    double threshold_upper = 0.0;
    double threshold_lower = 0.0;
    double emp_upper = 0.0;       // empirical P(sum >= upper threshold)
    double emp_lower = 0.0;       // empirical P(sum <= lower threshold)
    double bound = 0.0;           // e^{-y}
    double sigma = 0.0;           // binomial sd of the bound estimate
    bool holds = false;
};

// Empirical two-sided tail check for sums of a g^2 + b g g' variables.
BernsteinReport bernstein_gg_tail_check(double a, double b, int n_terms, double y, int trials,
                                        std::uint64_t seed);

struct SeparationReport {
    double mean_p = 0.0;
    double mean_q = 0.0;
    double var_p = 0.0;
    double var_q = 0.0;
    double ratio = 0.0;  // sqrt(max var) / |mean gap|; +inf on zero gap
};

SeparationReport empirical_separation(const std::function<double(std::uint64_t)>& statistic_p,
                                      const std::function<double(std::uint64_t)>& statistic_q,
                                      int trials, std::uint64_t seed);

// Binary instance file plus JSON sidecar.
void write_instance(const SRInstance& instance, const std::string& path);
SRInstance read_instance(const std::string& path);

} // namespace fplab
