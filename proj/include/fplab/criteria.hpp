#pragma once

#include <optional>
#include <span>
#include <vector>

#include "fplab/overlap.hpp"

namespace fplab {

enum class Criterion { LD, FP, LO, CHI2 };

struct CriterionPoint {
    Criterion criterion = Criterion::LD;
    double degree = 0.0;      // degree D (LD) or deviations D (FP); unused for LO/CHI2
    double lambda = 0.0;      // SNR
    double delta_used = 0.0;  // overlap cutoff (FP/LO only)
    double value = 0.0;
    // Set when the linear-domain value overflows; `value` is +inf then.
    bool overflowed = false;
    double log_value = 0.0;
};

// Degree-D Taylor polynomial of exp at x, with compensated accumulation.
double truncated_exp(double x, int degree);

// Log-domain variant for large |x| and high degree: returns (log|value|, sign).
std::pair<double, int> truncated_exp_log(double x, int degree);

CriterionPoint ld(const OverlapDistribution& dist, int degree, double lambda);
CriterionPoint lo(const OverlapDistribution& dist, double delta, double lambda);
CriterionPoint fp(const OverlapDistribution& dist, double deviations, double lambda);
CriterionPoint chi2_plus_one(const OverlapDistribution& dist, double lambda);

struct EquivalenceReport {
    double degree = 0.0;    // odd D
    double lambda = 0.0;
    double norm_bound = 0.0;  // M
    double lhs = 0.0;         // LD(D, lambda)
    double rhs = 0.0;         // FP(D_tilde, lambda) + e^-D
    double degree_tilde = 0.0;
    bool holds = false;
};

// Checks LD(D, lambda) <= FP(D(2+log(1+lambda^2 M)), lambda) + e^-D for odd D.
// M defaults to the distribution's recorded norm bound.
EquivalenceReport equiv_easy_check(const OverlapDistribution& dist, int degree, double lambda,
                                   std::optional<double> norm_bound = std::nullopt);

struct HardDirectionReport {
    double degree = 0.0;  // even D
    double lambda = 0.0;
    double eps = 0.0;
    double ld_value = 0.0;       // LD(D, (1+eps) lambda)
    double fp_value = 0.0;       // FP(D, lambda)
    double premise_rhs = 0.0;    // (1+eps)^D / (e D)
    bool premise_holds = false;
    bool conclusion_holds = false;  // meaningful only when the premise holds
};

// Checks the converse direction: if LD(D,(1+eps)lambda) <= (1+eps)^D/(eD)
// then FP(D,lambda) <= LD(D,(1+eps)lambda) + eps, for even D. The required
// minimum degree D0(eps) is not explicit, so a failed conclusion at small D
// is reported rather than fatal.
HardDirectionReport equiv_hard_check(const OverlapDistribution& dist, int degree, double lambda,
                                     double eps);

struct CriterionCurve {
    std::vector<CriterionPoint> points;  // sorted by (lambda, degree)
};

CriterionCurve curve_scan(const OverlapDistribution& dist, Criterion criterion,
                          std::span<const double> degree_grid,
                          std::span<const double> lambda_grid);

// Relative slack used when deciding whether a theorem inequality holds;
// violations within this factor count as numerical ties.
inline constexpr double kTheoremRelSlack = 1e-9;

} // namespace fplab
