#include "fplab/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fplab {

namespace {

constexpr double kExpOverflow = 700.0;

struct KahanAcc {
    double sum = 0.0;
    double comp = 0.0;
    void add(double x) {
        const double y = x - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
};

// log(exp(a) + exp(b)) without overflow.
double log_add(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(std::min(a, b) - m));
}

// Expectation of exp(lambda^2 s) over the retained atoms (|s| <= cutoff, or
// all atoms when cutoff is +inf), switching to a log-domain report when the
// linear value would overflow.
CriterionPoint exp_expectation(const OverlapDistribution& dist, double lambda, double cutoff,
                               Criterion tag) {
    CriterionPoint out;
    out.criterion = tag;
    out.lambda = lambda;
    out.delta_used = std::isinf(cutoff) ? 0.0 : cutoff;
    const double l2 = lambda * lambda;

    double max_exponent = -std::numeric_limits<double>::infinity();
    if (dist.mode == OverlapMode::Exact) {
        for (std::size_t i = 0; i < dist.support.size(); ++i)
            if (std::abs(dist.support[i]) <= cutoff)
                max_exponent = std::max(max_exponent, l2 * dist.support[i]);
    } else {
        for (const double s : dist.samples)
            if (std::abs(s) <= cutoff) max_exponent = std::max(max_exponent, l2 * s);
    }
    if (max_exponent == -std::numeric_limits<double>::infinity()) {
        out.value = 0.0;  // nothing retained
        return out;
    }

    if (max_exponent <= kExpOverflow) {
        KahanAcc acc;
        if (dist.mode == OverlapMode::Exact) {
            for (std::size_t i = 0; i < dist.support.size(); ++i)
                if (std::abs(dist.support[i]) <= cutoff)
                    acc.add(dist.pmf[i] * std::exp(l2 * dist.support[i]));
            out.value = acc.sum;
        } else {
            for (const double s : dist.samples)
                if (std::abs(s) <= cutoff) acc.add(std::exp(l2 * s));
            out.value = acc.sum / static_cast<double>(dist.samples.size());
        }
        return out;
    }

    // Log-domain accumulation.
    double log_sum = -std::numeric_limits<double>::infinity();
    if (dist.mode == OverlapMode::Exact) {
        for (std::size_t i = 0; i < dist.support.size(); ++i) {
            if (std::abs(dist.support[i]) > cutoff || dist.pmf[i] == 0.0) continue;
            log_sum = log_add(log_sum, std::log(dist.pmf[i]) + l2 * dist.support[i]);
        }
    } else {
        for (const double s : dist.samples)
            if (std::abs(s) <= cutoff) log_sum = log_add(log_sum, l2 * s);
        log_sum -= std::log(static_cast<double>(dist.samples.size()));
    }
    out.overflowed = true;
    out.log_value = log_sum;
    out.value = log_sum > kExpOverflow ? std::numeric_limits<double>::infinity()
                                       : std::exp(log_sum);
    return out;
}

} // namespace

double truncated_exp(double x, int degree) {
    if (degree < 0) throw std::invalid_argument("degree must be >= 0");
    KahanAcc acc;
    double term = 1.0;
    acc.add(term);
    for (int d = 1; d <= degree; ++d) {
        term *= x / d;
        acc.add(term);
    }
    return acc.sum;
}

std::pair<double, int> truncated_exp_log(double x, int degree) {
    if (degree < 0) throw std::invalid_argument("degree must be >= 0");
    if (x == 0.0) return {0.0, 1};
    // Accumulate positive and negative parts separately in log space.
    const double log_abs_x = std::log(std::abs(x));
    double log_pos = 0.0;  // d = 0 term
    double log_neg = -std::numeric_limits<double>::infinity();
    double log_term = 0.0;
    for (int d = 1; d <= degree; ++d) {
        log_term += log_abs_x - std::log(static_cast<double>(d));
        const bool negative = x < 0.0 && (d % 2 == 1);
        if (negative) log_neg = log_add(log_neg, log_term);
        else log_pos = log_add(log_pos, log_term);
    }
    if (log_neg == -std::numeric_limits<double>::infinity()) return {log_pos, 1};
    if (log_pos >= log_neg) {
        const double diff = log_pos + std::log1p(-std::exp(log_neg - log_pos));
        return {diff, 1};
    }
    const double diff = log_neg + std::log1p(-std::exp(log_pos - log_neg));
    return {diff, -1};
}

CriterionPoint ld(const OverlapDistribution& dist, int degree, double lambda) {
    if (degree < 0) throw std::invalid_argument("LD degree must be >= 0");
    if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
    if (dist.mode == OverlapMode::Empirical && dist.samples.empty())
        throw std::invalid_argument("empirical distribution has no samples");
    CriterionPoint out;
    out.criterion = Criterion::LD;
    out.degree = degree;
    out.lambda = lambda;
    const double l2 = lambda * lambda;
    KahanAcc acc;
    if (dist.mode == OverlapMode::Exact) {
        for (std::size_t i = 0; i < dist.support.size(); ++i)
            acc.add(dist.pmf[i] * truncated_exp(l2 * dist.support[i], degree));
        out.value = acc.sum;
    } else {
        for (const double s : dist.samples) acc.add(truncated_exp(l2 * s, degree));
        out.value = acc.sum / static_cast<double>(dist.samples.size());
    }
    return out;
}

CriterionPoint lo(const OverlapDistribution& dist, double delta, double lambda) {
    if (delta < 0.0) throw std::invalid_argument("overlap cutoff must be >= 0");
    CriterionPoint out = exp_expectation(dist, lambda, delta, Criterion::LO);
    out.delta_used = delta;
    return out;
}

CriterionPoint fp(const OverlapDistribution& dist, double deviations, double lambda) {
    const DeviationThreshold dt = dist.delta_of_d(deviations);
    CriterionPoint out = exp_expectation(dist, lambda, dt.delta, Criterion::FP);
    out.criterion = Criterion::FP;
    out.degree = deviations;
    out.delta_used = dt.delta;
    return out;
}

CriterionPoint chi2_plus_one(const OverlapDistribution& dist, double lambda) {
    return exp_expectation(dist, lambda, std::numeric_limits<double>::infinity(),
                           Criterion::CHI2);
}

EquivalenceReport equiv_easy_check(const OverlapDistribution& dist, int degree, double lambda,
                                   std::optional<double> norm_bound) {
    if (degree < 1 || degree % 2 == 0)
        throw std::invalid_argument("the FP-to-LD direction requires odd degree D >= 1");
    if (!norm_bound) norm_bound = dist.max_norm_sq;
    if (!norm_bound)
        throw std::invalid_argument("norm bound M is required and not recorded on the distribution");
    EquivalenceReport rep;
    rep.degree = degree;
    rep.lambda = lambda;
    rep.norm_bound = *norm_bound;
    rep.degree_tilde = degree * (2.0 + std::log1p(lambda * lambda * *norm_bound));
    rep.lhs = ld(dist, degree, lambda).value;
    rep.rhs = fp(dist, rep.degree_tilde, lambda).value + std::exp(-static_cast<double>(degree));
    rep.holds = rep.lhs <= rep.rhs + kTheoremRelSlack * std::max(1.0, std::abs(rep.rhs));
    return rep;
}

HardDirectionReport equiv_hard_check(const OverlapDistribution& dist, int degree, double lambda,
                                     double eps) {
    if (degree < 2 || degree % 2 == 1)
        throw std::invalid_argument("the LD-to-FP direction requires even degree D >= 2");
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0,1)");
    HardDirectionReport rep;
    rep.degree = degree;
    rep.lambda = lambda;
    rep.eps = eps;
    rep.ld_value = ld(dist, degree, (1.0 + eps) * lambda).value;
    rep.fp_value = fp(dist, degree, lambda).value;
    rep.premise_rhs = std::pow(1.0 + eps, degree) / (std::exp(1.0) * degree);
    const double slack_p = kTheoremRelSlack * std::max(1.0, std::abs(rep.premise_rhs));
    rep.premise_holds = rep.ld_value <= rep.premise_rhs + slack_p;
    const double rhs = rep.ld_value + eps;
    const double slack_c = kTheoremRelSlack * std::max(1.0, std::abs(rhs));
    rep.conclusion_holds = rep.fp_value <= rhs + slack_c;
    return rep;
}

CriterionCurve curve_scan(const OverlapDistribution& dist, Criterion criterion,
                          std::span<const double> degree_grid,
                          std::span<const double> lambda_grid) {
    CriterionCurve curve;
    std::vector<double> lambdas(lambda_grid.begin(), lambda_grid.end());
    std::vector<double> degrees(degree_grid.begin(), degree_grid.end());
    std::sort(lambdas.begin(), lambdas.end());
    std::sort(degrees.begin(), degrees.end());
    for (const double lam : lambdas) {
        switch (criterion) {
            case Criterion::LD:
                for (const double d : degrees)
                    curve.points.push_back(ld(dist, static_cast<int>(std::llround(d)), lam));
                break;
            case Criterion::FP:
                for (const double d : degrees) curve.points.push_back(fp(dist, d, lam));
                break;
            case Criterion::LO:
                // The degree grid doubles as the overlap-cutoff grid here.
                for (const double d : degrees) curve.points.push_back(lo(dist, d, lam));
                break;
            case Criterion::CHI2:
                curve.points.push_back(chi2_plus_one(dist, lam));
                break;
        }
    }
    return curve;
}

} // namespace fplab
