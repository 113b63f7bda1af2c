#include "fplab/boolean.hpp"

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

double log_binom_pmf(int n, int a, double p) {
    return std::lgamma(n + 1.0) - std::lgamma(a + 1.0) - std::lgamma(n - a + 1.0) +
           a * std::log(p) + (n - a) * std::log1p(-p);
}

std::vector<int> set_difference_sorted(std::vector<int> a, const std::vector<int>& b) {
    std::vector<int> out;
    std::sort(a.begin(), a.end());
    std::vector<int> bs(b);
    std::sort(bs.begin(), bs.end());
    std::set_difference(a.begin(), a.end(), bs.begin(), bs.end(), std::back_inserter(out));
    return out;
}

std::size_t intersection_count(const std::vector<int>& a, const std::vector<int>& b) {
    std::size_t i = 0, j = 0, c = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) ++i;
        else if (a[i] > b[j]) ++j;
        else { ++c; ++i; ++j; }
    }
    return c;
}

double choose2(std::size_t m) { return 0.5 * static_cast<double>(m) * (m > 0 ? m - 1 : 0); }

} // namespace

double boolean_inner(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) throw std::invalid_argument("bias vectors must share a dimension");
    // Sign tracking with log-domain magnitude; an exact zero factor
    // short-circuits the whole product.
    double log_abs = 0.0;
    int sign = 1;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double f = 1.0 + u[i] * v[i];
        if (f == 0.0) return 0.0;
        if (f < 0.0) sign = -sign;
        log_abs += std::log(std::abs(f));
    }
    return sign * std::exp(log_abs);
}

void BiasedProductPrior::validate() const {
    if (n < 1) throw std::invalid_argument("prior dimension must be >= 1");
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("magnitude must lie in (0,1)");
    if (!(bias > 0.0 && bias < 1.0)) throw std::invalid_argument("bias must lie in (0,1)");
}

double ld_boolean(const BiasedProductPrior& prior, int degree) {
    prior.validate();
    if (degree < 0) throw std::invalid_argument("degree must be >= 0");
    const double r = prior.eps * prior.eps * prior.bias * prior.bias;  // (E u_1)^2
    double total = 1.0;
    double binom = 1.0;  // C(n, d), updated iteratively
    double rpow = 1.0;
    for (int d = 1; d <= std::min(degree, prior.n); ++d) {
        binom *= static_cast<double>(prior.n - d + 1) / d;
        rpow *= r;
        total += binom * rpow;
    }
    return total;
}

double fp_biased_exact(const BiasedProductPrior& prior, double deviations) {
    prior.validate();
    if (deviations < 0.0) throw std::invalid_argument("deviations must be >= 0");
    const int n = prior.n;
    const double e2 = prior.eps * prior.eps;
    const double p_agree = (1.0 + prior.bias * prior.bias) / 2.0;

    // Agreement count A ~ Binomial(n, p_agree); overlap s = eps^2 (2A - n).
    std::vector<double> log_pmf(n + 1);
    for (int a = 0; a <= n; ++a) log_pmf[a] = log_binom_pmf(n, a, p_agree);

    // delta(D) on the |s| atoms, with tail sums accumulated in log domain.
    // |s| = eps^2 |2a - n| takes each value for one or two a's.
    std::vector<std::pair<double, double>> abs_atoms;  // (|s|, log prob)
    for (int a = 0; a <= n; ++a) {
        const double v = e2 * std::abs(2.0 * a - n);
        abs_atoms.emplace_back(v, log_pmf[a]);
    }
    std::sort(abs_atoms.begin(), abs_atoms.end());
    const double log_threshold = -deviations;
    double delta = 0.0;
    double log_tail = -std::numeric_limits<double>::infinity();
    // Walk from the largest |s| downward, growing the tail probability.
    for (std::size_t idx = abs_atoms.size(); idx-- > 0;) {
        log_tail = log_add(log_tail, abs_atoms[idx].second);
        const bool last_of_value = idx == 0 || abs_atoms[idx - 1].first < abs_atoms[idx].first - 1e-12;
        if (last_of_value && log_tail >= log_threshold - 1e-12) {
            delta = abs_atoms[idx].first;
            break;
        }
    }

    // FP = sum over |s| <= delta of pmf(a) * (1+eps^2)^(n/2+Delta) (1-eps^2)^(n/2-Delta).
    double log_sum = -std::numeric_limits<double>::infinity();
    for (int a = 0; a <= n; ++a) {
        const double half_shift = a - n / 2.0;  // Delta
        const double s = 2.0 * e2 * half_shift;
        if (std::abs(s) > delta + 1e-12) continue;
        const double log_inner =
            (n / 2.0 + half_shift) * std::log1p(e2) + (n / 2.0 - half_shift) * std::log1p(-e2);
        log_sum = log_add(log_sum, log_pmf[a] + log_inner);
    }
    return std::exp(log_sum);
}

void DenseSparseSpec::validate() const {
    if (n < 2) throw std::invalid_argument("graph size must be >= 2");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("density must lie in (0,1)");
    if (!(c * delta > 0.0 && c * delta < 1.0))
        throw std::invalid_argument("sparse density c*delta must lie in (0,1)");
}

double dense_sparse_inner_log(const DenseSparseSpec& spec, const VertexPair& a,
                              const VertexPair& b) {
    spec.validate();
    const std::vector<int> sa = set_difference_sorted(a.dense, a.sparse);
    const std::vector<int> ta = set_difference_sorted(a.sparse, a.dense);
    const std::vector<int> sb = set_difference_sorted(b.dense, b.sparse);
    const std::vector<int> tb = set_difference_sorted(b.sparse, b.dense);
    const std::size_t alpha = intersection_count(sa, sb);
    const std::size_t beta = intersection_count(ta, tb);
    const std::size_t gamma = intersection_count(sa, tb);
    const std::size_t eta = intersection_count(ta, sb);
    const double s2 = spec.signal * spec.signal;
    return (choose2(alpha) + choose2(beta)) * std::log1p(s2) +
           (choose2(gamma) + choose2(eta)) * std::log1p(-s2);
}

double dense_sparse_inner(const DenseSparseSpec& spec, const VertexPair& a, const VertexPair& b) {
    return std::exp(dense_sparse_inner_log(spec, a, b));
}

VertexPair sample_dense_sparse(const DenseSparseSpec& spec, Rng& rng) {
    spec.validate();
    VertexPair out;
    for (int i = 0; i < spec.n; ++i) {
        if (rng.next_double() < spec.delta) out.dense.push_back(i);
        if (rng.next_double() < spec.c * spec.delta) out.sparse.push_back(i);
    }
    return out;
}

double dense_sparse_edge_mean(const DenseSparseSpec& spec) {
    // P(i,j both in S') - P(i,j both in T') with S' = S\T, T' = T\S and
    // independent vertex inclusions.
    const double d = spec.delta, cd = spec.c * spec.delta;
    const double p_dense = d * (1.0 - cd);
    const double p_sparse = cd * (1.0 - d);
    return spec.signal * (p_dense * p_dense - p_sparse * p_sparse);
}

} // namespace fplab
