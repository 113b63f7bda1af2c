#include "fplab/sparsereg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

#include "fplab/overlap.hpp"

namespace fplab {

namespace {

std::vector<int> sample_support(int n, int k, Rng& rng) {
    std::vector<int> out;
    out.reserve(k);
    std::unordered_set<int> seen;
    for (int j = n - k; j < n; ++j) {
        const int t = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(j) + 1));
        if (seen.insert(t).second) out.push_back(t);
        else {
            seen.insert(j);
            out.push_back(j);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

double log_binom(int a, int b) {
    return std::lgamma(a + 1.0) - std::lgamma(b + 1.0) - std::lgamma(a - b + 1.0);
}

} // namespace

SRParams SRParams::from_theta_rate(int n, double theta, double rate,
                                   std::optional<double> sigma2) {
    if (n < 3) throw std::invalid_argument("feature count too small");
    if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("theta must lie in (0,1)");
    if (rate <= 0.0) throw std::invalid_argument("rate must be positive");
    SRParams p;
    p.n = n;
    p.k = std::max(1, static_cast<int>(std::llround(std::pow(n, theta))));
    p.m = std::max(1, static_cast<int>(std::llround(rate * (1.0 - theta) * p.k * std::log(n))));
    p.sigma2 = sigma2 ? *sigma2 : p.k / std::log(static_cast<double>(std::max(p.k, 2)));
    p.theta = theta;
    p.rate = rate;
    p.validate();
    return p;
}

void SRParams::validate() const {
    if (n < 1 || k < 1 || k > n || m < 1) throw std::invalid_argument("invalid SR dimensions");
    if (!(sigma2 > 0.0)) throw std::invalid_argument("noise variance must be positive");
}

double SRParams::realized_theta() const { return std::log(static_cast<double>(k)) / std::log(n); }

double SRParams::realized_rate() const {
    return m / ((1.0 - realized_theta()) * k * std::log(static_cast<double>(n)));
}

double r_ld(double theta) {
    if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("theta must lie in (0,1)");
    const double rt = std::sqrt(theta);
    if (theta < 0.25) return 2.0 * (1.0 - rt) / (1.0 + rt);
    if (theta < 0.5) return (1.0 - 2.0 * theta) / (1.0 - theta);
    return 0.0;
}

SRInstance sample(const SRParams& params, bool planted, std::uint64_t seed) {
    params.validate();
    SRInstance inst;
    inst.params = params;
    inst.planted = planted;
    inst.seed = seed;
    const std::size_t mn = static_cast<std::size_t>(params.m) * params.n;
    inst.x.resize(mn);
    {
        Rng rng(seed, "sr_design");
        for (double& v : inst.x) v = rng.next_gaussian();
    }
    inst.y.resize(params.m);
    if (!planted) {
        Rng rng(seed, "sr_null_response");
        for (double& v : inst.y) v = rng.next_gaussian();
        return inst;
    }
    Rng support_rng(seed, "sr_support");
    const std::vector<int> support = sample_support(params.n, params.k, support_rng);
    inst.u.assign(params.n, 0);
    for (const int j : support) inst.u[j] = 1;
    Rng noise_rng(seed, "sr_noise");
    const double scale = 1.0 / std::sqrt(params.k + params.sigma2);
    const double sigma = std::sqrt(params.sigma2);
    for (int i = 0; i < params.m; ++i) {
        double row = 0.0;
        const double* xi = inst.x.data() + static_cast<std::size_t>(i) * params.n;
        for (const int j : support) row += xi[j];
        inst.y[i] = scale * (row + sigma * noise_rng.next_gaussian());
    }
    return inst;
}

// Complementary Gaussian CDF via erfc; the C library guarantees a few ulp,
// well inside a 1e-10 relative error out to tau = 8 (cross-checked against a
// Mills continued fraction in the tests).
double q_of_tau(double tau) { return 0.5 * std::erfc(tau / std::sqrt(2.0)); }

TestConstants choose_constants(double theta, double rate) {
    if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("theta must lie in (0,1)");
    if (rate <= r_ld(theta))
        throw std::domain_error("no valid constants: R <= R_LD(theta)");
    const double rt = std::sqrt(theta);
    const double branch_point = 2.0 * (1.0 - rt) / (1.0 + rt);
    const double base = std::sqrt(rate * (1.0 - theta));

    const auto conditions_ok = [&](double c, double ct) {
        return 0.0 < ct && ct < c && theta - ct * ct / 2.0 > (1.0 - c * c / 2.0) / 2.0 &&
               theta > ct * ct / 2.0 && base + ct > c;
    };

    const auto build = [&](double eta) {
        TestConstants tc;
        tc.eta = eta;
        if (rate > branch_point) {
            tc.c_tilde = std::sqrt(2.0 * theta) - eta;
            tc.c = base + std::sqrt(2.0 * theta) - 2.0 * eta;
        } else {
            tc.c_tilde = base;
            tc.c = 2.0 * base - eta;
        }
        return tc;
    };

    // eta = 5% of the minimum slack available at eta = 0, floored at 1e-3.
    double slack;
    if (rate > branch_point) {
        const double c0 = base + std::sqrt(2.0 * theta);
        slack = std::min((c0 * c0 - 2.0) / 4.0, base);
    } else {
        const double c0 = 2.0 * base;
        const double s2 = theta - rate * (1.0 - theta) / 2.0 - (1.0 - c0 * c0 / 2.0) / 2.0;
        slack = std::min(s2, base);
    }
    double eta = std::max(1e-3, 0.05 * slack);
    for (int tries = 0; tries < 60; ++tries) {
        const TestConstants tc = build(eta);
        if (conditions_ok(tc.c, tc.c_tilde)) return tc;
        eta /= 2.0;
    }
    throw std::domain_error("could not satisfy the test-constant conditions; R too close to R_LD");
}

namespace {

// One pass over the rows accumulating all column inner products with y.
std::vector<double> column_scores(const SRInstance& inst) {
    const int m = inst.params.m, n = inst.params.n;
    std::vector<double> acc(n, 0.0);
    for (int i = 0; i < m; ++i) {
        const double yi = inst.y[i];
        const double* xi = inst.x.data() + static_cast<std::size_t>(i) * n;
        for (int j = 0; j < n; ++j) acc[j] += xi[j] * yi;
    }
    double norm_sq = 0.0;
    for (const double v : inst.y) norm_sq += v * v;
    if (norm_sq == 0.0) throw std::runtime_error("degenerate instance: ||Y|| = 0");
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (double& v : acc) v *= inv;
    return acc;
}

} // namespace

DetectReport detect(const SRInstance& instance, double theta, double rate) {
    const TestConstants tc = choose_constants(theta, rate);
    DetectReport rep;
    rep.c = tc.c;
    rep.tau = tc.c * std::sqrt(std::log(static_cast<double>(instance.params.n)));
    rep.q = q_of_tau(rep.tau);
    const double n = instance.params.n;
    rep.null_mean = rep.q * n;
    rep.null_sd = std::sqrt(rep.q * (1.0 - rep.q) * n);
    rep.threshold = rep.null_mean + 3.0 * rep.null_sd;
    const std::vector<double> scores = column_scores(instance);
    rep.t_value = std::count_if(scores.begin(), scores.end(),
                                [&](double z) { return z >= rep.tau; });
    rep.planted_decision = static_cast<double>(rep.t_value) > rep.threshold;
    return rep;
}

RecoverReport recover(const SRInstance& instance, double theta, double rate) {
    if (rate <= 2.0)
        throw std::domain_error("recovery window is empty unless R > 2");
    if (!instance.planted) throw std::invalid_argument("recovery requires a planted instance");
    RecoverReport rep;
    const double lo = std::sqrt(2.0 * (1.0 - theta));
    const double hi = std::sqrt(rate * (1.0 - theta));
    rep.c = 0.5 * (lo + hi);
    rep.tau = rep.c * std::sqrt(std::log(static_cast<double>(instance.params.n)));
    const std::vector<double> scores = column_scores(instance);
    rep.u_hat.assign(instance.params.n, 0);
    for (int j = 0; j < instance.params.n; ++j) {
        if (scores[j] >= rep.tau) rep.u_hat[j] = 1;
        const bool truth = instance.u[j] != 0;
        if (rep.u_hat[j] && !truth) ++rep.false_positives;
        if (!rep.u_hat[j] && truth) ++rep.false_negatives;
    }
    rep.support_errors = rep.false_positives + rep.false_negatives;
    return rep;
}

GoodEventReport good_event_check(const std::vector<double>& x_row_major, int m, int n,
                                 const std::vector<std::uint8_t>& u,
                                 std::size_t audit_samples, std::uint64_t audit_seed) {
    std::vector<int> support;
    for (int j = 0; j < n; ++j)
        if (u[j]) support.push_back(j);
    const int k = static_cast<int>(support.size());
    if (k < 2) throw std::invalid_argument("good event requires sparsity >= 2");

    // Gram matrix of the planted columns.
    std::vector<double> gram(static_cast<std::size_t>(k) * k, 0.0);
    for (int i = 0; i < m; ++i) {
        const double* xi = x_row_major.data() + static_cast<std::size_t>(i) * n;
        for (int a = 0; a < k; ++a) {
            const double va = xi[support[a]];
            for (int b = a + 1; b < k; ++b)
                gram[static_cast<std::size_t>(a) * k + b] += va * xi[support[b]];
        }
    }

    std::vector<double> cross_row(k, 0.0);  // sum over b != a of G[a][b]
    for (int a = 0; a < k; ++a) {
        double s = 0.0;
        for (int b = 0; b < k; ++b) {
            if (a == b) continue;
            s += a < b ? gram[static_cast<std::size_t>(a) * k + b]
                       : gram[static_cast<std::size_t>(b) * k + a];
        }
        cross_row[a] = s;
    }

    const double log_log_k = std::log(std::log(static_cast<double>(k)));
    GoodEventReport rep;
    rep.holds = true;
    rep.worst_margin = std::numeric_limits<double>::infinity();

    const auto visit = [&](int ell, double value) {
        const double t = ell * std::log(2.0) + log_binom(k, ell) + log_log_k;
        const double bound = std::sqrt(2.0 * m * t) + 10.0 * t;
        const double scaled = value / std::sqrt(static_cast<double>(ell) * (k - ell));
        const double margin = bound - scaled;
        if (margin < rep.worst_margin) {
            rep.worst_margin = margin;
            rep.worst_ell = ell;
        }
        if (margin < 0.0) rep.holds = false;
        ++rep.splits_checked;
    };

    if (k <= 24) {
        // Depth-first enumeration of subsets S with |S| = ell, carrying
        //   sum_row  = sum_{a in S} cross_row[a]
        //   sum_pair = sum_{a<b in S} G[a][b]
        // so the split inner product is sum_row - 2 sum_pair.
        std::vector<int> chosen;
        const auto recurse = [&](auto&& self, int next, int ell, double sum_row,
                                 double sum_pair) -> void {
            const int got = static_cast<int>(chosen.size());
            if (got == ell) {
                visit(ell, sum_row - 2.0 * sum_pair);
                return;
            }
            if (k - next < ell - got) return;
            for (int a = next; a < k; ++a) {
                double pair_add = 0.0;
                for (const int b : chosen)
                    pair_add += b < a ? gram[static_cast<std::size_t>(b) * k + a]
                                      : gram[static_cast<std::size_t>(a) * k + b];
                chosen.push_back(a);
                self(self, a + 1, ell, sum_row + cross_row[a], sum_pair + pair_add);
                chosen.pop_back();
            }
        };
        for (int ell = 1; ell <= k / 2; ++ell) recurse(recurse, 0, ell, 0.0, 0.0);
        return rep;
    }

    // Random-subset audit for large supports.
    rep.exhaustive = false;
    Rng rng(audit_seed, "good_event_audit");
    std::vector<char> in_subset(k, 0);
    for (std::size_t sample_i = 0; sample_i < audit_samples; ++sample_i) {
        const int ell = 1 + static_cast<int>(rng.next_below(k / 2));
        std::fill(in_subset.begin(), in_subset.end(), 0);
        int placed = 0;
        while (placed < ell) {
            const int a = static_cast<int>(rng.next_below(k));
            if (!in_subset[a]) {
                in_subset[a] = 1;
                ++placed;
            }
        }
        double sum_row = 0.0, sum_pair = 0.0;
        for (int a = 0; a < k; ++a) {
            if (!in_subset[a]) continue;
            sum_row += cross_row[a];
            for (int b = a + 1; b < k; ++b)
                if (in_subset[b]) sum_pair += gram[static_cast<std::size_t>(a) * k + b];
        }
        visit(ell, sum_row - 2.0 * sum_pair);
    }
    return rep;
}

bool hypergeom_tail_check(int n, int k) {
    if (k > n) throw std::invalid_argument("requires k <= n");
    const double ratio = static_cast<double>(k) * k / (n - k);
    for (int l = 1; l <= k; ++l) {
        const double pmf = hypergeom_pmf(n, k, l);
        const double point_bound = std::pow(ratio, l);
        if (pmf > point_bound * (1.0 + 1e-12)) return false;
        if (ratio <= 1.0) {
            double tail = 0.0;
            for (int j = l; j <= k; ++j) tail += hypergeom_pmf(n, k, j);
            if (tail > k * point_bound * (1.0 + 1e-12)) return false;
        }
    }
    return true;
}

BernsteinReport bernstein_gg_tail_check(double a, double b, int n_terms, double y, int trials,
                                        std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    BernsteinReport rep;
    const double mean = a * n_terms;
    const double dev = std::sqrt(2.0 * (3.0 * a * a + b * b) * n_terms * y) +
                       10.0 * std::sqrt(a * a + b * b) * y;
    rep.threshold_upper = mean + dev;
    rep.threshold_lower = mean - dev;
    rep.bound = std::exp(-y);
    long long hi = 0, lo = 0;
    for (int t = 0; t < trials; ++t) {
        Rng rng(seed, "bernstein_gg", static_cast<std::uint64_t>(t));
        double sum = 0.0;
        for (int i = 0; i < n_terms; ++i) {
            const double g = rng.next_gaussian();
            const double gp = rng.next_gaussian();
            sum += a * g * g + b * g * gp;
        }
        if (sum >= rep.threshold_upper) ++hi;
        if (sum <= rep.threshold_lower) ++lo;
    }
    rep.emp_upper = static_cast<double>(hi) / trials;
    rep.emp_lower = static_cast<double>(lo) / trials;
    const double p = std::min(1.0, rep.bound);
    rep.sigma = std::sqrt(p * (1.0 - p) / trials);
    rep.holds = rep.emp_upper <= rep.bound + 3.0 * rep.sigma + 1e-12 &&
                rep.emp_lower <= rep.bound + 3.0 * rep.sigma + 1e-12;
    return rep;
}

SeparationReport empirical_separation(const std::function<double(std::uint64_t)>& statistic_p,
                                      const std::function<double(std::uint64_t)>& statistic_q,
                                      int trials, std::uint64_t seed) {
    if (trials < 2) throw std::invalid_argument("trials must be >= 2");
    std::vector<double> vp(trials), vq(trials);
    for (int t = 0; t < trials; ++t) {
        vp[t] = statistic_p(seed + 2 * static_cast<std::uint64_t>(t));
        vq[t] = statistic_q(seed + 2 * static_cast<std::uint64_t>(t) + 1);
    }
    const auto moments = [](const std::vector<double>& v) {
        double mean = 0.0;
        for (const double x : v) mean += x;
        mean /= v.size();
        double var = 0.0;
        for (const double x : v) var += (x - mean) * (x - mean);
        var /= (v.size() - 1);
        return std::make_pair(mean, var);
    };
    SeparationReport rep;
    std::tie(rep.mean_p, rep.var_p) = moments(vp);
    std::tie(rep.mean_q, rep.var_q) = moments(vq);
    const double gap = std::abs(rep.mean_p - rep.mean_q);
    const double sd = std::sqrt(std::max(rep.var_p, rep.var_q));
    rep.ratio = gap == 0.0 ? std::numeric_limits<double>::infinity() : sd / gap;
    return rep;
}

void write_instance(const SRInstance& instance, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    const char magic[4] = {'S', 'R', 'I', '1'};
    out.write(magic, 4);
    const std::int64_t dims[3] = {instance.params.n, instance.params.k, instance.params.m};
    out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
    out.write(reinterpret_cast<const char*>(&instance.params.sigma2), sizeof(double));
    const std::uint8_t label = instance.planted ? 1 : 0;
    out.write(reinterpret_cast<const char*>(&label), 1);
    out.write(reinterpret_cast<const char*>(&instance.seed), sizeof(std::uint64_t));
    out.write(reinterpret_cast<const char*>(instance.x.data()),
              static_cast<std::streamsize>(instance.x.size() * sizeof(double)));
    out.write(reinterpret_cast<const char*>(instance.y.data()),
              static_cast<std::streamsize>(instance.y.size() * sizeof(double)));
    if (instance.planted)
        out.write(reinterpret_cast<const char*>(instance.u.data()),
                  static_cast<std::streamsize>(instance.u.size()));
    if (!out) throw std::runtime_error("write failed for " + path);

    nlohmann::json side = {{"format", "SRI1"},
                           {"n", instance.params.n},
                           {"k", instance.params.k},
                           {"m", instance.params.m},
                           {"sigma2", instance.params.sigma2},
                           {"label", instance.planted ? "planted" : "null"},
                           {"seed", instance.seed}};
    std::ofstream sidecar(path + ".json");
    sidecar << side.dump(2) << "\n";
}

SRInstance read_instance(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (std::memcmp(magic, "SRI1", 4) != 0) throw std::runtime_error("bad instance magic");
    std::int64_t dims[3];
    in.read(reinterpret_cast<char*>(dims), sizeof(dims));
    SRInstance inst;
    inst.params.n = static_cast<int>(dims[0]);
    inst.params.k = static_cast<int>(dims[1]);
    inst.params.m = static_cast<int>(dims[2]);
    in.read(reinterpret_cast<char*>(&inst.params.sigma2), sizeof(double));
    std::uint8_t label = 0;
    in.read(reinterpret_cast<char*>(&label), 1);
    inst.planted = label != 0;
    in.read(reinterpret_cast<char*>(&inst.seed), sizeof(std::uint64_t));
    inst.x.resize(static_cast<std::size_t>(inst.params.m) * inst.params.n);
    in.read(reinterpret_cast<char*>(inst.x.data()),
            static_cast<std::streamsize>(inst.x.size() * sizeof(double)));
    inst.y.resize(inst.params.m);
    in.read(reinterpret_cast<char*>(inst.y.data()),
            static_cast<std::streamsize>(inst.y.size() * sizeof(double)));
    if (inst.planted) {
        inst.u.resize(inst.params.n);
        in.read(reinterpret_cast<char*>(inst.u.data()),
                static_cast<std::streamsize>(inst.u.size()));
    }
    if (!in) throw std::runtime_error("truncated instance file " + path);
    inst.params.validate();
    return inst;
}

} // namespace fplab
