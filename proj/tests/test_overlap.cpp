#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "fplab/overlap.hpp"

using namespace fplab;

namespace {

// Pair-enumeration oracle for the SparseBinary overlap law: walks every pair
// of k-subsets of [n] and tallies intersection sizes.
std::vector<double> sparse_binary_pmf_bruteforce(int n, int k) {
    std::vector<std::vector<int>> subsets;
    std::vector<int> cur(k);
    for (int i = 0; i < k; ++i) cur[i] = i;
    for (;;) {
        subsets.push_back(cur);
        int i = k - 1;
        while (i >= 0 && cur[i] == n - k + i) --i;
        if (i < 0) break;
        ++cur[i];
        for (int j = i + 1; j < k; ++j) cur[j] = cur[j - 1] + 1;
    }
    std::vector<double> counts(k + 1, 0.0);
    for (const auto& a : subsets)
        for (const auto& b : subsets) {
            int common = 0;
            std::size_t i = 0, j = 0;
            while (i < a.size() && j < b.size()) {
                if (a[i] < b[j]) ++i;
                else if (a[i] > b[j]) ++j;
                else { ++common; ++i; ++j; }
            }
            counts[common] += 1.0;
        }
    const double total = static_cast<double>(subsets.size()) * subsets.size();
    for (double& c : counts) c /= total;
    return counts;
}

} // namespace

TEST_CASE("sparse binary (10,3) exact law matches the pair enumeration") {
    const auto dist =
        overlap_distribution(PriorSpec::sparse_binary(10, 3), OverlapMode::Exact);
    REQUIRE(dist.support.size() == 4);
    CHECK(dist.support[0] == doctest::Approx(0.0));
    CHECK(dist.support[3] == doctest::Approx(3.0));
    CHECK(dist.pmf[0] == doctest::Approx(35.0 / 120.0).epsilon(1e-12));
    CHECK(dist.pmf[1] == doctest::Approx(63.0 / 120.0).epsilon(1e-12));
    CHECK(dist.pmf[2] == doctest::Approx(21.0 / 120.0).epsilon(1e-12));
    CHECK(dist.pmf[3] == doctest::Approx(1.0 / 120.0).epsilon(1e-12));
    CHECK(dist.max_norm_sq == doctest::Approx(3.0));

    const auto brute = sparse_binary_pmf_bruteforce(10, 3);
    for (int l = 0; l <= 3; ++l) CHECK(dist.pmf[l] == doctest::Approx(brute[l]).epsilon(1e-12));
}

TEST_CASE("sparse binary exact pmfs match pair enumeration up to n = 12") {
    for (const auto [n, k] : {std::pair{8, 2}, std::pair{12, 4}, std::pair{12, 6}, std::pair{11, 3}}) {
        const auto dist = overlap_distribution(PriorSpec::sparse_binary(n, k), OverlapMode::Exact);
        const auto brute = sparse_binary_pmf_bruteforce(n, k);
        REQUIRE(static_cast<int>(dist.pmf.size()) == k + 1);
        for (int l = 0; l <= k; ++l)
            CHECK(dist.pmf[l] == doctest::Approx(brute[l]).epsilon(1e-10));
    }
}

TEST_CASE("point-mass custom prior has the trivial overlap law") {
    const auto dist =
        overlap_distribution(PriorSpec::custom("point_mass_unit", 1), OverlapMode::Exact);
    REQUIRE(dist.support.size() == 1);
    CHECK(dist.support[0] == doctest::Approx(1.0));
    CHECK(dist.pmf[0] == doctest::Approx(1.0));
}

TEST_CASE("sparse Rademacher (2,1) law is the two-coin convolution") {
    const auto dist =
        overlap_distribution(PriorSpec::sparse_rademacher(2, 1.0), OverlapMode::Exact);
    REQUIRE(dist.support.size() == 3);
    CHECK(dist.support[0] == doctest::Approx(-2.0));
    CHECK(dist.support[1] == doctest::Approx(0.0));
    CHECK(dist.support[2] == doctest::Approx(2.0));
    CHECK(dist.pmf[0] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(dist.pmf[1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(dist.pmf[2] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(dist.moment(1) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("tensor power maps the base law through x^p") {
    const auto base = PriorSpec::sparse_rademacher(2, 1.0);
    const auto dist =
        overlap_distribution(PriorSpec::tensor_power(base, 2), OverlapMode::Exact);
    // (-2)^2 and 2^2 merge into a single atom at 4.
    REQUIRE(dist.support.size() == 2);
    CHECK(dist.support[0] == doctest::Approx(0.0));
    CHECK(dist.support[1] == doctest::Approx(4.0));
    CHECK(dist.pmf[1] == doctest::Approx(0.5).epsilon(1e-12));
    for (const double s : dist.support) CHECK(s >= 0.0);
}

TEST_CASE("delta_of_d on the sparse binary example") {
    const auto dist =
        overlap_distribution(PriorSpec::sparse_binary(10, 3), OverlapMode::Exact);
    CHECK(dist.delta_of_d(2.0).delta == doctest::Approx(2.0));
    CHECK(dist.delta_of_d(0.0).delta == doctest::Approx(0.0));
    CHECK(dist.delta_of_d(1e6).delta == doctest::Approx(3.0));
}

TEST_CASE("delta_of_d satisfies both continuity inequalities on exact laws") {
    const std::vector<PriorSpec> priors = {
        PriorSpec::sparse_binary(10, 3), PriorSpec::sparse_binary(12, 5),
        PriorSpec::sparse_rademacher(7, 0.6), PriorSpec::biased_boolean(9, 0.5, 0.3)};
    for (const auto& prior : priors) {
        const auto dist = overlap_distribution(prior, OverlapMode::Exact);
        for (const double d : {0.0, 0.5, 1.0, 2.0, 3.5, 6.0, 10.0, 30.0}) {
            const double delta = dist.delta_of_d(d).delta;
            const double thr = std::exp(-d);
            CHECK(dist.tail_prob(delta) >= thr * (1.0 - 1e-9));
            // P(|s| > delta): tail just above the atom.
            const double above = dist.tail_prob(std::nextafter(delta, 1e300));
            CHECK(above <= thr * (1.0 + 1e-9));
        }
    }
}

TEST_CASE("delta_of_d is nondecreasing in D") {
    const auto dist =
        overlap_distribution(PriorSpec::sparse_rademacher(9, 0.4), OverlapMode::Exact);
    double prev = -1.0;
    for (double d = 0.0; d <= 20.0; d += 0.25) {
        const double cur = dist.delta_of_d(d).delta;
        CHECK(cur >= prev);
        prev = cur;
    }
}

TEST_CASE("tail probabilities on the sparse binary example") {
    const auto dist =
        overlap_distribution(PriorSpec::sparse_binary(10, 3), OverlapMode::Exact);
    CHECK(dist.tail_prob(1.0) == doctest::Approx(85.0 / 120.0).epsilon(1e-12));
    CHECK(dist.tail_prob(0.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(dist.tail_prob(3.5) == doctest::Approx(0.0));
}

TEST_CASE("moments: mean k^2/n, zeroth moment one, all moments nonnegative") {
    const auto dist =
        overlap_distribution(PriorSpec::sparse_binary(10, 3), OverlapMode::Exact);
    CHECK(dist.moment(1) == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(dist.moment(0) == doctest::Approx(1.0));

    const std::vector<PriorSpec> priors = {
        PriorSpec::sparse_binary(10, 3), PriorSpec::sparse_rademacher(6, 0.5),
        PriorSpec::biased_boolean(8, 0.4, 0.2),
        PriorSpec::tensor_power(PriorSpec::sparse_rademacher(5, 0.7), 3)};
    for (const auto& prior : priors) {
        const auto law = overlap_distribution(prior, OverlapMode::Exact);
        for (int d = 0; d <= 12; ++d) CHECK(law.moment(d) >= -1e-12);
    }
}

TEST_CASE("empirical sampling is reproducible and matches the exact law roughly") {
    const auto prior = PriorSpec::sparse_binary(10, 3);
    const auto a = overlap_distribution(prior, OverlapMode::Empirical, 20000, 99);
    const auto b = overlap_distribution(prior, OverlapMode::Empirical, 20000, 99);
    CHECK(a.samples == b.samples);  // bit-identical

    const auto exact = overlap_distribution(prior, OverlapMode::Exact);
    CHECK(a.moment(1) == doctest::Approx(exact.moment(1)).epsilon(0.05));
    CHECK(a.tail_prob(2.0) == doctest::Approx(exact.tail_prob(2.0)).epsilon(0.15));
}

TEST_CASE("empirical delta_of_d uses the plug-in order statistic") {
    OverlapDistribution dist;
    dist.mode = OverlapMode::Empirical;
    dist.samples = {0.1, -0.2, 0.3, -0.4, 0.5, 0.6, -0.7, 0.8, 0.9, 1.0};
    // D = log(2): e^-D = 1/2, rank ceil(0.5*10) = 5 -> fifth smallest |s|.
    CHECK(dist.delta_of_d(std::log(2.0)).delta == doctest::Approx(0.5));
    CHECK(dist.delta_of_d(0.0).delta == doctest::Approx(0.0));
    CHECK(dist.delta_of_d(100.0).delta == doctest::Approx(1.0));
}

TEST_CASE("exact mode rejects non-enumerable priors and zero-sample requests") {
    // Wide enough that the representable support exceeds the atom cap.
    CHECK_THROWS(overlap_distribution(PriorSpec::sparse_rademacher(12000, 1.0),
                                      OverlapMode::Exact));
    CHECK_THROWS(overlap_distribution(PriorSpec::sparse_binary(10, 3),
                                      OverlapMode::Empirical, 0, 1));
}

TEST_CASE("prior validation") {
    CHECK_THROWS(PriorSpec::sparse_binary(5, 6));
    CHECK_THROWS(PriorSpec::sparse_binary(5, 0));
    CHECK_THROWS(PriorSpec::sparse_rademacher(5, 0.0));
    CHECK_THROWS(PriorSpec::sparse_rademacher(5, 1.5));
    CHECK_THROWS(PriorSpec::biased_boolean(5, 1.0, 0.5));
    CHECK_THROWS(PriorSpec::biased_boolean(5, 0.5, 0.0));
}

TEST_CASE("prior specs round-trip through JSON") {
    const std::vector<PriorSpec> priors = {
        PriorSpec::sparse_binary(30, 4), PriorSpec::sparse_rademacher(60, 0.2),
        PriorSpec::biased_boolean(12, 0.3, 0.1),
        PriorSpec::tensor_power(PriorSpec::sparse_binary(9, 2), 2),
        PriorSpec::custom("point_mass_unit", 1)};
    for (const auto& p : priors) {
        const PriorSpec q = PriorSpec::from_json(p.to_json());
        CHECK(q.to_json() == p.to_json());
        const auto lp = overlap_distribution(p, OverlapMode::Empirical, 64, 5);
        const auto lq = overlap_distribution(q, OverlapMode::Empirical, 64, 5);
        CHECK(lp.samples == lq.samples);
    }
}

TEST_CASE("biased boolean law is the shifted binomial") {
    const int n = 9;
    const double eps = 0.5, bias = 0.3;
    const auto dist =
        overlap_distribution(PriorSpec::biased_boolean(n, eps, bias), OverlapMode::Exact);
    REQUIRE(static_cast<int>(dist.support.size()) == n + 1);
    const double p = (1.0 + bias * bias) / 2.0;
    CHECK(dist.moment(1) == doctest::Approx(n * eps * eps * (2.0 * p - 1.0)).epsilon(1e-10));
    CHECK(dist.max_norm_sq == doctest::Approx(n * eps * eps));
}
