#include "fplab/overlap.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <mutex>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

namespace fplab {

namespace {

constexpr double kAtomMergeTol = 1e-12;
constexpr std::size_t kConvolutionAtomCap = 4096;

// Merges atoms whose support values coincide within the tolerance and
// returns them sorted ascending.
void merge_atoms(std::vector<std::pair<double, double>>& atoms,
                 std::vector<double>& support, std::vector<double>& pmf) {
    std::sort(atoms.begin(), atoms.end());
    support.clear();
    pmf.clear();
    for (const auto& [v, p] : atoms) {
        if (p == 0.0) continue;
        if (!support.empty() && v - support.back() <= kAtomMergeTol) {
            pmf.back() += p;
        } else {
            support.push_back(v);
            pmf.push_back(p);
        }
    }
}

double kahan_sum(const std::vector<double>& xs) {
    double s = 0.0, c = 0.0;
    for (const double x : xs) {
        const double y = x - c;
        const double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s;
}

std::unordered_map<std::string, CustomPrior>& custom_registry() {
    static std::unordered_map<std::string, CustomPrior> reg = [] {
        std::unordered_map<std::string, CustomPrior> r;
        CustomPrior point_mass;
        point_mass.sample = [](Rng&) { return std::vector<double>{1.0}; };
        point_mass.has_exact_law = true;
        point_mass.exact_support = {1.0};
        point_mass.exact_pmf = {1.0};
        point_mass.max_norm_sq = 1.0;
        r.emplace("point_mass_unit", std::move(point_mass));
        return r;
    }();
    return reg;
}

std::mutex& registry_mutex() {
    static std::mutex m;
    return m;
}

OverlapDistribution make_exact(std::vector<double> support, std::vector<double> pmf,
                               std::optional<double> max_norm_sq) {
    OverlapDistribution dist;
    dist.mode = OverlapMode::Exact;
    dist.support = std::move(support);
    dist.pmf = std::move(pmf);
    dist.max_norm_sq = max_norm_sq;
    dist.validate();
    return dist;
}

OverlapDistribution exact_law(const PriorSpec& prior);

OverlapDistribution exact_sparse_binary(int n, int k) {
    std::vector<double> support, pmf;
    for (int l = 0; l <= k; ++l) {
        support.push_back(static_cast<double>(l));
        pmf.push_back(hypergeom_pmf(n, k, l));
    }
    return make_exact(std::move(support), std::move(pmf), static_cast<double>(k));
}

OverlapDistribution exact_biased_boolean(int n, double eps, double bias) {
    // Per-coordinate product u_i v_i = +eps^2 with probability (1+bias^2)/2.
    // The overlap is eps^2 * (2A - n) with A ~ Binomial(n, (1+bias^2)/2).
    const double p = (1.0 + bias * bias) / 2.0;
    std::vector<double> support(n + 1), pmf(n + 1);
    for (int a = 0; a <= n; ++a) {
        const double logp = std::lgamma(n + 1.0) - std::lgamma(a + 1.0) - std::lgamma(n - a + 1.0)
                          + a * std::log(p) + (n - a) * std::log1p(-p);
        support[a] = eps * eps * (2.0 * a - n);
        pmf[a] = std::exp(logp);
    }
    return make_exact(std::move(support), std::move(pmf), n * eps * eps);
}

OverlapDistribution exact_sparse_rademacher(int n, double rho) {
    // Dynamic-programming convolution of the per-coordinate product atoms
    // {+1/rho w.p. rho^2/2, -1/rho w.p. rho^2/2, 0 w.p. 1-rho^2}.
    const double step = 1.0 / rho;
    const double p_half = rho * rho / 2.0;
    const double p_zero = 1.0 - rho * rho;
    std::vector<double> support{0.0}, pmf{1.0};
    for (int i = 0; i < n; ++i) {
        std::vector<std::pair<double, double>> atoms;
        atoms.reserve(3 * support.size());
        for (std::size_t j = 0; j < support.size(); ++j) {
            atoms.emplace_back(support[j] + step, pmf[j] * p_half);
            atoms.emplace_back(support[j] - step, pmf[j] * p_half);
            if (p_zero > 0.0) atoms.emplace_back(support[j], pmf[j] * p_zero);
        }
        merge_atoms(atoms, support, pmf);
        if (support.size() > kConvolutionAtomCap)
            throw std::invalid_argument("sparse Rademacher exact law exceeds the atom cap");
    }
    return make_exact(std::move(support), std::move(pmf), n / rho);
}

OverlapDistribution exact_tensor_power(const PriorSpec& base, int power) {
    const OverlapDistribution b = exact_law(base);
    std::vector<std::pair<double, double>> atoms;
    atoms.reserve(b.support.size());
    for (std::size_t i = 0; i < b.support.size(); ++i)
        atoms.emplace_back(std::pow(b.support[i], power), b.pmf[i]);
    std::vector<double> support, pmf;
    merge_atoms(atoms, support, pmf);
    std::optional<double> m;
    if (b.max_norm_sq) m = std::pow(*b.max_norm_sq, power);
    return make_exact(std::move(support), std::move(pmf), m);
}

OverlapDistribution exact_law(const PriorSpec& prior) {
    switch (prior.kind) {
        case PriorKind::SparseBinary:
            return exact_sparse_binary(prior.n, prior.k);
        case PriorKind::BiasedBoolean:
            return exact_biased_boolean(prior.n, prior.eps, prior.bias);
        case PriorKind::SparseRademacher:
            return exact_sparse_rademacher(prior.n, prior.rho);
        case PriorKind::TensorPower:
            return exact_tensor_power(*prior.base, prior.power);
        case PriorKind::CustomSampler: {
            const CustomPrior& cp = lookup_custom_prior(prior.sampler_id);
            if (!cp.has_exact_law)
                throw std::invalid_argument("custom prior '" + prior.sampler_id +
                                            "' has no enumerable overlap law");
            return make_exact(cp.exact_support, cp.exact_pmf, cp.max_norm_sq);
        }
    }
    throw std::logic_error("unreachable prior kind");
}

// Draws a uniform k-subset of [n], returned sorted.
std::vector<int> sample_subset(int n, int k, Rng& rng) {
    std::unordered_set<int> chosen;
    std::vector<int> out;
    out.reserve(k);
    // Floyd's algorithm: uniform without replacement in k draws.
    for (int j = n - k; j < n; ++j) {
        const int t = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(j) + 1));
        if (chosen.insert(t).second) {
            out.push_back(t);
        } else {
            chosen.insert(j);
            out.push_back(j);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

double sample_overlap_once(const PriorSpec& prior, Rng& rng) {
    switch (prior.kind) {
        case PriorKind::SparseBinary: {
            const std::vector<int> a = sample_subset(prior.n, prior.k, rng);
            const std::vector<int> b = sample_subset(prior.n, prior.k, rng);
            std::size_t i = 0, j = 0;
            int common = 0;
            while (i < a.size() && j < b.size()) {
                if (a[i] < b[j]) ++i;
                else if (a[i] > b[j]) ++j;
                else { ++common; ++i; ++j; }
            }
            return static_cast<double>(common);
        }
        case PriorKind::SparseRademacher: {
            const double q = prior.rho / 2.0;
            double s = 0.0;
            for (int i = 0; i < prior.n; ++i) {
                double prod = 1.0;
                for (int rep = 0; rep < 2; ++rep) {
                    const double u = rng.next_double();
                    if (u < q) prod *= 1.0 / std::sqrt(prior.rho);
                    else if (u < 2.0 * q) prod *= -1.0 / std::sqrt(prior.rho);
                    else prod = 0.0;
                }
                s += prod;
            }
            return s;
        }
        case PriorKind::BiasedBoolean: {
            const double p_plus = (1.0 + prior.bias) / 2.0;
            double s = 0.0;
            for (int i = 0; i < prior.n; ++i) {
                const double ui = rng.next_double() < p_plus ? prior.eps : -prior.eps;
                const double vi = rng.next_double() < p_plus ? prior.eps : -prior.eps;
                s += ui * vi;
            }
            return s;
        }
        case PriorKind::TensorPower:
            return std::pow(sample_overlap_once(*prior.base, rng), prior.power);
        case PriorKind::CustomSampler: {
            const CustomPrior& cp = lookup_custom_prior(prior.sampler_id);
            const std::vector<double> u = cp.sample(rng);
            const std::vector<double> v = cp.sample(rng);
            if (u.size() != v.size())
                throw std::runtime_error("custom sampler returned inconsistent dimensions");
            double s = 0.0;
            for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
            return s;
        }
    }
    throw std::logic_error("unreachable prior kind");
}

std::optional<double> known_max_norm_sq(const PriorSpec& prior) {
    switch (prior.kind) {
        case PriorKind::SparseBinary: return static_cast<double>(prior.k);
        case PriorKind::SparseRademacher: return prior.n / prior.rho;
        case PriorKind::BiasedBoolean: return prior.n * prior.eps * prior.eps;
        case PriorKind::TensorPower: {
            const auto b = known_max_norm_sq(*prior.base);
            if (!b) return std::nullopt;
            return std::pow(*b, prior.power);
        }
        case PriorKind::CustomSampler:
            return lookup_custom_prior(prior.sampler_id).max_norm_sq;
    }
    return std::nullopt;
}

} // namespace

PriorSpec PriorSpec::sparse_binary(int n, int k) {
    PriorSpec p;
    p.kind = PriorKind::SparseBinary;
    p.n = n;
    p.k = k;
    p.validate();
    return p;
}

PriorSpec PriorSpec::sparse_rademacher(int n, double rho) {
    PriorSpec p;
    p.kind = PriorKind::SparseRademacher;
    p.n = n;
    p.rho = rho;
    p.validate();
    return p;
}

PriorSpec PriorSpec::tensor_power(PriorSpec base, int power) {
    PriorSpec p;
    p.kind = PriorKind::TensorPower;
    p.base = std::make_shared<PriorSpec>(std::move(base));
    p.power = power;
    p.validate();
    return p;
}

PriorSpec PriorSpec::biased_boolean(int n, double eps, double bias) {
    PriorSpec p;
    p.kind = PriorKind::BiasedBoolean;
    p.n = n;
    p.eps = eps;
    p.bias = bias;
    p.validate();
    return p;
}

PriorSpec PriorSpec::custom(std::string sampler_id, int dim) {
    PriorSpec p;
    p.kind = PriorKind::CustomSampler;
    p.sampler_id = std::move(sampler_id);
    p.dim = dim;
    p.validate();
    return p;
}

void PriorSpec::validate() const {
    switch (kind) {
        case PriorKind::SparseBinary:
            if (n < 1 || k < 1 || k > n) throw std::invalid_argument("sparse binary requires 1 <= k <= n");
            break;
        case PriorKind::SparseRademacher:
            if (n < 1) throw std::invalid_argument("sparse Rademacher requires n >= 1");
            if (!(rho > 0.0 && rho <= 1.0)) throw std::invalid_argument("density must lie in (0,1]");
            break;
        case PriorKind::TensorPower:
            if (!base) throw std::invalid_argument("tensor power requires a base prior");
            if (power < 1) throw std::invalid_argument("tensor power must be >= 1");
            base->validate();
            break;
        case PriorKind::BiasedBoolean:
            if (n < 1) throw std::invalid_argument("biased Boolean requires n >= 1");
            if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("magnitude must lie in (0,1)");
            if (!(bias > 0.0 && bias < 1.0)) throw std::invalid_argument("bias must lie in (0,1)");
            break;
        case PriorKind::CustomSampler:
            if (sampler_id.empty()) throw std::invalid_argument("custom prior requires a sampler id");
            break;
    }
}

std::string PriorSpec::to_json() const {
    nlohmann::json j;
    switch (kind) {
        case PriorKind::SparseBinary:
            j = {{"kind", "sparse_binary"}, {"n", n}, {"k", k}};
            break;
        case PriorKind::SparseRademacher:
            j = {{"kind", "sparse_rademacher"}, {"n", n}, {"rho", rho}};
            break;
        case PriorKind::TensorPower:
            j = {{"kind", "tensor_power"}, {"power", power},
                 {"base", nlohmann::json::parse(base->to_json())}};
            break;
        case PriorKind::BiasedBoolean:
            j = {{"kind", "biased_boolean"}, {"n", n}, {"eps", eps}, {"bias", bias}};
            break;
        case PriorKind::CustomSampler:
            j = {{"kind", "custom"}, {"sampler_id", sampler_id}, {"dim", dim}};
            break;
    }
    return j.dump();
}

PriorSpec PriorSpec::from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "sparse_binary") return sparse_binary(j.at("n").get<int>(), j.at("k").get<int>());
    if (kind == "sparse_rademacher")
        return sparse_rademacher(j.at("n").get<int>(), j.at("rho").get<double>());
    if (kind == "tensor_power")
        return tensor_power(from_json(j.at("base").dump()), j.at("power").get<int>());
    if (kind == "biased_boolean")
        return biased_boolean(j.at("n").get<int>(), j.at("eps").get<double>(),
                              j.at("bias").get<double>());
    if (kind == "custom")
        return custom(j.at("sampler_id").get<std::string>(), j.value("dim", 0));
    throw std::invalid_argument("unknown prior kind: " + kind);
}

void register_custom_prior(const std::string& id, CustomPrior prior) {
    std::lock_guard<std::mutex> lock(registry_mutex());
    custom_registry()[id] = std::move(prior);
}

const CustomPrior& lookup_custom_prior(const std::string& id) {
    std::lock_guard<std::mutex> lock(registry_mutex());
    const auto it = custom_registry().find(id);
    if (it == custom_registry().end())
        throw std::invalid_argument("unknown custom prior: " + id);
    return it->second;
}

double hypergeom_pmf(int n, int k, int l) {
    if (k < 0 || k > n) throw std::invalid_argument("hypergeometric requires 0 <= k <= n");
    if (l < 0 || l > k) return 0.0;
    if (k - l > n - k) return 0.0;
    const auto lchoose = [](int a, int b) {
        return std::lgamma(a + 1.0) - std::lgamma(b + 1.0) - std::lgamma(a - b + 1.0);
    };
    return std::exp(lchoose(k, l) + lchoose(n - k, k - l) - lchoose(n, k));
}

void OverlapDistribution::validate() const {
    if (mode == OverlapMode::Exact) {
        if (support.size() != pmf.size() || support.empty())
            throw std::invalid_argument("exact law requires matching nonempty support and pmf");
        for (std::size_t i = 1; i < support.size(); ++i)
            if (!(support[i] > support[i - 1]))
                throw std::invalid_argument("support must be strictly increasing");
        double lo = 1.0, hi = 0.0;
        for (const double p : pmf) {
            lo = std::min(lo, p);
            hi = std::max(hi, p);
        }
        if (lo < 0.0 || hi > 1.0 + 1e-12)
            throw std::invalid_argument("pmf entries must lie in [0,1]");
        const double total = kahan_sum(pmf);
        if (std::abs(total - 1.0) > 1e-12)
            throw std::invalid_argument("pmf must sum to 1 within 1e-12");
    } else if (samples.empty()) {
        throw std::invalid_argument("empirical law requires at least one sample");
    }
}

double OverlapDistribution::tail_prob(double eps) const {
    if (mode == OverlapMode::Exact) {
        std::vector<double> terms;
        terms.reserve(pmf.size());
        for (std::size_t i = 0; i < support.size(); ++i)
            if (std::abs(support[i]) >= eps) terms.push_back(pmf[i]);
        return kahan_sum(terms);
    }
    std::size_t count = 0;
    for (const double s : samples)
        if (std::abs(s) >= eps) ++count;
    return static_cast<double>(count) / static_cast<double>(samples.size());
}

double OverlapDistribution::moment(int d) const {
    if (d < 0) throw std::invalid_argument("moment order must be >= 0");
    if (d == 0) return 1.0;
    std::vector<double> terms;
    if (mode == OverlapMode::Exact) {
        terms.reserve(pmf.size());
        for (std::size_t i = 0; i < support.size(); ++i)
            terms.push_back(pmf[i] * std::pow(support[i], d));
        return kahan_sum(terms);
    }
    terms.reserve(samples.size());
    for (const double s : samples) terms.push_back(std::pow(s, d));
    return kahan_sum(terms) / static_cast<double>(samples.size());
}

double OverlapDistribution::max_abs() const {
    double m = 0.0;
    if (mode == OverlapMode::Exact) {
        for (const double s : support) m = std::max(m, std::abs(s));
    } else {
        for (const double s : samples) m = std::max(m, std::abs(s));
    }
    return m;
}

DeviationThreshold OverlapDistribution::delta_of_d(double deviations) const {
    if (deviations < 0.0) throw std::invalid_argument("deviations must be >= 0");
    const double threshold = std::exp(-deviations);
    DeviationThreshold out;
    out.deviations = deviations;
    if (mode == OverlapMode::Exact) {
        // Scan the distinct |s| atoms; the tail P(|s| >= a) is a step
        // function, so the supremum is attained at the largest qualifying
        // atom (or at 0, which always qualifies).
        std::vector<double> abs_atoms;
        abs_atoms.reserve(support.size());
        for (const double s : support) abs_atoms.push_back(std::abs(s));
        std::sort(abs_atoms.begin(), abs_atoms.end());
        abs_atoms.erase(std::unique(abs_atoms.begin(), abs_atoms.end()), abs_atoms.end());
        // Tiny relative slack so mathematically-exact equality cases are not
        // lost to pmf roundoff.
        double delta = 0.0;
        for (const double a : abs_atoms)
            if (tail_prob(a) >= threshold * (1.0 - 1e-12)) delta = a;
        out.delta = delta;
        return out;
    }
    // Plug-in upper quantile: |s| order statistic at rank ceil((1-e^-D) n).
    std::vector<double> abs_sorted;
    abs_sorted.reserve(samples.size());
    for (const double s : samples) abs_sorted.push_back(std::abs(s));
    std::sort(abs_sorted.begin(), abs_sorted.end());
    const double n = static_cast<double>(abs_sorted.size());
    const std::size_t rank = static_cast<std::size_t>(std::ceil((1.0 - threshold) * n));
    out.delta = rank == 0 ? 0.0 : abs_sorted[std::min(rank, abs_sorted.size()) - 1];
    return out;
}

OverlapDistribution overlap_distribution(const PriorSpec& prior, OverlapMode mode,
                                         std::size_t n_samples, std::uint64_t seed) {
    prior.validate();
    if (mode == OverlapMode::Exact) return exact_law(prior);
    if (n_samples == 0)
        throw std::invalid_argument("empirical mode requires n_samples > 0");
    OverlapDistribution dist;
    dist.mode = OverlapMode::Empirical;
    dist.seed = seed;
    dist.samples.resize(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) {
        Rng rng(seed, "overlap_samples", i);
        dist.samples[i] = sample_overlap_once(prior, rng);
    }
    dist.max_norm_sq = known_max_norm_sq(prior);
    dist.validate();
    return dist;
}

DeviationThreshold delta_of_d(const OverlapDistribution& dist, double deviations) {
    return dist.delta_of_d(deviations);
}

double tail_prob(const OverlapDistribution& dist, double eps) { return dist.tail_prob(eps); }

double moment(const OverlapDistribution& dist, int d) { return dist.moment(d); }

} // namespace fplab
