#include "fplab/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fplab {

namespace {

constexpr double kZeroTol = 1e-9;       // classification tie tolerance
constexpr double kBisectTol = 1e-12;    // bracket width for the inner maximizer
constexpr double kBoundaryPad = 1e-15;  // keeps the entropy terms finite

double xlogx(double x) { return x <= 0.0 ? 0.0 : x * std::log(x); }

// Inner objective at zero-mass weight p0, for fixed overlap x:
//   h(p) + (1-p0) log(rho^2/2) + p0 log(1-rho^2)
// with p_{+1} = (1-p0+x)/2 and p_{-1} = (1-p0-x)/2.
double inner_objective(double p0, double x, double rho) {
    const double p_plus = (1.0 - p0 + x) / 2.0;
    const double p_minus = (1.0 - p0 - x) / 2.0;
    const double h = -(xlogx(p0) + xlogx(p_plus) + xlogx(p_minus));
    const double zero_weight = (1.0 - rho * rho) <= 0.0
                                   ? (p0 > 0.0 ? -std::numeric_limits<double>::infinity() : 0.0)
                                   : p0 * std::log1p(-rho * rho);
    return h + (1.0 - p0) * std::log(rho * rho / 2.0) + zero_weight;
}

// d/dp0 of the inner objective; strictly decreasing in p0.
double inner_derivative(double p0, double x, double rho) {
    const double p_plus = (1.0 - p0 + x) / 2.0;
    const double p_minus = (1.0 - p0 - x) / 2.0;
    return -std::log(p0) + 0.5 * (std::log(p_plus) + std::log(p_minus))
           - std::log(rho * rho / 2.0) + std::log1p(-rho * rho);
}

} // namespace

void WignerParams::validate() const {
    if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
    if (!(rho > 0.0 && rho <= 1.0)) throw std::invalid_argument("rho must lie in (0,1]");
}

double ternary_entropy(const std::array<double, 3>& p) {
    double total = 0.0;
    for (const double v : p) {
        if (v < 0.0) throw std::invalid_argument("entropy requires nonnegative entries");
        total += v;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("entropy requires a probability vector");
    return -(xlogx(p[0]) + xlogx(p[1]) + xlogx(p[2]));
}

PhiPoint phi(double x, const WignerParams& params) {
    params.validate();
    if (std::abs(x) > 1.0) throw std::invalid_argument("overlap fraction must lie in [-1,1]");
    const double rho = params.rho;
    const double energy = params.lambda * params.lambda * x * x / (2.0 * rho * rho);

    PhiPoint out;
    const double p0_max = 1.0 - std::abs(x);
    if (rho >= 1.0 || p0_max <= 2.0 * kBoundaryPad) {
        // rho = 1 forces p0 = 0 (log(1-rho^2) = -inf); |x| = 1 forces it too.
        out.p0_star = 0.0;
        out.value = inner_objective(0.0, x, rho) + energy;
        return out;
    }

    // The derivative is +inf at p0 -> 0 and -inf at p0 -> p0_max, so the
    // maximizer is interior; bisect on the monotone derivative.
    double lo = kBoundaryPad;
    double hi = p0_max - kBoundaryPad;
    while (hi - lo > kBisectTol) {
        const double mid = 0.5 * (lo + hi);
        if (inner_derivative(mid, x, rho) > 0.0) lo = mid;
        else hi = mid;
    }
    out.p0_star = 0.5 * (lo + hi);
    out.value = inner_objective(out.p0_star, x, rho) + energy;
    return out;
}

double curvature_at_zero(const WignerParams& params) {
    const auto second_diff = [&](double h) {
        return (phi(h, params).value - 2.0 * phi(0.0, params).value + phi(-h, params).value) /
               (h * h);
    };
    const double h = 1e-3;
    const double coarse = second_diff(h);
    const double fine = second_diff(h / 2.0);
    return (4.0 * fine - coarse) / 3.0;
}

std::string landscape_name(Landscape c) {
    switch (c) {
        case Landscape::GlobalMaxAtZero: return "global_max_at_zero";
        case Landscape::BarrierSeparatedMaxima: return "barrier_separated_maxima";
        case Landscape::LocalMinAtZero: return "local_min_at_zero";
    }
    return "unknown";
}

PotentialCurve scan_potential(const WignerParams& params, int grid_size) {
    params.validate();
    if (grid_size < 201) throw std::invalid_argument("grid size must be >= 201");
    if (grid_size % 2 == 0) ++grid_size;  // keep x = 0 on the grid
    PotentialCurve curve;
    curve.xs.resize(grid_size);
    curve.values.resize(grid_size);
    curve.p0_star.resize(grid_size);
    for (int i = 0; i < grid_size; ++i) {
        const double x = -1.0 + 2.0 * i / (grid_size - 1);
        const PhiPoint p = phi(x, params);
        curve.xs[i] = x;
        curve.values[i] = p.value;
        curve.p0_star[i] = p.p0_star;
    }

    const int mid = grid_size / 2;
    int arg_max = mid;
    for (int i = 0; i < grid_size; ++i)
        if (curve.values[i] > curve.values[arg_max]) arg_max = i;

    if (curve.values[mid + 1] > kZeroTol) {
        // phi climbs immediately away from phi(0) = 0.
        curve.classification = Landscape::LocalMinAtZero;
    } else if (curve.values[arg_max] > kZeroTol && arg_max != mid) {
        curve.classification = Landscape::BarrierSeparatedMaxima;
    } else {
        curve.classification = Landscape::GlobalMaxAtZero;
    }
    return curve;
}

Landscape classify_landscape(const WignerParams& params, int grid_size) {
    return scan_potential(params, grid_size).classification;
}

} // namespace fplab
