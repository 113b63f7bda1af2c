#pragma once

#include <array>
#include <string>
#include <vector>

namespace fplab {

// Spiked Wigner model with sparse Rademacher prior: SNR lambda >= 0 and
// coordinate density rho in (0,1].
struct WignerParams {
    double lambda = 0.0;
    double rho = 1.0;
    void validate() const;
};

// Shannon entropy (nats) of a probability 3-vector, with 0 log 0 = 0.
double ternary_entropy(const std::array<double, 3>& p);

struct PhiPoint {
    double value = 0.0;    // phi(x)
    double p0_star = 0.0;  // maximizing zero-mass weight
};

// Annealed potential at overlap fraction x in [-1,1]: inner concave
// maximization over p0 solved by bisection on the derivative, plus the
// energy term lambda^2 x^2 / (2 rho^2).
PhiPoint phi(double x, const WignerParams& params);

// Finite-difference phi''(0) (central, h = 1e-3, one Richardson step).
double curvature_at_zero(const WignerParams& params);

enum class Landscape { GlobalMaxAtZero, BarrierSeparatedMaxima, LocalMinAtZero };

std::string landscape_name(Landscape c);

struct PotentialCurve {
    std::vector<double> xs;
    std::vector<double> values;
    std::vector<double> p0_star;
    Landscape classification = Landscape::GlobalMaxAtZero;
};

PotentialCurve scan_potential(const WignerParams& params, int grid_size);
Landscape classify_landscape(const WignerParams& params, int grid_size);

} // namespace fplab
