#pragma once

#include <span>
#include <vector>

namespace fplab {

// Orthonormal Hermite polynomials under the standard Gaussian weight,
// constructed by Gram-Schmidt over monomials from exact Gaussian moments.
// Serves as an independent oracle for the Gaussian-additive-model projection
// identities, so expectations under shifted Gaussians are evaluated by
// quadrature rather than by the closed form being validated.
class HermiteBasis {
public:
    explicit HermiteBasis(int max_degree);

    int max_degree() const { return max_degree_; }

    // Monomial coefficients of h_k, constant term first.
    const std::vector<double>& coeffs(int k) const;

    double evaluate(int k, double x) const;

    // E_{Y ~ N(mean, 1)}[h_k(Y)] by trapezoid quadrature on [mean-12, mean+12].
    double shifted_mean(int k, double mean) const;

    // All shifted means for k = 0..max_k in one quadrature pass.
    std::vector<double> shifted_means_up_to(int max_k, double mean) const;

    // <h_j, h_k> under the standard Gaussian, again by quadrature.
    double quadrature_inner(int j, int k) const;

private:
    int max_degree_;
    std::vector<std::vector<double>> coeffs_;
};

// Sum over multi-indices |alpha| <= degree of the product of per-coordinate
// shifted means at a and at b; equals the truncated exponential of <a,b>.
double projected_inner(const HermiteBasis& basis, std::span<const double> a,
                       std::span<const double> b, int degree);

// The |alpha| = degree slice; equals <a,b>^degree / degree!.
double projected_inner_exact_degree(const HermiteBasis& basis, std::span<const double> a,
                                    std::span<const double> b, int degree);

// Crude norm bound: truncated_exp(lambda^2 u_norm_sq, D) <= (D+1)(1+lambda^2 M)^D.
bool norm_upper_check(double u_norm_sq, double lambda, int degree, double norm_bound);

// Stirling-type sandwich n^n/e^(n-1) <= n! <= n^(n+1)/e^(n-1), in log domain.
bool factorial_bounds_check(int n);

} // namespace fplab
