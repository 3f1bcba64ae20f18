#pragma once

#include <cmath>
#include <complex>

#include "omegastop/errors.hpp"
#include "omegastop/model.hpp"
#include "omegastop/numerics/gamma.hpp"

namespace omegastop {

using numerics::Complex;

// Exponents of the Lamperti-transformed process xi, written with the
// convention E[exp(i theta xi_1)] = exp(-Psi(theta)).

namespace detail {

inline Complex check_theta(Complex theta) {
    if (!numerics::is_finite(theta)) throw DomainError("characteristic exponent: non-finite argument");
    return theta;
}

}  // namespace detail

/// Exponent of xi*, the Lamperti process of X killed on leaving [0, inf).
inline Complex psi_star(Complex theta, const StableModel& m) {
    const Complex it = Complex(0.0, 1.0) * detail::check_theta(theta);
    const double a = m.alpha(), arh = m.alpha_rho_hat();
    return numerics::gamma_ratio({a - it, 1.0 + it}, {arh - it, 1.0 - arh + it});
}

/// Exponent of the compound Poisson part (jump rate c-/alpha).
inline Complex psi_cpp(Complex theta, const StableModel& m) {
    const Complex it = Complex(0.0, 1.0) * detail::check_theta(theta);
    const double a = m.alpha(), ar = m.alpha_rho();
    const Complex ratio = numerics::gamma_ratio({1.0 - ar + it, ar - it, 1.0 + it, a - it},
                                                {Complex(ar), Complex(1.0 - ar), Complex(a)});
    return (m.c_minus() / a) * (1.0 - ratio);
}

/// Psi assembled from its independent pieces:
/// Psi* + (1-p) Psi_cpp - (1-p) c-/alpha.
inline Complex psi_structural(Complex theta, const StableModel& m) {
    const double keep = 1.0 - m.p();
    return psi_star(theta, m) + keep * psi_cpp(theta, m) - keep * m.c_minus() / m.alpha();
}

/// Closed four-over-four gamma form of Psi.
inline Complex psi_closed(Complex theta, const StableModel& m) {
    const Complex it = Complex(0.0, 1.0) * detail::check_theta(theta);
    const double a = m.alpha(), ar = m.alpha_rho(), d = m.delta();
    return numerics::gamma_ratio({a - it, ar - it, 1.0 + it, 1.0 - ar + it},
                                 {a - d - it, d - it, d + 1.0 - a + it, 1.0 - d + it});
}

/// Ascending ladder height exponent
/// kappa(q, z) = Gamma(a rho + z) Gamma(a + z) / (Gamma(delta + z) Gamma(a - delta + z)), z > -a rho.
/// Positive for z > -delta; on (-a rho, -delta] the sign follows the gammas.
inline double kappa(double z, const StableModel& m) {
    if (!std::isfinite(z) || !(z > -m.alpha_rho())) throw DomainError("kappa: argument must exceed -alpha*rho");
    const double a = m.alpha(), ar = m.alpha_rho(), d = m.delta();
    return numerics::gamma_ratio({ar + z, a + z}, {d + z, a - d + z});
}

/// Descending ladder height exponent
/// kappa_hat(q, z) = Gamma(1 - a rho + z) Gamma(1 + z) / (Gamma(delta + 1 - a + z) Gamma(1 - delta + z)),
/// z > a rho - 1.
inline double kappa_hat(double z, const StableModel& m) {
    if (!std::isfinite(z) || !(z > m.alpha_rho() - 1.0))
        throw DomainError("kappa_hat: argument must exceed alpha*rho - 1");
    const double a = m.alpha(), ar = m.alpha_rho(), d = m.delta();
    return numerics::gamma_ratio({1.0 - ar + z, 1.0 + z}, {d + 1.0 - a + z, 1.0 - d + z});
}

/// Analytic continuation of kappa to complex z.
inline Complex kappa(Complex z, const StableModel& m) {
    const double a = m.alpha(), ar = m.alpha_rho(), d = m.delta();
    return numerics::gamma_ratio({ar + z, a + z}, {d + z, a - d + z});
}

inline Complex kappa_hat(Complex z, const StableModel& m) {
    const double a = m.alpha(), ar = m.alpha_rho(), d = m.delta();
    return numerics::gamma_ratio({1.0 - ar + z, 1.0 + z}, {d + 1.0 - a + z, 1.0 - d + z});
}

/// |Psi(theta) - kappa(q, -i theta) kappa_hat(q, i theta)| / (1 + |Psi(theta)|) with Psi
/// taken from the structural decomposition, so the check is not circular.
inline double factorization_residual(double theta, const StableModel& m) {
    const Complex it(0.0, theta);
    const Complex psi = psi_structural(theta, m);
    const Complex product = kappa(-it, m) * kappa_hat(it, m);
    return std::abs(psi - product) / (1.0 + std::abs(psi));
}

struct FactorEvaluation {
    Complex theta;
    Complex psi;
    Complex kappa;      ///< kappa(q, -i theta)
    Complex kappa_hat;  ///< kappa_hat(q, i theta)
    double structural_gap = 0.0;
    double factorization_residual = 0.0;
};

inline FactorEvaluation evaluate_factors(double theta, const StableModel& m) {
    const Complex it(0.0, theta);
    FactorEvaluation out;
    out.theta = theta;
    out.psi = psi_closed(theta, m);
    out.kappa = kappa(-it, m);
    out.kappa_hat = kappa_hat(it, m);
    const Complex structural = psi_structural(theta, m);
    out.structural_gap = std::abs(out.psi - structural) / (1.0 + std::abs(structural));
    out.factorization_residual = std::abs(structural - out.kappa * out.kappa_hat) / (1.0 + std::abs(structural));
    return out;
}

/// Parameters (a, b, c, d) of one beta-ratio factor
/// Gamma(a + z) Gamma(b + z) / (Gamma(c + z) Gamma(d + z)).
struct BetaRatioParams {
    double a, b, c, d;

    /// Condition c <= a <= d <= b <= c + 1 (the n = 0 case of the class).
    bool ordered() const noexcept { return c <= a && a <= d && d <= b && b <= c + 1.0; }
};

struct DoubleHypergeometricParams {
    BetaRatioParams ascending;
    BetaRatioParams descending;

    bool member() const noexcept { return ascending.ordered() && descending.ordered(); }
};

inline DoubleHypergeometricParams double_hypergeometric_params(const StableModel& m) {
    const double a = m.alpha(), ar = m.alpha_rho(), d = m.delta();
    return {{ar, a, d, a - d}, {1.0 - ar, 1.0, d + 1.0 - a, 1.0 - d}};
}

}  // namespace omegastop
