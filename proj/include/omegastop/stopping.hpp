#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>

#include "omegastop/errors.hpp"
#include "omegastop/levy.hpp"
#include "omegastop/model.hpp"
#include "omegastop/numerics/gamma.hpp"
#include "omegastop/numerics/hypergeometric.hpp"
#include "omegastop/numerics/quadrature.hpp"

namespace omegastop {

enum class Regime { CallFinite, PutFinite, InfiniteValue, Boundary };

inline std::string_view to_string(Regime regime) {
    switch (regime) {
        case Regime::CallFinite: return "CallFinite";
        case Regime::PutFinite: return "PutFinite";
        case Regime::InfiniteValue: return "InfiniteValue";
        case Regime::Boundary: return "Boundary";
    }
    return "unknown";
}

/// r closer than this (relative to max(1, edge)) to delta or -(delta + 1 - alpha)
/// is classified as Boundary.
inline constexpr double kBoundaryTolerance = 1e-12;

namespace detail {

inline void require_killing(const StableModel& m) {
    if (!(m.k() > 0.0)) throw DomainError("optimal stopping needs a killing coefficient k > 0");
}

inline bool at_edge(double r, double edge) {
    return std::abs(r - edge) <= kBoundaryTolerance * std::max(1.0, std::abs(edge));
}

}  // namespace detail

/// CallFinite iff 0 < r < delta, PutFinite iff -(delta + 1 - alpha) < r < 0,
/// Boundary at either edge, InfiniteValue otherwise.
inline Regime classify_regime(const StableModel& m, const GainSpec& gain) {
    detail::require_killing(m);
    const double r = gain.r;
    if (!std::isfinite(r) || r == 0.0) throw DomainError("payoff exponent r must be finite and nonzero");
    const double upper = m.delta();
    const double lower = -m.delta_hat();
    if (detail::at_edge(r, upper) || detail::at_edge(r, lower)) return Regime::Boundary;
    if (r > 0.0) return r < upper ? Regime::CallFinite : Regime::InfiniteValue;
    return r > lower ? Regime::PutFinite : Regime::InfiniteValue;
}

/// E[exp(r sup xi)] at the killing time, kappa(q,0)/kappa(q,-r), 0 < r < delta.
inline double mgf_sup(double r, const StableModel& m) {
    if (!(r > 0.0 && r < m.delta())) throw DomainError("mgf_sup: r must lie in (0, delta)");
    return kappa(0.0, m) / kappa(-r, m);
}

/// E[exp(r inf xi)] at the killing time, kappa_hat(q,0)/kappa_hat(q,r),
/// -(delta + 1 - alpha) < r < 0.
inline double mgf_inf(double r, const StableModel& m) {
    if (!(r < 0.0 && r > -m.delta_hat())) throw DomainError("mgf_inf: r must lie in (-(delta+1-alpha), 0)");
    return kappa_hat(0.0, m) / kappa_hat(r, m);
}

/// Optimal threshold: stop above b* in the call regime, in (0, 1/b*] in the
/// put regime.
inline double threshold_b_star(const StableModel& m, const GainSpec& gain) {
    switch (classify_regime(m, gain)) {
        case Regime::CallFinite: return std::pow(gain.K * mgf_sup(gain.r, m), 1.0 / gain.r);
        case Regime::PutFinite: return std::pow(gain.K * mgf_inf(gain.r, m), 1.0 / std::abs(gain.r));
        case Regime::Boundary: throw RegimeError("threshold_b_star: r sits on a regime boundary");
        case Regime::InfiniteValue: break;
    }
    throw RegimeError("threshold_b_star: value is infinite for this gain");
}

/// Renewal density u of the ascending ladder height, with Laplace transform
/// 1/kappa(q, .):
///   u(x) = e^{-delta x} (1 - e^{-x})^{a rho - 1} 2F1(delta - a rho_hat, delta; a rho; 1 - e^{-x}) / Gamma(a rho).
class AscendingRenewalDensity {
public:
    explicit AscendingRenewalDensity(const StableModel& m)
        : delta_(m.delta()),
          alpha_rho_(m.alpha_rho()),
          hyp_(m.delta() - m.alpha_rho_hat(), m.delta(), m.alpha_rho()),
          norm_(std::exp(-numerics::log_abs_gamma(m.alpha_rho()))) {}

    double operator()(double x) const {
        if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("renewal density: x must be positive and finite");
        // e^{-delta x} taken directly so that it survives the underflow of e^{-x}
        return std::exp(-delta_ * x) * undecayed(-std::expm1(-x), std::exp(-x));
    }

    /// u at x = -log(rg), given t = 1 - e^{-x} and rg = e^{-x} separately.
    double at(double t, double rg) const { return std::pow(rg, delta_) * undecayed(t, rg); }

private:
    double undecayed(double t, double rg) const { return norm_ * std::pow(t, alpha_rho_ - 1.0) * hyp_(t, rg); }

    double delta_;
    double alpha_rho_;
    numerics::GaussHypergeometric hyp_;
    double norm_;
};

/// Renewal density u_hat of the descending ladder height (Laplace transform
/// 1/kappa_hat(q, .)), computed as the convolution of the renewal densities
///   e^{-(1-delta)s} (1-e^{-s})^{delta-1} / Gamma(delta) and
///   e^{-(delta+1-a)s} (1-e^{-s})^{a rho_hat-delta-1} / Gamma(a rho_hat - delta)
/// of the two beta-ratio factors of kappa_hat. With e^{-s} = 1 - t w the
/// convolution becomes
///   u_hat(x) = t^{a rho_hat-1} (1-t)^{delta+1-a} / (Gamma(delta) Gamma(a rho_hat-delta))
///              * int_0^1 w^{delta-1} (1-w)^{a rho_hat-delta-1} (1 - t w)^{a rho - delta} dw,
/// t = 1 - e^{-x}, which is integrated numerically.
class DescendingRenewalDensity {
public:
    explicit DescendingRenewalDensity(const StableModel& m, double tol = 1e-13)
        : delta_(m.delta()),
          alpha_rho_(m.alpha_rho()),
          alpha_rho_hat_(m.alpha_rho_hat()),
          delta_hat_(m.delta_hat()),
          tol_(tol) {
        if (!(delta_ > 0.0)) throw DomainError("descending renewal density needs delta > 0 (k > 0)");
        norm_lead_ = numerics::gamma_ratio({}, {delta_ + 1.0, alpha_rho_hat_ - delta_});
        norm_trail_ = numerics::gamma_ratio({}, {delta_, alpha_rho_hat_ - delta_ + 1.0});
    }

    double operator()(double x) const {
        if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("renewal density: x must be positive and finite");
        return std::exp(-delta_hat_ * x) * undecayed(-std::expm1(-x), std::exp(-x));
    }

    double at(double t, double rg) const { return std::pow(rg, delta_hat_) * undecayed(t, rg); }

private:
    // t^{a rho_hat - 1} int_0^1 w^{delta-1} (1-w)^{a rho_hat-delta-1} (1 - t w)^{a rho-delta} dw, normalized.
    // Each half of [0, 1] is integrated in the variable (w^delta or (1-w)^{a rho_hat-delta})
    // that removes the power singularity at its end; delta can be tiny.
    double undecayed(double t, double rg) const {
        const double lead = delta_;
        const double trail = alpha_rho_hat_ - delta_;
        const double e3 = alpha_rho_ - delta_;
        numerics::QuadratureOptions opt;
        opt.tol = tol_;
        // 1 - t w written as rg + t (1 - w) so that it keeps full accuracy near t w = 1
        const auto lower = numerics::integrate_finite(
            [&](double v) {
                const double w = std::pow(v, 1.0 / lead);
                return std::pow(1.0 - w, trail - 1.0) * std::pow(rg + t * (1.0 - w), e3);
            },
            0.0, std::pow(0.5, lead), opt);
        const auto upper = numerics::integrate_finite(
            [&](double v) {
                // y = 1 - w = v^{1/trail} underflows long before (t y)^{e3} does, so the
                // base is assembled in logs
                const double log_y = std::log(v) / trail;
                const double log_ty = std::log(t) + log_y;
                double log_base = log_ty;
                if (rg > 0.0) {
                    const double log_rg = std::log(rg);
                    const double hi = std::max(log_rg, log_ty), lo = std::min(log_rg, log_ty);
                    log_base = hi + std::log1p(std::exp(lo - hi));
                }
                return std::pow(-std::expm1(log_y), lead - 1.0) * std::exp(e3 * log_base);
            },
            0.0, std::pow(0.5, trail), opt);
        return std::pow(t, alpha_rho_hat_ - 1.0) * (norm_lead_ * lower.value + norm_trail_ * upper.value);
    }

    double delta_;
    double alpha_rho_;
    double alpha_rho_hat_;
    double delta_hat_;
    double tol_;
    double norm_lead_ = 0.0;
    double norm_trail_ = 0.0;
};

inline double renewal_density_u(double x, const StableModel& m) { return AscendingRenewalDensity(m)(x); }

inline double renewal_density_u_hat(double x, const StableModel& m) { return DescendingRenewalDensity(m)(x); }

/// Integrates h(z) * density(z) over z in (z0, inf) in the variable rg = e^{-z}.
/// h receives rg; density.at receives (t, rg) with t = 1 - rg computed from
/// the gap to whichever end is closer.
template <class Density, class H>
numerics::QuadratureResult integrate_against_density(const Density& density, H&& h, double z0, double tol) {
    const double rg0 = std::exp(-z0);
    const double t0 = -std::expm1(-z0);
    numerics::QuadratureOptions opt;
    opt.tol = tol;
    return numerics::integrate_finite(
        [&](double, double rg, double gap_hi) -> double {
            const double t = t0 + gap_hi;
            const double weight = h(rg);
            if (weight == 0.0) return 0.0;
            return weight * density.at(t, rg) / rg;
        },
        0.0, rg0, opt);
}

struct SolverOptions {
    double tol = 1e-10;  ///< absolute tolerance of every value integral
};

/// Closed-form solution for one (model, gain) pair.
class StoppingSolution {
public:
    StoppingSolution(const StableModel& m, const GainSpec& gain, SolverOptions opt = {})
        : model_(m), gain_(gain), opt_(opt), regime_(classify_regime(m, gain)) {
        if (regime_ == Regime::CallFinite) {
            mgf_factor_ = mgf_sup(gain.r, m);
            factor_shift_ = kappa(-gain.r, m);
            b_star_ = std::pow(gain.K * mgf_factor_, 1.0 / gain.r);
            ascending_.emplace(m);
        } else if (regime_ == Regime::PutFinite) {
            mgf_factor_ = mgf_inf(gain.r, m);
            factor_shift_ = kappa_hat(gain.r, m);
            b_star_ = std::pow(gain.K * mgf_factor_, 1.0 / std::abs(gain.r));
            descending_.emplace(m, 1e-3 * opt.tol);
        }
    }

    Regime regime() const noexcept { return regime_; }
    bool finite() const noexcept { return regime_ == Regime::CallFinite || regime_ == Regime::PutFinite; }
    const StableModel& model() const noexcept { return model_; }
    const GainSpec& gain() const noexcept { return gain_; }

    std::optional<double> b_star() const {
        if (!finite()) return std::nullopt;
        return b_star_;
    }

    /// kappa(q,0)/kappa(q,-r) or kappa_hat(q,0)/kappa_hat(q,r).
    std::optional<double> mgf_factor() const {
        if (!finite()) return std::nullopt;
        return mgf_factor_;
    }

    /// Stopping set is [b*, inf) (call) or (0, 1/b*] (put).
    bool in_stopping_set(double x) const {
        require_finite();
        if (regime_ == Regime::CallFinite) return x >= b_star_;
        return x > 0.0 && x <= 1.0 / b_star_;
    }

    /// Value of the Lamperti-level problem, w(y) = v(e^y).
    double w(double y) const {
        require_finite();
        if (!std::isfinite(y)) throw DomainError("value_w: y must be finite");
        const double strike = gain_.K * mgf_factor_;  // = b*^{|r|}
        const double r = gain_.r;
        const double lift = std::exp(r * y);
        numerics::QuadratureResult res;
        if (regime_ == Regime::CallFinite) {
            const double z0 = std::max(0.0, std::log(b_star_) - y);
            res = integrate_against_density(
                *ascending_, [&](double rg) { return std::max(lift * std::pow(rg, -r) - strike, 0.0); }, z0,
                opt_.tol / factor_shift_);
        } else {
            const double z0 = std::max(0.0, y + std::log(b_star_));
            res = integrate_against_density(
                *descending_, [&](double rg) { return std::max(lift * std::pow(rg, r) - strike, 0.0); }, z0,
                opt_.tol / factor_shift_);
        }
        return factor_shift_ * res.value;
    }

    /// v(x); +inf for x != 0 when the value is infinite.
    double value(double x) const {
        if (!std::isfinite(x)) throw DomainError("value_v: x must be finite");
        if (x == 0.0) return 0.0;
        if (regime_ == Regime::Boundary) throw RegimeError("value_v: r sits on a regime boundary");
        if (regime_ == Regime::InfiniteValue) return std::numeric_limits<double>::infinity();
        if (x > 0.0) return w(std::log(x));
        return negative_side(x);
    }

private:
    void require_finite() const {
        if (regime_ == Regime::Boundary) throw RegimeError("r sits on a regime boundary");
        if (!finite()) throw RegimeError("value is infinite for this gain");
    }

    // v(x) = (1-p) E_x[v(X at first passage above 0)], the overshoot having
    // density (sin(pi a rho)/pi) s^{-a rho}/(1+s) in s = X/(-x).
    double negative_side(double x) const {
        constexpr double pi = std::numbers::pi;
        const double ar = model_.alpha_rho();
        const double scale = -x;
        const double weight_norm = (1.0 - model_.p()) * std::sin(pi * ar) / pi;
        const double tol = opt_.tol / std::max(weight_norm, 1e-300);
        auto kernel = [&](double s) { return std::pow(s, -ar) / (1.0 + s); };
        auto continuation = [&](double s) { return w(std::log(scale * s)); };
        auto stopped = [&](double s) { return payoff(scale * s, gain_); };

        numerics::QuadratureOptions opt;
        opt.tol = 0.5 * tol;
        double total = 0.0;
        if (regime_ == Regime::CallFinite) {
            const double split = b_star_ / scale;
            total += numerics::integrate_finite([&](double, double s, double) { return continuation(s) * kernel(s); },
                                                0.0, split, opt)
                         .value;
            total += numerics::integrate_semi_infinite([&](double s) { return stopped(s) * kernel(s); }, split,
                                                       0.5 * tol)
                         .value;
        } else {
            const double split = 1.0 / (b_star_ * scale);
            total += numerics::integrate_finite([&](double, double s, double) { return stopped(s) * kernel(s); }, 0.0,
                                                split, opt)
                         .value;
            total += numerics::integrate_semi_infinite([&](double s) { return continuation(s) * kernel(s); }, split,
                                                       0.5 * tol)
                         .value;
        }
        return weight_norm * total;
    }

    StableModel model_;
    GainSpec gain_;
    SolverOptions opt_;
    Regime regime_;
    double mgf_factor_ = 0.0;
    double factor_shift_ = 0.0;  // kappa(q,-r) or kappa_hat(q,r)
    double b_star_ = 0.0;
    std::optional<AscendingRenewalDensity> ascending_;
    std::optional<DescendingRenewalDensity> descending_;
};

inline StoppingSolution solve(const StableModel& m, const GainSpec& gain, SolverOptions opt = {}) {
    return StoppingSolution(m, gain, opt);
}

inline double value_w(double y, const StableModel& m, const GainSpec& gain) { return solve(m, gain).w(y); }

inline double value_v(double x, const StableModel& m, const GainSpec& gain) { return solve(m, gain).value(x); }

/// E_x[(X at first passage above 0)^r] for x < 0:
/// (-x)^r (sin(pi a rho)/pi) int_0^inf s^{r - a rho} / (1 + s) ds, a rho - 1 < r < a rho.
inline double rogozin_overshoot_moment(double x, double r, const StableModel& m, double tol = 1e-12) {
    if (!(x < 0.0) || !std::isfinite(x)) throw DomainError("rogozin_overshoot_moment: x must be negative");
    const double ar = m.alpha_rho();
    if (!(r > ar - 1.0 && r < ar))
        throw DomainError("rogozin_overshoot_moment: integral diverges unless alpha*rho - 1 < r < alpha*rho");
    constexpr double pi = std::numbers::pi;
    const double e = r - ar;
    const auto res = numerics::integrate_semi_infinite(
        [&](double s, double gap) { return std::pow(gap, e) / (1.0 + s); }, 0.0, tol, true);
    return std::pow(-x, r) * std::sin(pi * ar) / pi * res.value;
}

}  // namespace omegastop
