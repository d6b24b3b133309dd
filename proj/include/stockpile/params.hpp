#pragma once

#include <stdexcept>
#include <string>

namespace stockpile {

/// Raised when a caller breaks a documented precondition (index out of
/// range, argument outside the model domain, mismatched shapes).
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Storage volatility specification. Only the degenerate case is used;
/// every scheme term carrying sigma^2 is still evaluated.
enum class VolatilityKind { Zero };

/// Scalar constants of the cartel / fringe / arbitrageur market.
///
/// Units: one time unit is one year; k, z, q are fractions of annual
/// global demand; prices are in the same unit as the production cost c.
struct ModelParams {
    double r = 0.1;             ///< discount rate
    double epsilon = 4e-4;      ///< slope of the linear demand D(p) = 1 - epsilon p
    double alpha = 1e4;         ///< penalty on deviation from the target share
    double q_circ = 0.42;       ///< target cartel share
    double c = 10.0;            ///< unit production cost
    double kappa = 2e-3;        ///< fringe investment response
    double lambda_b = 0.4;      ///< price sensitivity inside kappa (lambda p - mu)
    double mu_b = 25.0;         ///< investment threshold inside kappa (lambda p - mu)
    double a_f = 0.01;          ///< amplitude of the storage modulation f(k)
    double nu_z = 1e-4;         ///< fringe-production noise intensity
    double k_min = 0.0;
    double k_max = 0.05;
    double z_min = 0.35;
    double z_max = 0.75;
    double g_coeff = 0.0;       ///< storage cost coefficient
    double g_exponent = 3.0;    ///< storage cost exponent
    VolatilityKind sigma_spec = VolatilityKind::Zero;
    double b_tilde_width = 0.02;  ///< support width (z units) of the z-boundary forcing
    double b_tilde_amp = 0.05;    ///< amplitude of the z-boundary forcing

    /// Throws ContractViolation when an invariant of the parameter set fails.
    void validate() const;

    /// alpha*epsilon; the boundary expansion needs (alpha eps)^2 + alpha eps > 1.
    double alpha_eps() const { return alpha * epsilon; }

    static ModelParams baseline();
    /// Baseline with a larger storage range and a cubic storage cost.
    static ModelParams appendix();
};

}  // namespace stockpile
