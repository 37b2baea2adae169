#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "minerdr/error.hpp"

namespace minerdr::sarima {

/// (p,d,q)(P,D,Q)[S].
struct SarimaOrder {
    int p = 0, d = 0, q = 0;
    int P = 0, D = 0, Q = 0;
    int S = 24;

    [[nodiscard]] int num_coefficients() const { return p + q + P + Q; }
    /// Observations consumed by differencing and AR conditioning.
    [[nodiscard]] std::size_t condition_length() const {
        return static_cast<std::size_t>(d + D * S + p + P * S);
    }
    [[nodiscard]] std::string label() const;
    /// Throws PreconditionError for negative orders, orders above 5 or S < 1.
    void validate() const;
    bool operator==(const SarimaOrder&) const = default;
};

/// Parses "(1,0,0)(1,1,0)[24]" or "1,0,0,1,1,0,24".
[[nodiscard]] SarimaOrder parse_order(std::string_view text);

/// Coefficients under the conventions
///   phi(B) = 1 - sum phi_i B^i,        theta(B) = 1 + sum theta_i B^i,
///   Phi(B^S) = 1 - sum Phi_i B^{iS},   Theta(B^S) = 1 + sum Theta_i B^{iS}.
struct SarimaParams {
    std::vector<double> phi, theta, Phi, Theta;
    double sigma = 1.0;

    /// phi, theta, Phi, Theta concatenated.
    [[nodiscard]] std::vector<double> coefficients() const;
    [[nodiscard]] static SarimaParams from_coefficients(const SarimaOrder& order, std::span<const double> c,
                                                        double sigma);
};

struct SarimaFit {
    SarimaOrder order;
    SarimaParams params;
    /// Standard errors and normal p-values for phi, theta, Phi, Theta, sigma.
    std::vector<double> se;
    std::vector<double> p_values;
    double loglik = 0.0;
    double aic = 0.0;
    double css = 0.0;
    std::size_t n_eff = 0;
    std::size_t condition_start = 0;
    /// Residuals after conditioning, segments concatenated in order.
    std::vector<double> residuals;
    bool converged = false;
    int evaluations = 0;

    [[nodiscard]] std::vector<std::string> parameter_names() const;
};

/// Raised when the optimizer stops without converging; carries the best fit.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& message, SarimaFit best)
        : Error("convergence", message), best_(std::move(best)) {}
    [[nodiscard]] const SarimaFit& best() const noexcept { return best_; }

private:
    SarimaFit best_;
};

/// (1-B)^d (1-B^S)^D x.
[[nodiscard]] std::vector<double> difference(std::span<const double> x, int d, int D, int S);
/// Inverse of difference() given the first d + D*S original values.
[[nodiscard]] std::vector<double> integrate(std::span<const double> w, int d, int D, int S,
                                            std::span<const double> initial);

/// True when every root of 1 - sum c_i z^i lies outside the unit circle.
[[nodiscard]] bool is_stationary(std::span<const double> ar);

/// Simulates the model with standard normal innovations scaled by sigma,
/// discarding `burn_in` leading values (default 10*S + 200).
[[nodiscard]] std::vector<double> simulate(const SarimaOrder& order, const SarimaParams& params, std::size_t n,
                                           std::uint64_t seed, std::optional<std::size_t> burn_in = std::nullopt);

struct FitOptions {
    /// Index in each segment where residuals start; at least the order's
    /// condition_length(). A common value makes AIC comparable across orders.
    std::optional<std::size_t> condition_start;
    int max_evaluations = 20000;
    int restarts = 3;
    double tolerance = 1e-10;
};

/// Conditional-sum-of-squares fit. The series must be gap free.
[[nodiscard]] SarimaFit fit(std::span<const double> series, const SarimaOrder& order, const FitOptions& options = {});
/// Joint fit over several gap-free segments sharing one parameter set.
[[nodiscard]] SarimaFit fit(const std::vector<std::span<const double>>& segments, const SarimaOrder& order,
                            const FitOptions& options = {});

/// CSS objective value sum e_t^2 for given parameters.
[[nodiscard]] double css(std::span<const double> series, const SarimaOrder& order, const SarimaParams& params,
                         std::optional<std::size_t> condition_start = std::nullopt);

/// Maximal runs of finite values with at least `min_length` elements.
[[nodiscard]] std::vector<std::span<const double>> finite_segments(std::span<const double> x,
                                                                   std::size_t min_length);

struct Candidate {
    SarimaOrder order;
    std::optional<double> aic;
    std::string error;
};

struct Selection {
    SarimaOrder order;
    SarimaFit fit;
    std::vector<Candidate> table;
};

/// Minimum-AIC order over `grid`, every candidate conditioned on the same
/// start so the AIC values are comparable. Ties within 1e-9 go to the order
/// with fewer coefficients.
[[nodiscard]] Selection select_order(const std::vector<std::span<const double>>& segments,
                                     std::span<const SarimaOrder> grid, const FitOptions& options = {});
[[nodiscard]] Selection select_order(std::span<const double> series, std::span<const SarimaOrder> grid,
                                     const FitOptions& options = {});

struct Forecast {
    std::vector<double> mean;
    std::vector<double> std;
};

/// Minimum-MSE forecasts from the end of `history` (original, undifferenced
/// scale), with psi-weight standard errors.
[[nodiscard]] Forecast forecast(const SarimaFit& fit, std::size_t horizon, std::span<const double> history);

/// First `n` psi weights of theta(B)Theta(B^S) / [phi(B)Phi(B^S)(1-B)^d(1-B^S)^D].
[[nodiscard]] std::vector<double> psi_weights(const SarimaOrder& order, const SarimaParams& params, std::size_t n);

/// One-step-ahead in-sample predictions y_t - e_t; NaN before the
/// conditioning start.
[[nodiscard]] std::vector<double> one_step_predictions(const SarimaOrder& order, const SarimaParams& params,
                                                       std::span<const double> series);

}  // namespace minerdr::sarima
