#pragma once

#include "ssreg/common.hpp"
#include "ssreg/cost.hpp"
#include "ssreg/lti.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace ssreg {

// One online-gradient update: u - eta (grad_phi(u) + G_hat^T grad_psi(y)).
Vector controller_step(const Vector& u, const Vector& y, const Matrix& G_hat, const CostModel& cost, double eta);

/**
 * Step-size certificate for the gradient controller in closed loop with the
 * plant. With G_bar = (I-A)^{-1} B and P solving A^T P A - P = -Q:
 *
 *   l      = l_phi + ||G||^2 l_psi
 *   a      = 0.5 l_psi^2 ||C||^2 ||G||^2
 *   b      = 2 ||A^T P G_bar||^2 / (eps lambda_min(Q)) + ||G_bar^T P G_bar||
 *   eta*   = (1 - eps) / (l/2 + b)
 *
 * valid when lambda_min(Q) > a / (eps (1 - eps)). All norms are spectral.
 */
struct StepSizeCertificate {
    double epsilon = 0.5;
    Matrix Q;
    Matrix P;
    double lambda_min_Q = 0.0;
    double ell = 0.0;
    double a = 0.0;
    double b = 0.0;
    double eta_star = 0.0;
    double eta_static = 0.0;  // 2 / l, the bound for a static plant
};

// With Q omitted, Q = 1.01 a / (eps (1 - eps)) I.
StepSizeCertificate step_size_certificate(const LtiSystem& sys, const CostModel& cost, const Matrix& G, double epsilon,
                                          const std::optional<Matrix>& Q = std::nullopt);

nlohmann::json certificate_to_json(const StepSizeCertificate& cert);

enum class LoopStatus { Completed, Diverged };

struct ClosedLoopRecord {
    Signal u;       // m x K
    Signal x;       // n x K
    Signal y;       // p x K
    Signal w;       // r x K
    Signal u_star;  // m x K, evaluation-only optimizer
    std::vector<double> tracking_error;  // ||xi_k - xi*_k||
    std::vector<double> lyapunov_U;      // empty unless a certificate was supplied
    Matrix G_hat;
    double eta = 0.0;
    Eigen::Index horizon = 0;
    LoopStatus status = LoopStatus::Completed;
    Eigen::Index diverged_at = -1;  // first step index whose input exceeded the bound

    Eigen::Index steps() const { return u.cols(); }
};

inline constexpr double kDivergenceThreshold = 1e8;

/**
 * Plant and controller iterated together for `horizon` steps:
 *
 *   y_k = C x_k,  u_{k+1} = controller_step(u_k, y_k),  x_{k+1} = A x_k + B u_k + E w_k
 *
 * The controller sees only G_hat and the measured outputs. The true system is
 * used for the optimizer u*_k and the tracking error
 * ||(x_k, u_k) - ((I-A)^{-1}(B u*_k + E w_k), u*_k)||. If ||u|| exceeds
 * 1e8 the run stops with LoopStatus::Diverged.
 */
ClosedLoopRecord run_closed_loop(const LtiSystem& sys, const CostModel& cost, const Matrix& G_hat, double eta,
                                 const Vector& x0, const Vector& u0, const Signal& disturbance, Eigen::Index horizon,
                                 const StepSizeCertificate* certificate = nullptr);

struct LyapunovStep {
    double U = 0.0;          // U_k
    double delta_U = 0.0;    // U_{k+1} - U_k
    double alpha3 = 0.0;     // decrease rate term evaluated at z_k
    double sigma = 0.0;      // disturbance gain term evaluated at (v1, v2)
    double norm_dw = 0.0;    // ||w_{k+1} - w_k||
    double norm_du_star = 0.0;
    bool decrease_ok = false;  // delta_U <= -alpha3 + sigma (up to round-off)
};

// Lyapunov function of the closed loop
//   U = (f(u) - f(u*)) / eta + x~^T P x~,   x~ = x - G_bar u - H_bar w
// and the ISS decrease inequality, one entry per transition k -> k+1.
std::vector<LyapunovStep> lyapunov_diagnostic(const LtiSystem& sys, const CostModel& cost, const Matrix& G,
                                              const Matrix& H, const ClosedLoopRecord& record,
                                              const StepSizeCertificate& certificate);

// Lyapunov value U_k for every recorded step.
std::vector<double> lyapunov_values(const LtiSystem& sys, const CostModel& cost, const Matrix& G, const Matrix& H,
                                    const ClosedLoopRecord& record, const Matrix& P);

// `k,tracking_error,lyapunov_U,decrease_ok,norm_dw,u_0..,y_0..`; the last row
// has no transition and leaves decrease_ok and norm_dw empty.
std::string closed_loop_to_csv(const ClosedLoopRecord& record, const std::vector<LyapunovStep>& diagnostic);

}  // namespace ssreg
