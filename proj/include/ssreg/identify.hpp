#pragma once

#include "ssreg/common.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ssreg {

enum class EstimationMethod { NoiseFree, Differenced, Rolling };

std::string to_string(EstimationMethod method);
EstimationMethod estimation_method_from_string(const std::string& name);

struct DataWindow {
    Eigen::Index start = 0;
    Eigen::Index length = 0;  // number of input samples
};

struct GainEstimate {
    Matrix G_hat;                   // p x m
    double residual_equality = 0.0; // || Y_diff M ||_F
    double residual_identity = 0.0; // || U M - I ||_F
    DataWindow window;
    EstimationMethod method = EstimationMethod::NoiseFree;
    // Excitation checks; filled only when the caller supplies an order bound.
    std::optional<bool> pe_differenced;
    std::optional<bool> pe_raw;
    std::vector<std::string> warnings;
};

struct DifferencedData {
    Signal v;  // v_k = u_{k+1} - u_k
    Signal r;  // r_k = y_{k+1} - y_k
};

// Residual level above which the linear system for M is declared unsolved.
inline constexpr double kEstimatorResidualTol = 1e-6;

/**
 * Steady-state gain from a noise-free trajectory: u has T samples, y has
 * T+1. Solves [Y_diff; U] M = [0; I] for the minimum-norm M and returns
 * G_hat = [y_0 ... y_{T-1}] M.
 *
 * Throws NotExcitingError when U M = I cannot be met and
 * InconsistentDataError when Y_diff M = 0 cannot be met.
 */
GainEstimate estimate_gain_noise_free(const Signal& u, const Signal& y);

DifferencedData difference_signals(const Signal& u, const Signal& y);

/**
 * Gain under a constant disturbance: u has T+1 samples, y has T+2. The
 * first differences form a disturbance-free system to which the noise-free
 * estimator is applied. With n_bound set, PE of order n_bound+1 is checked on
 * both the differenced and the raw input and recorded on the estimate.
 */
GainEstimate estimate_gain_constant_noise(const Signal& u, const Signal& y,
                                          std::optional<Eigen::Index> n_bound = std::nullopt);

// Smallest rolling window (in input samples) for a given input dimension and order bound.
Eigen::Index min_rolling_window(Eigen::Index m, Eigen::Index n_bound);

struct RollingStep {
    Eigen::Index k = 0;  // index of the newest output sample in the window
    bool pe_ok = false;
    std::optional<GainEstimate> estimate;  // empty when the window was skipped
    std::string skip_reason;
};

/**
 * Rolling-horizon estimator over a stream of (u_k, y_k) pairs (equal column
 * counts). For each k >= window_length the differenced estimator runs on
 * u_{k-L..k-1}, y_{k-L..k}. Windows that fail the PE certificate or the
 * estimator residual checks are returned flagged, without an estimate.
 * Windows are independent and processed on up to `workers` threads; the
 * output is ordered by k.
 */
std::vector<RollingStep> rolling_estimate(const Signal& u, const Signal& y, Eigen::Index window_length,
                                          Eigen::Index n_bound, unsigned workers = 1);

// The per-window PE flags depend on the input stream only. Campaigns that
// replay one input under many disturbance realizations compute them once.
std::vector<bool> rolling_pe_flags(const Signal& u, Eigen::Index window_length, Eigen::Index n_bound,
                                   unsigned workers = 1);
std::vector<RollingStep> rolling_estimate(const Signal& u, const Signal& y, Eigen::Index window_length,
                                          Eigen::Index n_bound, const std::vector<bool>& pe_flags,
                                          unsigned workers = 1);

// CSV rows `k,err_fro,residual_equality,residual_identity,pe_ok`. err_fro is
// left empty without an oracle gain.
std::string rolling_to_csv(const std::vector<RollingStep>& steps, const std::optional<Matrix>& G_true);

}  // namespace ssreg
