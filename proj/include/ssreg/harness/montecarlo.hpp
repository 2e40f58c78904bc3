#pragma once

#include "ssreg/common.hpp"
#include "ssreg/harness/disturbance.hpp"
#include "ssreg/lti.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ssreg::harness {

// One input stream replayed under many disturbance realizations. The input,
// initial state and per-window PE flags are shared by every trial.
struct GainCampaign {
    LtiSystem system;
    Matrix G;  // oracle gain
    Signal u;  // m x horizon
    Vector x0;
    Eigen::Index window = 0;
    Eigen::Index n_bound = 0;
    std::vector<bool> pe_flags;

    Eigen::Index first_step() const { return window; }
    Eigen::Index step_count() const { return u.cols() - window; }
};

GainCampaign prepare_gain_campaign(const LtiSystem& sys, Eigen::Index horizon, Eigen::Index window,
                                   Eigen::Index n_bound, std::uint64_t input_seed, unsigned workers);

// Frobenius error ||G - G_hat|| for every trial (row) and rolling step
// (column). Skipped windows hold NaN. Trial t draws its disturbance from
// mix_seed(disturbance_seed, t).
Matrix run_gain_trials(const GainCampaign& campaign, const DisturbanceSpec& disturbance,
                       std::uint64_t disturbance_seed, int trials, unsigned workers);

struct MonteCarloSummary {
    std::vector<Eigen::Index> k;  // newest output index of each window
    std::vector<double> mean;     // NaN where no trial produced an estimate
    std::vector<double> stddev;   // sample standard deviation across trials
    std::vector<int> count;       // trials with an estimate at this step
    int trials = 0;
    std::string disturbance_kind;
    std::string std_schedule;
};

MonteCarloSummary summarize_trials(const Matrix& errors, Eigen::Index first_step, const DisturbanceSpec& disturbance);

// `k,mean_err,std_err,count`
std::string summary_to_csv(const MonteCarloSummary& summary);
// `trial,k,err_fro`, one row per trial and step
std::string trials_to_csv(const Matrix& errors, Eigen::Index first_step);

// Mean of the summary's mean curve over its last `tail` steps, ignoring NaN.
double tail_mean(const MonteCarloSummary& summary, std::size_t tail);

}  // namespace ssreg::harness
