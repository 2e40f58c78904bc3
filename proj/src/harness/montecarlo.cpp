#include "ssreg/harness/montecarlo.hpp"

#include "ssreg/excitation.hpp"
#include "ssreg/identify.hpp"
#include "ssreg/io.hpp"
#include "ssreg/parallel.hpp"

#include <cmath>
#include <limits>

namespace ssreg::harness {

GainCampaign prepare_gain_campaign(const LtiSystem& sys, Eigen::Index horizon, Eigen::Index window,
                                   Eigen::Index n_bound, std::uint64_t input_seed, unsigned workers) {
    if (horizon <= window) {
        throw ConfigError("montecarlo: horizon " + std::to_string(horizon) + " leaves no window of length " +
                          std::to_string(window));
    }
    GainCampaign c{.system = sys,
                   .G = steady_state_gains(sys).G,
                   .u = random_pe_input(sys.m(), horizon, n_bound + 1, input_seed),
                   .x0 = Vector::Zero(sys.n()),
                   .window = window,
                   .n_bound = n_bound,
                   .pe_flags = {}};
    c.pe_flags = rolling_pe_flags(c.u, window, n_bound, workers);
    return c;
}

Matrix run_gain_trials(const GainCampaign& campaign, const DisturbanceSpec& disturbance,
                       std::uint64_t disturbance_seed, int trials, unsigned workers) {
    if (trials < 1) {
        throw ConfigError("montecarlo: trial count must be positive");
    }
    const Eigen::Index horizon = campaign.u.cols();
    const Eigen::Index steps = campaign.step_count();
    Matrix errors(trials, steps);
    parallel_for(static_cast<std::size_t>(trials), workers, [&](std::size_t t) {
        DisturbanceSpec spec = disturbance;
        spec.seed = mix_seed(disturbance_seed, t);
        const Signal w = make_disturbance(spec, horizon, campaign.system.r());
        const Trajectory traj = simulate(campaign.system, campaign.x0, campaign.u, w);
        const auto rolled = rolling_estimate(campaign.u, traj.outputs.leftCols(horizon), campaign.window,
                                             campaign.n_bound, campaign.pe_flags, 1);
        const auto row = static_cast<Eigen::Index>(t);
        for (Eigen::Index j = 0; j < steps; ++j) {
            const auto& step = rolled[static_cast<std::size_t>(j)];
            errors(row, j) = step.estimate ? (campaign.G - step.estimate->G_hat).norm()
                                           : std::numeric_limits<double>::quiet_NaN();
        }
    });
    return errors;
}

MonteCarloSummary summarize_trials(const Matrix& errors, Eigen::Index first_step, const DisturbanceSpec& disturbance) {
    MonteCarloSummary s;
    s.trials = static_cast<int>(errors.rows());
    s.disturbance_kind = to_string(disturbance.kind);
    if (disturbance.kind == DisturbanceKind::IidGaussian) {
        s.std_schedule = disturbance.decay == 1.0 ? "constant" : "geometric:" + format_double(disturbance.decay);
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (Eigen::Index j = 0; j < errors.cols(); ++j) {
        double sum = 0.0;
        int count = 0;
        for (Eigen::Index t = 0; t < errors.rows(); ++t) {
            if (!std::isnan(errors(t, j))) {
                sum += errors(t, j);
                ++count;
            }
        }
        const double mean = count > 0 ? sum / count : nan;
        double ss = 0.0;
        for (Eigen::Index t = 0; t < errors.rows(); ++t) {
            if (!std::isnan(errors(t, j))) {
                ss += (errors(t, j) - mean) * (errors(t, j) - mean);
            }
        }
        s.k.push_back(first_step + j);
        s.mean.push_back(mean);
        s.stddev.push_back(count > 1 ? std::sqrt(ss / (count - 1)) : (count == 1 ? 0.0 : nan));
        s.count.push_back(count);
    }
    return s;
}

std::string summary_to_csv(const MonteCarloSummary& summary) {
    std::string out = "k,mean_err,std_err,count\n";
    for (std::size_t i = 0; i < summary.k.size(); ++i) {
        out += std::to_string(summary.k[i]);
        out += ',';
        if (!std::isnan(summary.mean[i])) {
            out += format_double(summary.mean[i]);
        }
        out += ',';
        if (!std::isnan(summary.stddev[i])) {
            out += format_double(summary.stddev[i]);
        }
        out += ',';
        out += std::to_string(summary.count[i]);
        out += '\n';
    }
    return out;
}

std::string trials_to_csv(const Matrix& errors, Eigen::Index first_step) {
    std::string out = "trial,k,err_fro\n";
    for (Eigen::Index t = 0; t < errors.rows(); ++t) {
        for (Eigen::Index j = 0; j < errors.cols(); ++j) {
            out += std::to_string(t);
            out += ',';
            out += std::to_string(first_step + j);
            out += ',';
            if (!std::isnan(errors(t, j))) {
                out += format_double(errors(t, j));
            }
            out += '\n';
        }
    }
    return out;
}

double tail_mean(const MonteCarloSummary& summary, std::size_t tail) {
    const std::size_t n = summary.mean.size();
    const std::size_t begin = tail >= n ? 0 : n - tail;
    double sum = 0.0;
    int count = 0;
    for (std::size_t i = begin; i < n; ++i) {
        if (!std::isnan(summary.mean[i])) {
            sum += summary.mean[i];
            ++count;
        }
    }
    return count > 0 ? sum / count : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace ssreg::harness
