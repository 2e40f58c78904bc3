#include "ssreg/identify.hpp"

#include <Eigen/QR>

#include "ssreg/excitation.hpp"
#include "ssreg/io.hpp"
#include "ssreg/parallel.hpp"

namespace ssreg {

std::string to_string(EstimationMethod method) {
    switch (method) {
        case EstimationMethod::NoiseFree:
            return "noise_free";
        case EstimationMethod::Differenced:
            return "differenced";
        case EstimationMethod::Rolling:
            return "rolling";
    }
    return "unknown";
}

EstimationMethod estimation_method_from_string(const std::string& name) {
    if (name == "noise_free") {
        return EstimationMethod::NoiseFree;
    }
    if (name == "differenced") {
        return EstimationMethod::Differenced;
    }
    if (name == "rolling") {
        return EstimationMethod::Rolling;
    }
    throw ConfigError("unknown estimation method '" + name + "'");
}

GainEstimate estimate_gain_noise_free(const Signal& u, const Signal& y) {
    const Eigen::Index T = u.cols();
    const Eigen::Index m = u.rows();
    const Eigen::Index p = y.rows();
    if (m < 1 || p < 1 || T < 1) {
        throw ContractViolation("estimate_gain: empty input or output signal");
    }
    if (y.cols() != T + 1) {
        throw ContractViolation("estimate_gain: need T+1 output samples for T input samples");
    }
    if (!u.allFinite() || !y.allFinite()) {
        throw ContractViolation("estimate_gain: non-finite data");
    }

    const Matrix Y_diff = y.rightCols(T) - y.leftCols(T);
    Matrix K(p + m, T);
    K << Y_diff, u;
    Matrix rhs = Matrix::Zero(p + m, m);
    rhs.bottomRows(m).setIdentity();

    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(K);
    cod.setThreshold(default_tolerances().rank_rel);
    const Matrix M = cod.solve(rhs);

    GainEstimate est;
    est.residual_equality = (Y_diff * M).norm();
    est.residual_identity = (u * M - Matrix::Identity(m, m)).norm();
    est.window = {0, T};
    est.method = EstimationMethod::NoiseFree;
    if (!(est.residual_identity <= kEstimatorResidualTol)) {
        throw NotExcitingError("estimate_gain: U M = I not solvable (residual " +
                               format_double(est.residual_identity) + "); input not sufficiently exciting");
    }
    if (!(est.residual_equality <= kEstimatorResidualTol)) {
        throw InconsistentDataError("estimate_gain: Y_diff M = 0 not solvable (residual " +
                                    format_double(est.residual_equality) +
                                    "); data inconsistent with a noise-free LTI system");
    }
    est.G_hat = y.leftCols(T) * M;
    return est;
}

DifferencedData difference_signals(const Signal& u, const Signal& y) {
    if (u.cols() < 2 || y.cols() < 2) {
        throw InsufficientDataError("difference_signals: need at least two samples");
    }
    return {u.rightCols(u.cols() - 1) - u.leftCols(u.cols() - 1), y.rightCols(y.cols() - 1) - y.leftCols(y.cols() - 1)};
}

GainEstimate estimate_gain_constant_noise(const Signal& u, const Signal& y, std::optional<Eigen::Index> n_bound) {
    if (y.cols() != u.cols() + 1) {
        throw ContractViolation("estimate_gain_constant_noise: need T+2 output samples for T+1 input samples");
    }
    const DifferencedData d = difference_signals(u, y);

    std::optional<bool> pe_v;
    std::optional<bool> pe_u;
    std::vector<std::string> warnings;
    if (n_bound) {
        const Eigen::Index order = *n_bound + 1;
        pe_v = persistency_certificate(d.v, order).is_pe;
        pe_u = persistency_certificate(u, order).is_pe;
        if (*pe_v != *pe_u) {
            warnings.push_back(std::string("PE of order ") + std::to_string(order) +
                               (*pe_v ? " holds on the differenced input but not on the raw input"
                                      : " holds on the raw input but not on the differenced input"));
        }
    }

    GainEstimate est = estimate_gain_noise_free(d.v, d.r);
    est.method = EstimationMethod::Differenced;
    est.window = {0, u.cols()};
    est.pe_differenced = pe_v;
    est.pe_raw = pe_u;
    est.warnings = std::move(warnings);
    return est;
}

Eigen::Index min_rolling_window(Eigen::Index m, Eigen::Index n_bound) {
    return min_samples(m, n_bound + 1) + 1;
}

namespace {

void check_rolling_config(const Signal& u, Eigen::Index window_length, Eigen::Index n_bound) {
    if (n_bound < 1) {
        throw ConfigError("rolling_estimate: n_bound must be positive");
    }
    const Eigen::Index minimum = min_rolling_window(u.rows(), n_bound);
    if (window_length < minimum) {
        throw ConfigError("rolling_estimate: window of " + std::to_string(window_length) +
                          " samples is below the minimum " + std::to_string(minimum));
    }
}

std::size_t window_count(const Signal& u, Eigen::Index window_length) {
    return u.cols() > window_length ? static_cast<std::size_t>(u.cols() - window_length) : 0;
}

}  // namespace

std::vector<bool> rolling_pe_flags(const Signal& u, Eigen::Index window_length, Eigen::Index n_bound,
                                   unsigned workers) {
    check_rolling_config(u, window_length, n_bound);
    const std::size_t count = window_count(u, window_length);
    std::vector<char> flags(count, 0);
    parallel_for(count, workers, [&](std::size_t idx) {
        const auto start = static_cast<Eigen::Index>(idx);
        const Signal u_win = u.middleCols(start, window_length);
        const Signal v = u_win.rightCols(window_length - 1) - u_win.leftCols(window_length - 1);
        flags[idx] = persistency_certificate(v, n_bound + 1).is_pe ? 1 : 0;
    });
    return {flags.begin(), flags.end()};
}

std::vector<RollingStep> rolling_estimate(const Signal& u, const Signal& y, Eigen::Index window_length,
                                          Eigen::Index n_bound, unsigned workers) {
    return rolling_estimate(u, y, window_length, n_bound, rolling_pe_flags(u, window_length, n_bound, workers),
                            workers);
}

std::vector<RollingStep> rolling_estimate(const Signal& u, const Signal& y, Eigen::Index window_length,
                                          Eigen::Index n_bound, const std::vector<bool>& pe_flags,
                                          unsigned workers) {
    check_rolling_config(u, window_length, n_bound);
    if (u.cols() != y.cols()) {
        throw ContractViolation("rolling_estimate: input and output streams must have equal length");
    }
    const std::size_t count = window_count(u, window_length);
    if (pe_flags.size() != count) {
        throw ContractViolation("rolling_estimate: PE flag count does not match the number of windows");
    }

    std::vector<RollingStep> steps(count);
    parallel_for(count, workers, [&](std::size_t idx) {
        const Eigen::Index start = static_cast<Eigen::Index>(idx);
        RollingStep& step = steps[idx];
        step.k = start + window_length;
        step.pe_ok = pe_flags[idx];
        if (!step.pe_ok) {
            step.skip_reason = "differenced input not persistently exciting";
            return;
        }
        try {
            GainEstimate est =
                estimate_gain_constant_noise(u.middleCols(start, window_length), y.middleCols(start, window_length + 1));
            est.method = EstimationMethod::Rolling;
            est.window = {start, window_length};
            est.pe_differenced = true;
            step.estimate = std::move(est);
        } catch (const EstimatorError& e) {
            step.skip_reason = e.what();
        }
    });
    return steps;
}

std::string rolling_to_csv(const std::vector<RollingStep>& steps, const std::optional<Matrix>& G_true) {
    std::string out = "k,err_fro,residual_equality,residual_identity,pe_ok\n";
    for (const auto& s : steps) {
        out += std::to_string(s.k);
        out += ',';
        if (s.estimate && G_true) {
            out += format_double((*G_true - s.estimate->G_hat).norm());
        }
        out += ',';
        if (s.estimate) {
            out += format_double(s.estimate->residual_equality);
        }
        out += ',';
        if (s.estimate) {
            out += format_double(s.estimate->residual_identity);
        }
        out += ',';
        out += s.pe_ok ? '1' : '0';
        out += '\n';
    }
    return out;
}

}  // namespace ssreg
