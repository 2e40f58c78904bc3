#include "ssreg/harness/commands.hpp"

#include "ssreg/excitation.hpp"
#include "ssreg/io.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <ostream>
#include <thread>

namespace ssreg::harness {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

DisturbanceSpec effective_disturbance(const ExperimentConfig& cfg, DisturbanceSpec (*fallback)()) {
    DisturbanceSpec spec = cfg.disturbance_given ? cfg.disturbance : fallback();
    spec.seed = cfg.disturbance_seed();
    return spec;
}

json estimate_to_json(const GainEstimate& est, Eigen::Index n_bound, const std::optional<double>& err) {
    json j = {{"method", to_string(est.method)},
              {"G_hat", matrix_to_json(est.G_hat)},
              {"residual_equality", est.residual_equality},
              {"residual_identity", est.residual_identity},
              {"window", {{"start", est.window.start}, {"length", est.window.length}}},
              {"n_bound", n_bound},
              {"warnings", est.warnings}};
    if (est.pe_differenced) {
        j["pe_differenced"] = *est.pe_differenced;
    }
    if (est.pe_raw) {
        j["pe_raw"] = *est.pe_raw;
    }
    if (err) {
        j["err_fro"] = *err;
    }
    return j;
}

Matrix load_g_hat(const std::string& path) {
    try {
        const json j = json::parse(read_text_file(path));
        return matrix_from_json(j.at("G_hat"));
    } catch (const json::exception& e) {
        throw ConfigError("cannot read G_hat from '" + path + "': " + e.what());
    }
}

Eigen::Index required_samples(const ExperimentConfig& cfg, Eigen::Index minimum, const char* what) {
    const Eigen::Index T = cfg.identification.samples.value_or(minimum);
    if (T < minimum) {
        throw ConfigError(std::string(what) + ": identification.samples = " + std::to_string(T) +
                          " is below the minimum of " + std::to_string(minimum));
    }
    return T;
}

Trajectory generate_data(const ExperimentConfig& cfg, const LtiSystem& sys, Eigen::Index T, Eigen::Index order,
                         const DisturbanceSpec& dist) {
    const Signal u = random_pe_input(sys.m(), T, order, cfg.input_seed());
    const Signal w = make_disturbance(dist, T, sys.r());
    return simulate(sys, Vector::Zero(sys.n()), u, w);
}

Trajectory load_data(const std::string& path) {
    Trajectory traj = trajectory_from_csv(read_text_file(path));
    traj.validate();
    return traj;
}

// Trims a loaded trajectory to `extra` more output samples than inputs.
void align(Signal& u, Signal& y, Eigen::Index extra) {
    const Eigen::Index T = std::min(u.cols(), y.cols() - extra);
    if (T < 1) {
        throw ConfigError("trajectory data is too short");
    }
    u = u.leftCols(T).eval();
    y = y.leftCols(T + extra).eval();
}

void write_json(const fs::path& path, const json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

double post_transient_max(const std::vector<double>& err) {
    double band = 0.0;
    for (std::size_t k = err.size() / 2; k < err.size(); ++k) {
        band = std::max(band, err[k]);
    }
    return band;
}

}  // namespace

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const DivergedError*>(&e)) {
        return kExitDiverged;
    }
    if (dynamic_cast<const EstimatorError*>(&e)) {
        return kExitEstimator;
    }
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ContractViolation*>(&e) ||
        dynamic_cast<const InsufficientDataError*>(&e) || dynamic_cast<const CertificateConditionError*>(&e)) {
        return kExitConfig;
    }
    return kExitInternal;
}

unsigned worker_count() {
    if (const char* env = std::getenv("SSREG_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) {
            return static_cast<unsigned>(v);
        }
        throw ConfigError(std::string("SSREG_WORKERS must be a positive integer, got '") + env + "'");
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

DisturbanceSpec default_montecarlo_disturbance() {
    DisturbanceSpec s;
    s.kind = DisturbanceKind::IidGaussian;
    s.std = 0.1;
    s.decay = 0.95;
    return s;
}

DisturbanceSpec default_tracking_disturbance() {
    DisturbanceSpec sine;
    sine.kind = DisturbanceKind::Sinusoid;
    sine.amplitude = 1.0;
    sine.period = 400.0;
    DisturbanceSpec walk;
    walk.kind = DisturbanceKind::RandomWalk;
    walk.step_std = 0.002;
    DisturbanceSpec s;
    s.kind = DisturbanceKind::Sum;
    s.components = {sine, walk};
    return s;
}

GainEstimate cmd_identify(const ExperimentConfig& cfg, std::ostream& log) {
    cfg.validate();
    const LtiSystem sys = make_system(cfg);
    const Eigen::Index nb = order_bound(cfg, sys);
    const Eigen::Index order = nb + 1;
    const Eigen::Index pe_min = min_samples(sys.m(), order);
    const DisturbanceSpec dist = effective_disturbance(cfg, [] { return DisturbanceSpec{}; });
    const Matrix G = steady_state_gains(sys).G;
    const fs::path out(cfg.out);

    Trajectory traj;
    std::vector<RollingStep> steps;
    GainEstimate est;
    switch (cfg.identification.method) {
        case EstimationMethod::NoiseFree: {
            traj = cfg.identification.data_path ? load_data(*cfg.identification.data_path)
                                                : generate_data(cfg, sys, required_samples(cfg, pe_min, "noise_free"),
                                                                order, dist);
            Signal u = traj.inputs;
            Signal y = traj.outputs;
            align(u, y, 1);
            const bool pe = persistency_certificate(u, order).is_pe;
            est = estimate_gain_noise_free(u, y);
            est.pe_raw = pe;
            steps.push_back({.k = u.cols(), .pe_ok = pe, .estimate = est, .skip_reason = {}});
            break;
        }
        case EstimationMethod::Differenced: {
            traj = cfg.identification.data_path
                       ? load_data(*cfg.identification.data_path)
                       : generate_data(cfg, sys, required_samples(cfg, pe_min + 1, "differenced"), order, dist);
            Signal u = traj.inputs;
            Signal y = traj.outputs;
            align(u, y, 1);
            if (u.cols() < 2) {
                throw ConfigError("differenced: need at least two input samples");
            }
            // The differenced estimator consumes u_0..u_T and y_0..y_{T+1}.
            est = estimate_gain_constant_noise(u, y, nb);
            steps.push_back({.k = u.cols(), .pe_ok = est.pe_differenced.value_or(false), .estimate = est,
                             .skip_reason = {}});
            break;
        }
        case EstimationMethod::Rolling: {
            const Eigen::Index window = cfg.identification.window.value_or(min_rolling_window(sys.m(), nb));
            traj = cfg.identification.data_path ? load_data(*cfg.identification.data_path)
                                                : generate_data(cfg, sys, cfg.horizon, order, dist);
            Signal u = traj.inputs;
            Signal y = traj.outputs;
            align(u, y, 0);
            if (u.cols() <= window) {
                throw ConfigError("rolling: " + std::to_string(u.cols()) + " samples leave no window of length " +
                                  std::to_string(window));
            }
            steps = rolling_estimate(u, y, window, nb, worker_count());
            const RollingStep* last = nullptr;
            for (const auto& s : steps) {
                if (s.estimate) {
                    last = &s;
                }
            }
            if (!last) {
                throw EstimatorError("rolling: no window produced an estimate");
            }
            est = *last->estimate;
            break;
        }
    }

    const std::optional<double> err = (G - est.G_hat).norm();
    write_json(out / "estimate.json", estimate_to_json(est, nb, err));
    write_text_file(out / "estimate.csv", rolling_to_csv(steps, G));
    write_text_file(out / "trajectory.csv", trajectory_to_csv(traj));

    log << "method " << to_string(est.method) << ", window start " << est.window.start << " length "
        << est.window.length << "\n";
    log << "residual_equality " << format_double(est.residual_equality) << "\n";
    log << "residual_identity " << format_double(est.residual_identity) << "\n";
    for (const auto& w : est.warnings) {
        log << "warning: " << w << "\n";
    }
    log << "err_fro " << format_double(*err) << "\n";
    return est;
}

MonteCarloSummary cmd_montecarlo_gain(const ExperimentConfig& cfg, std::ostream& log) {
    cfg.validate();
    if (cfg.trials < 2) {
        throw ConfigError("montecarlo-gain needs at least two trials");
    }
    const LtiSystem sys = make_system(cfg);
    const Eigen::Index nb = order_bound(cfg, sys);
    const Eigen::Index window = cfg.identification.window.value_or(min_rolling_window(sys.m(), nb));
    const DisturbanceSpec dist = effective_disturbance(cfg, default_montecarlo_disturbance);
    const unsigned workers = worker_count();

    const GainCampaign campaign = prepare_gain_campaign(sys, cfg.horizon, window, nb, cfg.input_seed(), workers);
    const Matrix errors = run_gain_trials(campaign, dist, dist.seed, cfg.trials, workers);
    MonteCarloSummary summary = summarize_trials(errors, campaign.first_step(), dist);

    const fs::path out(cfg.out);
    write_text_file(out / "mc_gain.csv", summary_to_csv(summary));
    if (cfg.write_trials) {
        write_text_file(out / "mc_trials.csv", trials_to_csv(errors, campaign.first_step()));
    }
    log << "trials " << summary.trials << ", windows " << summary.k.size() << ", window length " << window << "\n";
    log << "disturbance " << summary.disturbance_kind;
    if (!summary.std_schedule.empty()) {
        log << " (" << summary.std_schedule << ")";
    }
    log << "\n";
    if (!summary.mean.empty()) {
        log << "final mean err_fro " << format_double(summary.mean.back()) << ", std "
            << format_double(summary.stddev.back()) << "\n";
    }
    return summary;
}

ClosedLoopRecord cmd_track(const ExperimentConfig& cfg, std::ostream& log) {
    cfg.validate();
    const LtiSystem sys = make_system(cfg);
    sys.require_admissible();
    const QuadraticCost cost = make_cost(cfg, sys.m(), sys.p());
    const SteadyStateGains gains = steady_state_gains(sys);
    const fs::path out(cfg.out);

    // Phase one: the gain comes from a stored estimate or from noise-free data.
    Matrix G_hat;
    if (cfg.identification.g_hat_path) {
        G_hat = load_g_hat(*cfg.identification.g_hat_path);
        if (G_hat.rows() != sys.p() || G_hat.cols() != sys.m()) {
            throw ConfigError("stored G_hat does not match the system dimensions");
        }
    } else {
        const Eigen::Index nb = order_bound(cfg, sys);
        const Eigen::Index T = required_samples(cfg, min_samples(sys.m(), nb + 1), "track");
        const Trajectory data = generate_data(cfg, sys, T, nb + 1, DisturbanceSpec{});
        G_hat = estimate_gain_noise_free(data.inputs, data.outputs).G_hat;
    }
    log << "identification err_fro " << format_double((gains.G - G_hat).norm()) << "\n";

    const StepSizeCertificate cert = step_size_certificate(sys, cost, G_hat, cfg.epsilon);
    const double eta = cfg.eta.mode == EtaSpec::Mode::Fraction ? cfg.eta.value * cert.eta_star : cfg.eta.value;

    const DisturbanceSpec dist = effective_disturbance(cfg, default_tracking_disturbance);
    const Signal w = make_disturbance(dist, cfg.horizon, sys.r());
    ClosedLoopRecord record =
        run_closed_loop(sys, cost, G_hat, eta, Vector::Zero(sys.n()), Vector::Zero(sys.m()), w, cfg.horizon, &cert);
    const auto diag = lyapunov_diagnostic(sys, cost, gains.G, gains.H, record, cert);

    json cj = certificate_to_json(cert);
    cj["eta"] = eta;
    cj["eta_mode"] = cfg.eta.mode == EtaSpec::Mode::Fraction ? "fraction" : "absolute";
    cj["eta_value"] = cfg.eta.value;
    write_json(out / "certificate.json", cj);
    write_text_file(out / "tracking.csv", closed_loop_to_csv(record, diag));

    log << "eta* " << format_double(cert.eta_star) << ", eta_static " << format_double(cert.eta_static) << ", eta "
        << format_double(eta) << "\n";
    if (record.status == LoopStatus::Diverged) {
        throw DivergedError(record.diverged_at);
    }
    std::size_t ok = 0;
    for (const auto& d : diag) {
        ok += d.decrease_ok ? 1 : 0;
    }
    log << "steps " << record.steps() << ", final tracking error " << format_double(record.tracking_error.back())
        << ", post-transient max " << format_double(post_transient_max(record.tracking_error)) << "\n";
    log << "ISS decrease holds on " << ok << " of " << diag.size() << " steps\n";
    return record;
}

LtiSystem cmd_gen_system(const ExperimentConfig& cfg, std::ostream& log) {
    cfg.validate();
    const LtiSystem sys = make_system(cfg);
    const fs::path path = fs::path(cfg.out) / "system.json";
    write_json(path, system_to_json(sys));
    log << "wrote " << path.string() << " (n " << sys.n() << ", m " << sys.m() << ", p " << sys.p() << ", r "
        << sys.r() << ", spectral radius " << format_double(spectral_radius(sys.A())) << ")\n";
    return sys;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Steady-state gain identification and online gradient regulation"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::optional<double> eta;
    std::optional<double> eta_frac;
    std::optional<long long> horizon;
    std::optional<std::string> out_dir;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON experiment config")->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "master seed");
        sub->add_option("--trials", trials, "Monte Carlo trial count");
        auto* abs = sub->add_option("--eta", eta, "absolute step size");
        sub->add_option("--eta-frac", eta_frac, "step size as a fraction of the certified bound")->excludes(abs);
        sub->add_option("--horizon", horizon, "number of time steps");
        sub->add_option("--out", out_dir, "output directory");
    };
    auto* identify = app.add_subcommand("identify", "estimate the steady-state gain from data");
    auto* montecarlo = app.add_subcommand("montecarlo-gain", "rolling-window estimation error campaign");
    auto* track = app.add_subcommand("track", "closed-loop tracking with the gradient controller");
    auto* gen = app.add_subcommand("gen-system", "generate a random admissible system");
    for (auto* sub : {identify, montecarlo, track, gen}) {
        add_common(sub);
    }

    std::vector<std::string> rest(args.begin() + (args.empty() ? 0 : 1), args.end());
    std::reverse(rest.begin(), rest.end());
    try {
        app.parse(rest);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
        if (seed) {
            cfg.seed = *seed;
        }
        if (trials) {
            cfg.trials = *trials;
        }
        if (eta) {
            cfg.eta = {EtaSpec::Mode::Absolute, *eta};
        }
        if (eta_frac) {
            cfg.eta = {EtaSpec::Mode::Fraction, *eta_frac};
        }
        if (horizon) {
            cfg.horizon = static_cast<Eigen::Index>(*horizon);
        }
        if (out_dir) {
            cfg.out = *out_dir;
        }
        cfg.validate();

        if (identify->parsed()) {
            cmd_identify(cfg, out);
        } else if (montecarlo->parsed()) {
            cmd_montecarlo_gain(cfg, out);
        } else if (track->parsed()) {
            cmd_track(cfg, out);
        } else {
            cmd_gen_system(cfg, out);
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
    return kExitOk;
}

}  // namespace ssreg::harness
