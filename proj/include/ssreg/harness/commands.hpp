#pragma once

#include "ssreg/controller.hpp"
#include "ssreg/harness/config.hpp"
#include "ssreg/harness/montecarlo.hpp"
#include "ssreg/identify.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace ssreg::harness {

enum ExitCode : int {
    kExitOk = 0,
    kExitInternal = 1,
    kExitConfig = 2,
    kExitDiverged = 3,
    kExitEstimator = 4,
};

class DivergedError : public Error {
public:
    explicit DivergedError(Eigen::Index step)
        : Error("closed loop diverged at step " + std::to_string(step)), step_(step) {}
    Eigen::Index step() const { return step_; }

private:
    Eigen::Index step_;
};

// Maps the exception hierarchy onto the CLI exit codes.
int exit_code_for(const std::exception& e);

// SSREG_WORKERS if set, else the hardware concurrency.
unsigned worker_count();

// Default disturbances when a config leaves them out: a decaying IID
// Gaussian for gain campaigns, a sinusoid plus random walk for tracking.
DisturbanceSpec default_montecarlo_disturbance();
DisturbanceSpec default_tracking_disturbance();

// Each command writes its artifacts under cfg.out and a short report to `log`.
GainEstimate cmd_identify(const ExperimentConfig& cfg, std::ostream& log);
MonteCarloSummary cmd_montecarlo_gain(const ExperimentConfig& cfg, std::ostream& log);
// Throws DivergedError after writing its artifacts when the loop diverges.
ClosedLoopRecord cmd_track(const ExperimentConfig& cfg, std::ostream& log);
LtiSystem cmd_gen_system(const ExperimentConfig& cfg, std::ostream& log);

// Full command line, args[0] being the program name. Returns the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ssreg::harness
