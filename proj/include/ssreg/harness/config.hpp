#pragma once

#include "ssreg/common.hpp"
#include "ssreg/cost.hpp"
#include "ssreg/harness/disturbance.hpp"
#include "ssreg/identify.hpp"
#include "ssreg/lti.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>

namespace ssreg::harness {

struct SystemSpec {
    Eigen::Index n = 2;
    Eigen::Index m = 1;
    Eigen::Index p = 2;
    Eigen::Index r = 1;
    double rho = 0.9;
    std::optional<std::uint64_t> seed;  // derived from the master seed when absent
    std::optional<std::string> path;    // stored system JSON; overrides the generator
};

// Q_u = q_u I and Q_y = q_y I unless full matrices are given. y_ref is a
// vector or a scalar broadcast to all outputs.
struct CostSpec {
    double q_u = 1.0;
    double q_y = 1.0;
    std::optional<Matrix> Q_u;
    std::optional<Matrix> Q_y;
    Vector y_ref = Vector::Constant(1, 1.0);
};

struct IdentificationSpec {
    EstimationMethod method = EstimationMethod::NoiseFree;
    std::optional<Eigen::Index> n_bound;  // defaults to the true order of the generated system
    std::optional<Eigen::Index> samples;  // input samples; defaults to the minimum for PE of order n_bound+1
    std::optional<Eigen::Index> window;   // rolling window; defaults to min_rolling_window
    std::optional<std::string> data_path; // trajectory CSV replacing generated data
    std::optional<std::string> g_hat_path;  // estimate JSON used by track instead of a fresh identification
};

struct EtaSpec {
    enum class Mode { Fraction, Absolute };
    Mode mode = Mode::Fraction;
    double value = 0.5;
};

struct ExperimentConfig {
    std::uint64_t seed = 1;
    SystemSpec system;
    CostSpec cost;
    DisturbanceSpec disturbance;
    bool disturbance_given = false;   // the config named a disturbance
    bool disturbance_seeded = false;  // disturbance.seed came from the config
    IdentificationSpec identification;
    EtaSpec eta;
    double epsilon = 0.5;
    Eigen::Index horizon = 1000;
    int trials = 200;
    bool write_trials = false;
    std::string out = "out";

    // Throws ConfigError on the first invalid field.
    void validate() const;

    std::uint64_t system_seed() const;
    std::uint64_t input_seed() const;
    std::uint64_t disturbance_seed() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::string& path);

// The plant named by the config: loaded from system.path or generated.
LtiSystem make_system(const ExperimentConfig& cfg);
QuadraticCost make_cost(const ExperimentConfig& cfg, Eigen::Index m, Eigen::Index p);
Eigen::Index order_bound(const ExperimentConfig& cfg, const LtiSystem& sys);

}  // namespace ssreg::harness
