#pragma once

#include "ssreg/common.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <vector>

namespace ssreg::harness {

enum class DisturbanceKind { Zero, Constant, IidGaussian, Sinusoid, RandomWalk, Sum };

// IID Gaussian standard deviation schedule: std_k = std * decay^k.
// decay == 1 is the constant-variance schedule.
struct DisturbanceSpec {
    DisturbanceKind kind = DisturbanceKind::Zero;
    Vector value;             // constant; a single entry is broadcast to all channels
    double std = 0.0;         // iid_gaussian
    double decay = 1.0;       // iid_gaussian geometric decay factor per step, in (0, 1]
    double amplitude = 0.0;   // sinusoid
    double period = 1.0;      // sinusoid, in steps
    double step_std = 0.0;    // random_walk
    std::vector<DisturbanceSpec> components;  // sum
    std::uint64_t seed = 0;

    void validate() const;
};

// Channel i of a sinusoid is phase shifted by 2 pi i / r. A random walk
// starts at zero. Sum components draw from seeds derived from spec.seed.
Signal make_disturbance(const DisturbanceSpec& spec, Eigen::Index length, Eigen::Index r);

DisturbanceSpec disturbance_from_json(const nlohmann::json& j);
nlohmann::json disturbance_to_json(const DisturbanceSpec& spec);

std::string to_string(DisturbanceKind kind);

// Largest per-step increment sup_k ||w_{k+1} - w_k||.
double max_increment(const Signal& w);

}  // namespace ssreg::harness
