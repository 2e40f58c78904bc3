#include "ssreg/harness/disturbance.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "ssreg/io.hpp"

namespace ssreg::harness {

namespace {

struct KindName {
    DisturbanceKind kind;
    const char* name;
};

constexpr KindName kKindNames[] = {
    {DisturbanceKind::Zero, "zero"},
    {DisturbanceKind::Constant, "constant"},
    {DisturbanceKind::IidGaussian, "iid_gaussian"},
    {DisturbanceKind::Sinusoid, "sinusoid"},
    {DisturbanceKind::RandomWalk, "random_walk"},
    {DisturbanceKind::Sum, "sum"},
};

DisturbanceKind kind_from_string(const std::string& name) {
    for (const auto& kn : kKindNames) {
        if (name == kn.name) {
            return kn.kind;
        }
    }
    throw ConfigError("unknown disturbance kind '" + name + "'");
}

}  // namespace

std::string to_string(DisturbanceKind kind) {
    for (const auto& kn : kKindNames) {
        if (kn.kind == kind) {
            return kn.name;
        }
    }
    return "unknown";
}

void DisturbanceSpec::validate() const {
    switch (kind) {
        case DisturbanceKind::Zero:
            break;
        case DisturbanceKind::Constant:
            if (value.size() == 0 || !value.allFinite()) {
                throw ConfigError("constant disturbance needs a finite value");
            }
            break;
        case DisturbanceKind::IidGaussian:
            if (!(std >= 0.0) || !std::isfinite(std)) {
                throw ConfigError("iid_gaussian disturbance: std must be nonnegative");
            }
            if (!(decay > 0.0 && decay <= 1.0)) {
                throw ConfigError("iid_gaussian disturbance: decay must lie in (0, 1]");
            }
            break;
        case DisturbanceKind::Sinusoid:
            if (!std::isfinite(amplitude)) {
                throw ConfigError("sinusoid disturbance: amplitude must be finite");
            }
            if (!(period > 0.0) || !std::isfinite(period)) {
                throw ConfigError("sinusoid disturbance: period must be positive");
            }
            break;
        case DisturbanceKind::RandomWalk:
            if (!(step_std >= 0.0) || !std::isfinite(step_std)) {
                throw ConfigError("random_walk disturbance: step_std must be nonnegative");
            }
            break;
        case DisturbanceKind::Sum:
            if (components.empty()) {
                throw ConfigError("sum disturbance needs at least one component");
            }
            for (const auto& c : components) {
                c.validate();
            }
            break;
    }
}

Signal make_disturbance(const DisturbanceSpec& spec, Eigen::Index length, Eigen::Index r) {
    if (length < 1 || r < 1) {
        throw ContractViolation("make_disturbance: length and dimension must be positive");
    }
    spec.validate();
    Signal w = Signal::Zero(r, length);
    switch (spec.kind) {
        case DisturbanceKind::Zero:
            break;
        case DisturbanceKind::Constant: {
            Vector v;
            if (spec.value.size() == 1) {
                v = Vector::Constant(r, spec.value(0));
            } else if (spec.value.size() == r) {
                v = spec.value;
            } else {
                throw ConfigError("constant disturbance: value has " + std::to_string(spec.value.size()) +
                                  " entries for r = " + std::to_string(r));
            }
            w.colwise() = v;
            break;
        }
        case DisturbanceKind::IidGaussian: {
            std::mt19937_64 rng(spec.seed);
            std::normal_distribution<double> normal(0.0, 1.0);
            double s = spec.std;
            for (Eigen::Index k = 0; k < length; ++k) {
                for (Eigen::Index i = 0; i < r; ++i) {
                    w(i, k) = s * normal(rng);
                }
                s *= spec.decay;
            }
            break;
        }
        case DisturbanceKind::Sinusoid: {
            const double two_pi = 2.0 * std::numbers::pi;
            for (Eigen::Index k = 0; k < length; ++k) {
                for (Eigen::Index i = 0; i < r; ++i) {
                    const double phase = two_pi * static_cast<double>(i) / static_cast<double>(r);
                    w(i, k) = spec.amplitude * std::sin(two_pi * static_cast<double>(k) / spec.period + phase);
                }
            }
            break;
        }
        case DisturbanceKind::RandomWalk: {
            std::mt19937_64 rng(spec.seed);
            std::normal_distribution<double> normal(0.0, 1.0);
            for (Eigen::Index k = 1; k < length; ++k) {
                for (Eigen::Index i = 0; i < r; ++i) {
                    w(i, k) = w(i, k - 1) + spec.step_std * normal(rng);
                }
            }
            break;
        }
        case DisturbanceKind::Sum: {
            for (std::size_t c = 0; c < spec.components.size(); ++c) {
                DisturbanceSpec part = spec.components[c];
                part.seed = mix_seed(spec.seed, c);
                w += make_disturbance(part, length, r);
            }
            break;
        }
    }
    return w;
}

DisturbanceSpec disturbance_from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw ConfigError("disturbance must be a JSON object");
    }
    DisturbanceSpec s;
    s.kind = kind_from_string(j.value("kind", std::string("zero")));
    try {
        if (j.contains("value")) {
            const auto& v = j.at("value");
            if (v.is_number()) {
                s.value = Vector::Constant(1, v.get<double>());
            } else {
                const auto vals = v.get<std::vector<double>>();
                s.value = Eigen::Map<const Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
            }
        }
        s.std = j.value("std", 0.0);
        const std::string schedule = j.value("schedule", std::string("constant"));
        if (schedule == "constant") {
            s.decay = 1.0;
        } else if (schedule == "geometric") {
            s.decay = j.value("rate", 0.95);
        } else {
            throw ConfigError("unknown std schedule '" + schedule + "'");
        }
        s.amplitude = j.value("amplitude", 0.0);
        s.period = j.value("period", 1.0);
        s.step_std = j.value("step_std", 0.0);
        s.seed = j.value("seed", std::uint64_t{0});
        if (j.contains("components")) {
            for (const auto& c : j.at("components")) {
                s.components.push_back(disturbance_from_json(c));
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("disturbance: ") + e.what());
    }
    s.validate();
    return s;
}

nlohmann::json disturbance_to_json(const DisturbanceSpec& spec) {
    nlohmann::json j = {{"kind", to_string(spec.kind)}, {"seed", spec.seed}};
    switch (spec.kind) {
        case DisturbanceKind::Zero:
            break;
        case DisturbanceKind::Constant:
            j["value"] = std::vector<double>(spec.value.data(), spec.value.data() + spec.value.size());
            break;
        case DisturbanceKind::IidGaussian:
            j["std"] = spec.std;
            j["schedule"] = spec.decay == 1.0 ? "constant" : "geometric";
            if (spec.decay != 1.0) {
                j["rate"] = spec.decay;
            }
            break;
        case DisturbanceKind::Sinusoid:
            j["amplitude"] = spec.amplitude;
            j["period"] = spec.period;
            break;
        case DisturbanceKind::RandomWalk:
            j["step_std"] = spec.step_std;
            break;
        case DisturbanceKind::Sum:
            j["components"] = nlohmann::json::array();
            for (const auto& c : spec.components) {
                j["components"].push_back(disturbance_to_json(c));
            }
            break;
    }
    return j;
}

double max_increment(const Signal& w) {
    double best = 0.0;
    for (Eigen::Index k = 0; k + 1 < w.cols(); ++k) {
        best = std::max(best, (w.col(k + 1) - w.col(k)).norm());
    }
    return best;
}

}  // namespace ssreg::harness
