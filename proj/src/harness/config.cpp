#include "ssreg/harness/config.hpp"

#include "ssreg/excitation.hpp"
#include "ssreg/io.hpp"

#include <cmath>
#include <filesystem>

namespace ssreg::harness {

namespace {

using nlohmann::json;

constexpr std::uint64_t kSystemStream = 1;
constexpr std::uint64_t kInputStream = 2;
constexpr std::uint64_t kDisturbanceStream = 3;

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) {
        return fallback;
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field '") + key + "': " + e.what());
    }
}

Eigen::Index get_index(const json& j, const char* key, Eigen::Index fallback) {
    const auto v = get_or<long long>(j, key, static_cast<long long>(fallback));
    return static_cast<Eigen::Index>(v);
}

std::optional<Eigen::Index> get_optional_index(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) {
        return std::nullopt;
    }
    return get_index(j, key, 0);
}

Vector vector_from_json(const json& j, const char* what) {
    try {
        if (j.is_number()) {
            return Vector::Constant(1, j.get<double>());
        }
        const auto vals = j.get<std::vector<double>>();
        return Eigen::Map<const Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
    } catch (const json::exception& e) {
        throw ConfigError(std::string(what) + ": " + e.what());
    }
}

Matrix identity_or(const std::optional<Matrix>& M, double scale, Eigen::Index dim) {
    if (M) {
        return *M;
    }
    return scale * Matrix::Identity(dim, dim);
}

}  // namespace

void ExperimentConfig::validate() const {
    if (!system.path) {
        if (system.n < 1 || system.m < 1 || system.p < 1 || system.r < 1) {
            throw ConfigError("system dimensions must be positive");
        }
        if (system.p < system.n) {
            throw ConfigError("system.p must be at least system.n (C needs full column rank)");
        }
        if (!(system.rho > 0.0 && system.rho < 1.0)) {
            throw ConfigError("system.rho must lie in (0, 1)");
        }
    }
    if (!(cost.q_u > 0.0) || !(cost.q_y > 0.0) || !std::isfinite(cost.q_u) || !std::isfinite(cost.q_y)) {
        throw ConfigError("cost weights q_u and q_y must be positive");
    }
    if (cost.y_ref.size() == 0 || !cost.y_ref.allFinite()) {
        throw ConfigError("cost.y_ref must be finite");
    }
    disturbance.validate();
    const auto& id = identification;
    if (id.n_bound && *id.n_bound < 1) {
        throw ConfigError("identification.n_bound must be positive");
    }
    if (id.samples && *id.samples < 1) {
        throw ConfigError("identification.samples must be positive");
    }
    if (id.window && *id.window < 2) {
        throw ConfigError("identification.window must be at least 2");
    }
    if (!(eta.value > 0.0) || !std::isfinite(eta.value)) {
        throw ConfigError("eta must be positive");
    }
    if (!(epsilon > 0.0 && epsilon < 1.0)) {
        throw ConfigError("epsilon must lie in (0, 1)");
    }
    if (horizon < 2) {
        throw ConfigError("horizon must be at least 2");
    }
    if (trials < 1) {
        throw ConfigError("trials must be positive");
    }
    if (out.empty()) {
        throw ConfigError("output directory must be non-empty");
    }
}

std::uint64_t ExperimentConfig::system_seed() const {
    return system.seed ? *system.seed : mix_seed(seed, kSystemStream);
}

std::uint64_t ExperimentConfig::input_seed() const {
    return mix_seed(seed, kInputStream);
}

std::uint64_t ExperimentConfig::disturbance_seed() const {
    return disturbance_seeded ? disturbance.seed : mix_seed(seed, kDisturbanceStream);
}

ExperimentConfig config_from_json(const json& j) {
    if (!j.is_object()) {
        throw ConfigError("config must be a JSON object");
    }
    ExperimentConfig cfg;
    cfg.seed = get_or<std::uint64_t>(j, "seed", cfg.seed);

    if (j.contains("system")) {
        const json& s = j.at("system");
        if (s.contains("path")) {
            cfg.system.path = get_or<std::string>(s, "path", "");
        }
        cfg.system.n = get_index(s, "n", cfg.system.n);
        cfg.system.m = get_index(s, "m", cfg.system.m);
        cfg.system.p = get_index(s, "p", cfg.system.p);
        cfg.system.r = get_index(s, "r", cfg.system.r);
        cfg.system.rho = get_or<double>(s, "rho", cfg.system.rho);
        if (s.contains("seed")) {
            cfg.system.seed = get_or<std::uint64_t>(s, "seed", 0);
        }
    }

    if (j.contains("cost")) {
        const json& c = j.at("cost");
        cfg.cost.q_u = get_or<double>(c, "q_u", cfg.cost.q_u);
        cfg.cost.q_y = get_or<double>(c, "q_y", cfg.cost.q_y);
        try {
            if (c.contains("Q_u")) {
                cfg.cost.Q_u = matrix_from_json(c.at("Q_u"));
            }
            if (c.contains("Q_y")) {
                cfg.cost.Q_y = matrix_from_json(c.at("Q_y"));
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            throw ConfigError(std::string("cost matrices: ") + e.what());
        }
        if (c.contains("y_ref")) {
            cfg.cost.y_ref = vector_from_json(c.at("y_ref"), "cost.y_ref");
        }
    }

    if (j.contains("disturbance")) {
        cfg.disturbance = disturbance_from_json(j.at("disturbance"));
        cfg.disturbance_given = true;
        cfg.disturbance_seeded = j.at("disturbance").contains("seed");
    }

    if (j.contains("identification")) {
        const json& id = j.at("identification");
        if (id.contains("method")) {
            cfg.identification.method = estimation_method_from_string(get_or<std::string>(id, "method", ""));
        }
        cfg.identification.n_bound = get_optional_index(id, "n_bound");
        cfg.identification.samples = get_optional_index(id, "samples");
        cfg.identification.window = get_optional_index(id, "window");
        if (id.contains("data")) {
            cfg.identification.data_path = get_or<std::string>(id, "data", "");
        }
        if (id.contains("g_hat")) {
            cfg.identification.g_hat_path = get_or<std::string>(id, "g_hat", "");
        }
    }

    if (j.contains("eta")) {
        const json& e = j.at("eta");
        if (e.contains("fraction") && e.contains("absolute")) {
            throw ConfigError("eta: give either 'fraction' or 'absolute', not both");
        }
        if (e.contains("absolute")) {
            cfg.eta.mode = EtaSpec::Mode::Absolute;
            cfg.eta.value = get_or<double>(e, "absolute", 0.0);
        } else {
            cfg.eta.mode = EtaSpec::Mode::Fraction;
            cfg.eta.value = get_or<double>(e, "fraction", cfg.eta.value);
        }
    }

    cfg.epsilon = get_or<double>(j, "epsilon", cfg.epsilon);
    cfg.horizon = get_index(j, "horizon", cfg.horizon);
    cfg.trials = get_or<int>(j, "trials", cfg.trials);
    cfg.write_trials = get_or<bool>(j, "write_trials", cfg.write_trials);
    cfg.out = get_or<std::string>(j, "out", cfg.out);
    cfg.validate();
    return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
    json sys;
    if (cfg.system.path) {
        sys["path"] = *cfg.system.path;
    } else {
        sys = {{"n", cfg.system.n}, {"m", cfg.system.m}, {"p", cfg.system.p},
               {"r", cfg.system.r}, {"rho", cfg.system.rho}, {"seed", cfg.system_seed()}};
    }
    json cost = {{"q_u", cfg.cost.q_u},
                 {"q_y", cfg.cost.q_y},
                 {"y_ref", std::vector<double>(cfg.cost.y_ref.data(), cfg.cost.y_ref.data() + cfg.cost.y_ref.size())}};
    if (cfg.cost.Q_u) {
        cost["Q_u"] = matrix_to_json(*cfg.cost.Q_u);
    }
    if (cfg.cost.Q_y) {
        cost["Q_y"] = matrix_to_json(*cfg.cost.Q_y);
    }
    json id = {{"method", to_string(cfg.identification.method)}};
    if (cfg.identification.n_bound) {
        id["n_bound"] = *cfg.identification.n_bound;
    }
    if (cfg.identification.samples) {
        id["samples"] = *cfg.identification.samples;
    }
    if (cfg.identification.window) {
        id["window"] = *cfg.identification.window;
    }
    if (cfg.identification.data_path) {
        id["data"] = *cfg.identification.data_path;
    }
    if (cfg.identification.g_hat_path) {
        id["g_hat"] = *cfg.identification.g_hat_path;
    }
    DisturbanceSpec dist = cfg.disturbance;
    dist.seed = cfg.disturbance_seed();
    json eta = cfg.eta.mode == EtaSpec::Mode::Fraction ? json{{"fraction", cfg.eta.value}}
                                                       : json{{"absolute", cfg.eta.value}};
    return json{{"seed", cfg.seed},
                {"system", sys},
                {"cost", cost},
                {"disturbance", disturbance_to_json(dist)},
                {"identification", id},
                {"eta", eta},
                {"epsilon", cfg.epsilon},
                {"horizon", cfg.horizon},
                {"trials", cfg.trials},
                {"write_trials", cfg.write_trials},
                {"out", cfg.out}};
}

ExperimentConfig load_config(const std::string& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw ConfigError("cannot parse config '" + path + "': " + e.what());
    }
    ExperimentConfig cfg = config_from_json(j);

    // Paths inside the config are relative to the config file.
    const auto base = std::filesystem::path(path).parent_path();
    auto rebase = [&](std::optional<std::string>& p) {
        if (p && std::filesystem::path(*p).is_relative()) {
            p = (base / *p).lexically_normal().string();
        }
    };
    rebase(cfg.system.path);
    rebase(cfg.identification.data_path);
    rebase(cfg.identification.g_hat_path);
    return cfg;
}

LtiSystem make_system(const ExperimentConfig& cfg) {
    if (cfg.system.path) {
        json j;
        try {
            j = json::parse(read_text_file(*cfg.system.path));
        } catch (const json::exception& e) {
            throw ConfigError("cannot parse system '" + *cfg.system.path + "': " + e.what());
        }
        LtiSystem sys = system_from_json(j);
        if (!sys.satisfies_assumptions()) {
            throw ConfigError("system '" + *cfg.system.path + "' violates the standing assumptions");
        }
        return sys;
    }
    const auto& s = cfg.system;
    return random_admissible_system(s.n, s.m, s.p, s.r, cfg.system_seed(), s.rho);
}

QuadraticCost make_cost(const ExperimentConfig& cfg, Eigen::Index m, Eigen::Index p) {
    const Matrix Q_u = identity_or(cfg.cost.Q_u, cfg.cost.q_u, m);
    const Matrix Q_y = identity_or(cfg.cost.Q_y, cfg.cost.q_y, p);
    Vector y_ref;
    if (cfg.cost.y_ref.size() == 1) {
        y_ref = Vector::Constant(p, cfg.cost.y_ref(0));
    } else {
        y_ref = cfg.cost.y_ref;
    }
    if (Q_u.rows() != m || Q_y.rows() != p || y_ref.size() != p) {
        throw ConfigError("cost dimensions do not match the system (m = " + std::to_string(m) +
                          ", p = " + std::to_string(p) + ")");
    }
    try {
        return QuadraticCost(Q_u, Q_y, y_ref);
    } catch (const ContractViolation& e) {
        throw ConfigError(e.what());
    }
}

Eigen::Index order_bound(const ExperimentConfig& cfg, const LtiSystem& sys) {
    const Eigen::Index nb = cfg.identification.n_bound.value_or(sys.n());
    if (nb < sys.n()) {
        throw ConfigError("identification.n_bound = " + std::to_string(nb) + " is below the system order " +
                          std::to_string(sys.n()));
    }
    return nb;
}

}  // namespace ssreg::harness
