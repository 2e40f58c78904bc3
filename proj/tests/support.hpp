#pragma once

#include "ssreg/controller.hpp"
#include "ssreg/cost.hpp"
#include "ssreg/lti.hpp"

#include <filesystem>
#include <string>

namespace ssreg::test {

// x+ = 0.5 x + u + w, y = x
inline LtiSystem scalar_system() {
    return LtiSystem(Matrix::Constant(1, 1, 0.5), Matrix::Ones(1, 1), Matrix::Ones(1, 1), Matrix::Ones(1, 1));
}

inline QuadraticCost scalar_cost(double y_ref = 1.0) {
    return QuadraticCost(Matrix::Ones(1, 1), Matrix::Ones(1, 1), Vector::Constant(1, y_ref));
}

// Q_u = I and Q_y = (0.1 / ||G||^2) I keep the output term comparable to the
// input term, so the certified step size stays usable on random plants.
inline QuadraticCost balanced_cost(const LtiSystem& sys, double y_ref = 1.0) {
    const double g = spectral_norm(steady_state_gains(sys).G);
    return QuadraticCost(Matrix::Identity(sys.m(), sys.m()), (0.1 / (g * g)) * Matrix::Identity(sys.p(), sys.p()),
                         Vector::Constant(sys.p(), y_ref));
}

inline Signal row(std::initializer_list<double> values) {
    Signal s(1, static_cast<Eigen::Index>(values.size()));
    Eigen::Index k = 0;
    for (double v : values) {
        s(0, k++) = v;
    }
    return s;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("ssreg_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace ssreg::test
