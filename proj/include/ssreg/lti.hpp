#pragma once

#include "ssreg/common.hpp"

#include <cstdint>
#include <optional>

namespace ssreg {

/**
 * Discrete-time plant with state disturbance
 *
 *   x_{k+1} = A x_k + B u_k + E w_k,   y_k = C x_k
 *
 * The constructor only enforces consistent dimensions. The standing
 * assumptions (A Schur stable, (A,B) controllable, C full column rank) are
 * checked by satisfies_assumptions() / require_admissible().
 */
class LtiSystem {
public:
    LtiSystem(Matrix A, Matrix B, Matrix C, Matrix E);

    const Matrix& A() const { return A_; }
    const Matrix& B() const { return B_; }
    const Matrix& C() const { return C_; }
    const Matrix& E() const { return E_; }

    Eigen::Index n() const { return A_.rows(); }
    Eigen::Index m() const { return B_.cols(); }
    Eigen::Index p() const { return C_.rows(); }
    Eigen::Index r() const { return E_.cols(); }

    bool satisfies_assumptions(const Tolerances& tol = default_tolerances()) const;

    // Throws ContractViolation naming the first violated assumption.
    void require_admissible(const Tolerances& tol = default_tolerances()) const;

    bool operator==(const LtiSystem& other) const;

private:
    Matrix A_;
    Matrix B_;
    Matrix C_;
    Matrix E_;
};

/**
 * Aligned input/state/output/disturbance samples. Columns are time steps.
 * outputs (and states) may carry exactly one more sample than inputs, which
 * is the shape produced by simulate() and consumed by the gain estimators.
 */
struct Trajectory {
    Signal inputs;
    std::optional<Signal> states;
    Signal outputs;
    std::optional<Signal> disturbances;

    Eigen::Index length() const { return inputs.cols(); }

    // Throws ContractViolation on inconsistent lengths or non-finite samples.
    void validate() const;
};

struct SteadyStateGains {
    Matrix G;  // p x m, input to output
    Matrix H;  // p x r, disturbance to output
};

// Iterates the plant for inputs.cols() steps. States and outputs hold
// T+1 samples x_0..x_T, y_0..y_T.
Trajectory simulate(const LtiSystem& sys, const Vector& x0, const Signal& inputs,
                    const Signal& disturbances);

// G = C (I-A)^{-1} B and H = C (I-A)^{-1} E, by LU solve.
SteadyStateGains steady_state_gains(const LtiSystem& sys);

// (I-A)^{-1} B and (I-A)^{-1} E: the state-level steady-state maps.
struct StateGains {
    Matrix G_bar;
    Matrix H_bar;
};
StateGains steady_state_state_gains(const LtiSystem& sys);

// Solves A^T P A - P + Q = 0 for symmetric positive-definite P.
Matrix solve_discrete_lyapunov(const Matrix& A, const Matrix& Q);

double spectral_radius(const Matrix& A);
bool is_schur_stable(const Matrix& A, const Tolerances& tol = default_tolerances());
bool is_controllable(const Matrix& A, const Matrix& B, const Tolerances& tol = default_tolerances());
bool has_full_column_rank(const Matrix& C, const Tolerances& tol = default_tolerances());

Matrix controllability_matrix(const Matrix& A, const Matrix& B);

// Gaussian entries, A rescaled to the requested spectral radius, resampled
// until controllable with full-column-rank C (at most 100 resamples).
LtiSystem random_admissible_system(Eigen::Index n, Eigen::Index m, Eigen::Index p, Eigen::Index r,
                                   std::uint64_t seed, double spectral_radius_target);

}  // namespace ssreg
