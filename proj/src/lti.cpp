#include "ssreg/lti.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <complex>
#include <random>
#include <string>

namespace ssreg {

namespace {

constexpr double kMinRcond = 1e-14;
constexpr int kMaxSystemResamples = 100;

void require(bool cond, const std::string& what) {
    if (!cond) {
        throw ContractViolation(what);
    }
}

Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix M(rows, cols);
    // Fill row-major so the draw order matches the serialized layout.
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            M(i, j) = normal(rng);
        }
    }
    return M;
}

}  // namespace

LtiSystem::LtiSystem(Matrix A, Matrix B, Matrix C, Matrix E)
    : A_(std::move(A)), B_(std::move(B)), C_(std::move(C)), E_(std::move(E)) {
    require(A_.rows() > 0 && A_.rows() == A_.cols(), "LtiSystem: A must be square and non-empty");
    require(B_.rows() == A_.rows() && B_.cols() > 0, "LtiSystem: B must be n x m with m > 0");
    require(C_.cols() == A_.rows() && C_.rows() > 0, "LtiSystem: C must be p x n with p > 0");
    require(E_.rows() == A_.rows() && E_.cols() > 0, "LtiSystem: E must be n x r with r > 0");
    require(A_.allFinite() && B_.allFinite() && C_.allFinite() && E_.allFinite(),
            "LtiSystem: matrices must be finite");
}

bool LtiSystem::satisfies_assumptions(const Tolerances& tol) const {
    return is_schur_stable(A_, tol) && is_controllable(A_, B_, tol) && has_full_column_rank(C_, tol);
}

void LtiSystem::require_admissible(const Tolerances& tol) const {
    require(is_schur_stable(A_, tol), "system: A is not Schur stable");
    require(is_controllable(A_, B_, tol), "system: (A, B) is not controllable");
    require(has_full_column_rank(C_, tol), "system: C does not have full column rank");
}

bool LtiSystem::operator==(const LtiSystem& other) const {
    auto same = [](const Matrix& a, const Matrix& b) {
        return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
    };
    return same(A_, other.A_) && same(B_, other.B_) && same(C_, other.C_) && same(E_, other.E_);
}

void Trajectory::validate() const {
    const Eigen::Index T = inputs.cols();
    const Eigen::Index N = outputs.cols();
    require(N == T || N == T + 1, "trajectory: outputs must have T or T+1 samples for T inputs");
    if (states) {
        require(states->cols() == N, "trajectory: states and outputs must have equal length");
    }
    if (disturbances) {
        require(disturbances->cols() == T, "trajectory: disturbances and inputs must have equal length");
    }
    require(inputs.allFinite() && outputs.allFinite(), "trajectory: non-finite sample");
    require(!states || states->allFinite(), "trajectory: non-finite state sample");
    require(!disturbances || disturbances->allFinite(), "trajectory: non-finite disturbance sample");
}

Trajectory simulate(const LtiSystem& sys, const Vector& x0, const Signal& inputs, const Signal& disturbances) {
    require(x0.size() == sys.n(), "simulate: x0 has wrong dimension");
    require(x0.allFinite(), "simulate: x0 must be finite");
    require(inputs.rows() == sys.m(), "simulate: input dimension mismatch");
    require(disturbances.rows() == sys.r(), "simulate: disturbance dimension mismatch");
    require(inputs.cols() == disturbances.cols(), "simulate: inputs and disturbances must have equal length");

    const Eigen::Index T = inputs.cols();
    Signal states(sys.n(), T + 1);
    states.col(0) = x0;
    for (Eigen::Index k = 0; k < T; ++k) {
        states.col(k + 1).noalias() = sys.A() * states.col(k) + sys.B() * inputs.col(k) + sys.E() * disturbances.col(k);
        if (!states.col(k + 1).allFinite()) {
            throw OverflowError("simulate: state overflow at step " + std::to_string(k + 1));
        }
    }
    Trajectory traj;
    traj.inputs = inputs;
    traj.outputs = sys.C() * states;
    traj.states = std::move(states);
    traj.disturbances = disturbances;
    return traj;
}

StateGains steady_state_state_gains(const LtiSystem& sys) {
    const Matrix I_minus_A = Matrix::Identity(sys.n(), sys.n()) - sys.A();
    Eigen::PartialPivLU<Matrix> lu(I_minus_A);
    if (!(lu.rcond() > kMinRcond)) {
        throw IllConditionedError("steady_state_gains: I - A is numerically singular");
    }
    return {lu.solve(sys.B()), lu.solve(sys.E())};
}

SteadyStateGains steady_state_gains(const LtiSystem& sys) {
    const StateGains sg = steady_state_state_gains(sys);
    return {sys.C() * sg.G_bar, sys.C() * sg.H_bar};
}

double spectral_radius(const Matrix& A) {
    require(A.rows() == A.cols(), "spectral_radius: A must be square");
    Eigen::EigenSolver<Matrix> es(A, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

bool is_schur_stable(const Matrix& A, const Tolerances& tol) {
    return spectral_radius(A) < 1.0 - tol.unit_circle;
}

Matrix controllability_matrix(const Matrix& A, const Matrix& B) {
    require(A.rows() == A.cols() && B.rows() == A.rows(), "controllability_matrix: dimension mismatch");
    const Eigen::Index n = A.rows();
    const Eigen::Index m = B.cols();
    Matrix Ctrb(n, n * m);
    Matrix block = B;
    for (Eigen::Index i = 0; i < n; ++i) {
        Ctrb.middleCols(i * m, m) = block;
        block = A * block;
    }
    return Ctrb;
}

bool is_controllable(const Matrix& A, const Matrix& B, const Tolerances& tol) {
    return numerical_rank(controllability_matrix(A, B), tol.rank_rel) == A.rows();
}

bool has_full_column_rank(const Matrix& C, const Tolerances& tol) {
    return numerical_rank(C, tol.rank_rel) == C.cols();
}

// Complex Schur form A = U T U^*. With Y = U^* P U and F = U^* Q U the equation
// becomes T^* Y T - Y = -F, solved one column at a time by forward
// substitution because T^* is lower triangular.
Matrix solve_discrete_lyapunov(const Matrix& A, const Matrix& Q) {
    require(A.rows() == A.cols(), "solve_discrete_lyapunov: A must be square");
    require(Q.rows() == A.rows() && Q.cols() == A.cols(), "solve_discrete_lyapunov: Q has wrong size");
    require((Q - Q.transpose()).norm() <= 1e-12 * (1.0 + Q.norm()), "solve_discrete_lyapunov: Q must be symmetric");
    require(lambda_min(Q) > 0.0, "solve_discrete_lyapunov: Q must be positive definite");
    if (!is_schur_stable(A)) {
        throw NoSolutionError("solve_discrete_lyapunov: A is not Schur stable");
    }

    using CMatrix = Eigen::MatrixXcd;
    using CVector = Eigen::VectorXcd;
    const Eigen::Index n = A.rows();

    Eigen::ComplexSchur<Matrix> schur(A, true);
    if (schur.info() != Eigen::Success) {
        throw NoSolutionError("solve_discrete_lyapunov: Schur decomposition failed");
    }
    const CMatrix& T = schur.matrixT();
    const CMatrix& U = schur.matrixU();
    const CMatrix F = U.adjoint() * Q.cast<std::complex<double>>() * U;
    const CMatrix Tadj = T.adjoint();

    CMatrix Y = CMatrix::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        // W = sum_{l<j} Y(:,l) T(l,j)
        CVector W = CVector::Zero(n);
        for (Eigen::Index l = 0; l < j; ++l) {
            W += Y.col(l) * T(l, j);
        }
        const CVector rhs = -F.col(j) - Tadj * W;
        // (T(j,j) T^* - I) y = rhs, lower triangular.
        CMatrix L = T(j, j) * Tadj;
        L.diagonal().array() -= 1.0;
        Y.col(j) = L.triangularView<Eigen::Lower>().solve(rhs);
    }

    Matrix P = (U * Y * U.adjoint()).real();
    P = 0.5 * (P + P.transpose());
    return P;
}

LtiSystem random_admissible_system(Eigen::Index n, Eigen::Index m, Eigen::Index p, Eigen::Index r,
                                   std::uint64_t seed, double spectral_radius_target) {
    require(n > 0 && m > 0 && p > 0 && r > 0, "random_admissible_system: dimensions must be positive");
    require(p >= n, "random_admissible_system: need p >= n for full-column-rank C");
    require(spectral_radius_target > 0.0 && spectral_radius_target < 1.0,
            "random_admissible_system: spectral radius target must lie in (0, 1)");

    std::mt19937_64 rng(seed);
    for (int attempt = 0; attempt <= kMaxSystemResamples; ++attempt) {
        Matrix A = gaussian_matrix(n, n, rng);
        Matrix B = gaussian_matrix(n, m, rng);
        Matrix C = gaussian_matrix(p, n, rng);
        Matrix E = gaussian_matrix(n, r, rng);
        const double rho = spectral_radius(A);
        if (!(rho > 0.0)) {
            continue;
        }
        A *= spectral_radius_target / rho;
        LtiSystem sys(std::move(A), std::move(B), std::move(C), std::move(E));
        if (sys.satisfies_assumptions()) {
            return sys;
        }
    }
    throw GenerationFailure("random_admissible_system: rejection budget exhausted");
}

}  // namespace ssreg
