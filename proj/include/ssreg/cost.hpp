#pragma once

#include "ssreg/common.hpp"

#include <cstdint>
#include <vector>

namespace ssreg {

/**
 * Cost interface for the regulation target
 *
 *   minimize_u  phi(u) + psi(G u + H w)
 *
 * Implementations declare gradient Lipschitz constants for phi and psi and a
 * PL constant for the composite. minimizer() returns one minimizer of the
 * composite for given steady-state gains and disturbance.
 */
class CostModel {
public:
    virtual ~CostModel() = default;

    virtual Eigen::Index input_dim() const = 0;
    virtual Eigen::Index output_dim() const = 0;

    virtual double phi(const Vector& u) const = 0;
    virtual double psi(const Vector& y) const = 0;
    virtual Vector grad_phi(const Vector& u) const = 0;
    virtual Vector grad_psi(const Vector& y) const = 0;

    virtual double lipschitz_phi() const = 0;
    virtual double lipschitz_psi() const = 0;
    virtual double pl_constant(const Matrix& G) const = 0;

    virtual Vector minimizer(const Matrix& G, const Matrix& H, const Vector& w) const = 0;

    // f(u) - f(u_star); implementations may override with a cancellation-free form.
    virtual double suboptimality(const Matrix& G, const Matrix& H, const Vector& w, const Vector& u,
                                 const Vector& u_star) const {
        return composite(G, H, w, u) - composite(G, H, w, u_star);
    }

    double composite(const Matrix& G, const Matrix& H, const Vector& w, const Vector& u) const {
        return phi(u) + psi(G * u + H * w);
    }
    Vector composite_gradient(const Matrix& G, const Matrix& H, const Vector& w, const Vector& u) const {
        return grad_phi(u) + G.transpose() * grad_psi(G * u + H * w);
    }
};

// phi(u) = u^T Q_u u,  psi(y) = (y - y_ref)^T Q_y (y - y_ref), Q_u and Q_y SPD.
class QuadraticCost final : public CostModel {
public:
    QuadraticCost(Matrix Q_u, Matrix Q_y, Vector y_ref);

    const Matrix& Q_u() const { return Q_u_; }
    const Matrix& Q_y() const { return Q_y_; }
    const Vector& y_ref() const { return y_ref_; }

    Eigen::Index input_dim() const override { return Q_u_.rows(); }
    Eigen::Index output_dim() const override { return Q_y_.rows(); }

    double phi(const Vector& u) const override;
    double psi(const Vector& y) const override;
    Vector grad_phi(const Vector& u) const override;
    Vector grad_psi(const Vector& y) const override;

    double lipschitz_phi() const override { return 2.0 * lambda_max_Qu_; }
    double lipschitz_psi() const override { return 2.0 * lambda_max_Qy_; }
    // lambda_min(Q_u + G^T Q_y G), a lower bound on the PL constant.
    double pl_constant(const Matrix& G) const override;

    Vector minimizer(const Matrix& G, const Matrix& H, const Vector& w) const override;

    // (u - u*)^T (Q_u + G^T Q_y G) (u - u*), exact when u_star is the minimizer.
    double suboptimality(const Matrix& G, const Matrix& H, const Vector& w, const Vector& u,
                         const Vector& u_star) const override;

private:
    Matrix Q_u_;
    Matrix Q_y_;
    Vector y_ref_;
    double lambda_max_Qu_;
    double lambda_max_Qy_;
};

/**
 * Optimizer set of the regulation problem. Strongly convex costs give a
 * single point; the type keeps a finite point list so that point-to-set and
 * Hausdorff distances read the same as for set-valued problems.
 */
class OptimizerSet {
public:
    explicit OptimizerSet(std::vector<Vector> points);
    static OptimizerSet singleton(Vector point);

    const std::vector<Vector>& points() const { return points_; }
    double distance_to(const Vector& u) const;
    double hausdorff(const OptimizerSet& other) const;

private:
    std::vector<Vector> points_;
};

// Solves (Q_u + G^T Q_y G) u* = G^T Q_y (y_ref - H w).
Vector optimizer(const QuadraticCost& cost, const Matrix& G, const Matrix& H, const Vector& w);

struct PlLipschitzReport {
    double lipschitz_declared = 0.0;   // l_phi + ||G||^2 l_psi
    double lipschitz_observed = 0.0;   // max ||grad f(u) - grad f(v)|| / ||u - v||
    double lipschitz_margin = 0.0;     // declared - observed; negative means violation
    bool lipschitz_ok = false;
    double pl_declared = 0.0;          // mu
    double pl_observed = 0.0;          // min  0.5 ||grad f(u)||^2 / (f(u) - f*)
    double pl_margin = 0.0;            // observed - declared; negative means violation
    bool pl_ok = false;
    int samples = 0;
};

// Samples pairs uniformly in the ball of the given radius around the
// minimizer and checks the declared constants. Violations are reported.
PlLipschitzReport verify_pl_and_lipschitz(const CostModel& cost, const Matrix& G, const Matrix& H, const Vector& w,
                                          int samples, double radius, std::uint64_t seed);

}  // namespace ssreg
