#include "ssreg/cost.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace ssreg {

namespace {

void require_spd(const Matrix& Q, const char* name) {
    if (Q.rows() < 1 || Q.rows() != Q.cols()) {
        throw ContractViolation(std::string("QuadraticCost: ") + name + " must be square and non-empty");
    }
    if (!Q.allFinite() || (Q - Q.transpose()).norm() > 1e-12 * (1.0 + Q.norm())) {
        throw ContractViolation(std::string("QuadraticCost: ") + name + " must be symmetric");
    }
    if (!(lambda_min(Q) > 0.0)) {
        throw ContractViolation(std::string("QuadraticCost: ") + name + " must be positive definite");
    }
}

Vector uniform_in_ball(Eigen::Index dim, double radius, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    Vector d(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        d(i) = normal(rng);
    }
    const double norm = d.norm();
    if (norm == 0.0) {
        return Vector::Zero(dim);
    }
    const double scale = radius * std::pow(uniform(rng), 1.0 / static_cast<double>(dim));
    return d * (scale / norm);
}

}  // namespace

QuadraticCost::QuadraticCost(Matrix Q_u, Matrix Q_y, Vector y_ref)
    : Q_u_(std::move(Q_u)), Q_y_(std::move(Q_y)), y_ref_(std::move(y_ref)) {
    require_spd(Q_u_, "Q_u");
    require_spd(Q_y_, "Q_y");
    if (y_ref_.size() != Q_y_.rows() || !y_ref_.allFinite()) {
        throw ContractViolation("QuadraticCost: y_ref must be a finite vector matching Q_y");
    }
    lambda_max_Qu_ = lambda_max(Q_u_);
    lambda_max_Qy_ = lambda_max(Q_y_);
}

double QuadraticCost::phi(const Vector& u) const {
    return u.dot(Q_u_ * u);
}

double QuadraticCost::psi(const Vector& y) const {
    const Vector e = y - y_ref_;
    return e.dot(Q_y_ * e);
}

Vector QuadraticCost::grad_phi(const Vector& u) const {
    return 2.0 * (Q_u_ * u);
}

Vector QuadraticCost::grad_psi(const Vector& y) const {
    return 2.0 * (Q_y_ * (y - y_ref_));
}

double QuadraticCost::pl_constant(const Matrix& G) const {
    return lambda_min(Q_u_ + G.transpose() * Q_y_ * G);
}

Vector QuadraticCost::minimizer(const Matrix& G, const Matrix& H, const Vector& w) const {
    return optimizer(*this, G, H, w);
}

double QuadraticCost::suboptimality(const Matrix& G, const Matrix& /*H*/, const Vector& /*w*/, const Vector& u,
                                    const Vector& u_star) const {
    const Vector e = u - u_star;
    const Vector Ge = G * e;
    return e.dot(Q_u_ * e) + Ge.dot(Q_y_ * Ge);
}

OptimizerSet::OptimizerSet(std::vector<Vector> points) : points_(std::move(points)) {
    if (points_.empty()) {
        throw ContractViolation("OptimizerSet: the optimizer set must be nonempty");
    }
}

OptimizerSet OptimizerSet::singleton(Vector point) {
    return OptimizerSet({std::move(point)});
}

double OptimizerSet::distance_to(const Vector& u) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : points_) {
        best = std::min(best, (u - p).norm());
    }
    return best;
}

double OptimizerSet::hausdorff(const OptimizerSet& other) const {
    double d = 0.0;
    for (const auto& p : points_) {
        d = std::max(d, other.distance_to(p));
    }
    for (const auto& p : other.points_) {
        d = std::max(d, distance_to(p));
    }
    return d;
}

Vector optimizer(const QuadraticCost& cost, const Matrix& G, const Matrix& H, const Vector& w) {
    const Eigen::Index m = cost.input_dim();
    const Eigen::Index p = cost.output_dim();
    if (G.rows() != p || G.cols() != m || H.rows() != p || H.cols() != w.size()) {
        throw ContractViolation("optimizer: dimension mismatch");
    }
    const Matrix N = cost.Q_u() + G.transpose() * cost.Q_y() * G;
    Eigen::LLT<Matrix> llt(N);
    if (llt.info() != Eigen::Success) {
        throw ContractViolation("optimizer: normal matrix is not positive definite");
    }
    return llt.solve(G.transpose() * (cost.Q_y() * (cost.y_ref() - H * w)));
}

PlLipschitzReport verify_pl_and_lipschitz(const CostModel& cost, const Matrix& G, const Matrix& H, const Vector& w,
                                          int samples, double radius, std::uint64_t seed) {
    if (samples < 2) {
        throw ContractViolation("verify_pl_and_lipschitz: need at least two samples");
    }
    if (!(radius > 0.0)) {
        throw ContractViolation("verify_pl_and_lipschitz: radius must be positive");
    }
    const Eigen::Index m = cost.input_dim();
    const Vector u_star = cost.minimizer(G, H, w);
    const double f_star = cost.composite(G, H, w, u_star);

    PlLipschitzReport rep;
    rep.samples = samples;
    const double g_norm = spectral_norm(G);
    rep.lipschitz_declared = cost.lipschitz_phi() + g_norm * g_norm * cost.lipschitz_psi();
    rep.pl_declared = cost.pl_constant(G);
    rep.pl_observed = std::numeric_limits<double>::infinity();

    std::mt19937_64 rng(seed);
    for (int s = 0; s < samples; ++s) {
        const Vector u = u_star + uniform_in_ball(m, radius, rng);
        const Vector v = u_star + uniform_in_ball(m, radius, rng);
        const Vector gu = cost.composite_gradient(G, H, w, u);
        const Vector gv = cost.composite_gradient(G, H, w, v);
        const double du = (u - v).norm();
        if (du > 0.0) {
            rep.lipschitz_observed = std::max(rep.lipschitz_observed, (gu - gv).norm() / du);
        }
        const double gap = cost.composite(G, H, w, u) - f_star;
        if (gap > 1e-12 * (1.0 + std::abs(f_star))) {
            rep.pl_observed = std::min(rep.pl_observed, 0.5 * gu.squaredNorm() / gap);
        }
    }
    rep.lipschitz_margin = rep.lipschitz_declared - rep.lipschitz_observed;
    rep.pl_margin = rep.pl_observed - rep.pl_declared;
    rep.lipschitz_ok = rep.lipschitz_margin >= -1e-9 * rep.lipschitz_declared;
    rep.pl_ok = rep.pl_margin >= -1e-9 * rep.pl_declared;
    return rep;
}

}  // namespace ssreg
