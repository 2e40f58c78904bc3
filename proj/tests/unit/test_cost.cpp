#include <doctest.h>

#include "support.hpp"

#include "ssreg/cost.hpp"

#include <random>

using namespace ssreg;

namespace {

Matrix random_spd(Eigen::Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    Matrix L(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            L(i, j) = normal(rng);
        }
    }
    return L * L.transpose() + 0.5 * Matrix::Identity(n, n);
}

Vector random_vector(Eigen::Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    Vector v(n);
    for (auto& x : v) {
        x = normal(rng);
    }
    return v;
}

// Declares a tenth of the gradient Lipschitz constants of the wrapped cost.
class UnderstatedLipschitz final : public CostModel {
public:
    explicit UnderstatedLipschitz(const QuadraticCost& inner) : inner_(inner) {}
    Eigen::Index input_dim() const override { return inner_.input_dim(); }
    Eigen::Index output_dim() const override { return inner_.output_dim(); }
    double phi(const Vector& u) const override { return inner_.phi(u); }
    double psi(const Vector& y) const override { return inner_.psi(y); }
    Vector grad_phi(const Vector& u) const override { return inner_.grad_phi(u); }
    Vector grad_psi(const Vector& y) const override { return inner_.grad_psi(y); }
    double lipschitz_phi() const override { return 0.1 * inner_.lipschitz_phi(); }
    double lipschitz_psi() const override { return 0.1 * inner_.lipschitz_psi(); }
    double pl_constant(const Matrix& G) const override { return inner_.pl_constant(G); }
    Vector minimizer(const Matrix& G, const Matrix& H, const Vector& w) const override {
        return inner_.minimizer(G, H, w);
    }

private:
    const QuadraticCost& inner_;
};

}  // namespace

TEST_SUITE("cost") {

TEST_CASE("quadratic cost constants") {
    const QuadraticCost c = ssreg::test::scalar_cost(4.0);
    CHECK(c.lipschitz_phi() == 2.0);
    CHECK(c.lipschitz_psi() == 2.0);
    CHECK(c.pl_constant(Matrix::Constant(1, 1, 2.0)) == doctest::Approx(5.0));
    CHECK(c.phi(Vector::Constant(1, 3.0)) == 9.0);
    CHECK(c.psi(Vector::Constant(1, 1.0)) == 9.0);
}

TEST_CASE("quadratic cost rejects non-SPD weights") {
    CHECK_THROWS_AS(QuadraticCost(Matrix::Zero(1, 1), Matrix::Ones(1, 1), Vector::Ones(1)), ContractViolation);
    CHECK_THROWS_AS(QuadraticCost(Matrix::Ones(1, 1), Matrix::Zero(1, 1), Vector::Ones(1)), ContractViolation);
    CHECK_THROWS_AS(QuadraticCost(Matrix::Ones(2, 2), Matrix::Identity(1, 1), Vector::Ones(1)), ContractViolation);
    const Matrix nonsym = (Matrix(2, 2) << 2, 1, 0, 2).finished();
    CHECK_THROWS_AS(QuadraticCost(nonsym, Matrix::Identity(1, 1), Vector::Ones(1)), ContractViolation);
    CHECK_THROWS_AS(QuadraticCost(Matrix::Identity(1, 1), Matrix::Identity(2, 2), Vector::Ones(1)), ContractViolation);
}

TEST_CASE("optimizer closed forms") {
    const Matrix G = Matrix::Constant(1, 1, 2.0);
    const Matrix H = Matrix::Constant(1, 1, 3.0);
    CHECK(optimizer(ssreg::test::scalar_cost(4.0), G, H, Vector::Zero(1))(0) == doctest::Approx(1.6).epsilon(1e-15));
    CHECK(optimizer(ssreg::test::scalar_cost(0.0), G, H, Vector::Zero(1))(0) == 0.0);
    // H w = y_ref = 4 with H = 3
    CHECK(std::abs(optimizer(ssreg::test::scalar_cost(4.0), G, H, Vector::Constant(1, 4.0 / 3.0))(0)) < 1e-15);
    CHECK_THROWS_AS(optimizer(ssreg::test::scalar_cost(), Matrix::Ones(2, 1), H, Vector::Zero(1)), ContractViolation);
}

TEST_CASE("optimizer is a stationary point of the composite on random instances") {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index m = 1 + trial % 4;
        const Eigen::Index p = 1 + trial % 5;
        const QuadraticCost c(random_spd(m, rng), random_spd(p, rng), random_vector(p, rng));
        const Matrix G = Matrix::Random(p, m);
        const Matrix H = Matrix::Random(p, 2);
        const Vector w = random_vector(2, rng);
        const Vector u = optimizer(c, G, H, w);
        CHECK(c.composite_gradient(G, H, w, u).norm() <= 1e-10 * (1.0 + u.norm()));
    }
}

TEST_CASE("gradients match central finite differences") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index m = 1 + trial % 3;
        const Eigen::Index p = 1 + trial % 4;
        const QuadraticCost c(random_spd(m, rng), random_spd(p, rng), random_vector(p, rng));
        const Vector u = random_vector(m, rng);
        const Vector y = random_vector(p, rng);
        const double h = 1e-5;
        Vector fd_phi(m);
        for (Eigen::Index i = 0; i < m; ++i) {
            Vector e = Vector::Zero(m);
            e(i) = h;
            fd_phi(i) = (c.phi(u + e) - c.phi(u - e)) / (2 * h);
        }
        Vector fd_psi(p);
        for (Eigen::Index i = 0; i < p; ++i) {
            Vector e = Vector::Zero(p);
            e(i) = h;
            fd_psi(i) = (c.psi(y + e) - c.psi(y - e)) / (2 * h);
        }
        CHECK((fd_phi - c.grad_phi(u)).norm() <= 1e-6 * (1.0 + c.grad_phi(u).norm()));
        CHECK((fd_psi - c.grad_psi(y)).norm() <= 1e-6 * (1.0 + c.grad_psi(y).norm()));
    }
}

TEST_CASE("sampled PL and Lipschitz verification") {
    std::mt19937_64 rng(3);
    const QuadraticCost c(random_spd(3, rng), random_spd(4, rng), random_vector(4, rng));
    const Matrix G = Matrix::Random(4, 3);
    const Matrix H = Matrix::Random(4, 2);
    const Vector w = random_vector(2, rng);

    const PlLipschitzReport ok = verify_pl_and_lipschitz(c, G, H, w, 500, 2.0, 9);
    CHECK(ok.lipschitz_ok);
    CHECK(ok.pl_ok);
    const Matrix N = c.Q_u() + G.transpose() * c.Q_y() * G;
    // The sampled Lipschitz ratio never exceeds 2 lambda_max(N), and the PL ratio never drops below lambda_min(N).
    CHECK(ok.lipschitz_observed <= 2.0 * lambda_max(N) * (1 + 1e-9));
    CHECK(ok.pl_observed >= lambda_min(N) * (1 - 1e-9));
    CHECK(ok.pl_declared == doctest::Approx(lambda_min(N)));
    CHECK(ok.lipschitz_margin >= 0.0);
    CHECK(ok.pl_margin >= 0.0);

    const PlLipschitzReport bad = verify_pl_and_lipschitz(UnderstatedLipschitz(c), G, H, w, 500, 2.0, 9);
    CHECK_FALSE(bad.lipschitz_ok);
    CHECK(bad.lipschitz_margin < 0.0);
    CHECK(bad.pl_ok);

    CHECK_THROWS_AS(verify_pl_and_lipschitz(c, G, H, w, 1, 1.0, 0), ContractViolation);
    CHECK_THROWS_AS(verify_pl_and_lipschitz(c, G, H, w, 10, 0.0, 0), ContractViolation);
}

TEST_CASE("optimizer sets") {
    const OptimizerSet a = OptimizerSet::singleton(Vector::Constant(2, 1.0));
    const OptimizerSet b = OptimizerSet::singleton((Vector(2) << 4.0, 5.0).finished());
    CHECK(a.distance_to(Vector::Constant(2, 1.0)) == 0.0);
    CHECK(a.hausdorff(b) == doctest::Approx(5.0));
    const OptimizerSet pair({Vector::Zero(2), Vector::Constant(2, 1.0)});
    CHECK(pair.distance_to((Vector(2) << 1.0, 2.0).finished()) == doctest::Approx(1.0));
    CHECK(pair.hausdorff(a) == doctest::Approx(std::sqrt(2.0)));
    CHECK_THROWS_AS(OptimizerSet(std::vector<Vector>{}), ContractViolation);
}

}  // TEST_SUITE
