#include <doctest.h>

#include "support.hpp"

#include "ssreg/excitation.hpp"

#include <random>

using namespace ssreg;
using ssreg::test::row;
using ssreg::test::scalar_system;

namespace {

Signal gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Signal s(rows, cols);
    for (Eigen::Index k = 0; k < cols; ++k) {
        for (Eigen::Index i = 0; i < rows; ++i) {
            s(i, k) = normal(rng);
        }
    }
    return s;
}

}  // namespace

TEST_SUITE("excitation") {

TEST_CASE("Hankel matrices unrolled by hand") {
    const HankelMatrix H = build_hankel(row({1, 2, 3, 4}), 2);
    CHECK(H.entries() == (Matrix(2, 3) << 1, 2, 3, 2, 3, 4).finished());
    CHECK(H.depth() == 2);
    CHECK(H.width() == 3);

    const HankelMatrix H1 = build_hankel(row({5, 6, 7}), 1);
    CHECK(H1.entries() == row({5, 6, 7}));

    Signal z(2, 3);
    z << 1, 0, 1, 0, 1, 1;
    const HankelMatrix H2 = build_hankel(z, 2);
    CHECK(H2.entries() == (Matrix(4, 2) << 1, 0, 0, 1, 0, 1, 1, 1).finished());
}

TEST_CASE("Hankel block structure holds bitwise on random signals") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Eigen::Index sigma = 1 + static_cast<Eigen::Index>(seed % 3);
        const Eigen::Index T = 20;
        const Eigen::Index t = 1 + static_cast<Eigen::Index>(seed % 6);
        const Signal z = gaussian(sigma, T, seed);
        const HankelMatrix H = build_hankel(z, t);
        CHECK(H.width() == T - t + 1);
        for (Eigen::Index i = 1; i < t; ++i) {
            for (Eigen::Index j = 0; j + 1 < H.width(); ++j) {
                CHECK(H.block(i, j) == H.block(i - 1, j + 1));
            }
        }
        for (Eigen::Index j = 0; j < H.width(); ++j) {
            CHECK(H.block(0, j) == z.col(j));
        }
    }
}

TEST_CASE("Hankel errors and CSV export") {
    CHECK_THROWS_AS(build_hankel(row({1, 2}), 3), InsufficientDataError);
    CHECK_THROWS_AS(build_hankel(row({1, 2}), 0), ContractViolation);
    const std::string csv = hankel_to_csv(build_hankel(row({1, 2, 3, 4}), 2));
    CHECK(csv == "t,q,sigma\n2,3,1\n1,2,3\n2,3,4\n");
}

TEST_CASE("persistency certificates of short scalar signals") {
    const PeCertificate constant = persistency_certificate(row({1, 1, 1, 1}), 2);
    CHECK_FALSE(constant.is_pe);
    CHECK(constant.rank_found == 1);
    CHECK(constant.rank_required == 2);

    const PeCertificate impulse = persistency_certificate(row({1, 0, 0, 1}), 2);
    CHECK(impulse.is_pe);
    CHECK(impulse.rank_found == 2);
    CHECK(impulse.smallest_singular_value > 0.5);

    const PeCertificate geometric = persistency_certificate(row({1, 2, 4, 8}), 2);
    CHECK_FALSE(geometric.is_pe);
    CHECK(geometric.rank_found == 1);

    const PeCertificate short_signal = persistency_certificate(row({1, 0}), 2);
    CHECK_FALSE(short_signal.is_pe);
    CHECK(short_signal.too_short);
}

TEST_CASE("minimum sample counts") {
    CHECK(min_samples(1, 2) == 3);
    CHECK(min_samples(1, 1) == 1);
    CHECK(min_samples(10, 21) == 230);
    CHECK_THROWS_AS(min_samples(0, 1), ContractViolation);
}

TEST_CASE("random PE inputs") {
    const Signal a = random_pe_input(1, 10, 2, 3);
    CHECK(a.rows() == 1);
    CHECK(a.cols() == 10);
    CHECK(persistency_certificate(a, 2).is_pe);

    const Eigen::Index T = min_samples(2, 22);
    const Signal b = random_pe_input(2, T, 22, 5);
    CHECK(b.cols() == T);
    CHECK(persistency_certificate(b, 22).is_pe);

    CHECK_THROWS_AS(random_pe_input(2, T - 1, 22, 5), InsufficientDataError);
    CHECK(random_pe_input(3, 40, 4, 11) == random_pe_input(3, 40, 4, 11));
}

TEST_CASE("random PE inputs pass their own certificate over 100 seeds") {
    int passed = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const Eigen::Index m = 1 + static_cast<Eigen::Index>(seed % 3);
        const Eigen::Index order = 2 + static_cast<Eigen::Index>(seed % 5);
        const Signal u = random_pe_input(m, min_samples(m, order), order, seed);
        passed += persistency_certificate(u, order).is_pe ? 1 : 0;
    }
    CHECK(passed == 100);
}

TEST_CASE("PE of order t implies PE of every lower order") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Eigen::Index m = 1 + static_cast<Eigen::Index>(seed % 3);
        const Eigen::Index t = 3 + static_cast<Eigen::Index>(seed % 4);
        const Signal u = gaussian(m, min_samples(m, t) + static_cast<Eigen::Index>(seed % 3), seed);
        REQUIRE(persistency_certificate(u, t).is_pe);
        for (Eigen::Index lower = 1; lower < t; ++lower) {
            CHECK(persistency_certificate(u, lower).is_pe);
        }
    }
}

TEST_CASE("fundamental lemma rank check") {
    const LtiSystem sys = scalar_system();
    SUBCASE("scalar system, PE input of order n + L") {
        const Eigen::Index L = 1;
        const Signal u = random_pe_input(1, 12, sys.n() + L, 2);
        const Trajectory t = simulate(sys, Vector::Zero(1), u, Signal::Zero(1, u.cols()));
        CHECK(fundamental_lemma_rank_check(sys, t, L));
    }
    SUBCASE("constant input is rank deficient") {
        const Trajectory t = simulate(sys, Vector::Zero(1), Signal::Ones(1, 12), Signal::Zero(1, 12));
        CHECK_FALSE(fundamental_lemma_rank_check(sys, t, 2));
    }
    SUBCASE("preconditions") {
        const Trajectory t = simulate(sys, Vector::Zero(1), Signal::Ones(1, 6), Signal::Zero(1, 6));
        CHECK_THROWS_AS(fundamental_lemma_rank_check(sys, t, 0), ContractViolation);
        Trajectory no_states = t;
        no_states.states.reset();
        CHECK_THROWS_AS(fundamental_lemma_rank_check(sys, no_states, 1), ContractViolation);
    }
}

TEST_CASE("fundamental lemma rank identity on random systems") {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const Eigen::Index n = 1 + static_cast<Eigen::Index>(seed % 5);
        const Eigen::Index m = 1 + static_cast<Eigen::Index>(seed % 2);
        const Eigen::Index L = 1 + static_cast<Eigen::Index>(seed % 3);
        const LtiSystem sys = random_admissible_system(n, m, n, 1, seed, 0.9);
        const Signal u = random_pe_input(m, min_samples(m, n + L) + 5, n + L, seed + 1000);
        const Trajectory t = simulate(sys, Vector::Random(n), u, Signal::Zero(1, u.cols()));
        CHECK(fundamental_lemma_rank_check(sys, t, L));
    }
}

TEST_CASE("trajectory membership") {
    const LtiSystem sys = random_admissible_system(3, 1, 3, 1, 21, 0.8);
    const Eigen::Index L = 3;
    const Signal u = random_pe_input(1, 60, sys.n() + L, 4);
    const Trajectory data = simulate(sys, Vector::Zero(3), u, Signal::Zero(1, u.cols()));

    const Signal u2 = gaussian(1, 20, 99);
    const Trajectory other = simulate(sys, Vector::Random(3), u2, Signal::Zero(1, 20));
    const Signal cu = other.inputs.middleCols(7, L);
    const Signal cy = other.outputs.middleCols(7, L);

    const MembershipResult yes = trajectory_membership(data, cu, cy, L);
    CHECK(yes.is_member);
    CHECK(yes.residual <= 1e-7 * (1.0 + std::sqrt(cu.squaredNorm() + cy.squaredNorm())));
    CHECK(yes.alpha.size() == data.inputs.cols() - L + 1);

    Signal bumped = cy;
    bumped(1, 1) += 1.0;
    CHECK_FALSE(trajectory_membership(data, cu, bumped, L).is_member);

    const MembershipResult zero = trajectory_membership(data, Signal::Zero(1, L), Signal::Zero(3, L), L);
    CHECK(zero.is_member);
    CHECK(zero.alpha.norm() < 1e-12);

    CHECK_THROWS_AS(trajectory_membership(data, Signal::Zero(1, L + 1), Signal::Zero(3, L), L), ContractViolation);
    CHECK_THROWS_AS(trajectory_membership(data, Signal::Zero(2, L), Signal::Zero(3, L), L), ContractViolation);
}

}  // TEST_SUITE
