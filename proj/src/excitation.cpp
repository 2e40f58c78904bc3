#include "ssreg/excitation.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <random>
#include <sstream>

#include "ssreg/io.hpp"

namespace ssreg {

namespace {

constexpr int kMaxPeResamples = 10;

}  // namespace

HankelMatrix::HankelMatrix(Matrix entries, Eigen::Index depth, Eigen::Index block_dim)
    : entries_(std::move(entries)), depth_(depth), block_dim_(block_dim) {
    if (depth_ < 1 || block_dim_ < 1 || entries_.rows() != depth_ * block_dim_) {
        throw ContractViolation("HankelMatrix: entries do not match depth x block dimension");
    }
}

HankelMatrix build_hankel(const Signal& signal, Eigen::Index depth) {
    if (depth < 1) {
        throw ContractViolation("build_hankel: depth must be positive");
    }
    if (signal.rows() < 1) {
        throw ContractViolation("build_hankel: signal has no channels");
    }
    const Eigen::Index T = signal.cols();
    if (T < depth) {
        throw InsufficientDataError("build_hankel: signal of length " + std::to_string(T) +
                                    " is shorter than depth " + std::to_string(depth));
    }
    const Eigen::Index sigma = signal.rows();
    const Eigen::Index q = T - depth + 1;
    Matrix H(sigma * depth, q);
    for (Eigen::Index i = 0; i < depth; ++i) {
        H.middleRows(i * sigma, sigma) = signal.middleCols(i, q);
    }
    return HankelMatrix(std::move(H), depth, sigma);
}

std::string hankel_to_csv(const HankelMatrix& H) {
    std::ostringstream os;
    os << "t,q,sigma\n" << H.depth() << ',' << H.width() << ',' << H.block_dim() << '\n';
    os << matrix_to_csv_rows(H.entries());
    return os.str();
}

Eigen::Index min_samples(Eigen::Index sigma, Eigen::Index order) {
    if (sigma < 1 || order < 1) {
        throw ContractViolation("min_samples: sigma and order must be positive");
    }
    return (sigma + 1) * order - 1;
}

PeCertificate persistency_certificate(const Signal& signal, Eigen::Index order, const Tolerances& tol) {
    PeCertificate cert;
    cert.order = order;
    const Eigen::Index sigma = signal.rows();
    cert.rank_required = static_cast<int>(sigma * order);
    if (order < 1 || sigma < 1 || signal.cols() < min_samples(sigma, order)) {
        cert.too_short = true;
        return cert;
    }
    const HankelMatrix H = build_hankel(signal, order);
    Eigen::BDCSVD<Matrix> svd(H.entries());
    const Vector& s = svd.singularValues();
    const double cutoff = s(0) > 0.0 ? tol.rank_rel * s(0) : 0.0;
    int rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) > cutoff) {
            ++rank;
        }
    }
    cert.rank_found = rank;
    // Full row rank needs sigma*t singular values; width >= sigma*t is guaranteed here.
    cert.smallest_singular_value = s(cert.rank_required - 1);
    cert.is_pe = cert.rank_found == cert.rank_required;
    return cert;
}

Signal random_pe_input(Eigen::Index m, Eigen::Index T, Eigen::Index order, std::uint64_t seed) {
    if (m < 1) {
        throw ContractViolation("random_pe_input: m must be positive");
    }
    const Eigen::Index needed = min_samples(m, order);
    if (T < needed) {
        throw InsufficientDataError("random_pe_input: T = " + std::to_string(T) + " is below the minimum " +
                                    std::to_string(needed) + " for order " + std::to_string(order));
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int attempt = 0; attempt <= kMaxPeResamples; ++attempt) {
        Signal u(m, T);
        for (Eigen::Index k = 0; k < T; ++k) {
            for (Eigen::Index i = 0; i < m; ++i) {
                u(i, k) = normal(rng);
            }
        }
        if (persistency_certificate(u, order).is_pe) {
            return u;
        }
    }
    throw GenerationFailure("random_pe_input: could not draw a persistently exciting input");
}

bool fundamental_lemma_rank_check(const LtiSystem& sys, const Trajectory& traj, Eigen::Index L,
                                  const Tolerances& tol) {
    if (L < 1) {
        throw ContractViolation("fundamental_lemma_rank_check: L must be at least 1");
    }
    if (!traj.states) {
        throw ContractViolation("fundamental_lemma_rank_check: trajectory has no states");
    }
    if (traj.inputs.rows() != sys.m() || traj.states->rows() != sys.n()) {
        throw ContractViolation("fundamental_lemma_rank_check: dimension mismatch");
    }
    const Eigen::Index T = traj.inputs.cols();
    if (traj.states->cols() < T) {
        throw ContractViolation("fundamental_lemma_rank_check: fewer states than inputs");
    }
    const HankelMatrix U = build_hankel(traj.inputs, L);
    const Eigen::Index q = U.width();
    Matrix stacked(U.entries().rows() + sys.n(), q);
    stacked << U.entries(), traj.states->leftCols(q);
    return numerical_rank(stacked, tol.rank_rel) == L * sys.m() + sys.n();
}

MembershipResult trajectory_membership(const Trajectory& data, const Signal& candidate_u, const Signal& candidate_y,
                                       Eigen::Index L, double rel_tol) {
    if (L < 1) {
        throw ContractViolation("trajectory_membership: L must be at least 1");
    }
    if (candidate_u.cols() != L || candidate_y.cols() != L) {
        throw ContractViolation("trajectory_membership: candidates must have L samples");
    }
    if (candidate_u.rows() != data.inputs.rows() || candidate_y.rows() != data.outputs.rows()) {
        throw ContractViolation("trajectory_membership: candidate dimension mismatch");
    }
    const Eigen::Index T = data.inputs.cols();
    if (data.outputs.cols() < T) {
        throw ContractViolation("trajectory_membership: fewer outputs than inputs");
    }
    const HankelMatrix U = build_hankel(data.inputs, L);
    const HankelMatrix Y = build_hankel(data.outputs.leftCols(T), L);
    Matrix K(U.entries().rows() + Y.entries().rows(), U.width());
    K << U.entries(), Y.entries();

    Vector c(K.rows());
    c << candidate_u.reshaped(), candidate_y.reshaped();

    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(K);
    cod.setThreshold(default_tolerances().rank_rel);
    MembershipResult res;
    res.alpha = cod.solve(c);
    res.residual = (K * res.alpha - c).norm();
    res.is_member = res.residual <= rel_tol * (1.0 + c.norm());
    return res;
}

}  // namespace ssreg
