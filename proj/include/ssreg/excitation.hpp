#pragma once

#include "ssreg/common.hpp"
#include "ssreg/lti.hpp"

#include <cstdint>
#include <string>

namespace ssreg {

/**
 * Depth-t block-Hankel arrangement of a sigma-dimensional signal z_0..z_{T-1}:
 *
 *   [ z_0      z_1   ...  z_{q-1}   ]
 *   [ z_1      z_2   ...  z_q       ]
 *   [ ...                           ]
 *   [ z_{t-1}  z_t   ...  z_{T-1}   ]      q = T - t + 1
 */
class HankelMatrix {
public:
    HankelMatrix(Matrix entries, Eigen::Index depth, Eigen::Index block_dim);

    Eigen::Index depth() const { return depth_; }
    Eigen::Index width() const { return entries_.cols(); }
    Eigen::Index block_dim() const { return block_dim_; }
    const Matrix& entries() const { return entries_; }

    // Block (i, j): sample z_{i+j}.
    auto block(Eigen::Index i, Eigen::Index j) const {
        return entries_.block(i * block_dim_, j, block_dim_, 1);
    }

private:
    Matrix entries_;
    Eigen::Index depth_;
    Eigen::Index block_dim_;
};

HankelMatrix build_hankel(const Signal& signal, Eigen::Index depth);

// Row-major CSV with a `t,q,sigma` header line followed by the matrix rows.
std::string hankel_to_csv(const HankelMatrix& H);

struct PeCertificate {
    Eigen::Index order = 0;
    int rank_found = 0;
    int rank_required = 0;
    double smallest_singular_value = 0.0;
    bool is_pe = false;
    bool too_short = false;  // signal shorter than min_samples(sigma, order)
};

// Minimum signal length for persistency of excitation of order t: (sigma+1) t - 1.
Eigen::Index min_samples(Eigen::Index sigma, Eigen::Index order);

PeCertificate persistency_certificate(const Signal& signal, Eigen::Index order,
                                      const Tolerances& tol = default_tolerances());

// IID standard Gaussian input of length T certified PE of the given order.
Signal random_pe_input(Eigen::Index m, Eigen::Index T, Eigen::Index order, std::uint64_t seed);

// rank [U_{L,q}; X_{1,q}] == L m + n for an input-state trajectory.
bool fundamental_lemma_rank_check(const LtiSystem& sys, const Trajectory& traj, Eigen::Index L,
                                  const Tolerances& tol = default_tolerances());

struct MembershipResult {
    bool is_member = false;
    double residual = 0.0;
    Vector alpha;
};

// Least-squares test of [u~; y~] in range [U_{L,q}; Y_{L,q}]. candidate_u and
// candidate_y are L-sample signals; data supplies the Hankel columns.
MembershipResult trajectory_membership(const Trajectory& data, const Signal& candidate_u, const Signal& candidate_y,
                                       Eigen::Index L, double rel_tol = 1e-7);

}  // namespace ssreg
