#include "ssreg/common.hpp"

#include <Eigen/SVD>

namespace ssreg {

int numerical_rank(const Matrix& M, double rel_tol) {
    if (M.size() == 0) {
        return 0;
    }
    Eigen::BDCSVD<Matrix> svd(M);
    const Vector& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) {
        return 0;
    }
    const double cutoff = rel_tol * s(0);
    int rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) > cutoff) {
            ++rank;
        }
    }
    return rank;
}

double spectral_norm(const Matrix& M) {
    if (M.size() == 0) {
        return 0.0;
    }
    Eigen::BDCSVD<Matrix> svd(M);
    return svd.singularValues()(0);
}

double lambda_min(const Matrix& S) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double lambda_max(const Matrix& S) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

bool all_finite(const Matrix& M) {
    return M.allFinite();
}

std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace ssreg
