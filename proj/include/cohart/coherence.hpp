#ifndef COHART_COHERENCE_HPP
#define COHART_COHERENCE_HPP

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <utility>

#include "cohart/errors.hpp"

namespace cohart {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Hermitian nonnegative d x d matrix housing the mutual intensity (or a
// trace-normalized density matrix) in a given mode basis. Immutable
// after construction; constructors symmetrize and check positivity.
class CoherenceMatrix {
public:
    // Relative Frobenius tolerance on the anti-Hermitian part.
    static constexpr double hermiticity_tol = 1e-8;
    // Eigenvalue floor relative to the trace.
    static constexpr double psd_tol = 1e-10;

    static CoherenceMatrix from_matrix(Matrix m, std::string basis_tag = {}) {
        if (m.rows() != m.cols() || m.rows() < 1)
            throw DomainError("coherence matrix must be square and nonempty");
        const Matrix anti = 0.5 * (m - m.adjoint());
        const double rel = m.norm() > 0 ? anti.norm() / m.norm() : 0.0;
        if (rel > hermiticity_tol)
            throw DomainError("input matrix is not Hermitian (relative anti-Hermitian norm " +
                              std::to_string(rel) + ")");
        Matrix h = 0.5 * (m + m.adjoint());
        const double tr = h.trace().real();
        if (!(tr > 0))
            throw DomainError("coherence matrix must have positive trace");
        Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -psd_tol * tr)
            throw DomainError("coherence matrix is not positive semidefinite");
        return CoherenceMatrix(std::move(h), std::move(basis_tag));
    }

    const Matrix& matrix() const { return m_; }
    const std::string& basis_tag() const { return tag_; }
    int dimension() const { return static_cast<int>(m_.rows()); }
    double trace() const { return m_.trace().real(); }

    CoherenceMatrix normalized() const {
        return CoherenceMatrix(m_ / trace(), tag_);
    }

    Eigen::VectorXd eigenvalues() const {
        Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
        return es.eigenvalues();
    }

private:
    CoherenceMatrix(Matrix m, std::string tag) : m_(std::move(m)), tag_(std::move(tag)) {}

    Matrix m_;
    std::string tag_;
};

// mu_ij = J_ij / sqrt(J_ii J_jj). Scale invariant; unit diagonal.
inline Matrix degree_of_coherence(const CoherenceMatrix& J) {
    const Matrix& m = J.matrix();
    const int d = J.dimension();
    for (int i = 0; i < d; ++i)
        if (!(m(i, i).real() > 0))
            throw DomainError("degenerate intensity: zero diagonal entry in mutual intensity");
    Matrix mu(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            mu(i, j) = m(i, j) / std::sqrt(m(i, i).real() * m(j, j).real());
    return mu;
}

// Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2 for trace-1 states.
inline double fidelity(const CoherenceMatrix& rho, const CoherenceMatrix& sigma) {
    if (rho.dimension() != sigma.dimension())
        throw DomainError("fidelity: dimension mismatch");
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix());
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    const Matrix sqrt_rho =
        es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();
    Matrix inner = sqrt_rho * sigma.matrix() * sqrt_rho;
    inner = 0.5 * (inner + inner.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es2(inner, Eigen::EigenvaluesOnly);
    const double s = es2.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
    return std::min(s * s, 1.0);
}

// Frobenius-nearest PSD matrix: hermitize then clip negative eigenvalues
// at zero. Reports the Frobenius norm of the adjustment if requested.
inline Matrix project_psd(const Matrix& m, double* distance = nullptr) {
    Matrix h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    Matrix out = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
    out = 0.5 * (out + out.adjoint());
    if (distance) *distance = (out - m).norm();
    return out;
}

} // namespace cohart

#endif
