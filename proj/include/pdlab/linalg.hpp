#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "pdlab/model.hpp"

namespace pdlab::linalg {

using cplx = std::complex<double>;

/// Eigenpairs of a real symmetric matrix, A = V diag(values) V^T.
struct SymmetricEigen {
    Eigen::MatrixXd vectors;
    Eigen::VectorXd values;
};

[[nodiscard]] inline double max_abs(const Eigen::MatrixXd& a) {
    return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

/// Exact reconstruction error max|A - V diag(w) V^T|. O(n^3).
[[nodiscard]] inline double reconstruction_error(const Eigen::MatrixXd& a, const SymmetricEigen& e) {
    const Eigen::MatrixXd r = e.vectors * e.values.asDiagonal() * e.vectors.transpose();
    return max_abs(a - r);
}

/// Probe error max|A x - V diag(w) V^T x| over a few deterministic probe
/// vectors, normalized to unit max-norm. O(n^2) per probe; any violation of
/// the full reconstruction contract shows up here except on a measure-zero
/// set of probes.
[[nodiscard]] inline double probe_error(const Eigen::MatrixXd& a, const SymmetricEigen& e, int probes = 3) {
    const Eigen::Index n = a.rows();
    double worst = 0.0;
    for (int p = 0; p < probes; ++p) {
        Eigen::VectorXd x(n);
        for (Eigen::Index i = 0; i < n; ++i)
            x[i] = std::sin(1.0 + 0.7548776662 * static_cast<double>(i + 1) * (p + 1) + 0.3 * p);
        const Eigen::VectorXd lhs = a * x;
        const Eigen::VectorXd rhs = e.vectors * (e.values.asDiagonal() * (e.vectors.transpose() * x));
        worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
    }
    return worst;
}

/// Dense symmetric eigendecomposition with the accuracy contract
/// max|A - V W V^T| < tol * max|A|. Matrices up to `full_check_limit` are
/// checked by full reconstruction, larger ones by probing.
[[nodiscard]] inline SymmetricEigen symmetric_eigen(const Eigen::MatrixXd& a, const std::string& what = "matrix",
                                                    double tol = 1e-9, Eigen::Index full_check_limit = 600) {
    SymmetricEigen out;
    if (a.rows() == 0) return out;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) throw NumericalAbort("eigendecomposition failed for " + what);
    out.vectors = solver.eigenvectors();
    out.values = solver.eigenvalues();
    const double scale = std::max(max_abs(a), 1e-300);
    const double err = a.rows() <= full_check_limit ? reconstruction_error(a, out) : probe_error(a, out);
    // Probing applies A to an O(1) vector, so its error carries an extra
    // factor of order the row norm; compare against that scale.
    const double bound = a.rows() <= full_check_limit ? tol * scale
                                                      : tol * scale * std::sqrt(static_cast<double>(a.rows()));
    if (!(err < bound))
        throw NumericalAbort("eigendecomposition accuracy contract violated for " + what + " (error " +
                             std::to_string(err) + ")");
    return out;
}

/// In-place x <- V diag(exp(-i phase)) V^T x, with x stored as two real
/// columns (re, im) so both products stay real.
inline void apply_spectral_phase(const Eigen::MatrixXd& vectors, const Eigen::VectorXd& phase,
                                 Eigen::MatrixXd& state2) {
    Eigen::MatrixXd y = vectors.transpose() * state2;
    for (Eigen::Index k = 0; k < y.rows(); ++k) {
        const double c = std::cos(phase[k]);
        const double s = -std::sin(phase[k]);
        const double re = y(k, 0);
        const double im = y(k, 1);
        y(k, 0) = c * re - s * im;
        y(k, 1) = s * re + c * im;
    }
    state2.noalias() = vectors * y;
}

/// Dense V diag(exp(-i phase)) V^T.
[[nodiscard]] inline Eigen::MatrixXcd spectral_unitary(const Eigen::MatrixXd& vectors, const Eigen::VectorXd& phase) {
    Eigen::VectorXcd d(phase.size());
    for (Eigen::Index k = 0; k < phase.size(); ++k) d[k] = std::polar(1.0, -phase[k]);
    const Eigen::MatrixXcd vc = vectors.cast<cplx>();
    return vc * d.asDiagonal() * vectors.transpose().cast<cplx>();
}

[[nodiscard]] inline double unitarity_error(const Eigen::MatrixXcd& u) {
    const Eigen::MatrixXcd g = u.adjoint() * u - Eigen::MatrixXcd::Identity(u.rows(), u.cols());
    return g.size() == 0 ? 0.0 : g.cwiseAbs().maxCoeff();
}

/// Eigenvalue arguments in (-pi, pi] of a unitary matrix.
[[nodiscard]] inline std::vector<double> unitary_eigenphases(const Eigen::MatrixXcd& u) {
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(u, false);
    if (solver.info() != Eigen::Success) throw NumericalAbort("unitary eigensolver failed");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(u.rows()));
    for (Eigen::Index k = 0; k < solver.eigenvalues().size(); ++k) out.push_back(std::arg(solver.eigenvalues()[k]));
    return out;
}

}  // namespace pdlab::linalg
