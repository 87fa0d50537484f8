#include "optomech/gaussian.hpp"

#include "optomech/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <string>

namespace optomech::gaussian {

namespace {

void check_symmetric(const Matrix& m) {
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance * scale) {
        throw ParameterError("covariance matrix is not symmetric");
    }
}

} // namespace

CovarianceMatrix::CovarianceMatrix(Matrix data, double physical_tolerance) : data_(std::move(data)) {
    if (data_.rows() != data_.cols() || data_.rows() == 0 || data_.rows() % 2 != 0) {
        throw ParameterError("covariance matrix must be square with even, non-zero dimension");
    }
    if (!data_.allFinite()) throw ParameterError("covariance matrix has non-finite entries");
    check_symmetric(data_);
    data_ = 0.5 * (data_ + data_.transpose());
    const auto nu = symplectic_eigenvalues(data_);
    if (nu.front() < 0.5 - physical_tolerance) {
        throw UnphysicalError("covariance matrix violates the uncertainty principle (nu_min = " +
                              std::to_string(nu.front()) + ")");
    }
}

CovarianceMatrix CovarianceMatrix::vacuum(int modes) {
    if (modes <= 0) throw ParameterError("vacuum: mode count must be positive");
    return CovarianceMatrix(0.5 * Matrix::Identity(2 * modes, 2 * modes));
}

Eigen::Matrix4d TwoModeCM::full() const {
    Eigen::Matrix4d v;
    v << A, C, C.transpose(), B;
    return v;
}

TwoModeCM TwoModeCM::from_full(const Eigen::Matrix4d& v) {
    return {v.topLeftCorner<2, 2>(), v.bottomRightCorner<2, 2>(), v.topRightCorner<2, 2>()};
}

NegativityValue::NegativityValue(double nats) : value_(nats) {
    if (!(nats >= 0.0) || !std::isfinite(nats)) {
        throw ParameterError("negativity must be finite and non-negative");
    }
}

Matrix symplectic_form(int modes) {
    Matrix omega = Matrix::Zero(2 * modes, 2 * modes);
    for (int k = 0; k < modes; ++k) {
        omega(2 * k, 2 * k + 1) = 1.0;
        omega(2 * k + 1, 2 * k) = -1.0;
    }
    return omega;
}

std::vector<double> symplectic_eigenvalues(const Matrix& v) {
    const int n = static_cast<int>(v.rows() / 2);
    // For V = L L^T, L^T Omega L is antisymmetric with eigenvalues +-i nu, so
    // its singular values are the nu, each twice. The SVD stays well behaved on
    // the degenerate spectra of pure states.
    const Eigen::LLT<Matrix> llt(v);
    if (llt.info() != Eigen::Success) {
        throw UnphysicalError("symplectic_eigenvalues: matrix is not positive definite");
    }
    const Matrix l = llt.matrixL();
    const Eigen::JacobiSVD<Matrix> svd(l.transpose() * symplectic_form(n) * l);
    std::vector<double> sv(svd.singularValues().begin(), svd.singularValues().end());
    std::sort(sv.begin(), sv.end());
    std::vector<double> nu(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        nu[static_cast<std::size_t>(k)] =
            0.5 * (sv[static_cast<std::size_t>(2 * k)] + sv[static_cast<std::size_t>(2 * k + 1)]);
    }
    return nu;
}

Matrix partial_transpose(const Matrix& v, int mode) {
    Matrix out = v;
    const Eigen::Index p = 2 * mode + 1;
    out.row(p) *= -1.0;
    out.col(p) *= -1.0;
    return out;
}

TwoModeCM extract_pair(const CovarianceMatrix& v, int i, int j) {
    const int n = v.modes();
    if (i < 0 || j < 0 || i >= n || j >= n) {
        throw ParameterError("extract_pair: mode index out of range");
    }
    if (i == j) throw ParameterError("extract_pair: mode indices must differ");
    const auto& m = v.matrix();
    TwoModeCM out;
    out.A = m.block<2, 2>(2 * i, 2 * i);
    out.B = m.block<2, 2>(2 * j, 2 * j);
    out.C = m.block<2, 2>(2 * i, 2 * j);
    return out;
}

double symplectic_min_pt(const TwoModeCM& v) {
    const double sigma = v.A.determinant() + v.B.determinant() - 2.0 * v.C.determinant();
    const double det_v = v.full().determinant();
    double radicand = sigma * sigma - 4.0 * det_v;
    if (radicand < 0.0) {
        if (radicand < -1e-12 * std::max(1.0, sigma * sigma)) {
            throw UnphysicalError("unphysical covariance: sigma^2 - 4 det V = " +
                                  std::to_string(radicand));
        }
        radicand = 0.0;
    }
    const double denom = sigma + std::sqrt(radicand);
    if (!(denom > 0.0) || !(det_v > 0.0)) {
        throw UnphysicalError("unphysical covariance: non-positive det V or sigma");
    }
    return std::sqrt(2.0 * det_v / denom);
}

NegativityValue log_negativity(const TwoModeCM& v) {
    const double nu = symplectic_min_pt(v);
    return NegativityValue(std::max(0.0, -std::log(2.0 * nu)));
}

bool is_physical(const Matrix& v, double tolerance) {
    if (v.rows() != v.cols() || v.rows() % 2 != 0 || v.rows() == 0) return false;
    if (!v.isApprox(v.transpose())) return false;
    try {
        return symplectic_eigenvalues(v).front() >= 0.5 - tolerance;
    } catch (const UnphysicalError&) {
        return false;
    }
}

} // namespace optomech::gaussian
