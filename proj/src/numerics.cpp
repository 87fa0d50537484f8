#include "optomech/numerics.hpp"

#include "optomech/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

namespace optomech::numerics {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr std::array<double, 7> c = {0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0};
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
// 5th-order weights (FSAL: row 7 of A).
constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                 b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
// Difference between 5th- and 4th-order weights.
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

class DormandPrince {
public:
    DormandPrince(const OdeSpec& spec)
        : spec_(spec), n_(spec.dimension), k1_(n_), k2_(n_), k3_(n_), k4_(n_), k5_(n_), k6_(n_),
          k7_(n_), tmp_(n_), y_new_(n_), err_(n_) {}

    // One trial step of size h from (t, y); k1_ must hold f(t, y).
    // Fills y_new_ and k7_ = f(t+h, y_new); returns the scaled error norm.
    double trial(double t, const Vector& y, double h) {
        const auto& f = spec_.rhs;
        tmp_ = y + h * a21 * k1_;
        f(t + c[1] * h, tmp_, k2_);
        tmp_ = y + h * (a31 * k1_ + a32 * k2_);
        f(t + c[2] * h, tmp_, k3_);
        tmp_ = y + h * (a41 * k1_ + a42 * k2_ + a43 * k3_);
        f(t + c[3] * h, tmp_, k4_);
        tmp_ = y + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
        f(t + c[4] * h, tmp_, k5_);
        tmp_ = y + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
        f(t + h, tmp_, k6_);
        y_new_ = y + h * (b1 * k1_ + b3 * k3_ + b4 * k4_ + b5 * k5_ + b6 * k6_);
        f(t + h, y_new_, k7_);

        err_ = h * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_);
        const auto& tol = spec_.tolerances;
        double sum = 0.0;
        for (Eigen::Index i = 0; i < n_; ++i) {
            const double scale =
                tol.abs_tol + tol.rel_tol * std::max(std::abs(y[i]), std::abs(y_new_[i]));
            const double r = err_[i] / scale;
            sum += r * r;
        }
        return n_ > 0 ? std::sqrt(sum / static_cast<double>(n_)) : 0.0;
    }

    Vector& k1() { return k1_; }
    Vector& k7() { return k7_; }
    const Vector& y_new() const { return y_new_; }

private:
    const OdeSpec& spec_;
    Eigen::Index n_;
    Vector k1_, k2_, k3_, k4_, k5_, k6_, k7_, tmp_, y_new_, err_;
};

// Hairer's starting-step heuristic (order 5).
double initial_step(const OdeSpec& spec, double t0, const Vector& y0, const Vector& f0,
                    double span) {
    const auto& tol = spec.tolerances;
    const Vector scale = (tol.abs_tol + tol.rel_tol * y0.array().abs()).matrix();
    const double d0 = (y0.array() / scale.array()).matrix().norm() / std::sqrt(double(y0.size()));
    const double d1 = (f0.array() / scale.array()).matrix().norm() / std::sqrt(double(y0.size()));
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, span);
    Vector y1 = y0 + h0 * f0;
    Vector f1(y0.size());
    spec.rhs(t0 + h0, y1, f1);
    const double d2 =
        ((f1 - f0).array() / scale.array()).matrix().norm() / std::sqrt(double(y0.size())) / h0;
    const double h1 = (std::max(d1, d2) <= 1e-15) ? std::max(1e-6, h0 * 1e-3)
                                                   : std::pow(0.01 / std::max(d1, d2), 1.0 / 5.0);
    return std::min({100.0 * h0, h1, span});
}

} // namespace

OdeSolution integrate(const OdeSpec& spec, const Vector& y0, std::span<const double> t_grid) {
    if (spec.dimension != y0.size()) {
        throw ParameterError("integrate: y0 size does not match OdeSpec dimension");
    }
    if (!(spec.tolerances.abs_tol > 0.0) || !(spec.tolerances.rel_tol > 0.0)) {
        throw ParameterError("integrate: tolerances must be positive");
    }
    if (spec.fixed_step && !(*spec.fixed_step > 0.0)) {
        throw ParameterError("integrate: fixed step must be positive");
    }
    if (t_grid.empty()) {
        throw ParameterError("integrate: empty time grid");
    }
    for (std::size_t i = 1; i < t_grid.size(); ++i) {
        if (!(t_grid[i] > t_grid[i - 1])) {
            throw ParameterError("integrate: time grid must be strictly ascending");
        }
    }

    OdeSolution out;
    out.states.reserve(t_grid.size());
    out.states.push_back(y0);
    if (t_grid.size() == 1) return out;

    DormandPrince dp(spec);
    Vector y = y0;
    double t = t_grid.front();
    spec.rhs(t, y, dp.k1());

    const double span = t_grid.back() - t_grid.front();
    double h = spec.fixed_step ? *spec.fixed_step : initial_step(spec, t, y, dp.k1(), span);

    constexpr double safety = 0.9, min_factor = 0.2, max_factor = 10.0;
    auto& report = out.report;

    for (std::size_t next = 1; next < t_grid.size(); ++next) {
        const double target = t_grid[next];
        while (t < target) {
            if (report.steps + report.rejected >= spec.tolerances.max_steps) {
                throw SolverError("integrate: maximum step count exceeded at t = " +
                                  std::to_string(t));
            }
            double h_try = h;
            bool lands = false;
            if (t + h_try >= target - 1e-12 * std::max(1.0, std::abs(target))) {
                h_try = target - t;
                lands = true;
            }
            if (h_try <= 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
                throw SolverError("integrate: step size underflow at t = " + std::to_string(t));
            }

            const double err = dp.trial(t, y, h_try);
            if (!std::isfinite(err)) {
                if (spec.fixed_step) throw SolverError("integrate: non-finite state");
                ++report.rejected;
                h = h_try * min_factor;
                continue;
            }

            if (spec.fixed_step || err <= 1.0) {
                t = lands ? target : t + h_try;
                y = dp.y_new();
                dp.k1().swap(dp.k7());
                ++report.steps;
                report.last_error_estimate = err;
                if (!spec.fixed_step) {
                    const double factor =
                        err == 0.0 ? max_factor
                                   : std::clamp(safety * std::pow(err, -0.2), min_factor, max_factor);
                    // A step truncated to hit the grid says little about the
                    // natural step; keep the larger of the two.
                    h = lands ? std::max(h, h_try * factor) : h_try * factor;
                }
            } else {
                ++report.rejected;
                h = h_try * std::clamp(safety * std::pow(err, -0.2), min_factor, 1.0);
            }
        }
        out.states.push_back(y);
    }
    return out;
}

std::vector<std::complex<double>> eigenvalues(const Matrix& a) {
    if (a.rows() != a.cols()) throw ParameterError("eigenvalues: matrix must be square");
    if (!a.allFinite()) throw ParameterError("eigenvalues: non-finite entries");
    Eigen::EigenSolver<Matrix> solver(a, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) {
        throw SolverError("eigenvalues: QR iteration did not converge");
    }
    const auto& ev = solver.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

double spectral_abscissa(const Matrix& a) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& lambda : eigenvalues(a)) best = std::max(best, lambda.real());
    return best;
}

Matrix lyapunov_solve(const Matrix& z, const Matrix& q) {
    const Eigen::Index n = z.rows();
    if (z.cols() != n || q.rows() != n || q.cols() != n) {
        throw ParameterError("lyapunov_solve: dimension mismatch");
    }
    // Column-major vec: vec(Z X) = (I (x) Z) vec X, vec(X Z^T) = (Z (x) I) vec X.
    Matrix k = Matrix::Zero(n * n, n * n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::Index row = j * n + i;
            for (Eigen::Index m = 0; m < n; ++m) {
                k(row, j * n + m) += z(i, m); // (Z X)_{ij}
                k(row, m * n + i) += z(j, m); // (X Z^T)_{ij}
            }
        }
    }
    Eigen::PartialPivLU<Matrix> lu(k);
    const double rcond = lu.rcond();
    if (!(rcond > 1e-14)) {
        throw SolverError("lyapunov_solve: Kronecker system is singular (rcond = " +
                          std::to_string(rcond) + "); spectrum is marginal");
    }
    const Vector rhs = -Eigen::Map<const Vector>(q.data(), n * n);
    Vector x = lu.solve(rhs);
    x += lu.solve(rhs - k * x);

    Matrix result = Eigen::Map<const Matrix>(x.data(), n, n);
    if (q.isApprox(q.transpose(), 1e-14)) result = symmetrized(result);
    return result;
}

double lyapunov_residual(const Matrix& z, const Matrix& x, const Matrix& q) {
    return max_abs(z * x + x * z.transpose() + q);
}

std::vector<double> linspace(double start, double stop, std::size_t count) {
    std::vector<double> v(count);
    if (count == 1) {
        v[0] = start;
        return v;
    }
    const double step = (stop - start) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) v[i] = start + step * static_cast<double>(i);
    if (count > 1) v.back() = stop;
    return v;
}

} // namespace optomech::numerics
