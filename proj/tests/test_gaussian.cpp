#include "optomech/errors.hpp"
#include "optomech/gaussian.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>

using namespace optomech;
using namespace optomech::gaussian;
namespace ts = testsupport;

TEST_CASE("covariance matrix validates shape, symmetry and uncertainty") {
    CHECK_NOTHROW(CovarianceMatrix(0.5 * Matrix::Identity(4, 4)));
    CHECK_THROWS_AS(CovarianceMatrix(Matrix::Identity(3, 3)), ParameterError);
    Matrix asym = 0.5 * Matrix::Identity(2, 2);
    asym(0, 1) = 0.1;
    CHECK_THROWS_AS(CovarianceMatrix{asym}, ParameterError);
    CHECK_THROWS_AS(CovarianceMatrix(0.4 * Matrix::Identity(2, 2)), UnphysicalError);
    CHECK(CovarianceMatrix::vacuum(4).modes() == 4);
}

TEST_CASE("extract_pair bookkeeping") {
    const auto vac = CovarianceMatrix::vacuum(4);
    const auto pair = extract_pair(vac, 0, 1);
    CHECK(pair.A.isApprox(0.5 * Eigen::Matrix2d::Identity()));
    CHECK(pair.B.isApprox(0.5 * Eigen::Matrix2d::Identity()));
    CHECK(pair.C.isZero());

    Matrix v = Matrix::Identity(6, 6);
    v(0, 4) = v(4, 0) = 0.1;
    v(1, 5) = v(5, 1) = -0.2;
    const auto p02 = extract_pair(CovarianceMatrix(v), 0, 2);
    CHECK(p02.C(0, 0) == 0.1);
    CHECK(p02.C(1, 1) == -0.2);
    CHECK(p02.C(0, 1) == 0.0);

    CHECK_THROWS_AS(extract_pair(vac, 0, 0), ParameterError);
    CHECK_THROWS_AS(extract_pair(vac, 0, 4), ParameterError);
}

TEST_CASE("reduced states of random physical states are physical") {
    std::mt19937_64 rng(7);
    for (int k = 0; k < 50; ++k) {
        // Three modes: embed a random two-mode state next to a squeezed third mode, then mix.
        Matrix v = Matrix::Zero(6, 6);
        v.block<4, 4>(0, 0) = ts::random_two_mode(rng);
        v.block<2, 2>(4, 4) = 0.5 * ts::squeezer(0.3) * ts::squeezer(0.3).transpose();
        Matrix s = Matrix::Identity(6, 6);
        s.block<4, 4>(2, 2) = ts::beam_splitter(0.3 + 0.1 * k);
        const Matrix mixed = s * v * s.transpose();
        const CovarianceMatrix cm(0.5 * (mixed + mixed.transpose()));
        for (auto [i, j] : {std::pair{0, 1}, {0, 2}, {1, 2}}) {
            const auto sub = extract_pair(cm, i, j);
            CHECK(ts::symplectic_spectrum(sub.full()).front() >= 0.5 - 1e-9);
        }
    }
}

TEST_CASE("symplectic_min_pt on textbook states") {
    TwoModeCM vac;
    CHECK(symplectic_min_pt(vac) == doctest::Approx(0.5).epsilon(1e-14));

    const auto sq = TwoModeCM::from_full(ts::tmsv(0.5));
    CHECK(symplectic_min_pt(sq) == doctest::Approx(std::exp(-1.0) / 2.0).epsilon(1e-12));
    CHECK(symplectic_min_pt(sq) == doctest::Approx(0.18394).epsilon(1e-4));

    TwoModeCM thermal;
    thermal.A = 1.5 * Eigen::Matrix2d::Identity();
    thermal.B = 1.5 * Eigen::Matrix2d::Identity();
    CHECK(symplectic_min_pt(thermal) == doctest::Approx(1.5));
}

TEST_CASE("log negativity on textbook states") {
    CHECK(log_negativity(TwoModeCM{}).value() == 0.0);
    CHECK(log_negativity(TwoModeCM::from_full(ts::tmsv(0.5))).value() == doctest::Approx(1.0).epsilon(1e-12));
    TwoModeCM thermal;
    thermal.A = thermal.B = 1.5 * Eigen::Matrix2d::Identity();
    CHECK(log_negativity(thermal).value() == 0.0);
    for (int k = 1; k <= 10; ++k) {
        const double r = 0.1 * k;
        CHECK(std::abs(log_negativity(TwoModeCM::from_full(ts::tmsv(r))).value() - 2.0 * r) <= 1e-10);
    }
}

TEST_CASE("unphysical radicand is an error, not a clamp") {
    TwoModeCM bad;
    bad.A = 0.5 * Eigen::Matrix2d::Identity();
    bad.B = 0.5 * Eigen::Matrix2d::Identity();
    bad.C = Eigen::Matrix2d::Identity();
    CHECK_THROWS_AS(symplectic_min_pt(bad), UnphysicalError);
}

TEST_CASE("negativity value type") {
    CHECK_THROWS_AS(NegativityValue(-1e-3), ParameterError);
    CHECK_FALSE(NegativityValue(0.0).entangled());
    CHECK(NegativityValue(0.1).entangled());
    CHECK(NegativityValue(0.1) < NegativityValue(0.2));
}

TEST_CASE("partial transpose: closed form equals explicit momentum flip") {
    std::mt19937_64 rng(2024);
    for (int k = 0; k < 100; ++k) {
        const Eigen::Matrix4d v = ts::random_two_mode(rng);
        Eigen::Matrix4d flipped = v;
        // p2 -> -p2
        for (int i = 0; i < 4; ++i) {
            if (i != 3) {
                flipped(3, i) = -flipped(3, i);
                flipped(i, 3) = -flipped(i, 3);
            }
        }
        // Hermitian oracle needs a positive matrix; the flipped matrix still is.
        const double oracle = ts::symplectic_spectrum(flipped).front();
        CHECK(std::abs(symplectic_min_pt(TwoModeCM::from_full(v)) - oracle) <= 1e-10);
        CHECK(partial_transpose(v, 1).isApprox(flipped, 1e-15));
    }
}

TEST_CASE("log negativity is invariant under local rotations") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
    for (int k = 0; k < 100; ++k) {
        const Eigen::Matrix4d v = ts::random_two_mode(rng);
        const Eigen::Matrix4d s = ts::local(ts::rotation(angle(rng)), ts::rotation(angle(rng)));
        const Eigen::Matrix4d w = s * v * s.transpose();
        CHECK(std::abs(log_negativity(TwoModeCM::from_full(v)).value() -
                       log_negativity(TwoModeCM::from_full(0.5 * (w + w.transpose()))).value()) <= 1e-10);
    }
}

TEST_CASE("product states have zero negativity") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
    std::uniform_real_distribution<double> sq(-1.0, 1.0);
    std::uniform_real_distribution<double> occ(0.0, 2.0);
    for (int k = 0; k < 100; ++k) {
        TwoModeCM v;
        const Eigen::Matrix2d sa = ts::rotation(angle(rng)) * ts::squeezer(sq(rng));
        const Eigen::Matrix2d sb = ts::rotation(angle(rng)) * ts::squeezer(sq(rng));
        v.A = (0.5 + occ(rng)) * sa * sa.transpose();
        v.B = (0.5 + occ(rng)) * sb * sb.transpose();
        v.A = 0.5 * (v.A + v.A.transpose()).eval();
        v.B = 0.5 * (v.B + v.B.transpose()).eval();
        CHECK(log_negativity(v).value() == 0.0);
    }
}

TEST_CASE("symplectic eigenvalues of thermal and squeezed states") {
    Matrix th = Matrix::Zero(4, 4);
    th.diagonal() << 1.5, 1.5, 0.7, 0.7;
    const auto nu = symplectic_eigenvalues(th);
    REQUIRE(nu.size() == 2);
    CHECK(nu[0] == doctest::Approx(0.7));
    CHECK(nu[1] == doctest::Approx(1.5));

    const auto pure = symplectic_eigenvalues(ts::tmsv(0.7));
    CHECK(pure[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(pure[1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(is_physical(ts::tmsv(0.7)));

    const auto vac = symplectic_eigenvalues(0.5 * Matrix::Identity(8, 8));
    REQUIRE(vac.size() == 4);
    for (double nu : vac) CHECK(nu == doctest::Approx(0.5).epsilon(1e-14));
    CHECK_FALSE(is_physical(0.3 * Matrix::Identity(4, 4)));
}
