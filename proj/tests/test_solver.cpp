#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "coglasso/core.hpp"
#include "coglasso/solver.hpp"
#include "oracles.hpp"

using namespace coglasso;

namespace {

// 4-variable fixture (p_x = p_z = 2) used by several row-level tests
struct RowFixture {
    EmpiricalCovariance cov;
    LayerPartition part{2, 2};
    PenaltyMatrix penalty{0.1, 0.05, LayerPartition(2, 2)};
    Matrix W;

    RowFixture() {
        cov.S.resize(4, 4);
        cov.S << 1.0, 0.42, -0.19, 0.31,
                 0.42, 1.0, 0.25, -0.11,
                -0.19, 0.25, 1.0, 0.08,
                 0.31, -0.11, 0.08, 1.0;
        W = cov.S;
        W.diagonal().array() += 0.1;
    }

    RowProblem problem(std::size_t i) const { return make_row_problem(cov, W, penalty, i); }
};

Hyperparameters hyper_fixture() { return Hyperparameters(0.1, 0.05, 0.5); }

ConvergenceConfig tight_config() {
    ConvergenceConfig cfg;
    cfg.outer_tol = 1e-8;
    cfg.inner_tol = 1e-10;
    cfg.max_outer = 500;
    cfg.max_inner = 10000;
    return cfg;
}

}  // namespace

TEST_SUITE_BEGIN("solver");

TEST_CASE("soft threshold definition") {
    CHECK(soft_threshold(3.0, 1.0) == 2.0);
    CHECK(soft_threshold(0.5, 1.0) == 0.0);
    CHECK(soft_threshold(-3.0, 1.0) == -2.0);
    CHECK(soft_threshold(0.0, 0.0) == 0.0);
}

TEST_CASE("glasso coordinate update on crafted residuals") {
    RowFixture fx;
    RowProblem prob = fx.problem(0);
    const Vector zero = Vector::Zero(3);

    SUBCASE("zero covariance column stays zero for any penalty") {
        prob.s_i.setZero();
        CHECK(glasso_coordinate_update(prob, zero, 0, 0.3) == 0.0);
        CHECK(glasso_coordinate_update(prob, zero, 2, 1e-9) == 0.0);
    }
    SUBCASE("hand-evaluated update r=0.9, lambda=0.5, W_jj=2") {
        prob.s_i(1) = 0.9;
        prob.W_sub(1, 1) = 2.0;
        CHECK(glasso_coordinate_update(prob, zero, 1, 0.5) == doctest::Approx(0.2).epsilon(1e-15));
        prob.s_i(1) = -0.9;
        CHECK(glasso_coordinate_update(prob, zero, 1, 0.5) ==
              doctest::Approx(-0.2).epsilon(1e-15));
    }
    SUBCASE("nonpositive diagonal raises a numerical error") {
        prob.W_sub(0, 0) = 0.0;
        CHECK_THROWS_AS(glasso_coordinate_update(prob, zero, 0, 0.1), NumericalError);
    }
}

TEST_CASE("coglasso coordinate update collapses to the single-penalty rule at c=0") {
    RowFixture fx;
    const RowProblem prob = fx.problem(1);
    Vector beta(3);
    beta << 0.2, -0.4, 0.1;
    const Hyperparameters h(0.1, 0.05, 0.0);
    for (std::size_t j = 0; j < 3; ++j) {
        const double expected = glasso_coordinate_update(prob, beta, j, prob.lambda_i(
            static_cast<Eigen::Index>(j)));
        CHECK(coglasso_coordinate_update(prob, beta, j, h) == expected);
    }
}

TEST_CASE("coglasso coordinate update drops the opposite layer at c=1") {
    RowFixture fx;
    const RowProblem prob = fx.problem(0);
    // coordinates 0..2 map to variables 1, 2, 3; variable 1 is layer X
    Vector beta = Vector::Zero(3);
    beta(1) = 0.7;  // opposite layer relative to coordinate 0
    beta(2) = -0.3;
    const Hyperparameters h(0.1, 0.05, 1.0);
    const double alpha = h.alpha();
    // with alpha*(1-c) = 0 only the same-layer sum remains, which is empty here
    const double r = alpha * prob.s_i(0);
    const double expected = soft_threshold(r, alpha * prob.lambda_i(0)) / prob.W_sub(0, 0);
    CHECK(coglasso_coordinate_update(prob, beta, 0, h) == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("coglasso coordinate update minimizes the one-dimensional row objective") {
    RowFixture fx;
    const RowProblem prob = fx.problem(2);
    const Hyperparameters h = hyper_fixture();
    Vector beta(3);
    beta << 0.15, -0.2, 0.05;
    const auto forms = oracles::make_row_forms(prob);
    for (std::size_t j = 0; j < 3; ++j) {
        Vector candidate = beta;
        candidate(static_cast<Eigen::Index>(j)) = coglasso_coordinate_update(prob, beta, j, h);

        // golden-section search over the coordinate as an independent check
        double lo = -2.0, hi = 2.0;
        const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
        auto eval = [&](double b) {
            Vector t = beta;
            t(static_cast<Eigen::Index>(j)) = b;
            return oracles::row_objective(forms, prob, h, t);
        };
        double m1 = hi - phi * (hi - lo), m2 = lo + phi * (hi - lo);
        double f1 = eval(m1), f2 = eval(m2);
        while (hi - lo > 1e-10) {
            if (f1 <= f2) {
                hi = m2; m2 = m1; f2 = f1;
                m1 = hi - phi * (hi - lo); f1 = eval(m1);
            } else {
                lo = m1; m1 = m2; f1 = f2;
                m2 = lo + phi * (hi - lo); f2 = eval(m2);
            }
        }
        CHECK(std::abs(candidate(static_cast<Eigen::Index>(j)) - 0.5 * (lo + hi)) < 1e-6);
    }
}

TEST_CASE("solve_row trivial cases") {
    RowFixture fx;
    const ConvergenceConfig cfg = tight_config();

    SUBCASE("all-zero covariance column solves to zero in one sweep") {
        RowProblem prob = fx.problem(0);
        prob.s_i.setZero();
        const auto sol = solve_row(prob, hyper_fixture(), cfg, Vector::Zero(3));
        CHECK(sol.beta.cwiseAbs().maxCoeff() == 0.0);
        CHECK(sol.sweeps == 1);
        CHECK(sol.converged);
    }
    SUBCASE("dominating penalties shrink everything to zero") {
        RowProblem prob = fx.problem(0);
        prob.W_sub = Matrix::Identity(3, 3);
        const double big = prob.s_i.cwiseAbs().maxCoeff() + 0.1;
        prob.lambda_i.setConstant(big);
        const auto sol = solve_row(prob, Hyperparameters(big, big, 0.0), cfg, Vector::Zero(3));
        CHECK(sol.beta.cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("warm start must be finite and well-sized") {
        RowProblem prob = fx.problem(0);
        Vector bad(3);
        bad << 0.0, std::nan(""), 0.0;
        CHECK_THROWS_AS(solve_row(prob, hyper_fixture(), cfg, bad), ParameterError);
        CHECK_THROWS_AS(solve_row(prob, hyper_fixture(), cfg, Vector::Zero(2)), ParameterError);
    }
}

TEST_CASE("solve_row matches the proximal-gradient oracle on the 4-variable fixture") {
    RowFixture fx;
    const ConvergenceConfig cfg = tight_config();
    for (std::size_t i = 0; i < 4; ++i) {
        for (double c : {0.0, 0.5, 1.0, 2.0}) {
            const RowProblem prob = fx.problem(i);
            const Hyperparameters h(0.1, 0.05, c);
            const auto sol = solve_row(prob, h, cfg, Vector::Zero(3));
            REQUIRE(sol.converged);
            const Vector reference = oracles::row_minimize(prob, h);
            CHECK((sol.beta - reference).cwiseAbs().maxCoeff() < 1e-6);
        }
    }
}

TEST_CASE("row objective is non-increasing across coordinate descent sweeps") {
    RowFixture fx;
    const Hyperparameters h = hyper_fixture();
    const RowProblem prob = fx.problem(3);
    const auto forms = oracles::make_row_forms(prob);
    Vector beta = Vector::Zero(3);
    double previous = oracles::row_objective(forms, prob, h, beta);
    for (int sweep = 0; sweep < 30; ++sweep) {
        for (std::size_t j = 0; j < 3; ++j)
            beta(static_cast<Eigen::Index>(j)) = coglasso_coordinate_update(prob, beta, j, h);
        const double value = oracles::row_objective(forms, prob, h, beta);
        CHECK(value <= previous + 1e-10);
        previous = value;
    }
}

TEST_CASE("identity covariance yields an empty graph with the expected diagonal") {
    EmpiricalCovariance cov;
    cov.S = Matrix::Identity(6, 6);
    const auto f = fit(cov, Hyperparameters(0.2, 0.1, 0.7), LayerPartition(4, 2));
    CHECK(f.converged);
    CHECK(f.adjacency.cast<long>().sum() == 0);
    for (Eigen::Index i = 0; i < 6; ++i)
        CHECK(f.Theta_hat(i, i) == doctest::Approx(1.0 / 1.2).epsilon(1e-12));
}

TEST_CASE("fit with equal penalties and c=0 is identical to fit_glasso") {
    Rng rng(23);
    for (int rep = 0; rep < 5; ++rep) {
        const std::size_t p = 6 + static_cast<std::size_t>(rng.uniform_below(6));
        const auto cov = oracles::random_covariance(p, rng);
        const double lambda = 0.05 + 0.4 * rng.uniform();
        const std::size_t p_x = 1 + static_cast<std::size_t>(rng.uniform_below(p - 1));
        const LayerPartition part2(p_x, p - p_x);
        const auto a = fit(cov, Hyperparameters(lambda, lambda, 0.0), part2);
        const auto b = fit_glasso(cov, lambda);
        CHECK((a.B_hat - b.B_hat).cwiseAbs().maxCoeff() <= 1e-9);
        CHECK((a.adjacency - b.adjacency).cwiseAbs().maxCoeff() == 0);
        CHECK((a.W - b.W).cwiseAbs().maxCoeff() <= 1e-9);
    }
}

TEST_CASE("converged coglasso fits satisfy the stationarity conditions") {
    Rng rng(29);
    const auto cov = oracles::random_covariance(10, rng);
    const LayerPartition part(6, 4);
    const auto f = fit(cov, Hyperparameters(0.3, 0.2, 0.5), part, tight_config());
    REQUIRE(f.converged);
    const auto report = kkt_residuals(cov, part, f);
    CHECK(report.max_active_residual <= 1e-6);
    CHECK(report.max_inactive_excess <= 1e-6);
}

TEST_CASE("W keeps its diagonal and positive definiteness on converged fits") {
    Rng rng(31);
    const auto cov = oracles::random_covariance(8, rng);
    const auto f = fit(cov, Hyperparameters(0.25, 0.15, 1.0), LayerPartition(5, 3));
    REQUIRE(f.converged);
    for (Eigen::Index i = 0; i < 8; ++i)
        CHECK(f.W(i, i) == cov.S(i, i) + 0.25);  // exact, never touched after init
    Eigen::SelfAdjointEigenSolver<Matrix> es(f.W, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
    CHECK((f.Theta_hat - f.Theta_hat.transpose()).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("fit_glasso with a dominating penalty yields an empty graph") {
    Rng rng(37);
    const auto cov = oracles::random_covariance(7, rng);
    double max_off = 0;
    for (Eigen::Index i = 0; i < 7; ++i)
        for (Eigen::Index j = 0; j < 7; ++j)
            if (i != j) max_off = std::max(max_off, std::abs(cov.S(i, j)));
    const auto f = fit_glasso(cov, max_off + 0.01);
    CHECK(f.adjacency.cast<long>().sum() == 0);
    CHECK(f.converged);
}

TEST_CASE("fit_glasso with lambda=0 inverts a well-conditioned covariance") {
    EmpiricalCovariance cov;
    cov.S.resize(3, 3);
    cov.S << 2.0, 0.5, 0.3,
             0.5, 1.5, 0.2,
             0.3, 0.2, 1.0;
    const auto f = fit_glasso(cov, 0.0, tight_config());
    REQUIRE(f.converged);
    const Matrix inverse = cov.S.inverse();
    CHECK((f.Theta_hat - inverse).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("fit_glasso reproduces an independent implementation on a frozen fixture") {
    // Reference values computed once with scikit-learn's GraphicalLasso
    // (mode='cd', tol=1e-12) on this matrix and checked in.
    EmpiricalCovariance cov;
    cov.S.resize(5, 5);
    cov.S << 1.0, -0.2551546200685271, 0.008214091017552737, -0.08317622043350877,
        -0.21870279235079781,
        -0.2551546200685271, 1.0, 0.11156209245326736, 0.1237656523737437, 0.14319587057866554,
        0.008214091017552737, 0.11156209245326736, 1.0000000000000002, -0.27846585254176714,
        -0.13464073432522358,
        -0.08317622043350877, 0.1237656523737437, -0.27846585254176714, 0.9999999999999998,
        0.05969429007509185,
        -0.21870279235079781, 0.14319587057866554, -0.13464073432522358, 0.05969429007509185,
        1.0;

    Matrix W_ref(5, 5);
    W_ref << 1.2, -0.05515462006852712, 3.857286097668875e-09, -2.522210351259119e-10,
        -0.018702792350797803,
        -0.05515462006852712, 1.2, -1.7728929101044866e-10, 1.1592629471383586e-11,
        0.0008596211719406735,
        3.857286097668875e-09, -1.7728929101044866e-10, 1.2000000000000002,
        -0.07846585254176713, -6.011835076860012e-11,
        -2.522210351259119e-10, 1.1592629471383586e-11, -0.07846585254176713,
        1.1999999999999997, 3.931031372052674e-12,
        -0.018702792350797803, 0.0008596211719406735, -6.011835076860012e-11,
        3.931031372052674e-12, 1.2;

    Matrix Theta_ref(5, 5);
    Theta_ref << 0.8352999719398583, 0.038382904233241685, 0.0, 0.0, 0.01299120597391575,
        0.038382904233241685, 0.835097495416761, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.8369116478947564, 0.054724154961831084, 0.0,
        0.0, 0.0, 0.054724154961831084, 0.8369116478947567, 0.0,
        0.01299120597391575, 0.0, 0.0, 0.0, 0.8335358098564305;

    const auto f = fit_glasso(cov, 0.2, tight_config());
    REQUIRE(f.converged);
    CHECK((f.W - W_ref).cwiseAbs().maxCoeff() < 1e-4);
    CHECK((f.Theta_hat - Theta_ref).cwiseAbs().maxCoeff() < 1e-4);

    BinaryMatrix adj_ref = BinaryMatrix::Zero(5, 5);
    adj_ref(0, 1) = adj_ref(1, 0) = 1;
    adj_ref(0, 4) = adj_ref(4, 0) = 1;
    adj_ref(2, 3) = adj_ref(3, 2) = 1;
    CHECK((f.adjacency - adj_ref).cwiseAbs().maxCoeff() == 0);
}

TEST_CASE("sparsity is monotone along each penalty axis") {
    Rng rng(41);
    const auto cov = oracles::random_covariance(8, rng);
    const LayerPartition part(5, 3);

    auto count_edges = [&part](const BinaryMatrix& A, bool within) {
        long n = 0;
        for (Eigen::Index i = 0; i < A.rows(); ++i)
            for (Eigen::Index j = i + 1; j < A.cols(); ++j)
                if (A(i, j) != 0 &&
                    part.same_layer(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) ==
                        within)
                    ++n;
        return n;
    };

    const std::vector<double> grid = {0.05, 0.1, 0.2, 0.3, 0.45};
    SUBCASE("within-layer edges vs lambda_w") {
        long previous = 1 << 20;
        for (double lw : grid) {
            const auto f = fit(cov, Hyperparameters(lw, 0.2, 0.5), part);
            REQUIRE(f.converged);
            const long edges = count_edges(f.adjacency, true);
            CHECK(edges <= previous + 1);
            previous = edges;
        }
    }
    SUBCASE("between-layer edges vs lambda_b") {
        long previous = 1 << 20;
        for (double lb : grid) {
            const auto f = fit(cov, Hyperparameters(0.2, lb, 0.5), part);
            REQUIRE(f.converged);
            const long edges = count_edges(f.adjacency, false);
            CHECK(edges <= previous + 1);
            previous = edges;
        }
    }
}

TEST_CASE("grid refits are warm-start invariant") {
    Rng rng(43);
    const auto cov = oracles::random_covariance(9, rng);
    const LayerPartition part(6, 3);
    const ConvergenceConfig cfg = tight_config();
    const auto sparse_fit = fit(cov, Hyperparameters(0.4, 0.3, 0.5), part, cfg);
    const Hyperparameters target(0.25, 0.2, 0.5);
    const auto cold = fit(cov, target, part, cfg);
    const auto warm = fit(cov, target, part, cfg, &sparse_fit);
    CHECK((cold.B_hat - warm.B_hat).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((cold.adjacency - warm.adjacency).cwiseAbs().maxCoeff() == 0);
}

TEST_CASE("recover_precision inverts a diagonal W exactly") {
    Matrix W = Matrix::Zero(3, 3);
    W.diagonal() << 2.0, 4.0, 0.5;
    const auto rec = recover_precision(W, Matrix::Zero(3, 3));
    CHECK(rec.theta(0, 0) == doctest::Approx(0.5));
    CHECK(rec.theta(1, 1) == doctest::Approx(0.25));
    CHECK(rec.theta(2, 2) == doctest::Approx(2.0));
    CHECK(rec.theta(0, 1) == 0.0);
    CHECK(rec.inversion_residual < 1e-15);
}

TEST_CASE("recovered precision is a near-inverse of W with matching support") {
    Rng rng(47);
    const auto cov = oracles::random_covariance(10, rng);
    // at c = 0 the converged W and B_hat are jointly consistent, so the
    // recovery is an exact inverse up to solver tolerance
    const auto g = fit_glasso(cov, 0.15, tight_config());
    REQUIRE(g.converged);
    CHECK(g.inversion_residual <= 1e-4);
    CHECK((g.W * g.Theta_hat - Matrix::Identity(10, 10)).cwiseAbs().maxCoeff() <= 1e-4);

    // with collaboration the rows couple through their sweep states; the
    // residual is recorded on the fit and stays at the coupling level
    const LayerPartition part(6, 4);
    const auto f = fit(cov, Hyperparameters(0.2, 0.12, 0.5), part, tight_config());
    REQUIRE(f.converged);
    CHECK(std::isfinite(f.inversion_residual));
    CHECK(f.inversion_residual ==
          (f.W * f.Theta_hat - Matrix::Identity(10, 10)).cwiseAbs().maxCoeff());
    // support of Theta_hat off-diagonal equals the OR-symmetrized B_hat support
    for (Eigen::Index i = 0; i < 10; ++i)
        for (Eigen::Index j = 0; j < 10; ++j) {
            if (i == j) continue;
            const bool b_support = f.B_hat(i, j) != 0.0 || f.B_hat(j, i) != 0.0;
            CHECK((f.Theta_hat(i, j) != 0.0) == b_support);
        }
}

TEST_CASE("recover_precision rejects a nonpositive Schur complement") {
    Matrix W(2, 2);
    W << 1.0, 2.0, 2.0, 1.0;
    Matrix B(2, 2);
    B << 0.0, 2.0, 2.0, 0.0;  // W_ii - W_{i,\i} beta_i = 1 - 4 < 0
    CHECK_THROWS_AS(recover_precision(W, B), NumericalError);
}

TEST_CASE("extract_adjacency applies the OR rule with a threshold") {
    Matrix B = Matrix::Zero(3, 3);
    SUBCASE("empty coefficients give an empty graph") {
        CHECK(extract_adjacency(B).cast<long>().sum() == 0);
    }
    SUBCASE("an edge in either direction is kept") {
        B(0, 1) = 0.3;  // B_12 nonzero, B_21 zero
        const auto A = extract_adjacency(B, 0.0);
        CHECK(A(0, 1) == 1);
        CHECK(A(1, 0) == 1);
        CHECK(A.diagonal().cwiseAbs().sum() == 0);
    }
    SUBCASE("entries at or below the threshold are dropped") {
        B(0, 1) = 0.05;
        B(1, 0) = -0.05;
        const auto A = extract_adjacency(B, 0.1);
        CHECK(A(0, 1) == 0);
    }
    SUBCASE("negative threshold is rejected") {
        CHECK_THROWS_AS(extract_adjacency(B, -0.1), ParameterError);
    }
}

TEST_CASE("symmetric square root identity on a positive definite fixture") {
    Rng rng(53);
    const auto cov = oracles::random_covariance(6, rng);
    Matrix M = cov.S;
    M.diagonal().array() += 0.3;
    const Matrix root = oracles::sym_sqrt(M);
    CHECK((root.transpose() * root - M).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((root - root.transpose()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("solve_row returns the best iterate when the sweep cap is hit") {
    RowFixture fx;
    ConvergenceConfig cfg = tight_config();
    cfg.max_inner = 1;
    const auto sol = solve_row(fx.problem(0), hyper_fixture(), cfg, Vector::Zero(3));
    CHECK_FALSE(sol.converged);
    CHECK(sol.sweeps == 1);
    CHECK(sol.beta.allFinite());
}

TEST_CASE("unpenalized fits on rank-deficient data fail with a numerical error") {
    Matrix data(2, 3);
    data << 1, 2, 3, 2, 4.0, 6.5;
    const auto cov = empirical_covariance(data, false);
    CHECK_THROWS_AS(fit_glasso(cov, 0.0), NumericalError);
}

TEST_CASE("fit validates its inputs") {
    EmpiricalCovariance cov;
    cov.S = Matrix::Identity(4, 4);
    CHECK_THROWS_AS(fit(cov, Hyperparameters(0.1, 0.1, 0.0), LayerPartition(2, 3)),
                    ParameterError);
    EmpiricalCovariance asym;
    asym.S = Matrix::Identity(3, 3);
    asym.S(0, 1) = 0.5;
    CHECK_THROWS_AS(fit(asym, Hyperparameters(0.1, 0.1, 0.0), LayerPartition(2, 1)), DataError);
    CHECK_THROWS_AS(fit_glasso(cov, -0.5), ParameterError);
    ConvergenceConfig bad;
    bad.max_outer = 0;
    CHECK_THROWS_AS(fit_glasso(cov, 0.1, bad), ParameterError);
}

TEST_SUITE_END();
