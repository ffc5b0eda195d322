#include <doctest.h>

#include <cmath>
#include <numbers>

#include <qktsne/rng.hpp>
#include <qktsne/tsne.hpp>

using namespace qktsne;

namespace {

Eigen::MatrixXd random_embedding(Rng& rng, int n, int d = 2) {
    Eigen::MatrixXd y(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) y(i, j) = rng.uniform(-1.0, 1.0);
    return y;
}

Eigen::MatrixXd random_distances(Rng& rng, int n) {
    Eigen::MatrixXd points = random_embedding(rng, n, 3);
    Eigen::MatrixXd d2(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            d2(i, j) = (points.row(i) - points.row(j)).squaredNorm();
    return d2;
}

} // namespace

TEST_CASE("conditional_p is uniform for equidistant neighbors") {
    Eigen::VectorXd d2 = Eigen::VectorXd::Constant(5, 0.8);
    Eigen::VectorXd p = conditional_p(d2, 0.5);
    for (int j = 0; j < 5; ++j) CHECK(p(j) == doctest::Approx(0.2));
    CHECK(p.sum() == doctest::Approx(1.0));
}

TEST_CASE("conditional_p concentrates on the nearest point") {
    Eigen::VectorXd d2(3);
    d2 << 0.0, 1e4, 1e4;
    Eigen::VectorXd p = conditional_p(d2, 0.1);
    CHECK(p(0) == doctest::Approx(1.0));
}

TEST_CASE("conditional_p matches a scalar computation") {
    Eigen::VectorXd d2(2);
    d2 << 0.5, 2.0;
    Eigen::VectorXd p = conditional_p(d2, 1.0);
    const double w0 = std::exp(-0.25), w1 = std::exp(-1.0);
    CHECK(p(0) == doctest::Approx(w0 / (w0 + w1)).epsilon(1e-12));
    CHECK(p(1) == doctest::Approx(w1 / (w0 + w1)).epsilon(1e-12));
}

TEST_CASE("conditional_p rejects degenerate input") {
    Eigen::VectorXd d2(2);
    d2 << 0.1, std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(conditional_p(d2, 1.0), std::invalid_argument);
    d2 << 0.1, 0.2;
    CHECK_THROWS_AS(conditional_p(d2, 0.0), std::invalid_argument);
}

TEST_CASE("equidistant rows have perplexity N-1 for any sigma") {
    Eigen::VectorXd d2 = Eigen::VectorXd::Constant(7, 1.3);
    for (double sigma : {0.01, 1.0, 100.0})
        CHECK(perplexity_of(conditional_p(d2, sigma)) == doctest::Approx(7.0));
    SigmaResult cal = calibrate_sigma(d2, 7.0);
    CHECK(cal.converged);
}

TEST_CASE("perplexity is monotone in sigma") {
    Rng rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::VectorXd d2(12);
        for (int j = 0; j < 12; ++j) d2(j) = rng.uniform(0.1, 4.0);
        double previous = 0.0;
        for (double sigma : {0.1, 0.3, 1.0, 3.0, 10.0}) {
            const double perp = perplexity_of(conditional_p(d2, sigma));
            CHECK(perp >= previous - 1e-9);
            previous = perp;
        }
    }
}

TEST_CASE("calibrate_sigma hits the requested perplexity") {
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::VectorXd d2(40);
        for (int j = 0; j < 40; ++j) d2(j) = rng.uniform(0.05, 3.0);
        const double target = 5.0 + 25.0 * rng.uniform();
        SigmaResult cal = calibrate_sigma(d2, target);
        REQUIRE(cal.converged);
        const double achieved = perplexity_of(conditional_p(d2, cal.sigma));
        CHECK(std::abs(std::log2(achieved) - std::log2(target)) < 1e-5);
    }
}

TEST_CASE("unreachable perplexity returns a boundary sigma with a flag") {
    // All distances equal: perplexity is pinned at N-1 for every sigma.
    Eigen::VectorXd d2 = Eigen::VectorXd::Constant(9, 1.0);
    SigmaResult cal = calibrate_sigma(d2, 4.0);
    CHECK_FALSE(cal.converged);
    CHECK(cal.sigma > 0.0);
}

TEST_CASE("build_p is symmetric, zero-diagonal, and sums to 1") {
    Rng rng(7);
    Eigen::MatrixXd d2 = random_distances(rng, 15);
    SimilarityP sim = build_p(d2, 6.0);
    CHECK(sim.p.diagonal().cwiseAbs().maxCoeff() == 0.0);
    CHECK((sim.p - sim.p.transpose()).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(sim.p.sum() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(sim.p.minCoeff() >= 0.0);
    CHECK(sim.unconverged_rows.empty());
}

TEST_CASE("build_p with N=2 forces p12 = 1/2") {
    Eigen::MatrixXd d2(2, 2);
    d2 << 0.0, 1.7, 1.7, 0.0;
    SimilarityP sim = build_p(d2, 1.0);
    CHECK(sim.p(0, 1) == doctest::Approx(0.5));
    CHECK(sim.p(1, 0) == doctest::Approx(0.5));
}

TEST_CASE("duplicate points produce concentrated rows, not errors") {
    Rng rng(9);
    Eigen::MatrixXd points = random_embedding(rng, 6, 2);
    points.row(5) = points.row(0); // exact duplicate
    Eigen::MatrixXd d2(6, 6);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) d2(i, j) = (points.row(i) - points.row(j)).squaredNorm();
    SimilarityP sim = build_p(d2, 2.0);
    CHECK(sim.p.sum() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(sim.p(0, 5) > sim.p(0, 1));
}

TEST_CASE("build_q basics") {
    Eigen::MatrixXd y2(2, 2);
    y2 << 0.0, 0.0, 3.0, -1.0;
    SimilarityQ q2 = build_q(y2);
    CHECK(q2.q(0, 1) == doctest::Approx(0.5));

    // Equilateral triangle: all off-diagonal similarities equal 1/6.
    Eigen::MatrixXd y3(3, 2);
    y3 << 0.0, 0.0, 1.0, 0.0, 0.5, std::sqrt(3.0) / 2.0;
    SimilarityQ q3 = build_q(y3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (i != j) CHECK(q3.q(i, j) == doctest::Approx(1.0 / 6.0));

    // All coincident points: uniform 1/(N(N-1)).
    Eigen::MatrixXd y4 = Eigen::MatrixXd::Zero(4, 2);
    SimilarityQ q4 = build_q(y4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            if (i != j) CHECK(q4.q(i, j) == doctest::Approx(1.0 / 12.0));

    CHECK(q4.q.sum() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("kl_cost is zero at P = Q and non-negative elsewhere") {
    Rng rng(11);
    Eigen::MatrixXd y = random_embedding(rng, 8);
    SimilarityQ q = build_q(y);
    CHECK(kl_cost(q.q, q.q) == doctest::Approx(0.0));

    Eigen::MatrixXd d2 = random_distances(rng, 8);
    SimilarityP sim = build_p(d2, 3.0);
    CHECK(kl_cost(sim.p, q.q) >= 0.0);
}

TEST_CASE("kl_cost is invariant under rigid motions of the embedding") {
    Rng rng(13);
    Eigen::MatrixXd d2 = random_distances(rng, 10);
    SimilarityP sim = build_p(d2, 4.0);
    Eigen::MatrixXd y = random_embedding(rng, 10);

    const double base = kl_cost(sim.p, build_q(y).q);

    Eigen::MatrixXd translated = y.rowwise() + Eigen::RowVector2d(3.7, -1.2);
    CHECK(kl_cost(sim.p, build_q(translated).q) == doctest::Approx(base).epsilon(1e-12));

    const double angle = 0.83;
    Eigen::Matrix2d rot;
    rot << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    Eigen::MatrixXd rotated = y * rot.transpose();
    CHECK(kl_cost(sim.p, build_q(rotated).q) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("gradient matches central finite differences") {
    Rng rng(17);
    for (int trial = 0; trial < 5; ++trial) {
        Eigen::MatrixXd d2 = random_distances(rng, 8);
        SimilarityP sim = build_p(d2, 3.0);
        Eigen::MatrixXd y = random_embedding(rng, 8);
        Eigen::MatrixXd grad = grad_cost_wrt_y(sim.p, y);

        const double step = 1e-5;
        double max_rel = 0.0;
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 2; ++j) {
                Eigen::MatrixXd yp = y, ym = y;
                yp(i, j) += step;
                ym(i, j) -= step;
                const double fd =
                    (kl_cost(sim.p, build_q(yp).q) - kl_cost(sim.p, build_q(ym).q)) /
                    (2.0 * step);
                const double denom = std::max(std::abs(fd), 1e-8);
                max_rel = std::max(max_rel, std::abs(grad(i, j) - fd) / denom);
            }
        CHECK(max_rel < 1e-5);
    }
}

TEST_CASE("gradient vanishes when P = Q and ignores global translation") {
    Rng rng(19);
    Eigen::MatrixXd y = random_embedding(rng, 7);
    SimilarityQ q = build_q(y);
    Eigen::MatrixXd grad = grad_cost_wrt_y(q.q, y);
    CHECK(grad.cwiseAbs().maxCoeff() < 1e-12);

    Eigen::MatrixXd d2 = random_distances(rng, 7);
    SimilarityP sim = build_p(d2, 3.0);
    Eigen::MatrixXd g1 = grad_cost_wrt_y(sim.p, y);
    Eigen::MatrixXd shifted = y.rowwise() + Eigen::RowVector2d(11.0, -5.0);
    Eigen::MatrixXd g2 = grad_cost_wrt_y(sim.p, shifted);
    CHECK((g1 - g2).cwiseAbs().maxCoeff() < 1e-9);
}
