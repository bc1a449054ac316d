#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "balmat/spectral.hpp"

using namespace balmat;

namespace {

// Independent route to the second eigenvalue: power iteration on the
// symmetrized matrix after deflating the all-ones eigenvector.
double lambda_power_iteration(const MatD& m) {
    const int n = m.size();
    MatD sym(n);
    bool symmetric = true;
    for (int r = 0; r < n && symmetric; ++r)
        for (int c = r + 1; c < n; ++c)
            if (std::fabs(m(r, c) - m(c, r)) > 1e-12) symmetric = false;
    if (symmetric) {
        sym = m;
    } else {
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
                double acc = 0;
                for (int k = 0; k < n; ++k) acc += m(r, k) * m(c, k);
                sym(r, c) = acc;
            }
    }
    // iterate on sym^2 so negative eigenvalues cannot cancel, then sqrt
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = std::sin(1.0 + i);
    double est = 0;
    for (int it = 0; it < 4000; ++it) {
        double mean = 0;
        for (double x : v) mean += x;
        mean /= n;
        for (double& x : v) x -= mean;  // deflate the top eigenvector
        std::vector<double> w(static_cast<std::size_t>(n), 0.0), w2(static_cast<std::size_t>(n), 0.0);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) w[static_cast<std::size_t>(r)] += sym(r, c) * v[static_cast<std::size_t>(c)];
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) w2[static_cast<std::size_t>(r)] += sym(r, c) * w[static_cast<std::size_t>(c)];
        double norm_v = 0, norm_w2 = 0;
        for (int i = 0; i < n; ++i) {
            norm_v += v[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(i)];
            norm_w2 += w2[static_cast<std::size_t>(i)] * w2[static_cast<std::size_t>(i)];
        }
        if (norm_w2 == 0) return 0.0;
        est = std::sqrt(std::sqrt(norm_w2 / norm_v));
        double scale = 1.0 / std::sqrt(norm_w2);
        for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = w2[static_cast<std::size_t>(i)] * scale;
    }
    return est;
}

}  // namespace

TEST_CASE("lambda of small matrices") {
    SECTION("a matched pair mixes completely") {
        CHECK(lambda(matching_matrix<double>({{0, 1}}, 2)) < 1e-12);
    }
    SECTION("the identity does not mix at all") {
        CHECK_THAT(lambda(MatD::identity(4)), Catch::Matchers::WithinAbs(1.0, 1e-12));
    }
    SECTION("rejects non-stochastic input") {
        MatD bad(2);
        bad(0, 0) = 0.9;
        bad(0, 1) = 0.2;
        bad(1, 0) = 0.1;
        bad(1, 1) = 0.8;
        CHECK_THROWS_AS(lambda(bad), Error);
    }
}

TEST_CASE("golden period-product eigenvalues, cross-checked by power iteration") {
    SECTION("hypercube period mixes exactly") {
        Graph g = hypercube(3);
        CircuitSchedule s(g, edge_color(g));
        MatD period = window_product<double>(s, 1, s.width());
        CHECK(lambda(period) < 1e-10);  // one period is the uniform matrix
        for (int r = 0; r < 8; ++r)
            for (int c = 0; c < 8; ++c)
                CHECK_THAT(period(r, c), Catch::Matchers::WithinAbs(0.125, 1e-15));
    }
    SECTION("six-cycle period") {
        Graph g = cycle(6);
        CircuitSchedule s(g, edge_color(g));
        MatD period = window_product<double>(s, 1, s.width());
        double lam = lambda(period);
        CHECK_THAT(lam, Catch::Matchers::WithinAbs(0.25, 1e-10));  // frozen value
        CHECK_THAT(lambda_power_iteration(period), Catch::Matchers::WithinAbs(lam, 1e-6));
    }
    SECTION("diffusion matrix of the complete graph on four nodes") {
        MatD p = diffusion_matrix(complete(4));
        double lam = lambda(p);
        CHECK_THAT(lam, Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-12));
        CHECK_THAT(lambda_power_iteration(p), Catch::Matchers::WithinAbs(lam, 1e-6));
    }
}

TEST_CASE("diffusion matrix entries") {
    SECTION("triangle") {
        MatD p = diffusion_matrix(cycle(3));
        CHECK(p(0, 1) == 0.25);
        CHECK(p(0, 0) == 0.5);
        CHECK(is_doubly_stochastic(p));
    }
    SECTION("two nodes") {
        MatD p = diffusion_matrix(complete(2));
        CHECK(p(0, 0) == 0.5);
        CHECK(p(0, 1) == 0.5);
    }
    SECTION("star") {
        Graph star(4, {{0, 1}, {0, 2}, {0, 3}});
        MatD p = diffusion_matrix(star);
        CHECK(p(0, 0) == 0.5);        // center: 1 - 3/6
        CHECK(p(1, 1) == 1.0 - 1.0 / 6.0);  // leaf
        CHECK(p(0, 1) == 1.0 / 6.0);
        CHECK(is_doubly_stochastic(p));
    }
}

TEST_CASE("spectral round bounds") {
    SECTION("circuit arithmetic") {
        CHECK(tau_spectral(ModelKind::circuit, 4, 4, 2, 0.5, 0, 1.0) == 12);
    }
    SECTION("multiplier must be positive") {
        CHECK_THROWS_AS(tau_spectral(ModelKind::circuit, 4, 4, 2, 0.5, 0, 0.0), Error);
        CHECK_THROWS_AS(tau_spectral(ModelKind::circuit, 4, 4, 2, 0.5, 0, -1.0), Error);
    }
    SECTION("the discrepancy bound must be at least one") {
        CHECK_THROWS_AS(tau_spectral(ModelKind::circuit, 0.5, 4, 2, 0.5, 0, 1.0), Error);
    }
    SECTION("degenerate schedules are rejected") {
        CHECK_THROWS_AS(tau_spectral(ModelKind::circuit, 4, 4, 2, 1.0, 0, 1.0), Error);
        CHECK_THROWS_AS(tau_spectral(ModelKind::random_matching, 4, 4, 2, 0.5, 0.0, 1.0),
                        Error);
    }
    SECTION("single-edge model uses the edge-count probability") {
        Graph g = complete(4);
        double lam = lambda(diffusion_matrix(g));  // 1/3
        long tau = tau_spectral(ModelKind::async_edge, 4, 4, 3, lam, 1.0 / 6.0, 1.0);
        // p_min * delta = 1/2, so the bracket is ln(16) / (1/2 * 2/3)
        CHECK(tau == static_cast<long>(std::ceil(std::log(16.0) * 3.0)));
    }
}

TEST_CASE("spectral report carries the pinned fields") {
    Graph g = complete(4);
    SpectralReport rep = spectral_report(g, ModelKind::async_edge, 16.0, 8.0);
    nlohmann::json j = rep.to_json();
    CHECK(j.contains("lambda"));
    CHECK(j.contains("diffusion_p"));
    CHECK(j.contains("p_min"));
    CHECK(j.contains("tau_spectral"));
    CHECK(j.contains("constant_multiplier"));
    CHECK(j["p_min"].get<double>() == 1.0 / 6.0);
    CHECK(j["constant_multiplier"].get<double>() == 8.0);
    CHECK(j["diffusion_p"].is_array());

    CircuitSchedule circuit(g, edge_color(g));
    SpectralReport rc = spectral_report(g, ModelKind::circuit, 16.0, 8.0, &circuit);
    CHECK(rc.to_json()["diffusion_p"].is_null());
    CHECK(rc.tau_spectral > 0);
}
