#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "a2bcd/params.hpp"
#include "a2bcd/rng.hpp"
#include "a2bcd/schedule.hpp"

using namespace a2bcd;

namespace {

// Random parameter sets with sigma <= L_i <= L; n is kept small unless the
// caller needs the theory window open.
ProblemParams random_params(std::mt19937_64& rng, std::size_t n_min = 2, std::size_t n_max = 30) {
    const std::size_t n = n_min + uniform_index(rng, n_max - n_min + 1);
    const double sigma = std::exp(3.0 * (uniform01(rng) - 0.5));
    std::vector<double> L(n);
    double L_max = 0;
    for (double& v : L) {
        v = sigma * std::exp(4.0 * uniform01(rng));
        L_max = std::max(L_max, v);
    }
    const double L_global = L_max * (1.0 + 2.0 * uniform01(rng));
    return build_params(sigma, std::move(L), L_global);
}

}  // namespace

TEST_CASE("asynchronicity parameter") {
    SECTION("tau = 0 gives psi = 0") {
        const auto p = build_params(1.0, {2, 3}, 3.0);
        REQUIRE(asynchronicity_parameter(p, 0) == 0.0);
    }
    SECTION("direct formula evaluation") {
        // sigma=1, four equal blocks L_i = L = 4: S = 8, kappa = 4, Lmin = 4
        const auto p = build_params(1.0, {4, 4, 4, 4}, 4.0);
        const double psi = asynchronicity_parameter(p, 1);
        // 9 * 8^{-1/2} * 4^{-1/2} * 4^{3/4} * 4^{1/4} = 9/sqrt(2)
        REQUIRE(psi == Catch::Approx(9.0 / std::sqrt(2.0)).epsilon(1e-12));
    }
    SECTION("threshold identity over random parameter sets") {
        auto rng = make_rng(21);
        for (int trial = 0; trial < 100; ++trial) {
            const auto p = random_params(rng);
            const double tau_max = theory_max_tau(p);
            // psi(tau)/ (3/7) == tau / tau_max, so the window is exactly tau <= tau_max
            for (const std::size_t tau : {1, 3, 17}) {
                const double lhs = asynchronicity_parameter(p, tau) / kTheoryPsiWindow;
                const double rhs = static_cast<double>(tau) / tau_max;
                REQUIRE(lhs == Catch::Approx(rhs).epsilon(1e-9));
            }
        }
    }
    SECTION("psi is strictly increasing in tau") {
        auto rng = make_rng(22);
        const auto p = random_params(rng);
        double prev = 0;
        for (std::size_t tau = 1; tau <= 10; ++tau) {
            const double psi = asynchronicity_parameter(p, tau);
            REQUIRE(psi > prev);
            prev = psi;
        }
    }
}

TEST_CASE("main coefficients") {
    SECTION("synchronous reduction: psi = 0, sigma = 1, S = 8") {
        const auto p = build_params(1.0, {4, 4, 4, 4}, 4.0);
        const auto c = main_coefficients(p, 0.0);
        REQUIRE(c.alpha == Catch::Approx(1.0 / 9.0).epsilon(1e-14));
        REQUIRE(c.beta == Catch::Approx(7.0 / 8.0).epsilon(1e-14));
        REQUIRE(c.h == 1.0);
    }
    SECTION("psi = 0.25 evaluation") {
        const auto p = build_params(1.0, {4, 4, 4, 4}, 4.0);
        const auto c = main_coefficients(p, 0.25);
        REQUIRE(c.alpha == Catch::Approx(1.0 / 11.0).epsilon(1e-14));
        REQUIRE(c.beta == Catch::Approx(0.90625).epsilon(1e-14));
        REQUIRE(c.h == Catch::Approx(0.9375).epsilon(1e-14));
    }
    SECTION("ranges for random parameters") {
        auto rng = make_rng(31);
        for (int trial = 0; trial < 300; ++trial) {
            const auto p = random_params(rng);
            const double psi = 0.45 * uniform01(rng);
            const auto c = main_coefficients(p, psi);
            REQUIRE(c.alpha > 0);
            REQUIRE(c.alpha < 1);
            REQUIRE(c.beta > 0);
            REQUIRE(c.beta < 1);
            REQUIRE(c.h > 0);
            REQUIRE(c.h <= 1);
            // beta increasing and h decreasing in psi
            const auto c2 = main_coefficients(p, psi + 0.01);
            REQUIRE(c2.beta > c.beta);
            REQUIRE(c2.h < c.h);
        }
    }
    SECTION("window floor on h: psi <= 3/7 implies h >= 1 - 3/14") {
        auto rng = make_rng(32);
        for (int trial = 0; trial < 100; ++trial) {
            const auto p = random_params(rng);
            const auto c = main_coefficients(p, kTheoryPsiWindow);
            // sigma <= Lmin makes sigma^{1/2} Lmin^{-1/2} <= 1
            REQUIRE(c.h >= 1.0 - 3.0 / 14.0 - 1e-12);
        }
    }
}

TEST_CASE("extension coefficients") {
    const auto p = build_params(1.0, std::vector<double>(100, 25.0), 25.0);
    SECTION("tau = 0 reduces to the main variant at psi = 0") {
        const auto ext = make_extension_schedule(p, 0);
        const auto main = make_schedule(p, 0);
        REQUIRE(ext.alpha == Catch::Approx(main.alpha).epsilon(1e-15));
        REQUIRE(ext.beta == Catch::Approx(main.beta).epsilon(1e-15));
        REQUIRE(ext.h == 1.0);
    }
    SECTION("psi formula: n=100, kappa=25, tau=5") {
        REQUIRE(extension_psi(p, 5) == Catch::Approx(1.5).epsilon(1e-14));
    }
    SECTION("h < 1 whenever tau >= 1") {
        for (const std::size_t tau : {1, 2, 10}) {
            const auto s = make_extension_schedule(p, tau);
            REQUIRE(s.h < 1.0);
        }
    }
    SECTION("unequal block constants are rejected") {
        const auto bad = build_params(1.0, {25.0, 24.0}, 25.0);
        REQUIRE_THROWS_AS(make_extension_schedule(bad, 1), std::invalid_argument);
    }
}

TEST_CASE("Lyapunov constant") {
    SECTION("hand evaluation at psi = 0") {
        const auto p = build_params(1.0, {4, 4, 4, 4}, 4.0);
        const auto c = main_coefficients(p, 0.0);
        REQUIRE(lyapunov_constant(p, c.alpha, c.beta) == Catch::Approx(2.0).epsilon(1e-13));
    }
    SECTION("closed form c = 2 sigma^{-1} ((1+psi) + psi^2 sigma^{1/2}/S)") {
        auto rng = make_rng(41);
        for (int trial = 0; trial < 1000; ++trial) {
            const auto p = random_params(rng);
            const double psi = 2.0 * uniform01(rng);
            const auto co = main_coefficients(p, psi);
            const double c = lyapunov_constant(p, co.alpha, co.beta);
            const double closed =
                2.0 / p.sigma * ((1.0 + psi) + psi * psi * std::sqrt(p.sigma) / p.S);
            REQUIRE(c == Catch::Approx(closed).epsilon(1e-10));
        }
    }
    SECTION("c <= 4/sigma whenever psi <= 1/2") {
        auto rng = make_rng(42);
        for (int trial = 0; trial < 1000; ++trial) {
            const auto p = random_params(rng);
            const double psi = 0.5 * uniform01(rng);
            const auto co = main_coefficients(p, psi);
            REQUIRE(lyapunov_constant(p, co.alpha, co.beta) <= 4.0 / p.sigma * (1 + 1e-12));
        }
    }
}

TEST_CASE("asynchronicity-error weights") {
    SECTION("recurrence c_{i+1} = r c_i - s with c_{tau+1} = 0") {
        auto rng = make_rng(51);
        for (int trial = 0; trial < 1000; ++trial) {
            const auto p = random_params(rng);
            const std::size_t tau = 1 + uniform_index(rng, 20);
            const double psi = 0.01 + 2.0 * uniform01(rng);
            const auto w = aux_weights(p, psi, tau);
            const auto c = async_weights(p, psi, tau);
            REQUIRE(c.size() == tau);
            for (std::size_t i = 0; i + 1 < tau; ++i)
                REQUIRE(c[i + 1] - w.r * c[i] == Catch::Approx(-w.s).epsilon(1e-9));
            REQUIRE(0.0 - w.r * c[tau - 1] == Catch::Approx(-w.s).epsilon(1e-9));
        }
    }
    SECTION("tau = 1 closed form") {
        const auto p = build_params(1.0, {4, 4, 4, 4}, 4.0);
        const double psi = 0.3;
        const auto c = async_weights(p, psi, 1);
        const double expected = 6.0 / p.S * std::sqrt(p.L) * std::pow(p.kappa, 1.5) / psi /
                                (1.0 - std::sqrt(p.sigma) / p.S);
        REQUIRE(c[0] == Catch::Approx(expected).epsilon(1e-12));
    }
    SECTION("weights positive and strictly decreasing") {
        auto rng = make_rng(52);
        for (int trial = 0; trial < 200; ++trial) {
            const auto p = random_params(rng);
            const std::size_t tau = 2 + uniform_index(rng, 15);
            const auto c = async_weights(p, 0.5, tau);
            for (std::size_t i = 0; i < tau; ++i) {
                REQUIRE(c[i] > 0);
                if (i + 1 < tau) REQUIRE(c[i] > c[i + 1]);
            }
        }
    }
    SECTION("c_1 bound inside the theory window") {
        // need psi(tau) <= 3/7, which takes n ~ (21 tau)^2 sqrt(kappa) blocks
        auto rng = make_rng(53);
        for (int trial = 0; trial < 60; ++trial) {
            const double kappa = 1.0 + 30.0 * uniform01(rng);
            const std::size_t tau = 1 + uniform_index(rng, 3);
            const double needed = 441.0 * static_cast<double>(tau * tau) * std::sqrt(kappa);
            const auto n = static_cast<std::size_t>(needed * (1.05 + 2.0 * uniform01(rng)));
            const auto p = build_params(1.0, std::vector<double>(n, kappa), kappa);
            const double psi = asynchronicity_parameter(p, tau);
            REQUIRE(psi <= kTheoryPsiWindow);
            const auto c = async_weights(p, psi, tau);
            const double bound = 7.0 / p.S * std::sqrt(p.L) * std::pow(p.kappa, 1.5) / psi *
                                 static_cast<double>(tau * tau);
            REQUIRE(c[0] <= bound * (1 + 1e-12));
        }
    }
}

TEST_CASE("schedule construction modes") {
    const auto p = build_params(1.0, {4, 4, 4, 4}, 4.0);
    SECTION("tau = 0 gives the synchronous schedule") {
        const auto s = make_schedule(p, 0);
        REQUIRE(s.psi == 0.0);
        REQUIRE(s.h == 1.0);
        REQUIRE(s.c_weights.empty());
        REQUIRE(s.theory_valid);
    }
    SECTION("outside the window: default flags, strict throws") {
        const auto s = make_schedule(p, 1);  // psi ~ 6.36 here
        REQUIRE_FALSE(s.theory_valid);
        REQUIRE_THROWS_AS(make_schedule(p, 1, /*strict=*/true), std::invalid_argument);
    }
    SECTION("pinned psi") {
        const auto s = make_schedule_psi(p, 0.25, 3);
        REQUIRE(s.psi == 0.25);
        REQUIRE(s.tau == 3);
        REQUIRE(s.c_weights.size() == 3);
        REQUIRE_THROWS_AS(make_schedule_psi(p, 0.25, 0), std::invalid_argument);
        REQUIRE_THROWS_AS(make_schedule_psi(p, 0.0, 2), std::invalid_argument);
    }
}

TEST_CASE("equal-L threshold matches n^{1/2} kappa^{-1/4} / 21") {
    auto rng = make_rng(61);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + uniform_index(rng, 1000);
        const double kappa = std::exp(6.0 * uniform01(rng));
        const auto p = build_params(1.0, std::vector<double>(n, kappa), kappa);
        const double ratio =
            theory_max_tau(p) / (std::sqrt(static_cast<double>(n)) * std::pow(kappa, -0.25));
        REQUIRE(ratio == Catch::Approx(1.0 / 21.0).epsilon(1e-9));
    }
}
