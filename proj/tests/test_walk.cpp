#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "mcrt/walk.hpp"

using namespace mcrt;

namespace {

std::vector<double> increments(const std::vector<double>& cum) {
    std::vector<double> out(cum.size() - 1);
    for (std::size_t i = 0; i + 1 < cum.size(); ++i) out[i] = cum[i + 1] - cum[i];
    return out;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= a.size();
    mb /= b.size();
    double cab = 0, caa = 0, cbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cab += (a[i] - ma) * (b[i] - mb);
        caa += (a[i] - ma) * (a[i] - ma);
        cbb += (b[i] - mb) * (b[i] - mb);
    }
    return cab / std::sqrt(caa * cbb);
}

} // namespace

TEST_CASE("correlation_of evaluates -cos(pi gamma^2 / 4)") {
    CHECK(std::abs(correlation_of(std::sqrt(2.0))) < 1e-12);
    CHECK(correlation_of(std::sqrt(8.0 / 3.0)) == doctest::Approx(0.5));
    CHECK(correlation_of(1.0) == doctest::Approx(-std::sqrt(2.0) / 2.0));
}

TEST_CASE("correlation_of rejects gamma outside (0, 2)") {
    CHECK_THROWS_AS(correlation_of(0.0), std::invalid_argument);
    CHECK_THROWS_AS(correlation_of(2.0), std::invalid_argument);
    CHECK_THROWS_AS(correlation_of(-1.0), std::invalid_argument);
    CHECK_THROWS_AS(correlation_of(2.5), std::invalid_argument);
    CHECK_NOTHROW(correlation_of(1.99));
    CHECK_NOTHROW(correlation_of(0.01));
}

TEST_CASE("sample layout: 2 n k + 1 samples, zero at the center") {
    WalkParams p{std::sqrt(2.0), 3, 1, 17};
    CHECK(p.sample_count() == 7);
    const CorrelatedWalk w = generate_walk(p);
    CHECK(w.l.size() == 7);
    CHECK(w.r.size() == 7);
    CHECK(w.center_index() == 3);
    CHECK(w.l[3] == 0.0);
    CHECK(w.r[3] == 0.0);
    CHECK(w.time_of(3) == 0.0);
    CHECK(w.time_of(6) == 3.0);
    CHECK(w.time_of(0) == -3.0);

    WalkParams pm{std::sqrt(2.0), 3, 4, 17};
    CHECK(pm.sample_count() == 25);
    const CorrelatedWalk wm = generate_walk(pm);
    CHECK(wm.l.size() == 25);
    CHECK(wm.center_index() == 12);
    CHECK(wm.l[12] == 0.0);
    CHECK(wm.time_of(16) == 1.0);
}

TEST_CASE("walk generation is deterministic in the seed") {
    WalkParams p{1.0, 50, 2, 909};
    const CorrelatedWalk a = generate_walk(p);
    const CorrelatedWalk b = generate_walk(p);
    CHECK(a.l == b.l);
    CHECK(a.r == b.r);

    p.seed = 910;
    const CorrelatedWalk c = generate_walk(p);
    CHECK(a.l != c.l);
}

TEST_CASE("parameter validation rejects degenerate fields") {
    WalkParams p{1.5, 0, 1, 3};
    CHECK_THROWS_AS(generate_walk(p), std::invalid_argument);
    p.window_n = 5;
    p.mesh_k = 0;
    CHECK_THROWS_AS(generate_walk(p), std::invalid_argument);
    p.mesh_k = 1;
    p.gamma = 2.0;
    CHECK_THROWS_AS(generate_walk(p), std::invalid_argument);
}

TEST_CASE("increment statistics match gamma and mesh scaling") {
    auto stats = [](double gamma, std::uint32_t mesh_k) {
        WalkParams p{gamma, 100000, mesh_k, 4242};
        const CorrelatedWalk w = generate_walk(p);
        const auto dl = increments(w.l);
        const auto dr = increments(w.r);
        double vl = 0;
        for (double x : dl) vl += x * x;
        vl /= dl.size();
        return std::pair{pearson(dl, dr), vl};
    };

    // gamma = sqrt(2): independent coordinates, unit-variance steps
    auto [rho0, var0] = stats(std::sqrt(2.0), 1);
    CHECK(std::abs(rho0 - 0.0) < 0.01);
    CHECK(var0 == doctest::Approx(1.0).epsilon(0.02));

    // gamma = 1: rho = -sqrt(2)/2
    auto [rho1, var1] = stats(1.0, 1);
    CHECK(std::abs(rho1 + std::sqrt(2.0) / 2.0) < 0.01);
    CHECK(var1 == doctest::Approx(1.0).epsilon(0.02));

    // mesh_k = 4: per-sample variance shrinks by the mesh factor, so the
    // variance accumulated over one unit of time stays 1
    auto [rho4, var4] = stats(std::sqrt(8.0 / 3.0), 4);
    CHECK(std::abs(rho4 - 0.5) < 0.01);
    CHECK(var4 == doctest::Approx(0.25).epsilon(0.02));
}

TEST_CASE("negative half is a genuine walk: increments stay bounded") {
    WalkParams p{std::sqrt(2.0), 5000, 1, 31};
    const CorrelatedWalk w = generate_walk(p);
    const auto dl = increments(w.l);
    for (double x : dl) REQUIRE(std::abs(x) < 8.0);
}
