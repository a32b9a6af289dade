#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "qcrel/rng.hpp"
#include "qcrel/special.hpp"

using qcrel::rng::Xoshiro256pp;

TEST_CASE("streams are deterministic and seed-sensitive") {
    Xoshiro256pp a(123), b(123), c(124);
    bool all_equal = true, any_diff = false;
    for (int i = 0; i < 1000; ++i) {
        const auto va = a.next();
        all_equal = all_equal && va == b.next();
        any_diff = any_diff || va != c.next();
    }
    CHECK(all_equal);
    CHECK(any_diff);
}

TEST_CASE("mix_seed separates nearby streams") {
    const auto s0 = qcrel::rng::mix_seed(42, 0);
    const auto s1 = qcrel::rng::mix_seed(42, 1);
    const auto t0 = qcrel::rng::mix_seed(43, 0);
    CHECK(s0 != s1);
    CHECK(s0 != t0);
    CHECK(s0 == qcrel::rng::mix_seed(42, 0));
}

TEST_CASE("uniform01 stays inside the open interval with the right moments") {
    Xoshiro256pp gen(7);
    const int n = 200000;
    double s = 0.0, ss = 0.0, lo = 1.0, hi = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = gen.uniform01();
        s += u;
        ss += u * u;
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    CHECK(lo > 0.0);
    CHECK(hi < 1.0);
    CHECK(s / n == doctest::Approx(0.5).epsilon(0.01));
    CHECK(ss / n - (s / n) * (s / n) ==
          doctest::Approx(1.0 / 12.0).epsilon(0.02));
}

TEST_CASE("normal() has standard moments") {
    Xoshiro256pp gen(99);
    const int n = 400000;
    double s = 0.0, s2 = 0.0, s3 = 0.0, s4 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = gen.normal();
        s += z;
        s2 += z * z;
        s3 += z * z * z;
        s4 += z * z * z * z;
    }
    CHECK(s / n == doctest::Approx(0.0).epsilon(0.01));
    CHECK(std::abs(s / n) < 0.01);
    CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.01));
    CHECK(std::abs(s3 / n) < 0.03);
    CHECK(s4 / n == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("gamma() matches Gamma(shape, rate) moments") {
    for (const auto [shape, rate] : {std::pair{3.0, 0.0957},
                                     std::pair{0.5, 2.0},
                                     std::pair{25.0, 4.5}}) {
        Xoshiro256pp gen(2024);
        const int n = 300000;
        double s = 0.0, ss = 0.0;
        for (int i = 0; i < n; ++i) {
            const double g = gen.gamma(shape, rate);
            s += g;
            ss += g * g;
        }
        const double mean = s / n;
        const double var = ss / n - mean * mean;
        CAPTURE(shape);
        CHECK(mean == doctest::Approx(shape / rate).epsilon(0.01));
        CHECK(var == doctest::Approx(shape / (rate * rate)).epsilon(0.03));
    }
}

TEST_CASE("norm_icdf inverts norm_cdf across the unit interval") {
    for (double p = 1e-12; p < 1.0; p = p < 0.01 ? p * 10 : p + 0.0317) {
        const double x = qcrel::special::norm_icdf(p);
        CHECK(qcrel::special::norm_cdf(x) == doctest::Approx(p).epsilon(1e-9));
    }
    CHECK(qcrel::special::norm_icdf(0.5) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_THROWS_AS(qcrel::special::norm_icdf(0.0), std::domain_error);
    CHECK_THROWS_AS(qcrel::special::norm_icdf(1.0), std::domain_error);
}
