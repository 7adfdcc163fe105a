#include <doctest.h>

#include <array>
#include <cmath>
#include <random>

#include "gridlock/errors.hpp"
#include "gridlock/small_signal.hpp"

using namespace gridlock;

namespace {

constexpr double kK = 120.0 * kPi;

// Independent route for step responses: RK4 on the controllable canonical
// form, small fixed step. Used only to cross-check the partial-fraction
// closed forms.
double rk4_step_response(const RationalTf& tf, double t_query) {
    const int order = tf.order();
    REQUIRE((order == 1 || order == 2));

    double max_pole = 0.0;
    for (const Complex& p : characteristic(tf).poles) {
        max_pole = std::max(max_pole, std::abs(p));
    }
    const double dt = 0.005 / max_pole;

    if (order == 1) {
        const double a0 = tf.den[0] / tf.den[1];
        const double b1 = tf.num.size() > 1 ? tf.num[1] / tf.den[1] : 0.0;
        const double b0 = tf.num[0] / tf.den[1];
        // y = (b0 - a0*b1) x + b1 u, x' = -a0 x + u
        double x = 0.0;
        double t = 0.0;
        auto f = [&](double xv) { return -a0 * xv + 1.0; };
        while (t + dt <= t_query) {
            const double k1 = f(x);
            const double k2 = f(x + 0.5 * dt * k1);
            const double k3 = f(x + 0.5 * dt * k2);
            const double k4 = f(x + dt * k3);
            x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            t += dt;
        }
        const double rem = t_query - t;
        if (rem > 0.0) {
            const double k1 = f(x);
            const double k2 = f(x + 0.5 * rem * k1);
            const double k3 = f(x + 0.5 * rem * k2);
            const double k4 = f(x + rem * k3);
            x += rem / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        return (b0 - a0 * b1) * x + b1;
    }

    const double a2 = tf.den[2];
    const double a0 = tf.den[0] / a2;
    const double a1 = tf.den[1] / a2;
    const double b0 = tf.num[0] / a2;
    const double b1 = tf.num.size() > 1 ? tf.num[1] / a2 : 0.0;
    const double b2 = tf.num.size() > 2 ? tf.num[2] / a2 : 0.0;

    std::array<double, 2> x{0.0, 0.0};
    auto deriv = [&](const std::array<double, 2>& s) {
        return std::array<double, 2>{s[1], -a0 * s[0] - a1 * s[1] + 1.0};
    };
    auto advance = [&](std::array<double, 2>& s, double h) {
        const auto k1 = deriv(s);
        const auto k2 = deriv({s[0] + 0.5 * h * k1[0], s[1] + 0.5 * h * k1[1]});
        const auto k3 = deriv({s[0] + 0.5 * h * k2[0], s[1] + 0.5 * h * k2[1]});
        const auto k4 = deriv({s[0] + h * k3[0], s[1] + h * k3[1]});
        s[0] += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
        s[1] += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
    };
    double t = 0.0;
    while (t + dt <= t_query) {
        advance(x, dt);
        t += dt;
    }
    if (t_query - t > 0.0) {
        advance(x, t_query - t);
    }
    return (b0 - a0 * b2) * x[0] + (b1 - a1 * b2) * x[1] + b2;
}

} // namespace

TEST_CASE("build_tf produces the published coefficient sets") {
    const double k = kK;
    const double d = 0.5 * kK;

    const RationalTf conv = build_tf(TfKind::ConvOmega, k, d);
    CHECK(conv.num == std::vector<double>{k * d});
    CHECK(conv.den == std::vector<double>{k * d, k, 1.0});

    const RationalTf conv_theta = build_tf(TfKind::ConvTheta, k, d);
    CHECK(conv_theta.num == std::vector<double>{k * d, k});

    const RationalTf srf = build_tf(TfKind::SrfOmega, k, d);
    CHECK(srf.num == std::vector<double>{d});
    CHECK(srf.den == std::vector<double>{d, 1.0});

    const RationalTf srf_b = build_tf(TfKind::SrfOmegaB, k, d);
    CHECK(srf_b.den == std::vector<double>{k * d, k + d, 1.0});

    const RationalTf theta_e = build_tf(TfKind::SrfThetaE, k, d);
    CHECK(theta_e.num == std::vector<double>{0.0, k});
    CHECK(theta_e.den == std::vector<double>{k * d, k + d, 1.0});

    const RationalTf theta_est = build_tf(TfKind::SrfThetaEst, k, d);
    CHECK(theta_est.num == std::vector<double>{k * d, k + d});

    CHECK_THROWS_AS(build_tf(TfKind::ConvOmega, 0.0, d), ConfigError);
    CHECK_THROWS_AS(build_tf(TfKind::ConvOmega, k, -1.0), ConfigError);
}

TEST_CASE("DC gain is 1 for every kind except the vanishing theta_e") {
    for (TfKind kind : {TfKind::ConvOmega, TfKind::ConvTheta, TfKind::SrfOmega,
                        TfKind::SrfOmegaB, TfKind::SrfThetaHat, TfKind::SrfThetaEst}) {
        CHECK(build_tf(kind, kK, 0.7 * kK).dc_gain() == doctest::Approx(1.0));
    }
    CHECK(build_tf(TfKind::SrfThetaE, kK, 0.7 * kK).dc_gain() == doctest::Approx(0.0));
}

TEST_CASE("characteristic extracts poles and damping") {
    SUBCASE("optimal conventional design") {
        const auto ch = characteristic(build_tf(TfKind::ConvOmega, kK, 0.5 * kK));
        CHECK(ch.zeta.value() == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
        CHECK(ch.omega_n.value() == doctest::Approx(kK / std::sqrt(2.0)).epsilon(1e-12));
    }
    SUBCASE("critically damped boundary d = 0.25k") {
        const auto ch = characteristic(build_tf(TfKind::ConvOmega, kK, 0.25 * kK));
        CHECK(ch.zeta.value() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(ch.poles[0].real() == doctest::Approx(-kK / 2.0).epsilon(1e-9));
        CHECK(ch.poles[1].real() == doctest::Approx(-kK / 2.0).epsilon(1e-9));
        CHECK(ch.poles[0].imag() == 0.0);
    }
    SUBCASE("srf omega_b always has the two real roots -k and -d") {
        const double d = 0.37 * kK;
        const auto ch = characteristic(build_tf(TfKind::SrfOmegaB, kK, d));
        std::vector<double> reals{ch.poles[0].real(), ch.poles[1].real()};
        std::sort(reals.begin(), reals.end());
        CHECK(reals[0] == doctest::Approx(-kK).epsilon(1e-9));
        CHECK(reals[1] == doctest::Approx(-d).epsilon(1e-9));
        CHECK(ch.zeta.value() >= 1.0 - 1e-12);
    }
    SUBCASE("repeated pole at the k = d design point") {
        const auto ch = characteristic(build_tf(TfKind::SrfOmegaB, kK, kK));
        CHECK(ch.poles[0] == ch.poles[1]);
        CHECK(ch.poles[0].real() == doctest::Approx(-kK).epsilon(1e-12));
    }
    SUBCASE("perfect square (s+1)^2") {
        const auto ch = characteristic(RationalTf{{1.0}, {1.0, 2.0, 1.0}});
        CHECK(ch.poles[0].real() == doctest::Approx(-1.0));
        CHECK(ch.zeta.value() == doctest::Approx(1.0));
        CHECK(ch.omega_n.value() == doctest::Approx(1.0));
    }
    SUBCASE("order above 2 is rejected") {
        CHECK_THROWS_AS(characteristic(RationalTf{{1.0}, {1.0, 1.0, 1.0, 1.0}}), ConfigError);
    }
}

TEST_CASE("poles satisfy the denominator polynomial") {
    std::mt19937 rng(777u);
    std::uniform_real_distribution<double> k_dist(30.0, 2000.0);
    std::uniform_real_distribution<double> r_dist(0.05, 4.0);
    for (int i = 0; i < 100; ++i) {
        const double k = k_dist(rng);
        const double d = r_dist(rng) * k;
        for (TfKind kind : {TfKind::ConvOmega, TfKind::SrfOmegaB, TfKind::SrfOmega}) {
            const RationalTf tf = build_tf(kind, k, d);
            const auto ch = characteristic(tf);
            for (const Complex& p : ch.poles) {
                Complex acc{0.0, 0.0};
                for (auto it = tf.den.rbegin(); it != tf.den.rend(); ++it) {
                    acc = acc * p + *it;
                }
                // Residual relative to the largest term magnitude.
                const double scale = std::max({std::abs(tf.den[0]),
                                               std::abs(tf.den[1]) * std::abs(p),
                                               std::norm(p)});
                CHECK(std::abs(acc) / scale < 1e-9);
            }
        }
    }
}

TEST_CASE("design guideline regimes match Table-style thresholds") {
    std::mt19937 rng(4242u);
    std::uniform_real_distribution<double> k_dist(40.0 * kPi, 400.0 * kPi);
    std::uniform_real_distribution<double> r_dist(0.05, 4.0);
    for (int i = 0; i < 100; ++i) {
        const double k = k_dist(rng);
        const double d = r_dist(rng) * k;
        const double zeta = characteristic(build_tf(TfKind::ConvOmega, k, d)).zeta.value();
        CHECK((zeta >= 1.0 - 1e-9) == (d <= 0.25 * k * (1.0 + 1e-9)));
        CHECK((zeta >= 1.0 / std::sqrt(2.0) - 1e-9) == (d <= 0.5 * k * (1.0 + 1e-9)));
    }
}

TEST_CASE("open-loop gain with the selected filter collapses to d/s") {
    const double k = kK;
    const double d = 0.8 * kK;

    const RationalTf with = open_loop_gain(k, d, true);
    CHECK(with.num == std::vector<double>{d});
    CHECK(with.den == std::vector<double>{0.0, 1.0});

    const RationalTf without = open_loop_gain(k, d, false);
    const double mag_at_k = std::abs(without.eval(Complex{0.0, k}));
    CHECK(mag_at_k == doctest::Approx((d / k) / std::sqrt(2.0)).epsilon(1e-12));

    // Unity feedback closure of d/s gives d/(s+d), coefficient by coefficient.
    const RationalTf closed{{with.num[0]}, {with.den[0] + with.num[0], with.den[1]}};
    const RationalTf srf = build_tf(TfKind::SrfOmega, k, d);
    CHECK(closed.num == srf.num);
    CHECK(closed.den == srf.den);
}

TEST_CASE("bode magnitudes at the published points") {
    const double k = kK;
    const RationalTf conv = build_tf(TfKind::ConvOmega, k, k);
    const RationalTf srf_b = build_tf(TfKind::SrfOmegaB, k, k);

    CHECK(bode_magnitude(conv, {k})[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(bode_magnitude(srf_b, {k})[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(bode_magnitude(conv, {1e-3})[0] == doctest::Approx(1.0).epsilon(1e-6));

    // Same k: the cascaded form never exceeds the conventional one above k.
    for (double w : log_spaced(k, 50.0 * k, 60)) {
        CHECK(bode_magnitude(srf_b, {w})[0] <= bode_magnitude(conv, {w})[0] + 1e-12);
    }
    CHECK_THROWS_AS(bode_magnitude(conv, {0.0}), ConfigError);
}

TEST_CASE("step response closed forms") {
    const double d = 120.0 * kPi;
    const RationalTf first = build_tf(TfKind::SrfOmega, kK, d);

    CHECK(step_response(first, {1.0 / d})[0] ==
          doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-12));
    CHECK(step_response(first, {std::log(50.0) / d})[0] == doctest::Approx(0.98).epsilon(1e-12));
    CHECK(step_response(first, {0.0})[0] == doctest::Approx(0.0));

    // Strictly proper second-order responses start at zero.
    CHECK(step_response(build_tf(TfKind::ConvOmega, kK, kK), {0.0})[0] == doctest::Approx(0.0));

    // Repeated-pole closed form: 1 - (1 + kt) e^(-kt) for kd/(s+k)^2 with d=k.
    const RationalTf repeated = build_tf(TfKind::SrfOmegaB, kK, kK);
    const double t = 1.7 / kK;
    CHECK(step_response(repeated, {t})[0] ==
          doctest::Approx(1.0 - (1.0 + kK * t) * std::exp(-kK * t)).epsilon(1e-10));

    CHECK_THROWS_AS(step_response(RationalTf{{1.0}, {-1.0, 1.0}}, {0.1}), ConfigError);
    CHECK_THROWS_AS(step_response(RationalTf{{1.0}, {0.0, 1.0}}, {0.1}), ConfigError);
}

TEST_CASE("step response agrees with an independent integrator") {
    const double k = kK;
    const std::vector<RationalTf> tfs = {
        build_tf(TfKind::ConvOmega, k, 0.5 * k),  // complex pair
        build_tf(TfKind::ConvOmega, k, 2.0 * k),  // underdamped pair
        build_tf(TfKind::ConvTheta, k, 0.5 * k),  // numerator zero
        build_tf(TfKind::SrfOmegaB, k, 0.3 * k),  // distinct real
        build_tf(TfKind::SrfOmegaB, k, k),        // repeated real
        build_tf(TfKind::SrfThetaE, k, k),        // zero DC gain
        build_tf(TfKind::SrfThetaEst, k, 0.7 * k),
        build_tf(TfKind::SrfOmega, k, 0.9 * k),   // first order
    };
    for (const RationalTf& tf : tfs) {
        for (double t : {0.0005, 0.002, 0.01, 0.03}) {
            const double closed = step_response(tf, {t})[0];
            const double numeric = rk4_step_response(tf, t);
            CHECK(closed == doctest::Approx(numeric).epsilon(1e-7).scale(1.0));
        }
    }
}

TEST_CASE("steady-state auxiliary variable") {
    CHECK(steady_state_aux(kK, 0.0, 1.0) == Complex{1.0, 0.0});
    CHECK(steady_state_aux(kK, 0.0, 0.5).real() == doctest::Approx(0.25));

    const Complex at5 = steady_state_aux(kK, kTwoPi * 5.0, 1.0);
    CHECK(at5.real() == doctest::Approx(144.0 / 145.0).epsilon(1e-12));
    CHECK(at5.imag() == doctest::Approx(12.0 / 145.0).epsilon(1e-12));

    const Complex sym = steady_state_aux(100.0, 100.0, 1.0);
    CHECK(std::abs(sym) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("overshoot from the damping ratio") {
    CHECK(overshoot_percent(1.0) == 0.0);
    CHECK(overshoot_percent(2.5) == 0.0);
    CHECK(overshoot_percent(1.0 / std::sqrt(2.0)) ==
          doctest::Approx(100.0 * std::exp(-kPi)).epsilon(1e-12));
    CHECK(overshoot_percent(0.707) == doctest::Approx(4.3284).epsilon(1e-3));
    CHECK(overshoot_percent(0.5) == doctest::Approx(16.3034).epsilon(1e-3));
    CHECK(overshoot_percent(0.5 / std::sqrt(2.0)) == doctest::Approx(30.5037).epsilon(1e-3));
    CHECK_THROWS_AS(overshoot_percent(0.0), ConfigError);
    CHECK_THROWS_AS(overshoot_percent(-0.1), ConfigError);
}
