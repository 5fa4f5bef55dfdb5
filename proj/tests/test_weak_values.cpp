#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include <weakval/weak_values.hpp>

using namespace weakval;

namespace {

const double c42 = std::cos(42.0 * pi / 180.0);
const double s42 = std::sin(42.0 * pi / 180.0);

Polarization state42() { return Polarization(c42, s42); }

// Hand-written closed form for real amplitudes and |A> postselection.
double wv_closed(double a, double b, double K) {
    const double g = std::sqrt((1 + K) / 2), gb = std::sqrt((1 - K) / 2);
    return (a * a - b * b) / (1 - 4 * g * gb * a * b);
}

template <class F>
void expect_error(F f, errc code) {
    try {
        f();
        ADD_FAILURE() << "expected error " << to_string(code);
    } catch (const weakval::error& e) {
        EXPECT_EQ(e.code(), code);
    }
}

} // namespace

TEST(Povm, LimitsAndIntermediateStrength) {
    const Povm strong = povm_elements(MeterSetting::from_strength(1.0));
    EXPECT_NEAR((strong.pi_H - projector(Vec2(1, 0))).norm(), 0.0, 1e-15);
    EXPECT_NEAR((strong.pi_V - projector(Vec2(0, 1))).norm(), 0.0, 1e-15);
    const Povm none = povm_elements(MeterSetting::from_strength(0.0));
    EXPECT_NEAR((none.pi_H - 0.5 * Mat2::Identity()).norm(), 0.0, 1e-15);
    EXPECT_NEAR((none.pi_V - 0.5 * Mat2::Identity()).norm(), 0.0, 1e-15);
    const Povm half = povm_elements(MeterSetting::from_strength(0.5));
    EXPECT_NEAR(half.pi_H(0, 0).real(), 0.75, 1e-15);
    EXPECT_NEAR(half.pi_H(1, 1).real(), 0.25, 1e-15);
    EXPECT_EQ(half.pi_H(0, 1), cplx(0.0));
}

TEST(Povm, CompleteAndPositiveForAllStrengths) {
    for (int i = 0; i <= 200; ++i) {
        const double K = -1.0 + i / 100.0;
        const Povm p = povm_elements(MeterSetting::from_strength(K));
        EXPECT_NEAR((p.pi_H + p.pi_V - Mat2::Identity()).norm(), 0.0, 1e-12);
        for (const Mat2* m : {&p.pi_H, &p.pi_V}) {
            Eigen::SelfAdjointEigenSolver<Mat2> es(*m);
            EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12);
        }
    }
}

TEST(ExpectationS1, ExamplesAndProbabilityRoute) {
    EXPECT_EQ(expectation_s1(Polarization::H()), 1.0);
    EXPECT_NEAR(expectation_s1(Polarization::D()), 0.0, 1e-15);
    EXPECT_NEAR(expectation_s1(state42()), std::cos(84.0 * pi / 180.0), 1e-15);
    EXPECT_NEAR(expectation_s1(state42()), 0.104528, 1e-6);

    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> uk(-1.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const auto [a, b] = oracle::random_qubit(rng);
        const Polarization psi(a, b);
        const auto meter = MeterSetting::from_strength(uk(rng));
        if (meter.strength() == 0.0) continue;
        const MeterProbs p = meter_probabilities(psi, povm_elements(meter));
        EXPECT_NEAR(expectation_s1_from_probs(p.H, p.V, meter.strength()), expectation_s1(psi), 1e-12);
    }
    expect_error([] { expectation_s1_from_probs(0.5, 0.5, 0.0); }, errc::indeterminate_strength);
}

TEST(PostselectedProbs, Examples) {
    const auto weakest = postselected_probs(state42(), MeterSetting::from_strength(0.0), PostselectState::A());
    EXPECT_NEAR(weakest.post, 0.5 * (c42 - s42) * (c42 - s42), 1e-15);
    EXPECT_NEAR(weakest.post, 0.002739, 1e-6);
    EXPECT_NEAR(weakest.post, 0.5 - c42 * s42, 1e-15);

    const auto d = postselected_probs(Polarization(0.6, 0.8), MeterSetting::from_gamma(0.8), PostselectState::A());
    ASSERT_TRUE(d.meter_H && d.meter_V);
    EXPECT_NEAR(*d.meter_H + *d.meter_V, 1.0, 1e-12);

    const auto strong = postselected_probs(state42(), MeterSetting::from_gamma(1.0), PostselectState::A());
    EXPECT_NEAR(*strong.meter_H, c42 * c42 / (c42 * c42 + s42 * s42), 1e-12);
    EXPECT_NEAR(*strong.meter_H, 0.552264, 1e-6);
}

TEST(PostselectedProbs, DiagonalSignalHasEvenMeterSplitGivenA) {
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> ug(M_SQRT1_2 + 1e-3, 1.0);
    for (int i = 0; i < 50; ++i) {
        const auto p = postselected_probs(Polarization::D(), MeterSetting::from_gamma(ug(rng)), PostselectState::A());
        ASSERT_TRUE(p.meter_H);
        EXPECT_NEAR(*p.meter_H, 0.5, 1e-12);
    }
}

TEST(PostselectedProbs, ImpossiblePostselectionIsFlagged) {
    const auto p = postselected_probs(Polarization::D(), MeterSetting::from_gamma(M_SQRT1_2), PostselectState::A());
    EXPECT_NEAR(p.post, 0.0, 1e-30);
    EXPECT_FALSE(p.meter_H.has_value());
    EXPECT_FALSE(p.meter_V.has_value());
}

TEST(WeakValueAnalytic, Examples) {
    const auto A = PostselectState::A();
    // K -> 0 limit (cos + sin)/(cos - sin), evaluated independently.
    const double limit = (c42 + s42) / (c42 - s42);
    EXPECT_NEAR(limit, 19.0812, 1e-4);
    EXPECT_NEAR(weak_value_analytic(state42(), MeterSetting::from_strength(0.0), A), limit, 1e-10);
    EXPECT_NEAR(weak_value_analytic(state42(), MeterSetting::from_strength(1e-9), A), limit, 1e-6);
    EXPECT_NEAR(weak_value_analytic(state42(), MeterSetting::from_strength(0.006), A), 19.02, 0.005);
    EXPECT_NEAR(weak_value_analytic(state42(), MeterSetting::from_strength(0.006), A), wv_closed(c42, s42, 0.006),
                1e-10);
    EXPECT_NEAR(weak_value_analytic(state42(), MeterSetting::from_strength(0.125), A), 7.87, 0.005);
    EXPECT_NEAR(weak_value_analytic(state42(), MeterSetting::from_strength(1.0), A), 0.104528, 1e-6);
    for (double K : {0.01, 0.3, 1.0})
        EXPECT_NEAR(weak_value_analytic(Polarization::D(), MeterSetting::from_strength(K), A), 0.0, 1e-12);
    expect_error([&] { weak_value_analytic(Polarization::D(), MeterSetting::from_strength(0.0), A); },
                 errc::divergence);
}

TEST(WeakValueAnalytic, WeakLimitIsRealPartOfAmplitudeRatio) {
    std::mt19937_64 rng(47);
    for (int i = 0; i < 200; ++i) {
        const auto [a, b] = oracle::random_qubit(rng, true);
        const double lim = ((a + b) / (a - b)).real();
        EXPECT_NEAR(weak_value_analytic(Polarization(a, b), MeterSetting::from_strength(0.0), PostselectState::A()),
                    lim, 1e-9 * std::max(1.0, std::abs(lim)));
    }
}

TEST(WeakValueFromProbs, ExamplesAndErrors) {
    EXPECT_NEAR(weak_value_from_probs(0.55, 0.45, 0.01), 10.0, 1e-12);
    EXPECT_EQ(weak_value_from_probs(1.0, 0.0, 1.0), 1.0);
    EXPECT_EQ(weak_value_from_probs(0.5, 0.5, 0.3), 0.0);
    expect_error([] { weak_value_from_probs(0.6, 0.4, 0.0); }, errc::weak_value_unbounded);
    expect_error([] { weak_value_from_probs(0.6, 0.6, 0.5); }, errc::malformed_distribution);
}

TEST(WeakValues, ProbabilityRouteEqualsClosedForm) {
    std::mt19937_64 rng(53);
    std::uniform_real_distribution<double> uk(1e-3, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const bool real_only = i < 700;
        const auto [a, b] = oracle::random_qubit(rng, real_only);
        const Polarization psi(a, b);
        const auto meter = MeterSetting::from_strength(uk(rng));
        for (const auto& post : {PostselectState::A(), PostselectState::D()}) {
            const auto p = postselected_probs(psi, meter, post);
            if (!p.meter_H || p.post < 1e-9) continue;
            const double via_probs = weak_value_from_probs(*p.meter_H, *p.meter_V, meter.strength());
            const double closed = weak_value_analytic(psi, meter, post);
            EXPECT_NEAR(via_probs, closed, 1e-10 * std::max(1.0, std::abs(closed)));
        }
    }
}

TEST(WeakValues, StrongLimitEqualsExpectation) {
    std::mt19937_64 rng(59);
    for (int i = 0; i < 200; ++i) {
        const auto [a, b] = oracle::random_qubit(rng, true);
        const Polarization psi(a, b);
        EXPECT_NEAR(weak_value_analytic(psi, MeterSetting::from_strength(1.0), PostselectState::A()),
                    expectation_s1(psi), 1e-12);
    }
}

TEST(WeakValues, ExtraSpectralBelowThresholdAndMonotone) {
    // Solve (c^2 - s^2) / (1 - sqrt(1 - K^2) sin 84) = 1 for K by hand.
    const double s = c42 * c42 - s42 * s42;
    const double threshold = std::sqrt(1.0 - std::pow((1.0 - s) / (2 * c42 * s42), 2));
    EXPECT_NEAR(threshold, 0.43505, 1e-4);
    const auto A = PostselectState::A();
    auto wv = [&](double K) { return weak_value_analytic(state42(), MeterSetting::from_strength(K), A); };
    EXPECT_NEAR(wv(threshold), 1.0, 1e-10);
    double prev = INFINITY;
    for (int i = 1; i <= 1000; ++i) {
        const double K = i / 1000.0;
        const double v = wv(K);
        EXPECT_LT(v, prev);
        prev = v;
        if (K < threshold - 1e-9) EXPECT_GT(std::abs(v), 1.0);
        if (K > threshold + 1e-9) EXPECT_LT(std::abs(v), 1.0);
    }
}

TEST(Knowledge, Examples) {
    const double g2 = 0.75;
    EXPECT_NEAR(knowledge_from_probs(g2 / 2, g2 / 2, (1 - g2) / 2, (1 - g2) / 2), 0.5, 1e-15);
    EXPECT_EQ(knowledge_from_probs(0.25, 0.25, 0.25, 0.25), 0.0);
    EXPECT_EQ(knowledge_from_probs(0.5, 0.5, 0.0, 0.0), 1.0);
    expect_error([] { knowledge_from_probs(0.5, 0.5, 0.5, 0.0); }, errc::malformed_distribution);
    expect_error([] { knowledge_from_probs(-0.1, 0.6, 0.5, 0.0); }, errc::malformed_distribution);
}

TEST(Decomposition, Examples) {
    const auto d = expectation_decomposition(state42(), MeterSetting::from_strength(0.006));
    EXPECT_NEAR(d.total, 0.104528, 1e-6);
    // Brute force: each factor recomputed from the hand closed forms.
    const double g = std::sqrt(1.006 / 2), gb = std::sqrt(0.994 / 2);
    const double pA = 0.5 * (std::pow(c42 * g - s42 * gb, 2) + std::pow(c42 * gb - s42 * g, 2));
    const double wvA = (c42 * c42 - s42 * s42) / (1 - 4 * g * gb * c42 * s42);
    const double wvD = (c42 * c42 - s42 * s42) / (1 + 4 * g * gb * c42 * s42);
    EXPECT_NEAR(pA, 0.002748, 1e-6);
    EXPECT_NEAR(d.term_A, wvA * pA, 1e-12);
    EXPECT_NEAR(d.term_D, wvD * (1 - pA), 1e-12);

    EXPECT_NEAR(expectation_decomposition(Polarization::H(), MeterSetting::from_strength(0.3)).total, 1.0, 1e-12);
    EXPECT_NEAR(expectation_decomposition(Polarization::V(), MeterSetting::from_strength(0.3)).total, -1.0, 1e-12);
    expect_error([] { expectation_decomposition(Polarization::H(), MeterSetting::from_strength(0.0)); },
                 errc::indeterminate_strength);
}

TEST(Decomposition, IdentityHoldsForRandomStates) {
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> uk(1e-6, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const auto [a, b] = oracle::random_qubit(rng, true);
        const Polarization psi(a, b);
        const auto d = expectation_decomposition(psi, MeterSetting::from_strength(uk(rng)));
        EXPECT_NEAR(d.total, expectation_s1(psi), 1e-10);
    }
}
