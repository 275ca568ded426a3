#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "lattice_shadow/oscillatory.hpp"

using namespace lattice_shadow;

namespace {

const Complex I{0.0, 1.0};

double sin_derivs(int k, double s) {
    switch (k % 4) {
        case 0: return std::sin(s);
        case 1: return std::cos(s);
        case 2: return -std::sin(s);
        default: return -std::cos(s);
    }
}

double exp_derivs(int, double s) { return std::exp(s); }

/// 1 + 2s - 3s^2
double quadratic(int k, double s) {
    switch (k) {
        case 0: return 1 + 2 * s - 3 * s * s;
        case 1: return 2 - 6 * s;
        case 2: return -6;
        default: return 0;
    }
}

}  // namespace

TEST(OscIntegral, ConstantFunctionClosedForm) {
    const double w = 7.0, t = 1.3;
    const QuadratureResult q = osc_integral_exact([](double) { return 1.0; }, w, t);
    const Complex expected = (I / w) * (1.0 - std::exp(I * (w * t)));
    EXPECT_NEAR(std::abs(q.value - expected), 0.0, 1e-14);
    const auto one = [](int k, double) { return k == 0 ? 1.0 : 0.0; };
    const Complex boundary = osc_expansion(make_expansion_input(one, 0, w, t), 0);
    EXPECT_NEAR(std::abs(boundary - expected), 0.0, 1e-15);
}

TEST(OscIntegral, TrivialCases) {
    EXPECT_EQ(osc_integral_exact([](double) { return 0.0; }, 5.0, 2.0).value, Complex(0.0, 0.0));
    EXPECT_EQ(osc_integral_exact([](double s) { return std::exp(s); }, 5.0, 0.0).value, Complex(0.0, 0.0));
    const ExpansionInput in = make_expansion_input(sin_derivs, 3, 10.0, 0.0);
    EXPECT_NEAR(std::abs(osc_expansion(in, 3)), 0.0, 1e-17);
    EXPECT_EQ(osc_expansion(in, -1), Complex(0.0, 0.0));
}

TEST(OscIntegral, UnresolvedGridRejected) {
    const auto one = [](double) { return 1.0; };
    EXPECT_THROW(osc_integral_exact(one, 100.0, 1.0, OscQuadrature{5.0, 0}), ConfigurationError);
    EXPECT_THROW(osc_integral_exact(one, 100.0, 1.0, OscQuadrature{40.0, 10}), ConfigurationError);
    EXPECT_THROW(osc_integral_exact(one, 0.0, 1.0), ValidationError);
}

TEST(OscExpansion, LinearFunctionIsExactAtFirstOrder) {
    const auto lin = [](int k, double s) { return k == 0 ? s : (k == 1 ? 1.0 : 0.0); };
    for (const double w : {3.0, 30.0}) {
        const QuadratureResult q = osc_integral_exact([](double s) { return s; }, w, 1.0);
        const Complex e = osc_expansion(make_expansion_input(lin, 1, w, 1.0), 1);
        EXPECT_NEAR(std::abs(q.value - e), 0.0, 1e-14);
    }
}

TEST(OscExpansion, SineRemainderBoundAtOrderThree) {
    // remainder after the order-3 sum decays like w^-5
    double c_max = 0.0;
    for (const double w : {25.0, 50.0, 100.0, 200.0}) {
        const QuadratureResult q = osc_integral_exact([](double s) { return std::sin(s); }, w, 1.0);
        const double rem = std::abs(q.value - osc_expansion(make_expansion_input(sin_derivs, 4, w, 1.0), 3));
        c_max = std::max(c_max, rem * std::pow(w, 5));
        EXPECT_LT(q.error_estimate, 1e-13);
    }
    EXPECT_LT(c_max, 3.0);
}

TEST(OscExpansion, ArityChecked) {
    const ExpansionInput in = make_expansion_input(sin_derivs, 1, 10.0, 1.0);
    EXPECT_THROW(osc_expansion(in, 2), ArityError);
    EXPECT_THROW(osc_expansion(in, -2), ArityError);
    EXPECT_NO_THROW(osc_expansion(in, 1));
}

TEST(ParityIdentity, MatchesClosedForm) {
    for (const double w : {1.0, 3.7, 50.0})
        for (const double t : {0.0, 0.4, 2.9}) {
            const double c = std::cos(w * t), s = std::sin(w * t);
            // Im(i e^{iwt} (-i)^j) cycles through cos, sin, -cos, -sin
            const double expected[] = {c, s, -c, -s};
            for (int j = 0; j <= 7; ++j) EXPECT_NEAR(parity_term(j, w, t), expected[j % 4], 1e-12) << j;
        }
}

TEST(IMuExpansion, LowOrders) {
    const double w = 12.0, t = 0.8;
    const ExpansionInput in = make_expansion_input(exp_derivs, 4, w, t);
    EXPECT_EQ(i_mu_expansion(in, 0), 0.0);
    const double m1 = -std::exp(t) / (w * w) + std::cos(w * t) / (w * w) + std::sin(w * t) / (w * w * w);
    EXPECT_NEAR(i_mu_expansion(in, 1), m1, 1e-16);
}

TEST(IMuExpansion, SecondHalfOrderAgainstWrittenOutFormula) {
    const double w = 9.0, t = 1.1;
    const ExpansionInput in = make_expansion_input(sin_derivs, 4, w, t);
    const double w2 = w * w, w4 = w2 * w2;
    const double q = std::sin(t), q2 = -std::sin(t);
    const double q0 = 0.0, q1_0 = 1.0, q2_0 = 0.0, q3_0 = -1.0;
    const double expected = -(q / w2 - q2 / w4) + (q0 / w2 - q2_0 / w4) * std::cos(w * t) +
                            (q1_0 / (w2 * w) - q3_0 / (w4 * w)) * std::sin(w * t);
    EXPECT_NEAR(i_mu_expansion(in, 2), expected, 1e-16);
}

TEST(IMuExpansion, RealPartOfComplexExpansion) {
    for (const double w : {5.0, 40.0})
        for (int m = 1; m <= 3; ++m) {
            const ExpansionInput in = make_expansion_input(exp_derivs, 2 * m, w, 0.7);
            EXPECT_NEAR(i_mu_expansion(in, m), -osc_expansion(in, 2 * m - 1).imag() / w, 1e-15);
        }
}

TEST(IMuExpansion, ApproximatesConvolution) {
    for (int m = 1; m <= 2; ++m) {
        std::vector<double> ws, errs;
        for (const double w : {25.0, 50.0, 100.0, 200.0}) {
            const QuadratureResult q = osc_integral_exact([](double s) { return std::exp(s); }, w, 1.0);
            const double exact = -q.value.imag() / w;
            errs.push_back(std::abs(exact - i_mu_expansion(make_expansion_input(exp_derivs, 2 * m, w, 1.0), m)));
            ws.push_back(w);
        }
        EXPECT_LT(fit_loglog_slope(ws, errs).slope, -(2.0 * m + 2) + 0.2) << m;
    }
}

TEST(FMuExpansion, HomogeneousPart) {
    const ExpansionInput zero = make_expansion_input([](int, double) { return 0.0; }, 2, 4.0, 0.3);
    EXPECT_NEAR(f_mu_expansion(0.5, 2.0, zero, 1), 0.5 * std::cos(1.2) + 0.5 * std::sin(1.2), 1e-16);
}

TEST(ErrorOrderFit, ExponentialZerothOrder) {
    const std::vector<double> ws{10, 20, 40, 80};
    const OrderFitResult r = error_order_fit(exp_derivs, 0, ws);
    ASSERT_TRUE(r.fit.has_value());
    EXPECT_GE(r.fit->slope, -1.3);
    EXPECT_LE(r.fit->slope, -0.8);
    EXPECT_FALSE(r.exact_closure);
}

TEST(ErrorOrderFit, SineOrders) {
    const std::vector<double> ws{25, 50, 100, 200};
    for (int n = 0; n <= 3; ++n) {
        const OrderFitResult r = error_order_fit(sin_derivs, n, ws);
        ASSERT_TRUE(r.fit.has_value()) << n;
        // for odd n the leading coefficient |cos 1 - e^{iw}| oscillates in w and scatters the fit
        const double slack = n % 2 == 0 ? 0.2 : 0.5;
        EXPECT_LE(r.fit->slope, -(n + 1) + slack) << n;
        EXPECT_GE(r.fit->slope, -(n + 1) - 0.5) << n;
        for (std::size_t i = 0; i < ws.size(); ++i) EXPECT_LT(r.quadrature_errors[i], 1e-3 * r.remainders[i]);
    }
}

TEST(ErrorOrderFit, PolynomialClosesExactly) {
    const std::vector<double> ws{25, 50, 100, 200};
    const OrderFitResult r = error_order_fit(quadratic, 3, ws);
    EXPECT_TRUE(r.exact_closure);
    EXPECT_FALSE(r.fit.has_value());
    const OrderFitResult partial = error_order_fit(quadratic, 2, ws);
    EXPECT_FALSE(partial.exact_closure);
    // one order short, the remainder is exactly the missing boundary term
    for (std::size_t i = 0; i < ws.size(); ++i) {
        const ExpansionInput in = make_expansion_input(quadratic, 2, ws[i], 1.0);
        EXPECT_NEAR(partial.remainders[i], std::abs(osc_expansion(in, 2) - osc_expansion(in, 1)), 1e-14);
    }
}

TEST(ErrorOrderFit, Errors) {
    const std::vector<double> one{50.0};
    const std::vector<double> same{50.0, 50.0};
    EXPECT_THROW(error_order_fit(sin_derivs, 1, one), FitError);
    EXPECT_THROW(error_order_fit(sin_derivs, 1, same), FitError);
    const std::vector<double> ws{25, 50};
    EXPECT_THROW(error_order_fit(sin_derivs, -1, ws), ArityError);
}
