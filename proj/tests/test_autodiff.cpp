#include "pinn/autodiff.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

using namespace pinn::autodiff;

TEST(Tape, MulRecordsValueAndPartials) {
    Tape t;
    const Var a = t.param(3.0), b = t.param(4.0);
    const Var c = t.mul(a, b);
    EXPECT_EQ(c.value(), 12.0);
    const auto& n = t.nodes()[c.index()];
    EXPECT_EQ(n.partial[0], 4.0);
    EXPECT_EQ(n.partial[1], 3.0);
}

TEST(Tape, TanhAndSinAtZeroHaveUnitSlope) {
    Tape t;
    const Var x = t.param(0.0);
    const Var th = t.tanh(x), s = t.sin(x);
    EXPECT_EQ(th.value(), 0.0);
    EXPECT_EQ(t.nodes()[th.index()].partial[0], 1.0);
    EXPECT_EQ(s.value(), 0.0);
    EXPECT_EQ(t.nodes()[s.index()].partial[0], 1.0);
}

TEST(Tape, BackwardOfProductPlusTanh) {
    Tape t;
    const Var a = t.param(0.0), b = t.param(2.0);
    const Var f = a * b + tanh(a);
    const auto g = t.backward(f);
    ASSERT_EQ(g.size(), 2u);
    EXPECT_DOUBLE_EQ(g[0], 3.0);
    EXPECT_EQ(g[1], 0.0);
}

TEST(Tape, UnreachableLeafGetsExactZero) {
    Tape t;
    const Var a = t.param(1.5);
    t.param(7.0);
    const Var f = exp(a) * a;
    const auto g = t.backward(f);
    EXPECT_EQ(g[1], 0.0);
}

TEST(Tape, ForeignHandleIsUsageError) {
    Tape t1, t2;
    const Var a = t1.param(1.0);
    const Var b = t2.param(2.0);
    EXPECT_THROW(t1.add(a, b), UsageError);
    EXPECT_THROW(t2.backward(a), UsageError);
}

TEST(Tape, DivisionByZeroIsNonFiniteValue) {
    Tape t;
    const Var a = t.param(1.0), z = t.constant(0.0);
    EXPECT_THROW(t.div(a, z), NonFiniteValueError);
}

TEST(Tape, OverflowingAdjointIsReported) {
    Tape t;
    const Var b = t.param(1e-200);
    const Var f = t.div(t.constant(1e-150), b); // finite value, partial -1e-150/b^2 overflows
    try {
        t.backward(f);
        FAIL() << "expected NonFiniteGradientError";
    } catch (const NonFiniteGradientError& e) {
        EXPECT_EQ(e.node(), b.index());
    }
}

TEST(Tape, PowIntMatchesRepeatedProduct) {
    Tape t;
    const Var a = t.param(1.3);
    const Var p = pow_int(a, 5);
    EXPECT_DOUBLE_EQ(p.value(), std::pow(1.3, 5));
    const auto g = t.backward(p);
    EXPECT_DOUBLE_EQ(g[0], 5.0 * std::pow(1.3, 4));
}

TEST(Tape, ReplayReproducesValuesBitForBit) {
    Tape t;
    const Var a = t.param(0.3), b = t.param(-1.7);
    const Var f = sin(a * b) + exp(a) / (b * b + 1.0) - cos(tanh(b));
    std::vector<double> before;
    for (const auto& n : t.nodes()) before.push_back(n.value);
    t.set_leaf(a, 2.0);
    t.replay();
    EXPECT_NE(f.value(), before[f.index()]);
    t.set_leaf(a, 0.3);
    t.replay();
    for (std::size_t i = 0; i < before.size(); ++i) EXPECT_EQ(t.nodes()[i].value, before[i]);
}

namespace {

// g(a, b) and h(a, b) built on a fresh tape; returns the gradient.
std::vector<double> grad_of(const std::function<Var(Var, Var)>& fn, double a, double b) {
    Tape t;
    const Var va = t.param(a), vb = t.param(b);
    return t.backward(fn(va, vb));
}

} // namespace

TEST(TapeProperty, BackwardIsLinear) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    const auto f = [](Var a, Var b) { return sin(a) * b + exp(b); };
    const auto g = [](Var a, Var b) { return tanh(a * b) - square(a); };
    for (int trial = 0; trial < 50; ++trial) {
        const double a = u(rng), b = u(rng), ca = u(rng), cb = u(rng);
        const auto gf = grad_of(f, a, b), gg = grad_of(g, a, b);
        const auto gs = grad_of([&](Var x, Var y) { return f(x, y) * ca + g(x, y) * cb; }, a, b);
        for (int k = 0; k < 2; ++k) EXPECT_NEAR(gs[k], ca * gf[k] + cb * gg[k], 1e-14);
    }
}

TEST(TapeProperty, IdenticalInputsGiveBitIdenticalTapes) {
    auto build = [](Tape& t) {
        const Var a = t.param(0.7), b = t.param(0.2);
        return t.backward(cos(a) * sin(b) / (a + 2.0) + pow_int(b, 3));
    };
    Tape t1, t2;
    const auto g1 = build(t1), g2 = build(t2);
    ASSERT_EQ(t1.size(), t2.size());
    for (std::size_t i = 0; i < t1.size(); ++i) {
        EXPECT_EQ(t1.nodes()[i].value, t2.nodes()[i].value);
        EXPECT_EQ(t1.nodes()[i].partial, t2.nodes()[i].partial);
    }
    EXPECT_EQ(g1, g2);
}

TEST(TapeProperty, NodesAreTopologicallyOrdered) {
    Tape t;
    const Var a = t.param(0.5);
    Var x = a;
    for (int i = 0; i < 20; ++i) x = tanh(x) * a + sin(x);
    for (std::size_t i = 0; i < t.size(); ++i) {
        const auto& n = t.nodes()[i];
        for (int k = 0; k < n.arity; ++k) EXPECT_LT(n.arg[k], i);
    }
}

TEST(Jet, SeedHasUnitFirstAndZeroSecondDerivative) {
    Tape t;
    const Jet x = seed(t, 0.4, 2, 1, 2);
    EXPECT_EQ(x.value.value(), 0.4);
    EXPECT_EQ(x.d1[0].value(), 0.0);
    EXPECT_EQ(x.d1[1].value(), 1.0);
    EXPECT_EQ(x.d2[0].value(), 0.0);
    EXPECT_EQ(x.d2[1].value(), 0.0);
}

TEST(Jet, SinAtZero) {
    Tape t;
    const Jet y = sin(seed(t, 0.0, 1, 0, 2));
    EXPECT_EQ(y.value.value(), 0.0);
    EXPECT_EQ(y.d1[0].value(), 1.0);
    EXPECT_EQ(y.d2[0].value(), 0.0);
}

TEST(Jet, TanhOfTanhAtZero) {
    Tape t;
    const Jet y = tanh(tanh(seed(t, 0.0, 1, 0, 1)));
    EXPECT_EQ(y.value.value(), 0.0);
    EXPECT_EQ(y.d1[0].value(), 1.0);
}

TEST(Jet, SquareAtThree) {
    Tape t;
    const Jet y = square(seed(t, 3.0, 1, 0, 2));
    EXPECT_EQ(y.value.value(), 9.0);
    EXPECT_EQ(y.d1[0].value(), 6.0);
    EXPECT_EQ(y.d2[0].value(), 2.0);
}

TEST(Jet, MixedOrdersAreUsageError) {
    Tape t;
    const Jet a = seed(t, 1.0, 1, 0, 1);
    const Jet b = seed(t, 1.0, 1, 0, 2);
    EXPECT_THROW(a + b, UsageError);
}

TEST(Jet, ComponentsAreDifferentiableWithRespectToParams) {
    // y = sin(w x): dy/dx = w cos(w x), d(dy/dx)/dw = cos(w x) - w x sin(w x).
    Tape t;
    const double w0 = 0.8, x0 = 0.6;
    const Var w = t.param(w0);
    const Jet y = sin(seed(t, x0, 1, 0, 2) * w);
    const auto g = t.backward(y.d1[0]);
    EXPECT_NEAR(g[0], std::cos(w0 * x0) - w0 * x0 * std::sin(w0 * x0), 1e-15);
}

namespace {

struct UnaryCase {
    const char* name;
    std::function<Jet(const Jet&)> jet;
    std::function<double(double)> scalar;
};

} // namespace

TEST(JetProperty, EveryOpMatchesFiniteDifferences) {
    const std::vector<UnaryCase> cases{
        {"tanh", [](const Jet& x) { return tanh(x); }, [](double x) { return std::tanh(x); }},
        {"sin", [](const Jet& x) { return sin(x); }, [](double x) { return std::sin(x); }},
        {"cos", [](const Jet& x) { return cos(x); }, [](double x) { return std::cos(x); }},
        {"exp", [](const Jet& x) { return exp(x); }, [](double x) { return std::exp(x); }},
        {"square", [](const Jet& x) { return square(x); }, [](double x) { return x * x; }},
        {"pow4", [](const Jet& x) { return pow_int(x, 4); }, [](double x) { return x * x * x * x; }},
        {"div", [](const Jet& x) { return x / (x * x + 1.0); }, [](double x) { return x / (x * x + 1.0); }},
        {"neg_mul", [](const Jet& x) { return -(x * x * x) * 0.5; }, [](double x) { return -0.5 * x * x * x; }},
    };
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1.2, 1.2);
    const double h = 1e-4;
    for (const auto& c : cases) {
        for (int trial = 0; trial < 20; ++trial) {
            const double x = u(rng);
            Tape t;
            const Jet y = c.jet(seed(t, x, 1, 0, 2));
            const double fp = c.scalar(x + h), f0 = c.scalar(x), fm = c.scalar(x - h);
            const double d1 = (fp - fm) / (2 * h), d2 = (fp - 2 * f0 + fm) / (h * h);
            EXPECT_NEAR(y.value.value(), f0, 1e-15) << c.name;
            EXPECT_NEAR(y.d1[0].value(), d1, 1e-4 * std::max(1.0, std::abs(d1))) << c.name;
            EXPECT_NEAR(y.d2[0].value(), d2, 1e-4 * std::max(1.0, std::abs(d2))) << c.name;
        }
    }
}
