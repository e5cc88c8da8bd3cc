#include "pinn/autodiff.hpp"

#include <cmath>
#include <limits>

namespace pinn::autodiff {

const char* op_name(Op op) noexcept {
    switch (op) {
    case Op::leaf: return "leaf";
    case Op::add: return "add";
    case Op::sub: return "sub";
    case Op::mul: return "mul";
    case Op::div: return "div";
    case Op::neg: return "neg";
    case Op::square: return "square";
    case Op::pow_int: return "pow_int";
    case Op::tanh: return "tanh";
    case Op::sin: return "sin";
    case Op::cos: return "cos";
    case Op::exp: return "exp";
    }
    return "?";
}

namespace {

int arity_of(Op op) {
    switch (op) {
    case Op::leaf: return 0;
    case Op::add:
    case Op::sub:
    case Op::mul:
    case Op::div: return 2;
    default: return 1;
    }
}

} // namespace

double Var::value() const {
    if (!tape_) throw UsageError("value() on an unbound Var");
    return tape_->value(*this);
}

void Tape::check(Var v) const {
    if (v.tape_ != this) throw UsageError("Var belongs to a different tape");
    if (v.index_ >= nodes_.size()) throw UsageError("Var index out of range");
}

double Tape::value(Var v) const {
    check(v);
    return nodes_[v.index_].value;
}

Var Tape::push(const Node& node) {
    if (!std::isfinite(node.value)) {
        throw NonFiniteValueError(std::string("non-finite value from ") + op_name(node.op),
                                  static_cast<std::uint32_t>(nodes_.size()));
    }
    nodes_.push_back(node);
    return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Tape::constant(double value) {
    return push(Node{value, {0.0, 0.0}, {0, 0}, Op::leaf, 0, 0});
}

Var Tape::param(double value) {
    Var v = constant(value);
    param_ids_.push_back(v.index_);
    return v;
}

void Tape::evaluate(Node& n, double a, double b) {
    switch (n.op) {
    case Op::leaf: break;
    case Op::add: n.value = a + b; n.partial = {1.0, 1.0}; break;
    case Op::sub: n.value = a - b; n.partial = {1.0, -1.0}; break;
    case Op::mul: n.value = a * b; n.partial = {b, a}; break;
    case Op::div:
        n.value = a / b;
        n.partial = {1.0 / b, -a / (b * b)};
        break;
    case Op::neg: n.value = -a; n.partial = {-1.0, 0.0}; break;
    case Op::square: n.value = a * a; n.partial = {2.0 * a, 0.0}; break;
    case Op::pow_int: {
        const int k = n.exponent;
        n.value = std::pow(a, k);
        n.partial = {k == 0 ? 0.0 : k * std::pow(a, k - 1), 0.0};
        break;
    }
    case Op::tanh: {
        const double t = std::tanh(a);
        n.value = t;
        n.partial = {1.0 - t * t, 0.0};
        break;
    }
    case Op::sin: n.value = std::sin(a); n.partial = {std::cos(a), 0.0}; break;
    case Op::cos: n.value = std::cos(a); n.partial = {-std::sin(a), 0.0}; break;
    case Op::exp: {
        const double e = std::exp(a);
        n.value = e;
        n.partial = {e, 0.0};
        break;
    }
    }
}

Var Tape::record(Op op, std::span<const Var> args, int exponent) {
    const int arity = arity_of(op);
    if (op == Op::leaf) throw UsageError("record: use constant() or param() for leaves");
    if (static_cast<int>(args.size()) != arity) {
        throw UsageError(std::string("record: wrong operand count for ") + op_name(op));
    }
    Node n{0.0, {0.0, 0.0}, {0, 0}, op, static_cast<std::uint8_t>(arity), exponent};
    for (int k = 0; k < arity; ++k) {
        check(args[k]);
        n.arg[k] = args[k].index_;
    }
    const double a = nodes_[n.arg[0]].value;
    const double b = arity == 2 ? nodes_[n.arg[1]].value : 0.0;
    if (op == Op::div && b == 0.0) {
        throw NonFiniteValueError("division by zero", static_cast<std::uint32_t>(nodes_.size()));
    }
    evaluate(n, a, b);
    return push(n);
}

Var Tape::record1(Op op, Var a) {
    const Var args[1] = {a};
    return record(op, args);
}

Var Tape::record2(Op op, Var a, Var b) {
    const Var args[2] = {a, b};
    return record(op, args);
}

Var Tape::pow_int(Var a, int n) {
    const Var args[1] = {a};
    return record(Op::pow_int, args, n);
}

std::vector<double> Tape::backward(Var root) {
    check(root);
    adjoint_.assign(nodes_.size(), 0.0);
    adjoint_[root.index_] = 1.0;
    for (std::size_t i = root.index_ + 1; i-- > 0;) {
        const double g = adjoint_[i];
        if (g == 0.0) continue;
        if (!std::isfinite(g)) {
            throw NonFiniteGradientError("non-finite adjoint", static_cast<std::uint32_t>(i));
        }
        const Node& n = nodes_[i];
        for (int k = 0; k < n.arity; ++k) adjoint_[n.arg[k]] += g * n.partial[k];
    }
    std::vector<double> grad(param_ids_.size());
    for (std::size_t k = 0; k < param_ids_.size(); ++k) {
        grad[k] = adjoint_[param_ids_[k]];
        if (!std::isfinite(grad[k])) {
            throw NonFiniteGradientError("non-finite adjoint", param_ids_[k]);
        }
    }
    return grad;
}

void Tape::set_leaf(Var leaf, double value) {
    check(leaf);
    Node& n = nodes_[leaf.index_];
    if (n.op != Op::leaf) throw UsageError("set_leaf on a non-leaf node");
    n.value = value;
}

void Tape::replay() {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        Node& n = nodes_[i];
        if (n.op == Op::leaf) continue;
        const double a = nodes_[n.arg[0]].value;
        const double b = n.arity == 2 ? nodes_[n.arg[1]].value : 0.0;
        evaluate(n, a, b);
        if (!std::isfinite(n.value)) {
            throw NonFiniteValueError("non-finite value during replay", static_cast<std::uint32_t>(i));
        }
    }
}

void Tape::clear() noexcept {
    nodes_.clear();
    param_ids_.clear();
    adjoint_.clear();
}

Var operator+(Var a, Var b) { return a.tape()->add(a, b); }
Var operator-(Var a, Var b) { return a.tape()->sub(a, b); }
Var operator*(Var a, Var b) { return a.tape()->mul(a, b); }
Var operator/(Var a, Var b) { return a.tape()->div(a, b); }
Var operator-(Var a) { return a.tape()->neg(a); }
Var operator+(Var a, double c) { return a + a.tape()->constant(c); }
Var operator+(double c, Var a) { return a.tape()->constant(c) + a; }
Var operator-(Var a, double c) { return a - a.tape()->constant(c); }
Var operator-(double c, Var a) { return a.tape()->constant(c) - a; }
Var operator*(Var a, double c) { return a * a.tape()->constant(c); }
Var operator*(double c, Var a) { return a.tape()->constant(c) * a; }
Var operator/(Var a, double c) { return a / a.tape()->constant(c); }

// ---------------------------------------------------------------------------
// Jets

Jet seed(Tape& tape, double x, int dim, int index, int order) {
    if (dim < 1 || dim > kMaxInputDim) throw UsageError("seed: unsupported input dimension");
    if (index < 0 || index >= dim) throw UsageError("seed: index out of range");
    if (order < 0 || order > 2) throw UsageError("seed: order must be 0, 1 or 2");
    Jet j;
    j.dim = static_cast<std::uint8_t>(dim);
    j.order = static_cast<std::uint8_t>(order);
    j.value = tape.constant(x);
    if (order >= 1) {
        for (int i = 0; i < dim; ++i) j.d1[i] = tape.constant(i == index ? 1.0 : 0.0);
    }
    if (order == 2) {
        for (int i = 0; i < dim; ++i) j.d2[i] = tape.constant(0.0);
    }
    return j;
}

Jet constant_jet(Var c, int dim, int order) {
    if (dim < 1 || dim > kMaxInputDim) throw UsageError("constant_jet: unsupported input dimension");
    if (order < 0 || order > 2) throw UsageError("constant_jet: order must be 0, 1 or 2");
    Tape& tape = *c.tape();
    Jet j;
    j.dim = static_cast<std::uint8_t>(dim);
    j.order = static_cast<std::uint8_t>(order);
    j.value = c;
    if (order >= 1) {
        const Var zero = tape.constant(0.0);
        for (int i = 0; i < dim; ++i) {
            j.d1[i] = zero;
            if (order == 2) j.d2[i] = zero;
        }
    }
    return j;
}

Jet constant_jet(Tape& tape, double c, int dim, int order) {
    return constant_jet(tape.constant(c), dim, order);
}

namespace {

void check_compatible(const Jet& a, const Jet& b) {
    if (a.value.tape() != b.value.tape()) throw UsageError("jets live on different tapes");
    if (a.order != b.order) throw UsageError("jets have mixed orders");
    if (a.dim != b.dim) throw UsageError("jets have mixed input dimensions");
}

Jet like(const Jet& a) {
    Jet r;
    r.dim = a.dim;
    r.order = a.order;
    return r;
}

// Generic unary rule given f(u), f'(u) and f''(u) as tape nodes.
Jet chain(const Jet& u, Var f, Var fp, Var fpp) {
    Jet r = like(u);
    r.value = f;
    for (int i = 0; i < u.dim && u.order >= 1; ++i) {
        r.d1[i] = fp * u.d1[i];
        if (u.order == 2) r.d2[i] = fpp * (u.d1[i] * u.d1[i]) + fp * u.d2[i];
    }
    return r;
}

Jet scale(const Jet& a, Var c) {
    Jet r = like(a);
    r.value = c * a.value;
    for (int i = 0; i < a.dim && a.order >= 1; ++i) {
        r.d1[i] = c * a.d1[i];
        if (a.order == 2) r.d2[i] = c * a.d2[i];
    }
    return r;
}

} // namespace

Jet lift(Op op, std::span<const Jet> args, int exponent) {
    const int arity = arity_of(op);
    if (op == Op::leaf || static_cast<int>(args.size()) != arity) {
        throw UsageError(std::string("lift: bad operand count for ") + op_name(op));
    }
    if (arity == 2) check_compatible(args[0], args[1]);
    const Jet& a = args[0];
    Tape& t = a.tape();
    const bool first = a.order >= 1;
    const bool second = a.order == 2;

    switch (op) {
    case Op::add:
    case Op::sub: {
        const Jet& b = args[1];
        Jet r = like(a);
        const bool plus = op == Op::add;
        auto comb = [&](Var x, Var y) { return plus ? x + y : x - y; };
        r.value = comb(a.value, b.value);
        for (int i = 0; i < a.dim && first; ++i) {
            r.d1[i] = comb(a.d1[i], b.d1[i]);
            if (second) r.d2[i] = comb(a.d2[i], b.d2[i]);
        }
        return r;
    }
    case Op::mul: {
        const Jet& b = args[1];
        Jet r = like(a);
        r.value = a.value * b.value;
        for (int i = 0; i < a.dim && first; ++i) {
            r.d1[i] = a.d1[i] * b.value + a.value * b.d1[i];
            if (second) {
                r.d2[i] = a.d2[i] * b.value + 2.0 * (a.d1[i] * b.d1[i]) + a.value * b.d2[i];
            }
        }
        return r;
    }
    case Op::div: {
        const Jet& b = args[1];
        Jet r = like(a);
        r.value = a.value / b.value;
        for (int i = 0; i < a.dim && first; ++i) {
            r.d1[i] = (a.d1[i] - r.value * b.d1[i]) / b.value;
            if (second) {
                r.d2[i] = (a.d2[i] - 2.0 * (r.d1[i] * b.d1[i]) - r.value * b.d2[i]) / b.value;
            }
        }
        return r;
    }
    case Op::neg: {
        Jet r = like(a);
        r.value = -a.value;
        for (int i = 0; i < a.dim && first; ++i) {
            r.d1[i] = -a.d1[i];
            if (second) r.d2[i] = -a.d2[i];
        }
        return r;
    }
    case Op::square: {
        const Var f = t.square(a.value);
        const Var fp = first ? 2.0 * a.value : Var{};
        const Var fpp = second ? t.constant(2.0) : Var{};
        return chain(a, f, fp, fpp);
    }
    case Op::pow_int: {
        const int n = exponent;
        const Var f = t.pow_int(a.value, n);
        Var fp, fpp;
        if (first) fp = n == 0 ? t.constant(0.0) : double(n) * t.pow_int(a.value, n - 1);
        if (second) {
            fpp = (n == 0 || n == 1) ? t.constant(0.0)
                                     : double(n) * double(n - 1) * t.pow_int(a.value, n - 2);
        }
        return chain(a, f, fp, fpp);
    }
    case Op::tanh: {
        const Var f = t.tanh(a.value);
        Var fp, fpp;
        if (first) fp = 1.0 - t.square(f);
        if (second) fpp = -2.0 * (f * fp);
        return chain(a, f, fp, fpp);
    }
    case Op::sin: {
        const Var f = t.sin(a.value);
        Var fp, fpp;
        if (first) fp = t.cos(a.value);
        if (second) fpp = -f;
        return chain(a, f, fp, fpp);
    }
    case Op::cos: {
        const Var f = t.cos(a.value);
        Var fp, fpp;
        if (first) fp = -t.sin(a.value);
        if (second) fpp = -f;
        return chain(a, f, fp, fpp);
    }
    case Op::exp: {
        const Var f = t.exp(a.value);
        return chain(a, f, f, f);
    }
    case Op::leaf: break;
    }
    throw UsageError("lift: unsupported op");
}

Jet operator+(const Jet& a, const Jet& b) {
    const Jet args[2] = {a, b};
    return lift(Op::add, args);
}
Jet operator-(const Jet& a, const Jet& b) {
    const Jet args[2] = {a, b};
    return lift(Op::sub, args);
}
Jet operator*(const Jet& a, const Jet& b) {
    const Jet args[2] = {a, b};
    return lift(Op::mul, args);
}
Jet operator/(const Jet& a, const Jet& b) {
    const Jet args[2] = {a, b};
    return lift(Op::div, args);
}
Jet operator-(const Jet& a) {
    const Jet args[1] = {a};
    return lift(Op::neg, args);
}
Jet operator*(const Jet& a, double c) { return scale(a, a.tape().constant(c)); }
Jet operator*(double c, const Jet& a) { return scale(a, a.tape().constant(c)); }
Jet operator*(const Jet& a, Var c) {
    if (c.tape() != a.value.tape()) throw UsageError("scalar and jet live on different tapes");
    return scale(a, c);
}
Jet operator*(Var c, const Jet& a) { return a * c; }
Jet operator+(const Jet& a, double c) {
    Jet r = a;
    r.value = a.value + c;
    return r;
}

Jet square(const Jet& a) {
    const Jet args[1] = {a};
    return lift(Op::square, args);
}
Jet pow_int(const Jet& a, int n) {
    const Jet args[1] = {a};
    return lift(Op::pow_int, args, n);
}
Jet tanh(const Jet& a) {
    const Jet args[1] = {a};
    return lift(Op::tanh, args);
}
Jet sin(const Jet& a) {
    const Jet args[1] = {a};
    return lift(Op::sin, args);
}
Jet cos(const Jet& a) {
    const Jet args[1] = {a};
    return lift(Op::cos, args);
}
Jet exp(const Jet& a) {
    const Jet args[1] = {a};
    return lift(Op::exp, args);
}

} // namespace pinn::autodiff
