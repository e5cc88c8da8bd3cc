#pragma once

/// \file autodiff.hpp
///
/// Scalar reverse-mode differentiation over a recorded tape, plus forward-mode
/// jets that carry input derivatives (first order and diagonal second order)
/// as tape nodes, so every derivative stays differentiable with respect to the
/// trainable leaves.

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pinn::autodiff {

/// Misuse of the API: foreign handles, mixed jet orders, bad dimensions.
class UsageError : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

/// A recorded node produced a NaN or infinity.
class NonFiniteValueError : public std::runtime_error {
  public:
    NonFiniteValueError(const std::string& what, std::uint32_t node)
        : std::runtime_error(what), node_(node) {}
    std::uint32_t node() const noexcept { return node_; }

  private:
    std::uint32_t node_;
};

/// The reverse sweep produced a NaN or infinite adjoint.
class NonFiniteGradientError : public std::runtime_error {
  public:
    NonFiniteGradientError(const std::string& what, std::uint32_t node)
        : std::runtime_error(what), node_(node) {}
    /// First node (in reverse sweep order) whose adjoint went non-finite.
    std::uint32_t node() const noexcept { return node_; }

  private:
    std::uint32_t node_;
};

enum class Op : std::uint8_t {
    leaf,
    add,
    sub,
    mul,
    div,
    neg,
    square,
    pow_int,
    tanh,
    sin,
    cos,
    exp,
};

const char* op_name(Op op) noexcept;

class Tape;

/// Handle to a node on a specific tape.
class Var {
  public:
    Var() = default;

    Tape* tape() const noexcept { return tape_; }
    std::uint32_t index() const noexcept { return index_; }
    bool valid() const noexcept { return tape_ != nullptr; }
    double value() const;

  private:
    friend class Tape;
    Var(Tape* tape, std::uint32_t index) : tape_(tape), index_(index) {}

    Tape* tape_ = nullptr;
    std::uint32_t index_ = 0;
};

/// Append-only computation graph. Nodes are stored in topological order.
/// A tape is single-threaded; use one tape per thread.
class Tape {
  public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    /// Non-trainable leaf.
    Var constant(double value);
    /// Trainable leaf; its position in param_ids() is the gradient index.
    Var param(double value);

    Var record(Op op, std::span<const Var> args, int exponent = 0);

    Var add(Var a, Var b) { return record2(Op::add, a, b); }
    Var sub(Var a, Var b) { return record2(Op::sub, a, b); }
    Var mul(Var a, Var b) { return record2(Op::mul, a, b); }
    Var div(Var a, Var b) { return record2(Op::div, a, b); }
    Var neg(Var a) { return record1(Op::neg, a); }
    Var square(Var a) { return record1(Op::square, a); }
    Var pow_int(Var a, int n);
    Var tanh(Var a) { return record1(Op::tanh, a); }
    Var sin(Var a) { return record1(Op::sin, a); }
    Var cos(Var a) { return record1(Op::cos, a); }
    Var exp(Var a) { return record1(Op::exp, a); }

    /// Reverse sweep from `root`. Returns d(root)/d(param) for every trainable
    /// leaf in registration order; unreachable leaves get exactly 0.
    std::vector<double> backward(Var root);
    /// Adjoints of every node from the last backward() call.
    std::span<const double> adjoints() const noexcept { return adjoint_; }

    /// Recompute every non-leaf node from the current leaf values.
    void replay();
    void set_leaf(Var leaf, double value);

    double value(Var v) const;
    std::size_t size() const noexcept { return nodes_.size(); }
    std::span<const std::uint32_t> param_ids() const noexcept { return param_ids_; }

    /// Drop all nodes, keeping allocated capacity.
    void clear() noexcept;
    void reserve(std::size_t n) { nodes_.reserve(n); }

    struct Node {
        double value;
        std::array<double, 2> partial;
        std::array<std::uint32_t, 2> arg;
        Op op;
        std::uint8_t arity;
        std::int32_t exponent;
    };
    std::span<const Node> nodes() const noexcept { return nodes_; }

  private:
    Var record1(Op op, Var a);
    Var record2(Op op, Var a, Var b);
    void check(Var v) const;
    Var push(const Node& node);
    static void evaluate(Node& node, double a, double b);

    std::vector<Node> nodes_;
    std::vector<std::uint32_t> param_ids_;
    std::vector<double> adjoint_;
};

// Scalar sugar. Mixed Var/double operands record the double as a constant.
Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var operator*(Var a, Var b);
Var operator/(Var a, Var b);
Var operator-(Var a);
Var operator+(Var a, double c);
Var operator+(double c, Var a);
Var operator-(Var a, double c);
Var operator-(double c, Var a);
Var operator*(Var a, double c);
Var operator*(double c, Var a);
Var operator/(Var a, double c);

inline Var square(Var a) { return a.tape()->square(a); }
inline Var pow_int(Var a, int n) { return a.tape()->pow_int(a, n); }
inline Var tanh(Var a) { return a.tape()->tanh(a); }
inline Var sin(Var a) { return a.tape()->sin(a); }
inline Var cos(Var a) { return a.tape()->cos(a); }
inline Var exp(Var a) { return a.tape()->exp(a); }

inline constexpr int kMaxInputDim = 2;

/// A value with its derivatives with respect to the network inputs.
/// order 0: value only; order 1: adds d/dx_i; order 2: adds d2/dx_i^2.
struct Jet {
    Var value;
    std::array<Var, kMaxInputDim> d1{};
    std::array<Var, kMaxInputDim> d2{};
    std::uint8_t dim = 0;
    std::uint8_t order = 0;

    Tape& tape() const { return *value.tape(); }
};

/// Input coordinate x_i: value x, d1 = e_i, d2 = 0.
Jet seed(Tape& tape, double x, int dim, int index, int order);
/// Constant: all derivatives zero.
Jet constant_jet(Tape& tape, double c, int dim, int order);
/// Wrap an existing scalar as a jet with zero input derivatives.
Jet constant_jet(Var c, int dim, int order);

/// Propagate value and input derivatives through an elementary op using exact
/// chain/product rules. All args must share tape, dimension and order.
Jet lift(Op op, std::span<const Jet> args, int exponent = 0);

Jet operator+(const Jet& a, const Jet& b);
Jet operator-(const Jet& a, const Jet& b);
Jet operator*(const Jet& a, const Jet& b);
Jet operator/(const Jet& a, const Jet& b);
Jet operator-(const Jet& a);
Jet operator*(const Jet& a, double c);
Jet operator*(double c, const Jet& a);
Jet operator+(const Jet& a, double c);
Jet operator*(const Jet& a, Var c);
Jet operator*(Var c, const Jet& a);
Jet square(const Jet& a);
Jet pow_int(const Jet& a, int n);
Jet tanh(const Jet& a);
Jet sin(const Jet& a);
Jet cos(const Jet& a);
Jet exp(const Jet& a);

} // namespace pinn::autodiff
