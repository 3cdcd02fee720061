#pragma once

#include <functional>
#include <map>
#include <unordered_set>
#include <vector>

#include "trajirl/array.hpp"

namespace trajirl {

enum class Op {
    Input,
    Add,
    Sub,
    Matmul,
    Mul,  // elementwise
    Concat,
    Relu,
    Sigmoid,
    Tanh,
    Log,  // with optional clamp floor: value = log(max(x, floor))
    Square,
    Mean,
    Sum,
    ScalarMul,
    Slice,
    Detach,
};

const char* op_name(Op op);

struct TapeNode {
    Op op;
    std::vector<int> inputs;
    Array value;
    Array grad;        // same shape as value, zero until backward
    double attr = 0.0; // ScalarMul factor / Log floor
    int begin = 0;     // Slice bounds
    int end = 0;
};

/// Reverse-mode autodiff over a flat, eagerly evaluated node list. Node ids
/// are topologically ordered by construction. Single-threaded; concurrent
/// use requires one tape per thread over snapshotted parameter values.
class Tape {
public:
    /// Register a leaf holding a constant or parameter value.
    int input(Array v);

    int record(Op op, const std::vector<int>& inputs, double attr = 0.0,
               int begin = 0, int end = 0);

    int add(int a, int b) { return record(Op::Add, {a, b}); }
    int sub(int a, int b) { return record(Op::Sub, {a, b}); }
    int matmul(int w, int x) { return record(Op::Matmul, {w, x}); }
    int mul(int a, int b) { return record(Op::Mul, {a, b}); }
    int concat(const std::vector<int>& xs) { return record(Op::Concat, xs); }
    int relu(int x) { return record(Op::Relu, {x}); }
    int sigmoid(int x) { return record(Op::Sigmoid, {x}); }
    int tanh(int x) { return record(Op::Tanh, {x}); }
    int log(int x, double floor = 0.0) { return record(Op::Log, {x}, floor); }
    int square(int x) { return record(Op::Square, {x}); }
    int mean(int x) { return record(Op::Mean, {x}); }
    int sum(int x) { return record(Op::Sum, {x}); }
    int scalar_mul(int x, double c) { return record(Op::ScalarMul, {x}, c); }
    int slice(int x, int begin, int end) { return record(Op::Slice, {x}, 0.0, begin, end); }

    /// Same value, but backward stops here: the node receives gradient and
    /// propagates none upstream.
    int detach(int id);

    const Array& value(int id) const;
    const Array& grad(int id) const;
    const TapeNode& node(int id) const;
    int size() const { return static_cast<int>(nodes_.size()); }
    bool is_detached(int id) const { return detached_.count(id) > 0; }

    /// Reverse sweep from a scalar root. Zeroes all gradients first, so
    /// repeated calls on one tape are independent.
    void run_backward(int root);

    /// run_backward + copy out the gradients of every Input leaf.
    std::map<int, Array> backward(int root);

    /// Largest |x| over inputs of Relu nodes that lies within `margin` of 0,
    /// or -1 if none. Finite differences are invalid near the relu kink;
    /// checks use this to discard such instances.
    double relu_kink_distance(double margin) const;

private:
    std::vector<TapeNode> nodes_;
    std::unordered_set<int> detached_;

    void check_id(int id, const char* who) const;
    Array eval(Op op, const std::vector<int>& in, double attr, int begin, int end) const;
    void scatter(int id, std::vector<char>& touched);
};

/// Builds a scalar root from leaf nodes registered in order. Must be pure:
/// same leaf values, same root value.
using ForwardBuilder = std::function<int(Tape&, const std::vector<int>&)>;

struct GradCheckResult {
    double max_rel_err = 0.0;
    /// True when the unperturbed forward pass has a relu input within
    /// `step` of zero; the finite-difference comparison is unreliable then.
    bool kink = false;
};

/// Compares analytic gradients of `build` against central finite
/// differences over every entry of every leaf. Relative error uses
/// |analytic - fd| / max(1, |analytic|); leaf entries within `step` of zero
/// are skipped.
GradCheckResult grad_check_full(const ForwardBuilder& build,
                                const std::vector<Array>& leaves, double step);

/// Max relative error only (spec'd convenience form).
double grad_check(const ForwardBuilder& build, const std::vector<Array>& leaves,
                  double step);

}  // namespace trajirl
