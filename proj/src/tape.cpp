#include "trajirl/tape.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace trajirl {

const char* op_name(Op op) {
    switch (op) {
        case Op::Input: return "input";
        case Op::Add: return "add";
        case Op::Sub: return "sub";
        case Op::Matmul: return "matmul";
        case Op::Mul: return "elemwise-mul";
        case Op::Concat: return "concat";
        case Op::Relu: return "relu";
        case Op::Sigmoid: return "sigmoid";
        case Op::Tanh: return "tanh";
        case Op::Log: return "log";
        case Op::Square: return "square";
        case Op::Mean: return "mean";
        case Op::Sum: return "sum";
        case Op::ScalarMul: return "scalar-mul";
        case Op::Slice: return "slice";
        case Op::Detach: return "detach";
    }
    return "?";
}

namespace {

double sigmoid_stable(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    double e = std::exp(x);
    return e / (1.0 + e);
}

[[noreturn]] void shape_error(Op op, const Array& a, const Array& b) {
    throw std::invalid_argument(std::string(op_name(op)) + ": shape mismatch " +
                                a.shape_str() + " vs " + b.shape_str());
}

}  // namespace

void Tape::check_id(int id, const char* who) const {
    if (id < 0 || id >= size()) {
        throw std::invalid_argument(std::string(who) + ": unknown node id " +
                                    std::to_string(id));
    }
}

int Tape::input(Array v) {
    TapeNode n;
    n.op = Op::Input;
    n.grad = Array::zeros(v.shape);
    n.value = std::move(v);
    nodes_.push_back(std::move(n));
    return size() - 1;
}

int Tape::detach(int id) {
    check_id(id, "detach");
    TapeNode n;
    n.op = Op::Detach;
    n.inputs = {id};
    n.value = nodes_[id].value;
    n.grad = Array::zeros(n.value.shape);
    nodes_.push_back(std::move(n));
    int nid = size() - 1;
    detached_.insert(nid);
    return nid;
}

int Tape::record(Op op, const std::vector<int>& inputs, double attr, int begin, int end) {
    for (int id : inputs) check_id(id, op_name(op));
    TapeNode n;
    n.op = op;
    n.inputs = inputs;
    n.attr = attr;
    n.begin = begin;
    n.end = end;
    n.value = eval(op, inputs, attr, begin, end);
    n.grad = Array::zeros(n.value.shape);
    nodes_.push_back(std::move(n));
    return size() - 1;
}

Array Tape::eval(Op op, const std::vector<int>& in, double attr, int begin, int end) const {
    auto need_inputs = [&](size_t k) {
        if (in.size() != k) {
            throw std::invalid_argument(std::string(op_name(op)) + ": expects " +
                                        std::to_string(k) + " inputs, got " +
                                        std::to_string(in.size()));
        }
    };
    switch (op) {
        case Op::Input:
            throw std::invalid_argument("record: input nodes are created via Tape::input");
        case Op::Detach:
            throw std::invalid_argument("record: detach nodes are created via Tape::detach");
        case Op::Add:
        case Op::Sub:
        case Op::Mul: {
            need_inputs(2);
            const Array& a = nodes_[in[0]].value;
            const Array& b = nodes_[in[1]].value;
            if (!a.same_shape(b)) shape_error(op, a, b);
            Array out = a;
            for (int i = 0; i < out.numel(); ++i) {
                if (op == Op::Add) out[i] = a[i] + b[i];
                else if (op == Op::Sub) out[i] = a[i] - b[i];
                else out[i] = a[i] * b[i];
            }
            return out;
        }
        case Op::Matmul: {
            need_inputs(2);
            const Array& w = nodes_[in[0]].value;
            const Array& x = nodes_[in[1]].value;
            if (w.rank() != 2 || x.rank() != 1 || w.cols() != x.numel()) shape_error(op, w, x);
            Array out = Array::zeros({w.rows()});
            const int m = w.rows(), n = w.cols();
            for (int r = 0; r < m; ++r) {
                double acc = 0.0;
                const double* wr = &w.data[static_cast<size_t>(r) * n];
                for (int c = 0; c < n; ++c) acc += wr[c] * x[c];
                out[r] = acc;
            }
            return out;
        }
        case Op::Concat: {
            if (in.empty()) throw std::invalid_argument("concat: needs at least one input");
            int total = 0;
            for (int id : in) {
                const Array& a = nodes_[id].value;
                if (a.rank() != 1) {
                    throw std::invalid_argument(std::string("concat: rank-1 inputs only, got ") +
                                                a.shape_str());
                }
                total += a.numel();
            }
            Array out = Array::zeros({total});
            int off = 0;
            for (int id : in) {
                const Array& a = nodes_[id].value;
                for (int i = 0; i < a.numel(); ++i) out[off + i] = a[i];
                off += a.numel();
            }
            return out;
        }
        case Op::Relu:
        case Op::Sigmoid:
        case Op::Tanh:
        case Op::Square:
        case Op::Log: {
            need_inputs(1);
            const Array& a = nodes_[in[0]].value;
            Array out = a;
            for (int i = 0; i < out.numel(); ++i) {
                double v = a[i];
                switch (op) {
                    case Op::Relu: out[i] = v > 0.0 ? v : 0.0; break;
                    case Op::Sigmoid: out[i] = sigmoid_stable(v); break;
                    case Op::Tanh: out[i] = std::tanh(v); break;
                    case Op::Square: out[i] = v * v; break;
                    default: out[i] = std::log(attr > 0.0 && v < attr ? attr : v); break;
                }
            }
            return out;
        }
        case Op::Mean:
        case Op::Sum: {
            need_inputs(1);
            const Array& a = nodes_[in[0]].value;
            double acc = 0.0;
            for (int i = 0; i < a.numel(); ++i) acc += a[i];
            if (op == Op::Mean) acc /= static_cast<double>(a.numel());
            return Array::scalar(acc);
        }
        case Op::ScalarMul: {
            need_inputs(1);
            const Array& a = nodes_[in[0]].value;
            Array out = a;
            for (int i = 0; i < out.numel(); ++i) out[i] = a[i] * attr;
            return out;
        }
        case Op::Slice: {
            need_inputs(1);
            const Array& a = nodes_[in[0]].value;
            if (a.rank() != 1 || begin < 0 || end > a.numel() || begin >= end) {
                throw std::invalid_argument("slice: bounds [" + std::to_string(begin) + "," +
                                            std::to_string(end) + ") invalid for " +
                                            a.shape_str());
            }
            Array out = Array::zeros({end - begin});
            for (int i = begin; i < end; ++i) out[i - begin] = a[i];
            return out;
        }
    }
    throw std::invalid_argument("record: unknown op kind");
}

const Array& Tape::value(int id) const {
    check_id(id, "value");
    return nodes_[id].value;
}

const Array& Tape::grad(int id) const {
    check_id(id, "grad");
    return nodes_[id].grad;
}

const TapeNode& Tape::node(int id) const {
    check_id(id, "node");
    return nodes_[id];
}

void Tape::scatter(int id, std::vector<char>& touched) {
    TapeNode& n = nodes_[id];
    const Array& g = n.grad;
    auto gin = [&](int k) -> Array& {
        touched[n.inputs[k]] = 1;
        return nodes_[n.inputs[k]].grad;
    };
    switch (n.op) {
        case Op::Input:
        case Op::Detach:
            return;  // detach receives gradient but propagates none
        case Op::Add: {
            Array& ga = gin(0);
            Array& gb = gin(1);
            for (int i = 0; i < g.numel(); ++i) {
                ga[i] += g[i];
                gb[i] += g[i];
            }
            return;
        }
        case Op::Sub: {
            Array& ga = gin(0);
            Array& gb = gin(1);
            for (int i = 0; i < g.numel(); ++i) {
                ga[i] += g[i];
                gb[i] -= g[i];
            }
            return;
        }
        case Op::Mul: {
            const Array& a = nodes_[n.inputs[0]].value;
            const Array& b = nodes_[n.inputs[1]].value;
            Array& ga = gin(0);
            Array& gb = gin(1);
            for (int i = 0; i < g.numel(); ++i) {
                ga[i] += g[i] * b[i];
                gb[i] += g[i] * a[i];
            }
            return;
        }
        case Op::Matmul: {
            const Array& w = nodes_[n.inputs[0]].value;
            const Array& x = nodes_[n.inputs[1]].value;
            Array& gw = gin(0);
            Array& gx = gin(1);
            const int m = w.rows(), c = w.cols();
            for (int r = 0; r < m; ++r) {
                const double gr = g[r];
                const double* wr = &w.data[static_cast<size_t>(r) * c];
                double* gwr = &gw.data[static_cast<size_t>(r) * c];
                for (int k = 0; k < c; ++k) {
                    gwr[k] += gr * x[k];
                    gx[k] += gr * wr[k];
                }
            }
            return;
        }
        case Op::Concat: {
            int off = 0;
            for (size_t k = 0; k < n.inputs.size(); ++k) {
                Array& gk = gin(static_cast<int>(k));
                for (int i = 0; i < gk.numel(); ++i) gk[i] += g[off + i];
                off += gk.numel();
            }
            return;
        }
        case Op::Relu: {
            const Array& a = nodes_[n.inputs[0]].value;
            Array& ga = gin(0);
            for (int i = 0; i < g.numel(); ++i) {
                if (a[i] > 0.0) ga[i] += g[i];  // subgradient at 0 is 0
            }
            return;
        }
        case Op::Sigmoid: {
            Array& ga = gin(0);
            for (int i = 0; i < g.numel(); ++i) {
                double s = n.value[i];
                ga[i] += g[i] * s * (1.0 - s);
            }
            return;
        }
        case Op::Tanh: {
            Array& ga = gin(0);
            for (int i = 0; i < g.numel(); ++i) {
                double t = n.value[i];
                ga[i] += g[i] * (1.0 - t * t);
            }
            return;
        }
        case Op::Log: {
            const Array& a = nodes_[n.inputs[0]].value;
            Array& ga = gin(0);
            for (int i = 0; i < g.numel(); ++i) {
                if (n.attr > 0.0 && a[i] < n.attr) continue;  // below the floor: constant
                ga[i] += g[i] / a[i];
            }
            return;
        }
        case Op::Square: {
            const Array& a = nodes_[n.inputs[0]].value;
            Array& ga = gin(0);
            for (int i = 0; i < g.numel(); ++i) ga[i] += g[i] * 2.0 * a[i];
            return;
        }
        case Op::Mean: {
            Array& ga = gin(0);
            const double gv = g[0] / static_cast<double>(ga.numel());
            for (int i = 0; i < ga.numel(); ++i) ga[i] += gv;
            return;
        }
        case Op::Sum: {
            Array& ga = gin(0);
            for (int i = 0; i < ga.numel(); ++i) ga[i] += g[0];
            return;
        }
        case Op::ScalarMul: {
            Array& ga = gin(0);
            for (int i = 0; i < g.numel(); ++i) ga[i] += g[i] * n.attr;
            return;
        }
        case Op::Slice: {
            Array& ga = gin(0);
            for (int i = 0; i < g.numel(); ++i) ga[n.begin + i] += g[i];
            return;
        }
    }
}

void Tape::run_backward(int root) {
    check_id(root, "backward");
    if (!nodes_[root].value.is_scalar()) {
        throw std::invalid_argument("backward: root must be scalar, has shape " +
                                    nodes_[root].value.shape_str());
    }
    for (auto& n : nodes_) {
        std::fill(n.grad.data.begin(), n.grad.data.end(), 0.0);
    }
    std::vector<char> touched(nodes_.size(), 0);
    nodes_[root].grad[0] = 1.0;
    touched[root] = 1;
    for (int id = root; id >= 0; --id) {
        if (!touched[id]) continue;  // gradient identically zero
        if (is_detached(id)) continue;
        scatter(id, touched);
    }
}

std::map<int, Array> Tape::backward(int root) {
    run_backward(root);
    std::map<int, Array> out;
    for (int id = 0; id < size(); ++id) {
        if (nodes_[id].op == Op::Input) out.emplace(id, nodes_[id].grad);
    }
    return out;
}

double Tape::relu_kink_distance(double margin) const {
    double worst = -1.0;
    for (const auto& n : nodes_) {
        if (n.op != Op::Relu) continue;
        const Array& a = nodes_[n.inputs[0]].value;
        for (int i = 0; i < a.numel(); ++i) {
            double d = std::fabs(a[i]);
            if (d <= margin && d > worst) worst = d;
        }
    }
    return worst;
}

GradCheckResult grad_check_full(const ForwardBuilder& build,
                                const std::vector<Array>& leaves, double step) {
    if (step <= 0.0) throw std::invalid_argument("grad_check: step must be positive");

    auto forward = [&](const std::vector<Array>& vals, Tape& t) {
        std::vector<int> ids;
        ids.reserve(vals.size());
        for (const auto& v : vals) ids.push_back(t.input(v));
        return std::pair<int, std::vector<int>>(build(t, ids), ids);
    };

    Tape base;
    auto [root, leaf_ids] = forward(leaves, base);
    base.run_backward(root);

    GradCheckResult res;
    res.kink = base.relu_kink_distance(step) >= 0.0;

    std::vector<Array> work = leaves;
    for (size_t li = 0; li < leaves.size(); ++li) {
        const Array& analytic = base.grad(leaf_ids[li]);
        for (int i = 0; i < work[li].numel(); ++i) {
            double x0 = work[li][i];
            if (std::fabs(x0) <= step) continue;  // relu kink convention
            work[li][i] = x0 + step;
            Tape tp;
            double fp = tp.value(forward(work, tp).first)[0];
            work[li][i] = x0 - step;
            Tape tm;
            double fm = tm.value(forward(work, tm).first)[0];
            work[li][i] = x0;
            double fd = (fp - fm) / (2.0 * step);
            double a = analytic[i];
            double err = std::fabs(a - fd) / std::max(1.0, std::fabs(a));
            if (err > res.max_rel_err) res.max_rel_err = err;
        }
    }
    return res;
}

double grad_check(const ForwardBuilder& build, const std::vector<Array>& leaves,
                  double step) {
    return grad_check_full(build, leaves, step).max_rel_err;
}

}  // namespace trajirl
