#include "trajirl/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace trajirl {
namespace nn {

int dense_forward(Tape& t, int x, const DenseNodes& layer, Activation act) {
    int z = t.add(t.matmul(layer.w, x), layer.b);
    switch (act) {
        case Activation::None: return z;
        case Activation::Relu: return t.relu(z);
        case Activation::Sigmoid: return t.sigmoid(z);
    }
    return z;
}

std::pair<int, int> lstm_step(Tape& t, int h, int c, int e, const LstmNodes& cell) {
    const int hidden = t.value(h).numel();
    const int four_h = t.value(cell.b).numel();
    if (four_h != 4 * hidden || t.value(c).numel() != hidden) {
        throw std::invalid_argument("lstm_step: state size " + t.value(h).shape_str() +
                                    " inconsistent with bias " + t.value(cell.b).shape_str());
    }
    int gates = t.add(t.add(t.matmul(cell.ih, e), t.matmul(cell.hh, h)), cell.b);
    int i = t.sigmoid(t.slice(gates, 0, hidden));
    int f = t.sigmoid(t.slice(gates, hidden, 2 * hidden));
    int g = t.tanh(t.slice(gates, 2 * hidden, 3 * hidden));
    int o = t.sigmoid(t.slice(gates, 3 * hidden, 4 * hidden));
    int c_next = t.add(t.mul(f, c), t.mul(i, g));
    int h_next = t.mul(o, t.tanh(c_next));
    return {h_next, c_next};
}

int dropout(Tape& t, int x, double keep_prob, Rng& rng, bool training) {
    if (keep_prob <= 0.0 || keep_prob > 1.0) {
        throw std::invalid_argument("dropout: keep_prob " + std::to_string(keep_prob) +
                                    " outside (0, 1]");
    }
    if (!training || keep_prob == 1.0) return x;
    Array mask = Array::zeros(t.value(x).shape);
    const double scale = 1.0 / keep_prob;
    for (int i = 0; i < mask.numel(); ++i) {
        mask[i] = rng.bernoulli(keep_prob) ? scale : 0.0;
    }
    return t.mul(x, t.input(std::move(mask)));
}

void ParameterSet::add(const std::string& name, Array value) {
    if (has(name)) throw std::invalid_argument("ParameterSet: duplicate name " + name);
    order_.push_back(name);
    values_.emplace(name, std::move(value));
}

Array& ParameterSet::at(const std::string& name) {
    auto it = values_.find(name);
    if (it == values_.end()) throw std::invalid_argument("ParameterSet: no parameter " + name);
    return it->second;
}

const Array& ParameterSet::at(const std::string& name) const {
    auto it = values_.find(name);
    if (it == values_.end()) throw std::invalid_argument("ParameterSet: no parameter " + name);
    return it->second;
}

bool ParameterSet::operator==(const ParameterSet& o) const {
    if (order_ != o.order_) return false;
    for (const auto& n : order_) {
        const Array& a = at(n);
        const Array& b = o.at(n);
        if (a.shape != b.shape || a.data != b.data) return false;
    }
    return true;
}

void HyperParams::validate() const {
    if (learning_rate <= 0.0) throw std::invalid_argument("hyper: learning_rate must be > 0");
    if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0) {
        throw std::invalid_argument("hyper: betas must lie in [0, 1)");
    }
    if (keep_prob <= 0.0 || keep_prob > 1.0) {
        throw std::invalid_argument("hyper: keep_prob must lie in (0, 1]");
    }
}

AdamState AdamState::init(const std::vector<std::string>& names, const ParameterSet& params) {
    AdamState s;
    s.names = names;
    for (const auto& n : names) {
        s.m.emplace(n, Array::zeros(params.at(n).shape));
        s.v.emplace(n, Array::zeros(params.at(n).shape));
    }
    return s;
}

namespace {
bool is_bias(const std::string& name) {
    return name.size() >= 2 && name.compare(name.size() - 2, 2, "_b") == 0;
}
}  // namespace

void adam_step(ParameterSet& params, const GradByName& grads, AdamState& state,
               const HyperParams& hyper) {
    hyper.validate();
    state.step_count += 1;
    const double bc1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(state.step_count));
    const double bc2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(state.step_count));
    for (const auto& name : state.names) {
        Array& p = params.at(name);
        auto git = grads.find(name);
        if (git == grads.end()) {
            throw std::invalid_argument("adam_step: missing gradient for " + name);
        }
        const Array& g = git->second;
        if (!g.same_shape(p)) {
            throw std::invalid_argument("adam_step: gradient shape " + g.shape_str() +
                                        " does not match parameter " + name + " " +
                                        p.shape_str());
        }
        Array& m = state.m.at(name);
        Array& v = state.v.at(name);
        const bool decay = hyper.l2_weight != 0.0 && (hyper.l2_on_bias || !is_bias(name));
        for (int i = 0; i < p.numel(); ++i) {
            double gi = g[i];
            if (decay) gi += hyper.l2_weight * p[i];
            m[i] = hyper.beta1 * m[i] + (1.0 - hyper.beta1) * gi;
            v[i] = hyper.beta2 * v[i] + (1.0 - hyper.beta2) * gi * gi;
            const double m_hat = m[i] / bc1;
            const double v_hat = v[i] / bc2;
            p[i] -= hyper.learning_rate * m_hat / (std::sqrt(v_hat) + hyper.epsilon);
        }
    }
}

}  // namespace nn
}  // namespace trajirl
