#pragma once

#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "trajirl/rng.hpp"
#include "trajirl/tape.hpp"

namespace trajirl {
namespace nn {

enum class Activation { None, Relu, Sigmoid };

/// Node ids of one fully-connected layer bound to a tape.
struct DenseNodes {
    int w = -1;
    int b = -1;
};

/// Node ids of one LSTM cell bound to a tape. Gate blocks in the packed
/// 4H dimension are ordered (input, forget, cell-candidate, output).
struct LstmNodes {
    int ih = -1;
    int hh = -1;
    int b = -1;
};

int dense_forward(Tape& t, int x, const DenseNodes& layer, Activation act);

/// One LSTM recurrence step; returns (h', c').
std::pair<int, int> lstm_step(Tape& t, int h, int c, int e, const LstmNodes& cell);

/// Inverted dropout: keeps entries with probability keep_prob and scales by
/// 1/keep_prob. Identity (same node id) when not training or keep_prob == 1.
int dropout(Tape& t, int x, double keep_prob, Rng& rng, bool training);

/// Named, insertion-ordered parameter tensors.
class ParameterSet {
public:
    void add(const std::string& name, Array value);
    Array& at(const std::string& name);
    const Array& at(const std::string& name) const;
    bool has(const std::string& name) const { return index_.count(name) > 0; }
    const std::vector<std::string>& names() const { return order_; }
    bool operator==(const ParameterSet& o) const;

private:
    std::vector<std::string> order_;
    std::unordered_map<std::string, Array> values_;
};

struct HyperParams {
    double learning_rate = 0.0001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double l2_weight = 0.0001;
    double keep_prob = 0.8;
    bool l2_on_bias = false;  // biases (names ending in _b) are excluded by default

    void validate() const;
};

/// Adam moments for one parameter partition. Parameters outside `names`
/// are never touched by adam_step on this state.
struct AdamState {
    std::vector<std::string> names;
    std::unordered_map<std::string, Array> m;
    std::unordered_map<std::string, Array> v;
    long step_count = 0;

    static AdamState init(const std::vector<std::string>& names, const ParameterSet& params);
};

using GradByName = std::map<std::string, Array>;

/// Bias-corrected Adam update, applied in place over state.names in order.
/// l2_weight is added to the gradient (classic l2, before the moments).
void adam_step(ParameterSet& params, const GradByName& grads, AdamState& state,
               const HyperParams& hyper);

}  // namespace nn
}  // namespace trajirl
