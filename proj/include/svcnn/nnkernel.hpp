#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace svcnn {

enum class Pooling { Max, Avg };
enum class Nonlinearity { Relu, Tanh, Identity };

std::string to_string(Pooling p);
std::string to_string(Nonlinearity g);
Pooling pooling_from_string(const std::string& s);
Nonlinearity nonlinearity_from_string(const std::string& s);

double activate(Nonlinearity g, double x);
// Derivative expressed through the activation output; relu's derivative at
// exactly zero pre-activation is defined as 0.
double activation_grad_from_output(Nonlinearity g, double y);

// One convolution filter: an h x d weight block plus a bias.
struct Filter {
    Eigen::MatrixXd weights;  // h rows (words covered), d columns
    double bias = 0.0;

    Eigen::Index width() const { return weights.rows(); }
    Eigen::Index dim() const { return weights.cols(); }
};

// Valid convolution over the n x d text matrix: one activation per window,
// v[j] = g(<W, X[j..j+h-1]> + b), length n-h+1. Throws if n < h.
Eigen::VectorXd conv_valid(const Eigen::Ref<const Eigen::MatrixXd>& X, const Filter& f,
                           Nonlinearity g);

struct PoolResult {
    double value = 0.0;
    Eigen::Index argmax = 0;  // lowest index on ties; meaningful for max pooling
};

PoolResult pool_max(const Eigen::Ref<const Eigen::VectorXd>& v);
double pool_avg(const Eigen::Ref<const Eigen::VectorXd>& v);

// Numerically stable softmax (max-subtraction).
Eigen::VectorXd softmax(const Eigen::Ref<const Eigen::VectorXd>& logits);

// -log(probs[label]); probabilities are clamped at 1e-300 before the log.
double cross_entropy(const Eigen::Ref<const Eigen::VectorXd>& probs, Eigen::Index label);

// Everything the backward pass needs from a forward pass.
struct ForwardTrace {
    std::vector<Eigen::VectorXd> feature_vectors;  // m vectors, length n-h+1
    Eigen::VectorXd representation;                // pooled r, length m
    Eigen::VectorXd probabilities;                 // length |C|
    std::vector<Eigen::Index> argmax;              // per-filter, max pooling only
};

// filters: m filters sharing width h and dim d; U: |C| x m softmax weights,
// one row per class. Logits are U * r.
ForwardTrace forward_cnn(const Eigen::Ref<const Eigen::MatrixXd>& X,
                         const std::vector<Filter>& filters,
                         const Eigen::Ref<const Eigen::MatrixXd>& U, Pooling pooling,
                         Nonlinearity g);

struct GradientSet {
    std::vector<Eigen::MatrixXd> filter_weights;  // per filter, h x d
    Eigen::VectorXd filter_biases;                // length m
    Eigen::MatrixXd softmax_weights;              // |C| x m
    std::optional<Eigen::MatrixXd> input;         // n x d, when requested
};

// Backpropagates an arbitrary gradient dz of some scalar objective with
// respect to the logits. Max pooling routes through the stored argmax; avg
// pooling spreads 1/(n-h+1) over every position.
GradientSet backward_from_logits(const Eigen::Ref<const Eigen::MatrixXd>& X,
                                 const std::vector<Filter>& filters,
                                 const Eigen::Ref<const Eigen::MatrixXd>& U,
                                 const Eigen::Ref<const Eigen::VectorXd>& dz, Pooling pooling,
                                 Nonlinearity g, const ForwardTrace& trace,
                                 bool want_input_grad = false);

// Exact gradients of the cross-entropy loss at `label` (dz = probs - onehot).
GradientSet backward(const Eigen::Ref<const Eigen::MatrixXd>& X, const std::vector<Filter>& filters,
                     const Eigen::Ref<const Eigen::MatrixXd>& U, Eigen::Index label,
                     Pooling pooling, Nonlinearity g, const ForwardTrace& trace,
                     bool want_input_grad = false);

// p <- p - lr * grad for every parameter; shapes must match exactly.
void sgd_step(std::vector<Filter>& filters, Eigen::MatrixXd& U, const GradientSet& grads,
              double lr);

}  // namespace svcnn
