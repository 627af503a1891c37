#include "svcnn/nnkernel.hpp"

#include <cmath>
#include <stdexcept>

namespace svcnn {

std::string to_string(Pooling p) { return p == Pooling::Max ? "max" : "avg"; }

std::string to_string(Nonlinearity g) {
    switch (g) {
        case Nonlinearity::Relu: return "relu";
        case Nonlinearity::Tanh: return "tanh";
        case Nonlinearity::Identity: return "identity";
    }
    return "?";
}

Pooling pooling_from_string(const std::string& s) {
    if (s == "max") return Pooling::Max;
    if (s == "avg") return Pooling::Avg;
    throw std::invalid_argument("unknown pooling: " + s);
}

Nonlinearity nonlinearity_from_string(const std::string& s) {
    if (s == "relu") return Nonlinearity::Relu;
    if (s == "tanh") return Nonlinearity::Tanh;
    if (s == "identity") return Nonlinearity::Identity;
    throw std::invalid_argument("unknown nonlinearity: " + s);
}

double activate(Nonlinearity g, double x) {
    switch (g) {
        case Nonlinearity::Relu: return x > 0.0 ? x : 0.0;
        case Nonlinearity::Tanh: return std::tanh(x);
        case Nonlinearity::Identity: return x;
    }
    return x;
}

double activation_grad_from_output(Nonlinearity g, double y) {
    switch (g) {
        case Nonlinearity::Relu: return y > 0.0 ? 1.0 : 0.0;
        case Nonlinearity::Tanh: return 1.0 - y * y;
        case Nonlinearity::Identity: return 1.0;
    }
    return 1.0;
}

Eigen::VectorXd conv_valid(const Eigen::Ref<const Eigen::MatrixXd>& X, const Filter& f,
                           Nonlinearity g) {
    const Eigen::Index n = X.rows();
    const Eigen::Index h = f.width();
    if (X.cols() != f.dim())
        throw std::invalid_argument("conv_valid: embedding dimension mismatch");
    if (n < h) throw std::invalid_argument("conv_valid: text shorter than filter");
    Eigen::VectorXd v(n - h + 1);
    for (Eigen::Index j = 0; j + h <= n; ++j)
        v[j] = activate(g, X.middleRows(j, h).cwiseProduct(f.weights).sum() + f.bias);
    return v;
}

PoolResult pool_max(const Eigen::Ref<const Eigen::VectorXd>& v) {
    if (v.size() == 0) throw std::invalid_argument("pool_max: empty feature vector");
    PoolResult r{v[0], 0};
    for (Eigen::Index j = 1; j < v.size(); ++j) {
        if (v[j] > r.value) {
            r.value = v[j];
            r.argmax = j;
        }
    }
    return r;
}

double pool_avg(const Eigen::Ref<const Eigen::VectorXd>& v) {
    if (v.size() == 0) throw std::invalid_argument("pool_avg: empty feature vector");
    return v.mean();
}

Eigen::VectorXd softmax(const Eigen::Ref<const Eigen::VectorXd>& logits) {
    if (logits.size() == 0) throw std::invalid_argument("softmax: empty logits");
    Eigen::VectorXd shifted = logits.array() - logits.maxCoeff();
    Eigen::VectorXd exps = shifted.array().exp();
    return exps / exps.sum();
}

double cross_entropy(const Eigen::Ref<const Eigen::VectorXd>& probs, Eigen::Index label) {
    if (label < 0 || label >= probs.size())
        throw std::invalid_argument("cross_entropy: label out of range");
    return -std::log(std::max(probs[label], 1e-300));
}

ForwardTrace forward_cnn(const Eigen::Ref<const Eigen::MatrixXd>& X,
                         const std::vector<Filter>& filters,
                         const Eigen::Ref<const Eigen::MatrixXd>& U, Pooling pooling,
                         Nonlinearity g) {
    const auto m = static_cast<Eigen::Index>(filters.size());
    if (U.cols() != m) throw std::invalid_argument("forward_cnn: U width != filter count");
    ForwardTrace trace;
    trace.feature_vectors.reserve(filters.size());
    trace.representation.resize(m);
    trace.argmax.assign(filters.size(), 0);
    for (Eigen::Index i = 0; i < m; ++i) {
        Eigen::VectorXd v = conv_valid(X, filters[i], g);
        if (pooling == Pooling::Max) {
            PoolResult p = pool_max(v);
            trace.representation[i] = p.value;
            trace.argmax[i] = p.argmax;
        } else {
            trace.representation[i] = pool_avg(v);
        }
        trace.feature_vectors.push_back(std::move(v));
    }
    trace.probabilities = softmax(U * trace.representation);
    return trace;
}

GradientSet backward_from_logits(const Eigen::Ref<const Eigen::MatrixXd>& X,
                                 const std::vector<Filter>& filters,
                                 const Eigen::Ref<const Eigen::MatrixXd>& U,
                                 const Eigen::Ref<const Eigen::VectorXd>& dz, Pooling pooling,
                                 Nonlinearity g, const ForwardTrace& trace,
                                 bool want_input_grad) {
    const auto m = static_cast<Eigen::Index>(filters.size());
    if (trace.feature_vectors.size() != filters.size() || trace.representation.size() != m)
        throw std::invalid_argument("backward: missing or mismatched forward cache");
    if (U.cols() != m || U.rows() != dz.size())
        throw std::invalid_argument("backward: U shape does not match dz/filters");

    GradientSet grads;
    grads.filter_weights.reserve(filters.size());
    grads.filter_biases.resize(m);
    grads.softmax_weights = dz * trace.representation.transpose();
    if (want_input_grad) grads.input = Eigen::MatrixXd::Zero(X.rows(), X.cols());

    const Eigen::VectorXd dr = U.transpose() * dz;
    for (Eigen::Index i = 0; i < m; ++i) {
        const Filter& f = filters[i];
        const Eigen::VectorXd& v = trace.feature_vectors[i];
        const Eigen::Index h = f.width();
        Eigen::MatrixXd gw = Eigen::MatrixXd::Zero(h, f.dim());
        double gb = 0.0;
        auto accumulate_window = [&](Eigen::Index j, double dv) {
            const double da = dv * activation_grad_from_output(g, v[j]);
            if (da == 0.0) return;
            gw += da * X.middleRows(j, h);
            gb += da;
            if (grads.input) grads.input->middleRows(j, h) += da * f.weights;
        };
        if (pooling == Pooling::Max) {
            accumulate_window(trace.argmax[i], dr[i]);
        } else {
            const double dv = dr[i] / static_cast<double>(v.size());
            for (Eigen::Index j = 0; j < v.size(); ++j) accumulate_window(j, dv);
        }
        grads.filter_weights.push_back(std::move(gw));
        grads.filter_biases[i] = gb;
    }
    return grads;
}

GradientSet backward(const Eigen::Ref<const Eigen::MatrixXd>& X, const std::vector<Filter>& filters,
                     const Eigen::Ref<const Eigen::MatrixXd>& U, Eigen::Index label,
                     Pooling pooling, Nonlinearity g, const ForwardTrace& trace,
                     bool want_input_grad) {
    if (trace.probabilities.size() != U.rows())
        throw std::invalid_argument("backward: missing forward cache");
    if (label < 0 || label >= U.rows())
        throw std::invalid_argument("backward: label out of range");
    Eigen::VectorXd dz = trace.probabilities;
    dz[label] -= 1.0;
    return backward_from_logits(X, filters, U, dz, pooling, g, trace, want_input_grad);
}

void sgd_step(std::vector<Filter>& filters, Eigen::MatrixXd& U, const GradientSet& grads,
              double lr) {
    if (grads.filter_weights.size() != filters.size() ||
        grads.filter_biases.size() != static_cast<Eigen::Index>(filters.size()))
        throw std::invalid_argument("sgd_step: gradient/parameter count mismatch");
    if (grads.softmax_weights.rows() != U.rows() || grads.softmax_weights.cols() != U.cols())
        throw std::invalid_argument("sgd_step: softmax gradient shape mismatch");
    for (size_t i = 0; i < filters.size(); ++i) {
        if (grads.filter_weights[i].rows() != filters[i].weights.rows() ||
            grads.filter_weights[i].cols() != filters[i].weights.cols())
            throw std::invalid_argument("sgd_step: filter gradient shape mismatch");
        filters[i].weights -= lr * grads.filter_weights[i];
        filters[i].bias -= lr * grads.filter_biases[static_cast<Eigen::Index>(i)];
    }
    U -= lr * grads.softmax_weights;
}

}  // namespace svcnn
