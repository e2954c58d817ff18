#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <vector>

namespace fairsynth::nn {

using Matrix = Eigen::MatrixXd;           // batch rows
using RowVector = Eigen::RowVectorXd;

/// Fully connected layer with Adam state. Gradients are computed manually by
/// the owning network.
struct Dense {
    Matrix w;      // in x out
    RowVector b;   // out

    Matrix mw, vw;
    RowVector mb, vb;
    long step = 0;

    Dense() = default;
    Dense(std::size_t in, std::size_t out);

    /// Uniform init with bounds scaled by fan-in.
    void init_uniform(std::mt19937_64& rng);

    Matrix forward(const Matrix& x) const { return (x * w).rowwise() + b; }

    /// grad_out is dL/d(output); accumulates weight grads and returns dL/dx.
    Matrix backward(const Matrix& x, const Matrix& grad_out, Matrix& gw, RowVector& gb) const;

    void adam_update(const Matrix& gw, const RowVector& gb, double lr, double l2);

    std::size_t parameter_count() const { return w.size() + b.size(); }
};

Matrix leaky_relu(const Matrix& x, double leak);
Matrix leaky_relu_grad(const Matrix& pre, const Matrix& grad_out, double leak);

/// Hidden stack with activations plus a linear output layer.
struct Mlp {
    std::vector<Dense> layers;
    double leak = 0.2;  // 0 gives plain ReLU

    struct Cache {
        std::vector<Matrix> inputs;   // input to each layer
        std::vector<Matrix> preacts;  // pre-activation of each hidden layer
    };

    Mlp() = default;
    Mlp(const std::vector<std::size_t>& dims, double leak);

    void init_uniform(std::mt19937_64& rng);

    Matrix forward(const Matrix& x, Cache* cache = nullptr) const;

    struct Grads {
        std::vector<Matrix> gw;
        std::vector<RowVector> gb;
        void zero(const Mlp& net);
    };

    /// Returns dL/dx given dL/d(output).
    Matrix backward(const Cache& cache, const Matrix& grad_out, Grads& grads) const;

    void adam_update(const Grads& grads, double lr, double l2);

    void flatten(std::vector<double>& out) const;
    std::size_t unflatten(const std::vector<double>& in, std::size_t offset);
    std::size_t parameter_count() const;
};

double softplus(double x);
double stable_sigmoid(double x);

}  // namespace fairsynth::nn
