#include "fairsynth/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace fairsynth::nn {

Dense::Dense(std::size_t in, std::size_t out)
    : w(Matrix::Zero(in, out)),
      b(RowVector::Zero(out)),
      mw(Matrix::Zero(in, out)),
      vw(Matrix::Zero(in, out)),
      mb(RowVector::Zero(out)),
      vb(RowVector::Zero(out)) {}

void Dense::init_uniform(std::mt19937_64& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(w.rows()));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
        for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = u(rng);
    }
    for (Eigen::Index j = 0; j < b.size(); ++j) b(j) = u(rng);
    mw.setZero();
    vw.setZero();
    mb.setZero();
    vb.setZero();
    step = 0;
}

Matrix Dense::backward(const Matrix& x, const Matrix& grad_out, Matrix& gw,
                       RowVector& gb) const {
    gw.noalias() += x.transpose() * grad_out;
    gb += grad_out.colwise().sum();
    return grad_out * w.transpose();
}

void Dense::adam_update(const Matrix& gw_in, const RowVector& gb_in, double lr, double l2) {
    constexpr double kBeta1 = 0.5;
    constexpr double kBeta2 = 0.999;
    constexpr double kEps = 1e-8;
    ++step;
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));

    // Decoupled weight decay: the moments track the data gradient only.
    mw = kBeta1 * mw + (1.0 - kBeta1) * gw_in;
    vw = kBeta2 * vw + (1.0 - kBeta2) * gw_in.cwiseProduct(gw_in);
    w -= lr * ((mw / c1).cwiseQuotient(((vw / c2).cwiseSqrt().array() + kEps).matrix()) +
               l2 * w);

    mb = kBeta1 * mb + (1.0 - kBeta1) * gb_in;
    vb = kBeta2 * vb + (1.0 - kBeta2) * gb_in.cwiseProduct(gb_in);
    b -= lr * ((mb / c1).cwiseQuotient(((vb / c2).cwiseSqrt().array() + kEps).matrix()) +
               l2 * b);
}

Matrix leaky_relu(const Matrix& x, double leak) {
    return x.unaryExpr([leak](double v) { return v > 0.0 ? v : leak * v; });
}

Matrix leaky_relu_grad(const Matrix& pre, const Matrix& grad_out, double leak) {
    Matrix out(grad_out.rows(), grad_out.cols());
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        for (Eigen::Index j = 0; j < out.cols(); ++j) {
            out(i, j) = grad_out(i, j) * (pre(i, j) > 0.0 ? 1.0 : leak);
        }
    }
    return out;
}

Mlp::Mlp(const std::vector<std::size_t>& dims, double leak_in) : leak(leak_in) {
    if (dims.size() < 2) throw std::invalid_argument("Mlp needs at least two dims");
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
        layers.emplace_back(dims[i], dims[i + 1]);
    }
}

void Mlp::init_uniform(std::mt19937_64& rng) {
    for (auto& layer : layers) layer.init_uniform(rng);
}

Matrix Mlp::forward(const Matrix& x, Cache* cache) const {
    Matrix cur = x;
    if (cache) {
        cache->inputs.clear();
        cache->preacts.clear();
    }
    for (std::size_t i = 0; i < layers.size(); ++i) {
        if (cache) cache->inputs.push_back(cur);
        Matrix pre = layers[i].forward(cur);
        if (i + 1 < layers.size()) {
            if (cache) cache->preacts.push_back(pre);
            cur = leaky_relu(pre, leak);
        } else {
            cur = std::move(pre);  // linear output layer
        }
    }
    return cur;
}

void Mlp::Grads::zero(const Mlp& net) {
    gw.resize(net.layers.size());
    gb.resize(net.layers.size());
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        gw[i] = Matrix::Zero(net.layers[i].w.rows(), net.layers[i].w.cols());
        gb[i] = RowVector::Zero(net.layers[i].b.size());
    }
}

Matrix Mlp::backward(const Cache& cache, const Matrix& grad_out, Grads& grads) const {
    Matrix grad = grad_out;
    for (std::size_t i = layers.size(); i-- > 0;) {
        grad = layers[i].backward(cache.inputs[i], grad, grads.gw[i], grads.gb[i]);
        if (i > 0) {
            grad = leaky_relu_grad(cache.preacts[i - 1], grad, leak);
        }
    }
    return grad;
}

void Mlp::adam_update(const Grads& grads, double lr, double l2) {
    for (std::size_t i = 0; i < layers.size(); ++i) {
        layers[i].adam_update(grads.gw[i], grads.gb[i], lr, l2);
    }
}

void Mlp::flatten(std::vector<double>& out) const {
    for (const auto& layer : layers) {
        out.insert(out.end(), layer.w.data(), layer.w.data() + layer.w.size());
        out.insert(out.end(), layer.b.data(), layer.b.data() + layer.b.size());
    }
}

std::size_t Mlp::unflatten(const std::vector<double>& in, std::size_t offset) {
    for (auto& layer : layers) {
        if (offset + layer.w.size() + layer.b.size() > in.size()) {
            throw std::out_of_range("weight blob too short for network shape");
        }
        std::copy(in.begin() + offset, in.begin() + offset + layer.w.size(), layer.w.data());
        offset += layer.w.size();
        std::copy(in.begin() + offset, in.begin() + offset + layer.b.size(), layer.b.data());
        offset += layer.b.size();
    }
    return offset;
}

std::size_t Mlp::parameter_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers) n += layer.parameter_count();
    return n;
}

double softplus(double x) {
    if (x > 30.0) return x;
    if (x < -30.0) return std::exp(x);
    return std::log1p(std::exp(x));
}

double stable_sigmoid(double x) {
    if (x >= 0.0) {
        const double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace fairsynth::nn
