#include "fairsynth/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include "fairsynth/nn.hpp"
#include "fairsynth/preprocess.hpp"
#include "json.hpp"

namespace fairsynth {

using json = nlohmann::json;
using nn::Matrix;
using nn::RowVector;

namespace {

// Mean discriminator loss below this for a whole epoch means the adversarial
// game has collapsed (a healthy game hovers around 2 log 2).
constexpr double kDiscriminatorCollapseThreshold = 1e-3;
constexpr std::size_t kMarginalPoolCap = 4096;
// Instance noise on discriminator inputs, annealed to zero over the run.
// Binary columns are point masses the generator's continuous scores can never
// hit exactly; early smoothing keeps the discriminator's gradient informative
// instead of letting it separate the supports, and the decay restores crisp
// matching by the end.
constexpr double kInstanceNoiseStart = 0.1;
constexpr double kInstanceNoiseFloor = 0.1;

struct AdamBuf {
    Matrix mw, vw;
    RowVector mb, vb;
    long step = 0;
};

void adam_step(Matrix& w, RowVector& b, AdamBuf& buf, const Matrix& gw, const RowVector& gb,
               double lr, double l2) {
    constexpr double kBeta1 = 0.5;
    constexpr double kBeta2 = 0.999;
    constexpr double kEps = 1e-8;
    ++buf.step;
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(buf.step));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(buf.step));
    buf.mw = kBeta1 * buf.mw + (1.0 - kBeta1) * gw;
    buf.vw = kBeta2 * buf.vw + (1.0 - kBeta2) * gw.cwiseProduct(gw);
    w -= lr *
         ((buf.mw / c1).cwiseQuotient(((buf.vw / c2).cwiseSqrt().array() + kEps).matrix()) +
          l2 * w);
    buf.mb = kBeta1 * buf.mb + (1.0 - kBeta1) * gb;
    buf.vb = kBeta2 * buf.vb + (1.0 - kBeta2) * gb.cwiseProduct(gb);
    b -= lr *
         ((buf.mb / c1).cwiseQuotient(((buf.vb / c2).cwiseSqrt().array() + kEps).matrix()) +
          l2 * b);
}

// Per-node activations kept for backprop through the topological sweep.
struct SweepCache {
    std::vector<Matrix> v, a1, h1, a2, h2;
    Matrix output;
};

class SequentialGenerator {
public:
    SequentialGenerator(const CausalDag& dag, std::size_t hidden, std::mt19937_64& init_rng)
        : dag_(dag),
          topo_(topological_order(dag)),
          weights_(dag, hidden),
          ghw_(Matrix::Zero(hidden, dag.node_count())),
          ghb_(RowVector::Zero(dag.node_count())) {
        weights_.init_uniform(init_rng);
        head_adam_.mw = Matrix::Zero(hidden, dag.node_count());
        head_adam_.vw = Matrix::Zero(hidden, dag.node_count());
        head_adam_.mb = RowVector::Zero(dag.node_count());
        head_adam_.vb = RowVector::Zero(dag.node_count());
    }

    // Topological sweep in standardized space; z is batch x d.
    Matrix forward(const Matrix& z, SweepCache* cache) const {
        const std::size_t d = dag_.node_count();
        const std::size_t n = z.rows();
        Matrix values = Matrix::Zero(n, d);
        if (cache) {
            cache->v.assign(d, {});
            cache->a1.assign(d, {});
            cache->h1.assign(d, {});
            cache->a2.assign(d, {});
            cache->h2.assign(d, {});
        }
        for (const auto& name : topo_) {
            const std::size_t j = dag_.node_index(name);
            Matrix v = Matrix::Zero(n, d + 1);
            for (std::size_t p : dag_.parents(j)) v.col(p) = values.col(p);
            v.col(d) = z.col(j);
            Matrix a1 = weights_.l1.forward(v);
            Matrix h1 = nn::leaky_relu(a1, weights_.leak);
            Matrix a2 = weights_.l2.forward(h1);
            Matrix h2 = nn::leaky_relu(a2, weights_.leak);
            values.col(j) = h2 * weights_.head_w.col(j);
            values.col(j).array() += weights_.head_b(j);
            if (cache) {
                cache->v[j] = std::move(v);
                cache->a1[j] = std::move(a1);
                cache->h1[j] = std::move(h1);
                cache->a2[j] = std::move(a2);
                cache->h2[j] = std::move(h2);
            }
        }
        if (cache) cache->output = values;
        return values;
    }

    // Backprop of dL/d(output) through the sweep: children push gradient into
    // their parents' columns, the shared block accumulates over all nodes.
    void backward_and_update(const SweepCache& cache, const Matrix& grad_output, double lr,
                             double l2) {
        Matrix grad = grad_output;
        Matrix gl1w = Matrix::Zero(weights_.l1.w.rows(), weights_.l1.w.cols());
        RowVector gl1b = RowVector::Zero(weights_.l1.b.size());
        Matrix gl2w = Matrix::Zero(weights_.l2.w.rows(), weights_.l2.w.cols());
        RowVector gl2b = RowVector::Zero(weights_.l2.b.size());
        ghw_.setZero();
        ghb_.setZero();

        for (auto it = topo_.rbegin(); it != topo_.rend(); ++it) {
            const std::size_t j = dag_.node_index(*it);
            const Eigen::VectorXd gj = grad.col(j);
            ghw_.col(j).noalias() += cache.h2[j].transpose() * gj;
            ghb_(j) += gj.sum();
            Matrix dh2 = gj * weights_.head_w.col(j).transpose();
            Matrix da2 = nn::leaky_relu_grad(cache.a2[j], dh2, weights_.leak);
            Matrix dh1 = weights_.l2.backward(cache.h1[j], da2, gl2w, gl2b);
            Matrix da1 = nn::leaky_relu_grad(cache.a1[j], dh1, weights_.leak);
            Matrix dv = da1 * weights_.l1.w.transpose();
            gl1w.noalias() += cache.v[j].transpose() * da1;
            gl1b += da1.colwise().sum();
            for (std::size_t p : dag_.parents(j)) grad.col(p) += dv.col(p);
        }

        weights_.l1.adam_update(gl1w, gl1b, lr, l2);
        weights_.l2.adam_update(gl2w, gl2b, lr, l2);
        adam_step(weights_.head_w, weights_.head_b, head_adam_, ghw_, ghb_, lr, l2);
    }

    GeneratorWeights take_weights() { return std::move(weights_); }

private:
    const CausalDag& dag_;
    std::vector<std::string> topo_;
    GeneratorWeights weights_;
    AdamBuf head_adam_;
    Matrix ghw_;
    RowVector ghb_;
};

Matrix sample_noise(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix z(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) z(r, c) = normal(rng);
    }
    return z;
}

Table reorder_to_dag(const Table& data, const CausalDag& dag) {
    for (const auto& col : data.schema()) {
        if (!dag.has_node(col.name)) {
            throw ValidationError("data column '" + col.name + "' is not a DAG node");
        }
    }
    std::vector<std::size_t> order;
    std::vector<Column> schema;
    for (const auto& node : dag.nodes()) {
        if (!data.has_column(node.name)) {
            throw ValidationError("DAG node '" + node.name + "' is missing from the data");
        }
        order.push_back(data.column_index(node.name));
        schema.push_back({node.name, node.kind});
    }
    std::vector<double> values;
    values.reserve(data.rows() * schema.size());
    for (std::size_t r = 0; r < data.rows(); ++r) {
        for (std::size_t c : order) values.push_back(data.at(r, c));
    }
    return Table(std::move(schema), std::move(values));
}

Table build_marginal_pool(const Table& raw, std::mt19937_64& rng) {
    if (raw.rows() <= kMarginalPoolCap) return raw;
    std::vector<std::size_t> idx(raw.rows());
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(kMarginalPoolCap);
    std::sort(idx.begin(), idx.end());
    return raw.select_rows(idx);
}

}  // namespace

void TrainConfig::validate() const {
    if (epochs < 0) throw ValidationError("epochs must be >= 0");
    if (learning_rate <= 0.0) throw ValidationError("learning rate must be positive");
    if (discriminator_steps < 1) throw ValidationError("discriminator_steps must be >= 1");
    if (hidden_layers != 2) throw ValidationError("this generator uses exactly 2 hidden layers");
    if (hidden_width < 0) throw ValidationError("hidden width must be >= 0");
    if (batch_size < 1) throw ValidationError("batch size must be >= 1");
    if (l2_weight < 0.0) throw ValidationError("regularization weight must be >= 0");
}

TrainConfig TrainConfig::from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw IoError(std::string("invalid train config JSON: ") + e.what());
    }
    TrainConfig cfg;
    cfg.epochs = doc.value("epochs", cfg.epochs);
    cfg.learning_rate = doc.value("learning_rate", cfg.learning_rate);
    cfg.discriminator_steps = doc.value("discriminator_steps", cfg.discriminator_steps);
    cfg.hidden_layers = doc.value("hidden_layers", cfg.hidden_layers);
    cfg.hidden_width = doc.value("hidden_width", cfg.hidden_width);
    cfg.batch_size = doc.value("batch_size", cfg.batch_size);
    cfg.l2_weight = doc.value("l2_weight", cfg.l2_weight);
    cfg.seed = doc.value("seed", cfg.seed);
    return cfg;
}

std::string TrainConfig::to_json() const {
    return json{{"epochs", epochs},
                {"learning_rate", learning_rate},
                {"discriminator_steps", discriminator_steps},
                {"hidden_layers", hidden_layers},
                {"hidden_width", hidden_width},
                {"batch_size", batch_size},
                {"l2_weight", l2_weight},
                {"seed", seed}}
        .dump();
}

GeneratorModel fit(const Table& data, const CausalDag& dag, const TrainConfig& config,
                   std::ostream* train_log) {
    config.validate();
    if (data.rows() < 2) throw ValidationError("training needs at least two rows");

    const Table raw = reorder_to_dag(data, dag);
    auto [standardized, standardizer] = preprocess(raw);

    const std::size_t d = dag.node_count();
    const std::size_t hidden = config.hidden_width > 0
                                   ? static_cast<std::size_t>(config.hidden_width)
                                   : 2 * d;
    const std::size_t n = standardized.rows();
    const std::size_t batch = std::min<std::size_t>(config.batch_size, n);

    std::mt19937_64 init_rng(mix_seed(config.seed, "init"));
    std::mt19937_64 batch_rng(mix_seed(config.seed, "batch"));
    std::mt19937_64 noise_rng(mix_seed(config.seed, "train-noise"));
    std::mt19937_64 pool_rng(mix_seed(config.seed, "pool"));

    SequentialGenerator generator(dag, hidden, init_rng);
    nn::Mlp discriminator({d, hidden, hidden, 1}, 0.2);
    discriminator.init_uniform(init_rng);

    Matrix rows(n, d);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d; ++c) rows(r, c) = standardized.at(r, c);
    }

    std::vector<std::size_t> index(n);
    std::iota(index.begin(), index.end(), 0);
    std::size_t cursor = n;  // forces an initial shuffle

    // Real minibatches cycle through a shuffled pass of the data; each
    // exhausted pass is reshuffled.
    auto next_real_batch = [&](Matrix& real) {
        for (std::size_t i = 0; i < batch; ++i) {
            if (cursor == n) {
                std::shuffle(index.begin(), index.end(), batch_rng);
                cursor = 0;
            }
            real.row(i) = rows.row(index[cursor++]);
        }
    };

    nn::Mlp::Grads d_grads;
    const auto start = std::chrono::steady_clock::now();
    const std::size_t iterations_per_epoch = std::max<std::size_t>(1, n / batch);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        double epoch_d_loss = 0.0;
        double epoch_g_loss = 0.0;
        std::size_t d_batches = 0;
        std::size_t g_batches = 0;
        const double progress =
            config.epochs > 1 ? static_cast<double>(epoch) / (config.epochs - 1) : 1.0;
        const double noise_scale =
            kInstanceNoiseFloor + (kInstanceNoiseStart - kInstanceNoiseFloor) * (1.0 - progress);

        Matrix real(batch, d);
        for (std::size_t iter = 0; iter < iterations_per_epoch; ++iter) {
            // Inner loop: `discriminator_steps` discriminator updates drive D
            // toward optimality for the current generator.
            for (int k = 0; k < config.discriminator_steps; ++k) {
                next_real_batch(real);
                const Matrix real_noisy =
                    real + noise_scale * sample_noise(noise_rng, batch, d);
                const Matrix fake =
                    generator.forward(sample_noise(noise_rng, batch, d), nullptr) +
                    noise_scale * sample_noise(noise_rng, batch, d);
                nn::Mlp::Cache real_cache, fake_cache;
                const Matrix real_logit = discriminator.forward(real_noisy, &real_cache);
                const Matrix fake_logit = discriminator.forward(fake, &fake_cache);

                double loss = 0.0;
                Matrix g_real(batch, 1), g_fake(batch, 1);
                for (std::size_t i = 0; i < batch; ++i) {
                    loss += nn::softplus(-real_logit(i, 0)) + nn::softplus(fake_logit(i, 0));
                    g_real(i, 0) = (nn::stable_sigmoid(real_logit(i, 0)) - 1.0) / batch;
                    g_fake(i, 0) = nn::stable_sigmoid(fake_logit(i, 0)) / batch;
                }
                d_grads.zero(discriminator);
                discriminator.backward(real_cache, g_real, d_grads);
                discriminator.backward(fake_cache, g_fake, d_grads);
                discriminator.adam_update(d_grads, config.learning_rate, config.l2_weight);
                epoch_d_loss += loss / batch;
                ++d_batches;
            }

            // One generator update, non-saturating loss. The additive input
            // noise passes the gradient through unchanged.
            SweepCache cache;
            const Matrix fake2 = generator.forward(sample_noise(noise_rng, batch, d), &cache) +
                                 noise_scale * sample_noise(noise_rng, batch, d);
            nn::Mlp::Cache d_cache;
            const Matrix logit = discriminator.forward(fake2, &d_cache);
            double g_loss = 0.0;
            Matrix g_logit(batch, 1);
            for (std::size_t i = 0; i < batch; ++i) {
                g_loss += nn::softplus(-logit(i, 0));
                g_logit(i, 0) = (nn::stable_sigmoid(logit(i, 0)) - 1.0) / batch;
            }
            d_grads.zero(discriminator);
            const Matrix grad_fake = discriminator.backward(d_cache, g_logit, d_grads);
            generator.backward_and_update(cache, grad_fake, config.learning_rate,
                                          config.l2_weight);
            epoch_g_loss += g_loss / batch;
            ++g_batches;
        }

        const double mean_d = d_batches ? epoch_d_loss / d_batches : 0.0;
        const double mean_g = g_batches ? epoch_g_loss / g_batches : 0.0;
        if (train_log) {
            const auto wall =
                std::chrono::duration_cast<std::chrono::milliseconds>(
                    std::chrono::steady_clock::now() - start)
                    .count();
            (*train_log) << json{{"epoch", epoch + 1},
                                 {"d_loss", mean_d},
                                 {"g_loss", mean_g},
                                 {"wall_ms", wall}}
                                .dump()
                         << "\n";
        }
        if (d_batches > 0 && mean_d < kDiscriminatorCollapseThreshold) {
            throw TrainingDivergedError(
                "discriminator loss collapsed for a full epoch (epoch " +
                std::to_string(epoch + 1) + ", d_loss " + std::to_string(mean_d) +
                ", g_loss " + std::to_string(mean_g) + ")");
        }
    }

    return GeneratorModel(dag, std::move(standardizer), generator.take_weights(),
                          build_marginal_pool(raw, pool_rng));
}

}  // namespace fairsynth
