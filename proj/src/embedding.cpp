#include <litkg/embedding.hpp>
#include <litkg/error.hpp>
#include <litkg/random.hpp>

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

namespace litkg {

void SGNSConfig::validate() const {
    if (dimension == 0) throw Error(ErrorCode::config, "embedding dimension must be positive");
    if (epochs == 0) throw Error(ErrorCode::config, "epochs must be positive");
    if (window == 0) throw Error(ErrorCode::config, "window must be positive");
    if (negative_samples == 0) throw Error(ErrorCode::config, "negative_samples must be positive");
    if (!(initial_lr > 0.0) || !(min_lr > 0.0) || min_lr > initial_lr) {
        throw Error(ErrorCode::config, "learning rates must satisfy 0 < min_lr <= initial_lr");
    }
    if (workers == 0) throw Error(ErrorCode::config, "training workers must be positive");
}

// ---------------------------------------------------------------------------

EmbeddingModel::EmbeddingModel(std::vector<std::string> vocabulary, std::size_t dimension,
                               std::vector<float> data, std::uint64_t seed)
    : vocabulary_(std::move(vocabulary)), dimension_(dimension), data_(std::move(data)), seed_(seed) {
    if (data_.size() != vocabulary_.size() * dimension_) {
        throw Error(ErrorCode::validation, "embedding data size does not match vocabulary x dimension");
    }
    for (std::size_t i = 0; i < vocabulary_.size(); ++i) {
        if (!rows_.emplace(vocabulary_[i], i).second) {
            throw Error(ErrorCode::validation, "duplicate embedding entry '" + vocabulary_[i] + "'");
        }
    }
}

std::optional<std::size_t> EmbeddingModel::find(std::string_view concept_id) const {
    auto it = rows_.find(std::string(concept_id));
    if (it == rows_.end()) return std::nullopt;
    return it->second;
}

void EmbeddingModel::save_text(std::ostream& out) const {
    out << vocabulary_.size() << ' ' << dimension_ << ' ' << seed_ << '\n';
    char buf[32];
    for (std::size_t row = 0; row < vocabulary_.size(); ++row) {
        const auto& id = vocabulary_[row];
        if (id.empty() || std::any_of(id.begin(), id.end(), [](unsigned char c) { return std::isspace(c); })) {
            throw Error(ErrorCode::validation, "concept id '" + id + "' cannot be written in text format");
        }
        out << id;
        for (float v : vector(row)) {
            std::snprintf(buf, sizeof buf, " %.9g", static_cast<double>(v));
            out << buf;
        }
        out << '\n';
    }
}

EmbeddingModel EmbeddingModel::load_text(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::format, "embedding file is empty");
    std::istringstream header(line);
    std::size_t n = 0;
    std::size_t d = 0;
    std::uint64_t seed = 0;
    if (!(header >> n >> d >> seed)) throw ParseError(1, "expected header 'n d seed'");
    std::vector<std::string> vocabulary;
    std::vector<float> data;
    vocabulary.reserve(n);
    data.reserve(n * d);
    for (std::size_t row = 0; row < n; ++row) {
        if (!std::getline(in, line)) throw ParseError(row + 2, "missing embedding row");
        std::istringstream fields(line);
        std::string id;
        fields >> id;
        for (std::size_t k = 0; k < d; ++k) {
            std::string token;
            if (!(fields >> token)) throw ParseError(row + 2, "too few values");
            char* end = nullptr;
            const float v = std::strtof(token.c_str(), &end);
            if (end != token.c_str() + token.size()) throw ParseError(row + 2, "bad value '" + token + "'");
            data.push_back(v);
        }
        std::string extra;
        if (fields >> extra) throw ParseError(row + 2, "too many values");
        vocabulary.push_back(std::move(id));
    }
    return EmbeddingModel(std::move(vocabulary), d, std::move(data), seed);
}

namespace {

constexpr char kMagic[5] = {'K', 'F', 'E', 'M', '1'};

template <typename T>
void put_le(std::ostream& out, T value) {
    static_assert(std::is_unsigned_v<T>);
    unsigned char bytes[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<unsigned char>(value >> (8 * i));
    out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
    unsigned char bytes[sizeof(T)];
    if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
        throw Error(ErrorCode::format, "truncated binary embedding file");
    }
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(bytes[i]) << (8 * i);
    return value;
}

}  // namespace

void EmbeddingModel::save_binary(std::ostream& out) const {
    out.write(kMagic, sizeof kMagic);
    put_le<std::uint64_t>(out, vocabulary_.size());
    put_le<std::uint64_t>(out, dimension_);
    put_le<std::uint64_t>(out, seed_);
    for (std::size_t row = 0; row < vocabulary_.size(); ++row) {
        put_le<std::uint32_t>(out, static_cast<std::uint32_t>(vocabulary_[row].size()));
        out.write(vocabulary_[row].data(), static_cast<std::streamsize>(vocabulary_[row].size()));
        for (float v : vector(row)) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
    }
}

EmbeddingModel EmbeddingModel::load_binary(std::istream& in) {
    char magic[sizeof kMagic];
    if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
        throw Error(ErrorCode::format, "not a KFEM1 embedding file");
    }
    const auto n = get_le<std::uint64_t>(in);
    const auto d = get_le<std::uint64_t>(in);
    const auto seed = get_le<std::uint64_t>(in);
    std::vector<std::string> vocabulary;
    std::vector<float> data;
    for (std::uint64_t row = 0; row < n; ++row) {
        const auto len = get_le<std::uint32_t>(in);
        std::string id(len, '\0');
        if (!in.read(id.data(), len)) throw Error(ErrorCode::format, "truncated binary embedding file");
        vocabulary.push_back(std::move(id));
        for (std::uint64_t k = 0; k < d; ++k) data.push_back(std::bit_cast<float>(get_le<std::uint32_t>(in)));
    }
    return EmbeddingModel(std::move(vocabulary), d, std::move(data), seed);
}

void EmbeddingModel::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
    if (path.extension() == ".txt") {
        save_text(out);
    } else {
        save_binary(out);
    }
    if (!out) throw Error(ErrorCode::io, "failed writing " + path.string());
}

EmbeddingModel EmbeddingModel::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
    char magic[sizeof kMagic] = {};
    in.read(magic, sizeof magic);
    const bool binary = in.gcount() == sizeof magic && std::memcmp(magic, kMagic, sizeof kMagic) == 0;
    in.clear();
    in.seekg(0);
    return binary ? load_binary(in) : load_text(in);
}

// ---------------------------------------------------------------------------

namespace {

// Eight independent accumulators laid out so the compiler can keep them in
// vector registers; a single running sum serializes on add latency.
template <typename T>
double dot_t(std::span<const T> x, std::span<const T> y) {
    const std::size_t n = x.size();
    T acc[8] = {};
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        for (std::size_t j = 0; j < 8; ++j) acc[j] += x[i + j] * y[i + j];
    }
    for (; i < n; ++i) acc[0] += x[i] * y[i];
    double s = 0.0;
    for (T v : acc) s += static_cast<double>(v);
    return s;
}

double dot(std::span<const double> x, std::span<const double> y) { return dot_t(x, y); }

// The float kernels used by training are written with vector extensions;
// GCC 11 leaves the plain loops scalar.
using f32x4 = float __attribute__((vector_size(16)));
using f32x4_unaligned = float __attribute__((vector_size(16), aligned(4), may_alias));

inline f32x4 load4(const float* p) { return *reinterpret_cast<const f32x4_unaligned*>(p); }
inline void store4(float* p, f32x4 v) { *reinterpret_cast<f32x4_unaligned*>(p) = v; }

template <>
double dot_t<float>(std::span<const float> x, std::span<const float> y) {
    const std::size_t n = x.size();
    f32x4 a0 = {0, 0, 0, 0};
    f32x4 a1 = {0, 0, 0, 0};
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        a0 += load4(x.data() + i) * load4(y.data() + i);
        a1 += load4(x.data() + i + 4) * load4(y.data() + i + 4);
    }
    const f32x4 a = a0 + a1;
    double s = (static_cast<double>(a[0]) + a[1]) + (static_cast<double>(a[2]) + a[3]);
    for (; i < n; ++i) s += static_cast<double>(x[i]) * y[i];
    return s;
}

// acc += g * u; u -= step * c
template <typename T>
void accumulate_and_update(T* acc, T* u, const T* c, T g, T step, std::size_t d) {
    for (std::size_t i = 0; i < d; ++i) {
        acc[i] += g * u[i];
        u[i] -= step * c[i];
    }
}

template <>
void accumulate_and_update<float>(float* acc, float* u, const float* c, float g, float step, std::size_t d) {
    const f32x4 gv = {g, g, g, g};
    const f32x4 sv = {step, step, step, step};
    std::size_t i = 0;
    for (; i + 4 <= d; i += 4) {
        const f32x4 uv = load4(u + i);
        store4(acc + i, load4(acc + i) + gv * uv);
        store4(u + i, uv - sv * load4(c + i));
    }
    for (; i < d; ++i) {
        acc[i] += g * u[i];
        u[i] -= step * c[i];
    }
}

// sigmoid(x) and -log(sigmoid(x)) from one exponential, stable for large |x|.
struct LogisticTerms {
    double sigmoid;
    double neg_log_sigmoid;
};
LogisticTerms logistic(double x) {
    const double e = std::exp(-std::abs(x));
    const double l = std::log1p(e);
    if (x >= 0) return {1.0 / (1.0 + e), l};
    return {e / (1.0 + e), l - x};
}

double neg_log_sigmoid(double x) { return logistic(x).neg_log_sigmoid; }

}  // namespace

double sgns_pair_loss(std::span<const double> center, std::span<const double> context,
                      std::span<const std::span<const double>> negatives) {
    double loss = neg_log_sigmoid(dot(context, center));
    for (const auto& u : negatives) loss += neg_log_sigmoid(-dot(u, center));
    return loss;
}

double sgns_pair_gradient(std::span<const double> center, std::span<const double> context,
                          std::span<const std::span<const double>> negatives,
                          std::span<double> grad_center, std::span<double> grad_context,
                          std::span<const std::span<double>> grad_negatives) {
    const std::size_t d = center.size();
    const auto pos = logistic(dot(context, center));
    double loss = pos.neg_log_sigmoid;
    // d/dx of -log s(x) is -(1 - s(x)); of -log s(-x) is s(x).
    const double g_pos = -(1.0 - pos.sigmoid);
    for (std::size_t i = 0; i < d; ++i) {
        grad_center[i] = g_pos * context[i];
        grad_context[i] = g_pos * center[i];
    }
    for (std::size_t k = 0; k < negatives.size(); ++k) {
        const auto neg = logistic(-dot(negatives[k], center));
        loss += neg.neg_log_sigmoid;
        const double g = 1.0 - neg.sigmoid;
        for (std::size_t i = 0; i < d; ++i) {
            grad_center[i] += g * negatives[k][i];
            grad_negatives[k][i] = g * center[i];
        }
    }
    return loss;
}

namespace {

// Returns the loss when kLoss is set, 0 otherwise (skips a log1p per term).
template <typename T, bool kLoss = true>
double sgd_step_t(std::span<T> center, std::span<T> context, std::span<const std::span<T>> negatives, T lr,
                  std::span<T> scratch) {
    const std::size_t d = center.size();
    T* acc = scratch.data();
    const T* c = center.data();
    std::fill(scratch.begin(), scratch.end(), T(0));
    double loss = 0.0;
    auto sigmoid = [&](double x) {
        if constexpr (kLoss) {
            const auto t = logistic(x);
            loss += t.neg_log_sigmoid;
            return t.sigmoid;
        } else {
            return 1.0 / (1.0 + std::exp(-x));
        }
    };
    // Each output row is updated right after its score is taken. The center
    // row only changes at the end, so every score sees the original center
    // and the step equals one gradient step on sgns_pair_loss.
    auto apply = [&](std::span<T> row, double g) {
        const T gt = static_cast<T>(g);
        accumulate_and_update<T>(acc, row.data(), c, gt, lr * gt, d);
    };
    apply(context, -(1.0 - sigmoid(dot_t<T>(context, center))));
    for (const auto& u : negatives) apply(u, 1.0 - sigmoid(-dot_t<T>(u, center)));
    for (std::size_t i = 0; i < d; ++i) center[i] -= lr * acc[i];
    return loss;
}

}  // namespace

double sgns_sgd_step(std::span<double> center, std::span<double> context,
                     std::span<const std::span<double>> negatives, double lr, std::span<double> scratch) {
    return sgd_step_t<double>(center, context, negatives, lr, scratch);
}

namespace {

struct Trainer {
    const std::vector<Walk>& walks;
    const SGNSConfig& config;
    std::size_t vocab = 0;
    std::size_t dim = 0;
    std::vector<float> input;
    std::vector<float> output;
    AliasTable noise;
    std::uint64_t total_centers = 0;
    bool track_loss = true;
    std::atomic<std::uint64_t> processed{0};

    std::span<float> in_row(std::size_t r) { return {input.data() + r * dim, dim}; }
    std::span<float> out_row(std::size_t r) { return {output.data() + r * dim, dim}; }

    double learning_rate() const {
        const double progress = static_cast<double>(processed.load(std::memory_order_relaxed)) /
                                static_cast<double>(std::max<std::uint64_t>(total_centers, 1));
        return std::max(config.min_lr, config.initial_lr - (config.initial_lr - config.min_lr) * progress);
    }

    // Trains walks[begin, end) for one epoch; returns (loss sum, pairs).
    std::pair<double, std::uint64_t> run(std::size_t begin, std::size_t end, Rng& rng) {
        const std::size_t k_max = config.negative_samples;
        std::vector<float> scratch(dim);
        std::vector<std::span<float>> neg_rows;
        std::vector<std::uint32_t> neg_ids;
        double loss_sum = 0.0;
        std::uint64_t pairs = 0;

        for (std::size_t w = begin; w < end; ++w) {
            const Walk& walk = walks[w];
            for (std::size_t i = 0; i < walk.size(); ++i) {
                const double lr = learning_rate();
                const auto center = walk[i];
                const auto reach = static_cast<std::ptrdiff_t>(1 + uniform_below(rng, config.window));
                const auto lo = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(i) - reach);
                const auto hi = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(walk.size()) - 1,
                                                         static_cast<std::ptrdiff_t>(i) + reach);
                for (std::ptrdiff_t j = lo; j <= hi; ++j) {
                    if (j == static_cast<std::ptrdiff_t>(i)) continue;
                    const auto context = walk[static_cast<std::size_t>(j)];
                    neg_ids.clear();
                    for (std::size_t k = 0; k < k_max; ++k) {
                        const auto target = static_cast<std::uint32_t>(noise.sample(rng));
                        if (target != context) neg_ids.push_back(target);
                    }
                    neg_rows.clear();
                    for (auto id : neg_ids) neg_rows.push_back(out_row(id));
                    if (track_loss) {
                        loss_sum += sgd_step_t<float, true>(in_row(center), out_row(context), neg_rows,
                                                            static_cast<float>(lr), scratch);
                    } else {
                        sgd_step_t<float, false>(in_row(center), out_row(context), neg_rows, static_cast<float>(lr),
                                                 scratch);
                    }
                    ++pairs;
                }
                processed.fetch_add(1, std::memory_order_relaxed);
            }
        }
        return {loss_sum, pairs};
    }
};

}  // namespace

EmbeddingModel train_embeddings(const std::vector<Walk>& walks, std::span<const std::string> vocabulary,
                                const SGNSConfig& config, TrainingStats* stats) {
    config.validate();
    std::uint64_t tokens = 0;
    for (const auto& w : walks) tokens += w.size();
    if (tokens == 0) throw Error(ErrorCode::insufficient_data, "no walks to train on");

    Trainer trainer{walks, config, 0, 0, {}, {}, {}, 0, true, {}};
    trainer.vocab = vocabulary.size();
    trainer.dim = config.dimension;
    trainer.track_loss = stats != nullptr;

    std::vector<double> counts(trainer.vocab, 0.0);
    for (const auto& w : walks) {
        for (NodeId node : w) {
            if (node >= trainer.vocab) throw Error(ErrorCode::validation, "walk node outside vocabulary");
            counts[node] += 1.0;
        }
    }
    for (auto& c : counts) c = std::pow(c, 0.75);
    trainer.noise = AliasTable(counts);

    Rng init_rng(derive_seed(config.seed, 0x696e6974ULL));
    trainer.input.resize(trainer.vocab * trainer.dim);
    for (auto& x : trainer.input) x = static_cast<float>((uniform01(init_rng) - 0.5) / static_cast<double>(trainer.dim));
    trainer.output.assign(trainer.vocab * trainer.dim, 0.0f);
    trainer.total_centers = tokens * config.epochs;

    TrainingStats local;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        double loss = 0.0;
        std::uint64_t pairs = 0;
        const std::size_t workers = std::min(config.workers, walks.size());
        if (workers <= 1) {
            Rng rng(derive_seed(config.seed, 0x65706f6368ULL, epoch));
            std::tie(loss, pairs) = trainer.run(0, walks.size(), rng);
        } else {
            std::vector<std::pair<double, std::uint64_t>> partial(workers);
            std::vector<std::thread> threads;
            const std::size_t chunk = (walks.size() + workers - 1) / workers;
            for (std::size_t t = 0; t < workers; ++t) {
                threads.emplace_back([&, t] {
                    Rng rng(derive_seed(config.seed, 0x65706f6368ULL + t + 1, epoch));
                    const std::size_t begin = std::min(walks.size(), t * chunk);
                    partial[t] = trainer.run(begin, std::min(walks.size(), begin + chunk), rng);
                });
            }
            for (auto& th : threads) th.join();
            for (const auto& [l, p] : partial) {
                loss += l;
                pairs += p;
            }
        }
        local.epoch_mean_loss.push_back(pairs ? loss / static_cast<double>(pairs) : 0.0);
        local.pairs += pairs;
    }
    if (stats) *stats = std::move(local);

    return EmbeddingModel(std::vector<std::string>(vocabulary.begin(), vocabulary.end()), config.dimension,
                          std::move(trainer.input), config.seed);
}

}  // namespace litkg
