#pragma once

#include <litkg/walk.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace litkg {

struct SGNSConfig {
    std::size_t dimension = 128;
    std::size_t window = 16;  // max distance per side; effective window drawn in [1, window]
    std::size_t epochs = 10;
    std::size_t negative_samples = 5;
    double initial_lr = 0.025;
    double min_lr = 1e-4;
    std::uint64_t seed = 1;
    /// 1 is deterministic. More workers update shared parameters without
    /// locks and give run-to-run variation.
    std::size_t workers = 1;

    /// Throws Error(config).
    void validate() const;
};

/// Per-concept input vectors, one row per vocabulary entry.
class EmbeddingModel {
public:
    EmbeddingModel() = default;
    EmbeddingModel(std::vector<std::string> vocabulary, std::size_t dimension,
                   std::vector<float> data, std::uint64_t seed = 0);

    std::size_t size() const { return vocabulary_.size(); }
    std::size_t dimension() const { return dimension_; }
    std::uint64_t seed() const { return seed_; }
    const std::vector<std::string>& vocabulary() const { return vocabulary_; }
    std::optional<std::size_t> find(std::string_view concept_id) const;
    std::span<const float> vector(std::size_t row) const {
        return {data_.data() + row * dimension_, dimension_};
    }
    const std::vector<float>& data() const { return data_; }

    /// Header "n d seed", then "concept_id v1 ... vd" per row at 9
    /// significant digits (round-trips float exactly).
    void save_text(std::ostream& out) const;
    static EmbeddingModel load_text(std::istream& in);

    /// "KFEM1", u64 n, u64 d, u64 seed, then per row u32 id length, id bytes,
    /// d little-endian float32 values.
    void save_binary(std::ostream& out) const;
    static EmbeddingModel load_binary(std::istream& in);

    void save(const std::filesystem::path& path) const;  // format by extension: .txt text, else binary
    static EmbeddingModel load(const std::filesystem::path& path);  // sniffs the magic bytes

    bool operator==(const EmbeddingModel& other) const {
        return vocabulary_ == other.vocabulary_ && dimension_ == other.dimension_ && data_ == other.data_;
    }

private:
    std::vector<std::string> vocabulary_;
    std::size_t dimension_ = 0;
    std::vector<float> data_;
    std::uint64_t seed_ = 0;
    std::unordered_map<std::string, std::size_t> rows_;
};

/// Negative-sampling loss of one (center, context) pair:
///   -log s(u_o . v_c) - sum_k log s(-u_k . v_c)
double sgns_pair_loss(std::span<const double> center, std::span<const double> context,
                      std::span<const std::span<const double>> negatives);

/// Gradient of sgns_pair_loss with respect to each argument. Output spans
/// must match the input sizes; grad_negatives[k] pairs with negatives[k].
/// Returns the loss.
double sgns_pair_gradient(std::span<const double> center, std::span<const double> context,
                          std::span<const std::span<const double>> negatives,
                          std::span<double> grad_center, std::span<double> grad_context,
                          std::span<const std::span<double>> grad_negatives);

/// One SGD step of size lr on sgns_pair_loss, applied in place. Matches
/// subtracting lr times sgns_pair_gradient when the output rows are distinct.
/// `scratch` has the dimension's length. Returns the loss before the step.
double sgns_sgd_step(std::span<double> center, std::span<double> context,
                     std::span<const std::span<double>> negatives, double lr, std::span<double> scratch);

struct TrainingStats {
    std::vector<double> epoch_mean_loss;
    std::uint64_t pairs = 0;
};

/// Skip-gram with negative sampling over walk windows. Negatives come from
/// the unigram^(3/4) distribution of the walk corpus. The learning rate
/// decays linearly from initial_lr to min_lr over epochs x centers.
/// `vocabulary[node]` names the node ids used in the walks.
EmbeddingModel train_embeddings(const std::vector<Walk>& walks,
                                std::span<const std::string> vocabulary,
                                const SGNSConfig& config, TrainingStats* stats = nullptr);

}  // namespace litkg
