#include <litkg/error.hpp>
#include <litkg/eval.hpp>
#include <litkg/random.hpp>
#include <litkg/semantics.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <set>

namespace litkg {

namespace {

struct Scored {
    double score;
    bool positive;
};

std::vector<Scored> merged(std::span<const double> positives, std::span<const double> negatives) {
    if (positives.empty() || negatives.empty()) {
        throw Error(ErrorCode::insufficient_data, "AUROC needs at least one positive and one negative");
    }
    std::vector<Scored> all;
    all.reserve(positives.size() + negatives.size());
    for (double s : positives) all.push_back({s, true});
    for (double s : negatives) all.push_back({s, false});
    for (const auto& x : all) {
        if (std::isnan(x.score)) throw Error(ErrorCode::validation, "NaN score");
    }
    std::sort(all.begin(), all.end(), [](const Scored& x, const Scored& y) { return x.score < y.score; });
    return all;
}

}  // namespace

double auroc(std::span<const double> positives, std::span<const double> negatives) {
    const auto all = merged(positives, negatives);
    // Twice the U statistic, kept integral so the result is exact.
    std::uint64_t twice_u = 0;
    std::uint64_t negatives_below = 0;
    for (std::size_t i = 0; i < all.size();) {
        std::size_t j = i;
        std::uint64_t pos = 0;
        std::uint64_t neg = 0;
        for (; j < all.size() && all[j].score == all[i].score; ++j) (all[j].positive ? pos : neg) += 1;
        twice_u += 2 * pos * negatives_below + pos * neg;
        negatives_below += neg;
        i = j;
    }
    return static_cast<double>(twice_u) /
           (2.0 * static_cast<double>(positives.size()) * static_cast<double>(negatives.size()));
}

std::vector<RocPoint> roc_curve(std::span<const double> positives, std::span<const double> negatives) {
    auto all = merged(positives, negatives);
    std::reverse(all.begin(), all.end());
    const auto p = static_cast<double>(positives.size());
    const auto n = static_cast<double>(negatives.size());
    std::vector<RocPoint> points{{std::numeric_limits<double>::infinity(), 0.0, 0.0}};
    std::size_t tp = 0;
    std::size_t fp = 0;
    for (std::size_t i = 0; i < all.size();) {
        std::size_t j = i;
        for (; j < all.size() && all[j].score == all[i].score; ++j) (all[j].positive ? tp : fp) += 1;
        points.push_back({all[i].score, static_cast<double>(fp) / n, static_cast<double>(tp) / p});
        i = j;
    }
    return points;
}

void write_roc_csv(std::ostream& out, std::span<const RocPoint> points) {
    out << "threshold,fpr,tpr\n";
    char buf[96];
    for (const auto& pt : points) {
        if (std::isinf(pt.threshold)) {
            std::snprintf(buf, sizeof buf, "inf,%.17g,%.17g\n", pt.fpr, pt.tpr);
        } else {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", pt.threshold, pt.fpr, pt.tpr);
        }
        out << buf;
    }
}

double embedding_cosine(const EmbeddingModel& model, std::size_t row_a, std::size_t row_b) {
    const auto a = model.vector(row_a);
    const auto b = model.vector(row_b);
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * b[i];
        na += static_cast<double>(a[i]) * a[i];
        nb += static_cast<double>(b[i]) * b[i];
    }
    return na > 0.0 && nb > 0.0 ? dot / std::sqrt(na * nb) : 0.0;
}

namespace {

std::vector<std::size_t> model_rows(const RelationGraph& graph, const EmbeddingModel& model) {
    std::vector<std::size_t> rows(graph.node_count());
    for (NodeId v = 0; v < graph.node_count(); ++v) {
        auto row = model.find(graph.name(v));
        if (!row) throw Error(ErrorCode::validation, "no embedding for graph node '" + graph.name(v) + "'");
        rows[v] = *row;
    }
    return rows;
}

// Distinct unordered pairs not adjacent in `graph`, drawn uniformly.
std::vector<std::pair<NodeId, NodeId>> sample_non_edges(const RelationGraph& graph, std::size_t wanted,
                                                        std::uint64_t seed) {
    const std::uint64_t n = graph.node_count();
    const std::uint64_t available = n * (n - 1) / 2 - graph.edge_count();
    if (wanted > available) {
        throw Error(ErrorCode::insufficient_data, "only " + std::to_string(available) +
                                                      " non-adjacent pairs for " + std::to_string(wanted) +
                                                      " negatives");
    }
    Rng rng(derive_seed(seed, 0x6e6567ULL));
    std::vector<std::pair<NodeId, NodeId>> out;
    if (wanted * 2 > available) {
        for (NodeId u = 0; u < n; ++u) {
            for (NodeId v = u + 1; v < n; ++v) {
                if (!graph.adjacent(u, v)) out.emplace_back(u, v);
            }
        }
        shuffle(out, rng);
        out.resize(wanted);
        return out;
    }
    std::set<std::pair<NodeId, NodeId>> seen;
    while (out.size() < wanted) {
        auto u = static_cast<NodeId>(uniform_below(rng, n));
        auto v = static_cast<NodeId>(uniform_below(rng, n));
        if (u == v) continue;
        if (u > v) std::swap(u, v);
        if (graph.adjacent(u, v) || !seen.emplace(u, v).second) continue;
        out.emplace_back(u, v);
    }
    return out;
}

std::size_t negative_count(std::size_t positives, double ratio) {
    if (!(ratio > 0.0) || !std::isfinite(ratio)) throw Error(ErrorCode::config, "negative ratio must be positive");
    return static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(positives)));
}

AurocReport report_from(std::vector<double> pos, std::vector<double> neg, std::uint64_t seed) {
    AurocReport report;
    report.auroc = auroc(pos, neg);
    report.roc = roc_curve(pos, neg);
    report.positives = pos.size();
    report.negatives = neg.size();
    report.seed = seed;
    return report;
}

}  // namespace

AurocReport auroc_link_prediction(const RelationGraph& graph, const EmbeddingModel& model, double negative_ratio,
                                  std::uint64_t seed) {
    if (graph.edge_count() < 2) throw Error(ErrorCode::insufficient_data, "AUROC needs at least 2 edges");
    const auto rows = model_rows(graph, model);
    std::vector<double> pos;
    for (const auto& e : graph.edges()) pos.push_back(embedding_cosine(model, rows[e.u], rows[e.v]));
    std::vector<double> neg;
    for (const auto& [u, v] : sample_non_edges(graph, negative_count(pos.size(), negative_ratio), seed)) {
        neg.push_back(embedding_cosine(model, rows[u], rows[v]));
    }
    return report_from(std::move(pos), std::move(neg), seed);
}

EdgeSplit split_edges(const RelationGraph& graph, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0)) throw Error(ErrorCode::config, "holdout fraction must be in (0, 1)");
    std::vector<std::size_t> order(graph.edge_count());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(derive_seed(seed, 0x73706c6974ULL));
    shuffle(order, rng);

    const auto target = static_cast<std::size_t>(std::round(fraction * static_cast<double>(graph.edge_count())));
    std::vector<std::size_t> degree(graph.node_count());
    for (NodeId v = 0; v < graph.node_count(); ++v) degree[v] = graph.degree(v);
    std::vector<bool> held(graph.edge_count(), false);
    EdgeSplit split;
    for (std::size_t i : order) {
        if (split.held_out.size() == target) break;
        const auto& e = graph.edges()[i];
        if (degree[e.u] < 2 || degree[e.v] < 2) continue;
        --degree[e.u];
        --degree[e.v];
        held[i] = true;
        split.held_out.push_back(e);
    }
    std::vector<std::tuple<std::string, std::string, std::uint64_t>> kept;
    for (std::size_t i = 0; i < graph.edge_count(); ++i) {
        if (held[i]) continue;
        const auto& e = graph.edges()[i];
        kept.emplace_back(graph.name(e.u), graph.name(e.v), e.weight);
    }
    split.train = RelationGraph::from_edges(kept);
    return split;
}

AurocReport auroc_held_out_edges(const RelationGraph& full, const EdgeSplit& split, const EmbeddingModel& model,
                                 double negative_ratio, std::uint64_t seed) {
    if (split.held_out.empty()) throw Error(ErrorCode::insufficient_data, "no held-out edges");
    const auto rows = model_rows(full, model);
    std::vector<double> pos;
    for (const auto& e : split.held_out) pos.push_back(embedding_cosine(model, rows[e.u], rows[e.v]));
    std::vector<double> neg;
    for (const auto& [u, v] : sample_non_edges(full, negative_count(pos.size(), negative_ratio), seed)) {
        neg.push_back(embedding_cosine(model, rows[u], rows[v]));
    }
    return report_from(std::move(pos), std::move(neg), seed);
}

std::size_t HoldoutReport::predicted() const {
    std::size_t total = 0;
    for (auto c : rank_histogram) total += c;
    return total;
}

bool HoldoutReport::accounting_holds() const {
    return excluded_unseen_concept <= new_relations_total &&
           predicted() + unpredictable == new_relations_total - excluded_unseen_concept;
}

HoldoutReport score_holdout(const StoreState& store, const StoreState& before, Date cutoff,
                            const RelationGraph& graph, const EmbeddingModel& model, std::size_t k) {
    if (k == 0) throw Error(ErrorCode::config, "k must be at least 1");
    HoldoutReport report;
    report.cutoff = cutoff;
    report.k = k;
    report.rank_histogram.assign(k, 0);
    for (const auto& summary : store.summaries()) {
        if (before.summary(summary.key)) continue;
        ++report.new_relations_total;
        if (!model.find(summary.key.a) || !model.find(summary.key.b) || !graph.find(summary.key.a) ||
            !graph.find(summary.key.b)) {
            ++report.excluded_unseen_concept;
            continue;
        }
        HoldoutPrediction prediction{summary.key.a, summary.key.b, 0, false};
        if (auto rank = mutual_rank(summary.key.a, summary.key.b, k, model, graph)) {
            prediction.rank = rank->rank;
            prediction.one_sided = rank->one_sided;
            ++report.rank_histogram[rank->rank - 1];
            if (rank->one_sided) ++report.one_sided_count;
        } else {
            ++report.unpredictable;
        }
        report.predictions.push_back(std::move(prediction));
    }
    return report;
}

HoldoutReport temporal_holdout(const StoreState& store, Date cutoff, const WalkConfig& walk, const SGNSConfig& sgns,
                               std::size_t k) {
    const StoreState before = store.triples_before(cutoff);
    if (before.relation_count() == 0) {
        throw Error(ErrorCode::insufficient_data, "no relations on or before " + format_date(cutoff));
    }
    const RelationGraph graph = build_graph(before);
    const auto walks = generate_walks(graph, walk);
    const EmbeddingModel model = train_embeddings(walks, graph.names(), sgns);
    return score_holdout(store, before, cutoff, graph, model, k);
}

RelationGraph planted_partition(const PlantedPartition& params) {
    if (params.blocks == 0 || params.block_size == 0) throw Error(ErrorCode::config, "empty partition");
    const std::size_t n = params.blocks * params.block_size;
    const int width = static_cast<int>(std::to_string(n - 1).size());
    auto name = [&](std::size_t i) {
        std::string digits = std::to_string(i);
        return "n" + std::string(static_cast<std::size_t>(width) - digits.size(), '0') + digits;
    };
    Rng rng(derive_seed(params.seed, 0x706c616e74ULL));
    std::vector<std::tuple<std::string, std::string, std::uint64_t>> edges;
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = u + 1; v < n; ++v) {
            const bool same = u / params.block_size == v / params.block_size;
            if (uniform01(rng) < (same ? params.p_in : params.p_out)) edges.emplace_back(name(u), name(v), 1);
        }
    }
    return RelationGraph::from_edges(edges);
}

nlohmann::ordered_json to_json(const AurocReport& report) {
    nlohmann::ordered_json j;
    j["auroc"] = report.auroc;
    j["positives"] = report.positives;
    j["negatives"] = report.negatives;
    j["seed"] = report.seed;
    return j;
}

nlohmann::ordered_json to_json(const HoldoutReport& report) {
    nlohmann::ordered_json j;
    j["cutoff"] = format_date(report.cutoff);
    j["k"] = report.k;
    j["new_relations_total"] = report.new_relations_total;
    j["excluded_unseen_concept"] = report.excluded_unseen_concept;
    j["unpredictable"] = report.unpredictable;
    j["predicted"] = report.predicted();
    j["one_sided_count"] = report.one_sided_count;
    auto& hist = j["rank_histogram"];
    hist = nlohmann::ordered_json::array();
    for (std::size_t r = 0; r < report.rank_histogram.size(); ++r) {
        hist.push_back({{"rank", r + 1}, {"count", report.rank_histogram[r]}});
    }
    auto& preds = j["predictions"];
    preds = nlohmann::ordered_json::array();
    for (const auto& p : report.predictions) {
        nlohmann::ordered_json row;
        row["a"] = p.concept_a;
        row["b"] = p.concept_b;
        if (p.rank) {
            row["rank"] = p.rank;
            row["one_sided"] = p.one_sided;
        } else {
            row["rank"] = nullptr;
        }
        preds.push_back(std::move(row));
    }
    return j;
}

}  // namespace litkg
