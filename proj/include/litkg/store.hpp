#pragma once

#include <litkg/date.hpp>
#include <litkg/extractor.hpp>
#include <litkg/lexicon.hpp>

#include <compare>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace litkg {

/// Unordered concept pair stored canonically (a < b).
struct RelationKey {
    std::string a;
    std::string b;

    /// Orders the two ids; throws Error(validation) if they are equal.
    static RelationKey of(std::string_view x, std::string_view y);

    auto operator<=>(const RelationKey&) const = default;
};

/// Exact non-negative ratio. Presentation rounding happens only in display().
struct Ratio {
    std::uint64_t numerator = 0;
    std::uint64_t denominator = 0;

    double value() const {
        return denominator == 0 ? 0.0 : static_cast<double>(numerator) / static_cast<double>(denominator);
    }
    /// Three significant digits, fixed notation, trailing zeros dropped
    /// (74/631 -> "0.117").
    std::string display() const;

    /// Exact comparison by cross multiplication.
    friend std::strong_ordering compare(const Ratio& x, const Ratio& y);
};

struct ConditionalProbability {
    Ratio p_a_given_b;  // count(a,b) / total(b)
    Ratio p_b_given_a;  // count(a,b) / total(a)
};

struct RelationSummary {
    RelationKey key;
    std::uint64_t count = 0;
    Date first_pub_date{};
    Date last_pub_date{};

    bool operator==(const RelationSummary&) const = default;
};

struct ConceptStats {
    std::string concept_id;
    std::uint64_t total_relations = 0;  // sum of pair counts (triple multiplicity)
    std::uint64_t partner_count = 0;

    bool operator==(const ConceptStats&) const = default;
};

enum class RelatedSort { count, p_a_given_b, p_b_given_a };
enum class EvidenceOrder { pub_date_asc, pub_date_desc };

struct RelatedRow {
    std::string concept_id;
    std::uint64_t count = 0;
    Ratio p_a_given_b;  // a is the queried concept, b the partner in this row
    Ratio p_b_given_a;
};

struct InsertResult {
    std::size_t inserted = 0;
    std::size_t deduplicated = 0;
    std::size_t articles_replaced = 0;

    InsertResult& operator+=(const InsertResult& other) {
        inserted += other.inserted;
        deduplicated += other.deduplicated;
        articles_replaced += other.articles_replaced;
        return *this;
    }
};

/// The complete new triple set of one article (possibly empty).
struct ArticleTriples {
    std::string article_id;
    std::vector<RelationTriple> triples;
};

inline constexpr std::size_t kNoLimit = std::numeric_limits<std::size_t>::max();

/// Triples plus everything derived from them. Read-only once shared with a
/// snapshot; the Store clones it before mutating a shared instance.
class StoreState {
public:
    explicit StoreState(std::shared_ptr<const Lexicon> lexicon = nullptr);

    const Lexicon* lexicon() const { return lexicon_.get(); }
    std::shared_ptr<const Lexicon> lexicon_ptr() const { return lexicon_; }

    std::size_t relation_count() const { return pairs_.size(); }
    std::uint64_t triple_count() const { return triple_count_; }
    /// Articles that currently contribute at least one triple.
    std::size_t article_count() const;
    /// Concepts with at least one relation.
    std::size_t concept_count() const { return adjacency_.size(); }

    const RelationSummary* summary(const RelationKey& key) const;
    std::vector<RelationSummary> summaries() const;  // key order
    std::optional<ConceptStats> stats(std::string_view concept_id) const;
    std::vector<ConceptStats> all_stats() const;  // concept id order
    std::uint64_t pair_count(std::string_view a, std::string_view b) const;

    /// Known means present in the lexicon (when one is attached) or having
    /// relations.
    bool knows_concept(std::string_view concept_id) const;

    /// Throws Error(not_found) for an unknown concept.
    ConditionalProbability conditional_probability(std::string_view a, std::string_view b) const;

    /// Partners of `a`, optionally restricted to one category (requires a
    /// lexicon), sorted descending by `sort`, ties by concept id ascending.
    std::vector<RelatedRow> related_concepts(std::string_view a,
                                             std::optional<ConceptCategory> category_filter,
                                             RelatedSort sort, std::size_t limit = kNoLimit,
                                             std::size_t offset = 0) const;

    /// Throws Error(not_found) for an unknown pair. Ties in date order break
    /// by (article_id, sentence_index) ascending.
    std::vector<RelationTriple> evidence(const RelationKey& key, EvidenceOrder order,
                                         std::size_t limit = kNoLimit, std::size_t offset = 0) const;

    /// Every stored triple, ordered by (article_id, sentence_index, key).
    std::vector<RelationTriple> all_triples() const;

    /// State rebuilt from triples with pub_date <= cutoff only.
    StoreState triples_before(Date cutoff) const;

    /// Full recount of every derived counter against the stored triples.
    bool verify_consistency() const;

private:
    friend class Store;

    struct TripleSlot {
        std::string article_id;
        std::size_t sentence_index = 0;
        auto operator<=>(const TripleSlot&) const = default;
    };
    struct PairData {
        RelationSummary summary;
        std::map<TripleSlot, RelationTriple> triples;
    };

    InsertResult replace_article(const ArticleTriples& article);
    void remove_article(const std::string& article_id);
    void add_partner_count(const std::string& x, const std::string& y, std::int64_t delta);

    std::shared_ptr<const Lexicon> lexicon_;
    std::map<RelationKey, PairData> pairs_;
    // article -> (key, sentence_index) of its stored triples
    std::map<std::string, std::vector<std::pair<RelationKey, std::size_t>>> articles_;
    std::map<std::string, std::map<std::string, std::uint64_t>> adjacency_;
    std::map<std::string, std::uint64_t> totals_;
    std::uint64_t triple_count_ = 0;
};

/// Single-writer triple store with revision semantics: a re-delivered
/// article replaces all of its earlier triples.
class Store {
public:
    explicit Store(std::shared_ptr<const Lexicon> lexicon = nullptr);

    /// Groups the batch by article id and replaces each article's triple set.
    /// Throws Error(validation) before mutating anything if a triple is not
    /// canonical (a < b).
    InsertResult insert_triples(std::span<const RelationTriple> batch);
    InsertResult replace_articles(std::span<const ArticleTriples> articles);

    const StoreState& state() const { return *state_; }

    /// Shares the current state; later writes copy it first, so the returned
    /// pointer never changes underneath its holders.
    std::shared_ptr<const StoreState> share() const { return state_; }

    std::uint64_t last_snapshot_id() const { return last_snapshot_id_; }
    void set_last_snapshot_id(std::uint64_t id) { last_snapshot_id_ = id; }

private:
    void make_unique();

    std::shared_ptr<StoreState> state_;
    std::uint64_t last_snapshot_id_ = 0;
};

}  // namespace litkg
