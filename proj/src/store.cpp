#include <litkg/error.hpp>
#include <litkg/store.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_set>

namespace litkg {

RelationKey RelationKey::of(std::string_view x, std::string_view y) {
    if (x == y) throw Error(ErrorCode::validation, "self relation on '" + std::string(x) + "'");
    if (x < y) return {std::string(x), std::string(y)};
    return {std::string(y), std::string(x)};
}

std::string Ratio::display() const {
    if (numerator == 0 || denominator == 0) return "0";
    const double v = value();
    const int exponent = static_cast<int>(std::floor(std::log10(v)));
    const int decimals = std::max(0, 2 - exponent);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    std::string out = buf;
    if (out.find('.') != std::string::npos) {
        while (out.back() == '0') out.pop_back();
        if (out.back() == '.') out.pop_back();
    }
    return out;
}

std::strong_ordering compare(const Ratio& x, const Ratio& y) {
    using wide = unsigned __int128;
    const wide lhs = static_cast<wide>(x.numerator) * (y.denominator == 0 ? 1 : y.denominator);
    const wide rhs = static_cast<wide>(y.numerator) * (x.denominator == 0 ? 1 : x.denominator);
    // A zero denominator only occurs with a zero numerator.
    if (lhs < rhs) return std::strong_ordering::less;
    if (lhs > rhs) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

// ---------------------------------------------------------------------------

StoreState::StoreState(std::shared_ptr<const Lexicon> lexicon) : lexicon_(std::move(lexicon)) {}

std::size_t StoreState::article_count() const {
    return static_cast<std::size_t>(std::count_if(
        articles_.begin(), articles_.end(), [](const auto& kv) { return !kv.second.empty(); }));
}

const RelationSummary* StoreState::summary(const RelationKey& key) const {
    auto it = pairs_.find(key);
    return it == pairs_.end() ? nullptr : &it->second.summary;
}

std::vector<RelationSummary> StoreState::summaries() const {
    std::vector<RelationSummary> out;
    out.reserve(pairs_.size());
    for (const auto& [key, data] : pairs_) out.push_back(data.summary);
    return out;
}

std::optional<ConceptStats> StoreState::stats(std::string_view concept_id) const {
    auto it = adjacency_.find(std::string(concept_id));
    if (it == adjacency_.end()) return std::nullopt;
    return ConceptStats{it->first, totals_.at(it->first), it->second.size()};
}

std::vector<ConceptStats> StoreState::all_stats() const {
    std::vector<ConceptStats> out;
    out.reserve(adjacency_.size());
    for (const auto& [id, partners] : adjacency_) {
        out.push_back({id, totals_.at(id), partners.size()});
    }
    return out;
}

std::uint64_t StoreState::pair_count(std::string_view a, std::string_view b) const {
    if (a == b) return 0;
    auto it = pairs_.find(RelationKey::of(a, b));
    return it == pairs_.end() ? 0 : it->second.summary.count;
}

bool StoreState::knows_concept(std::string_view concept_id) const {
    if (lexicon_ && lexicon_->find(concept_id)) return true;
    return adjacency_.count(std::string(concept_id)) != 0;
}

ConditionalProbability StoreState::conditional_probability(std::string_view a,
                                                           std::string_view b) const {
    for (auto id : {a, b}) {
        if (!knows_concept(id)) {
            throw Error(ErrorCode::not_found, "unknown concept '" + std::string(id) + "'");
        }
    }
    const std::uint64_t count = pair_count(a, b);
    if (count == 0) return {};
    const std::uint64_t total_a = totals_.at(std::string(a));
    const std::uint64_t total_b = totals_.at(std::string(b));
    return {Ratio{count, total_b}, Ratio{count, total_a}};
}

std::vector<RelatedRow> StoreState::related_concepts(std::string_view a,
                                                     std::optional<ConceptCategory> category_filter,
                                                     RelatedSort sort, std::size_t limit,
                                                     std::size_t offset) const {
    if (!knows_concept(a)) {
        throw Error(ErrorCode::not_found, "unknown concept '" + std::string(a) + "'");
    }
    std::vector<RelatedRow> rows;
    auto adj = adjacency_.find(std::string(a));
    if (adj == adjacency_.end()) return rows;
    const std::uint64_t total_a = totals_.at(adj->first);
    for (const auto& [partner, count] : adj->second) {
        if (category_filter) {
            const ConceptEntry* entry = lexicon_ ? lexicon_->find(partner) : nullptr;
            if (!entry || entry->category != *category_filter) continue;
        }
        rows.push_back({partner, count, Ratio{count, totals_.at(partner)}, Ratio{count, total_a}});
    }
    auto key_cmp = [sort](const RelatedRow& x, const RelatedRow& y) {
        std::strong_ordering c = std::strong_ordering::equal;
        switch (sort) {
            case RelatedSort::count: c = x.count <=> y.count; break;
            case RelatedSort::p_a_given_b: c = compare(x.p_a_given_b, y.p_a_given_b); break;
            case RelatedSort::p_b_given_a: c = compare(x.p_b_given_a, y.p_b_given_a); break;
        }
        if (c != std::strong_ordering::equal) return c == std::strong_ordering::greater;
        return x.concept_id < y.concept_id;
    };
    std::sort(rows.begin(), rows.end(), key_cmp);
    if (offset >= rows.size()) return {};
    const std::size_t end = limit >= rows.size() - offset ? rows.size() : offset + limit;
    return {std::make_move_iterator(rows.begin() + static_cast<std::ptrdiff_t>(offset)),
            std::make_move_iterator(rows.begin() + static_cast<std::ptrdiff_t>(end))};
}

std::vector<RelationTriple> StoreState::evidence(const RelationKey& key, EvidenceOrder order,
                                                 std::size_t limit, std::size_t offset) const {
    auto it = pairs_.find(key);
    if (it == pairs_.end()) {
        throw Error(ErrorCode::not_found, "no relation between '" + key.a + "' and '" + key.b + "'");
    }
    std::vector<const RelationTriple*> refs;
    refs.reserve(it->second.triples.size());
    for (const auto& [slot, triple] : it->second.triples) refs.push_back(&triple);
    // triples are already in (article_id, sentence_index) order
    std::stable_sort(refs.begin(), refs.end(), [order](const auto* x, const auto* y) {
        return order == EvidenceOrder::pub_date_asc ? x->pub_date < y->pub_date
                                                    : x->pub_date > y->pub_date;
    });
    std::vector<RelationTriple> out;
    for (std::size_t i = offset; i < refs.size() && out.size() < limit; ++i) out.push_back(*refs[i]);
    return out;
}

std::vector<RelationTriple> StoreState::all_triples() const {
    std::vector<RelationTriple> out;
    out.reserve(triple_count_);
    for (const auto& [article, slots] : articles_) {
        for (const auto& [key, sentence] : slots) {
            out.push_back(pairs_.at(key).triples.at({article, sentence}));
        }
    }
    return out;
}

StoreState StoreState::triples_before(Date cutoff) const {
    StoreState view(lexicon_);
    for (const auto& [article, slots] : articles_) {
        ArticleTriples kept{article, {}};
        for (const auto& [key, sentence] : slots) {
            const auto& triple = pairs_.at(key).triples.at({article, sentence});
            if (triple.pub_date <= cutoff) kept.triples.push_back(triple);
        }
        if (!kept.triples.empty()) view.replace_article(kept);
    }
    return view;
}

bool StoreState::verify_consistency() const {
    std::map<std::string, std::map<std::string, std::uint64_t>> adjacency;
    std::map<std::string, std::uint64_t> totals;
    std::uint64_t triples = 0;
    for (const auto& [key, data] : pairs_) {
        const auto n = static_cast<std::uint64_t>(data.triples.size());
        if (n == 0 || data.summary.count != n || data.summary.key != key) return false;
        Date first = data.triples.begin()->second.pub_date;
        Date last = first;
        for (const auto& [slot, t] : data.triples) {
            if (t.concept_a != key.a || t.concept_b != key.b) return false;
            first = std::min(first, t.pub_date);
            last = std::max(last, t.pub_date);
        }
        if (first != data.summary.first_pub_date || last != data.summary.last_pub_date) return false;
        adjacency[key.a][key.b] = n;
        adjacency[key.b][key.a] = n;
        totals[key.a] += n;
        totals[key.b] += n;
        triples += n;
    }
    std::uint64_t slots = 0;
    for (const auto& [article, list] : articles_) slots += list.size();
    return adjacency == adjacency_ && totals == totals_ && triples == triple_count_ &&
           slots == triple_count_;
}

void StoreState::add_partner_count(const std::string& x, const std::string& y, std::int64_t delta) {
    auto& partners = adjacency_[x];
    auto& count = partners[y];
    count = static_cast<std::uint64_t>(static_cast<std::int64_t>(count) + delta);
    auto& total = totals_[x];
    total = static_cast<std::uint64_t>(static_cast<std::int64_t>(total) + delta);
    if (count == 0) partners.erase(y);
    if (partners.empty()) {
        adjacency_.erase(x);
        totals_.erase(x);
    }
}

void StoreState::remove_article(const std::string& article_id) {
    auto it = articles_.find(article_id);
    if (it == articles_.end()) return;
    for (const auto& [key, sentence] : it->second) {
        auto pair = pairs_.find(key);
        pair->second.triples.erase({article_id, sentence});
        add_partner_count(key.a, key.b, -1);
        add_partner_count(key.b, key.a, -1);
        --triple_count_;
        if (pair->second.triples.empty()) {
            pairs_.erase(pair);
            continue;
        }
        auto& summary = pair->second.summary;
        summary.count = pair->second.triples.size();
        summary.first_pub_date = summary.last_pub_date = pair->second.triples.begin()->second.pub_date;
        for (const auto& [slot, t] : pair->second.triples) {
            summary.first_pub_date = std::min(summary.first_pub_date, t.pub_date);
            summary.last_pub_date = std::max(summary.last_pub_date, t.pub_date);
        }
    }
    articles_.erase(it);
}

InsertResult StoreState::replace_article(const ArticleTriples& article) {
    InsertResult result;
    auto existing = articles_.find(article.article_id);
    if (existing != articles_.end()) {
        result.articles_replaced = 1;
        remove_article(article.article_id);
    }
    auto& slots = articles_[article.article_id];
    for (const auto& triple : article.triples) {
        RelationKey key{triple.concept_a, triple.concept_b};
        auto& pair = pairs_[key];
        auto [it, inserted] = pair.triples.emplace(TripleSlot{article.article_id, triple.sentence_index}, triple);
        if (!inserted) {
            ++result.deduplicated;
            continue;
        }
        ++result.inserted;
        auto& summary = pair.summary;
        if (summary.count == 0) {
            summary.key = key;
            summary.first_pub_date = summary.last_pub_date = triple.pub_date;
        } else {
            summary.first_pub_date = std::min(summary.first_pub_date, triple.pub_date);
            summary.last_pub_date = std::max(summary.last_pub_date, triple.pub_date);
        }
        ++summary.count;
        add_partner_count(key.a, key.b, 1);
        add_partner_count(key.b, key.a, 1);
        ++triple_count_;
        slots.emplace_back(std::move(key), triple.sentence_index);
    }
    return result;
}

// ---------------------------------------------------------------------------

Store::Store(std::shared_ptr<const Lexicon> lexicon)
    : state_(std::make_shared<StoreState>(std::move(lexicon))) {}

void Store::make_unique() {
    if (state_.use_count() > 1) state_ = std::make_shared<StoreState>(*state_);
}

InsertResult Store::insert_triples(std::span<const RelationTriple> batch) {
    std::vector<ArticleTriples> grouped;
    std::unordered_map<std::string, std::size_t> position;
    for (const auto& triple : batch) {
        auto [it, inserted] = position.emplace(triple.article_id, grouped.size());
        if (inserted) grouped.push_back({triple.article_id, {}});
        grouped[it->second].triples.push_back(triple);
    }
    return replace_articles(grouped);
}

InsertResult Store::replace_articles(std::span<const ArticleTriples> articles) {
    for (const auto& article : articles) {
        for (const auto& t : article.triples) {
            if (t.concept_a == t.concept_b) {
                throw Error(ErrorCode::validation,
                            "triple relates '" + t.concept_a + "' to itself (article " + t.article_id + ")");
            }
            if (t.concept_a > t.concept_b) {
                throw Error(ErrorCode::validation, "triple pair not canonical: '" + t.concept_a +
                                                       "' > '" + t.concept_b + "'");
            }
            if (t.article_id != article.article_id) {
                throw Error(ErrorCode::validation, "triple article id '" + t.article_id +
                                                       "' does not match '" + article.article_id + "'");
            }
        }
    }
    make_unique();
    InsertResult total;
    for (const auto& article : articles) total += state_->replace_article(article);
    return total;
}

}  // namespace litkg
