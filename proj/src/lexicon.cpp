#include <litkg/error.hpp>
#include <litkg/lexicon.hpp>
#include <litkg/text.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>

namespace litkg {

namespace {

constexpr std::array<std::string_view, 8> kCategoryNames = {
    "brain_disease", "cognitive_function", "medicine", "brain_region",
    "neuron",        "gene_protein",       "pathway",  "neurotransmitter",
};

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (const auto& t : tokens) {
        if (!out.empty()) out.push_back(' ');
        out += t;
    }
    return out;
}

std::string required_string(const nlohmann::json& obj, const char* key, std::size_t line) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_string()) {
        throw ParseError(line, std::string("missing or non-string field '") + key + "'");
    }
    return it->get<std::string>();
}

}  // namespace

std::string_view to_string(ConceptCategory category) {
    return kCategoryNames[static_cast<std::size_t>(category)];
}

std::optional<ConceptCategory> parse_category(std::string_view text) {
    for (std::size_t i = 0; i < kCategoryNames.size(); ++i) {
        if (kCategoryNames[i] == text) return kAllCategories[i];
    }
    return std::nullopt;
}

std::string surface_key(std::string_view surface) { return join_tokens(fold_tokens(surface)); }

Lexicon::Lexicon(std::vector<ConceptEntry> entries, LexiconReport report)
    : entries_(std::move(entries)), report_(std::move(report)) {
    for (std::size_t i = 0; i < entries_.size(); ++i) by_id_.emplace(entries_[i].id, i);
}

const ConceptEntry* Lexicon::find(std::string_view id) const {
    auto it = by_id_.find(std::string(id));
    return it == by_id_.end() ? nullptr : &entries_[it->second];
}

std::size_t Lexicon::enabled_count() const {
    return static_cast<std::size_t>(
        std::count_if(entries_.begin(), entries_.end(), [](const auto& e) { return e.enabled; }));
}

Stoplist load_stoplist(std::istream& in) {
    Stoplist stoplist;
    std::string line;
    while (std::getline(in, line)) {
        const std::string entry = trim(line);
        if (entry.empty() || entry.front() == '#') continue;
        std::string key = surface_key(entry);
        if (!key.empty()) stoplist.insert(std::move(key));
    }
    return stoplist;
}

Stoplist load_stoplist_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io, "cannot open stoplist " + path.string());
    return load_stoplist(in);
}

Lexicon load_lexicon(std::istream& in, const Stoplist& stoplist) {
    std::vector<ConceptEntry> entries;
    std::unordered_map<std::string, std::size_t> seen_ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
        }
        if (!obj.is_object()) throw ParseError(line_no, "expected a JSON object");

        ConceptEntry entry;
        entry.id = required_string(obj, "id", line_no);
        entry.canonical_name = required_string(obj, "name", line_no);
        const std::string category = required_string(obj, "category", line_no);
        auto parsed = parse_category(category);
        if (!parsed) throw ParseError(line_no, "unknown category '" + category + "'");
        entry.category = *parsed;
        if (entry.id.empty()) throw ParseError(line_no, "empty concept id");
        if (auto it = obj.find("enabled"); it != obj.end()) {
            if (!it->is_boolean()) throw ParseError(line_no, "'enabled' must be a boolean");
            entry.enabled = it->get<bool>();
        }

        std::vector<std::string> declared{entry.canonical_name};
        if (auto it = obj.find("synonyms"); it != obj.end()) {
            if (!it->is_array()) throw ParseError(line_no, "'synonyms' must be an array");
            for (const auto& s : *it) {
                if (!s.is_string()) throw ParseError(line_no, "synonym must be a string");
                declared.push_back(s.get<std::string>());
            }
        }
        std::unordered_set<std::string> keys;
        for (auto& surface : declared) {
            const std::string key = surface_key(surface);
            if (key.empty()) {
                throw ParseError(line_no, "synonym '" + surface + "' has no tokens");
            }
            if (keys.insert(key).second) entry.synonyms.push_back(std::move(surface));
        }

        if (seen_ids.count(entry.id)) {
            throw Error(ErrorCode::validation, "line " + std::to_string(line_no) +
                                                   ": duplicate concept id '" + entry.id + "'");
        }
        seen_ids.emplace(entry.id, entries.size());
        entries.push_back(std::move(entry));
    }

    LexiconReport report;
    // folded key -> indices of enabled concepts claiming it
    std::map<std::string, std::vector<std::size_t>> claims;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        auto& entry = entries[i];
        if (!entry.enabled) continue;
        for (const auto& surface : entry.synonyms) {
            std::string key = surface_key(surface);
            if (stoplist.count(key)) {
                report.stoplisted.push_back({entry.id, surface});
                continue;
            }
            claims[key].push_back(i);
        }
    }

    std::vector<std::unordered_set<std::string>> winning(entries.size());
    for (auto& [key, owners] : claims) {
        std::sort(owners.begin(), owners.end(),
                  [&](std::size_t a, std::size_t b) { return entries[a].id < entries[b].id; });
        winning[owners.front()].insert(key);
        if (owners.size() > 1) {
            SynonymCollision collision{key, entries[owners.front()].id, {}};
            for (std::size_t k = 1; k < owners.size(); ++k) {
                collision.losers.push_back(entries[owners[k]].id);
            }
            report.collisions.push_back(std::move(collision));
        }
    }

    for (std::size_t i = 0; i < entries.size(); ++i) {
        auto& entry = entries[i];
        if (!entry.enabled) continue;
        for (const auto& surface : entry.synonyms) {
            if (winning[i].count(surface_key(surface))) entry.matchable_synonyms.push_back(surface);
        }
        if (entry.matchable_synonyms.empty()) {
            entry.enabled = false;
            report.disabled.push_back(entry.id);
        }
    }
    return Lexicon(std::move(entries), std::move(report));
}

Lexicon load_lexicon_file(const std::filesystem::path& path, const Stoplist& stoplist) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io, "cannot open lexicon " + path.string());
    return load_lexicon(in, stoplist);
}

// ---------------------------------------------------------------------------

void SurfaceIndex::Builder::add(std::vector<std::string> folded_tokens, const std::string& id) {
    if (folded_tokens.empty()) {
        throw Error(ErrorCode::validation, "surface form for '" + id + "' has no tokens");
    }
    forms_.emplace_back(std::move(folded_tokens), id);
}

SurfaceIndex SurfaceIndex::Builder::build() && {
    SurfaceIndex index;
    std::unordered_map<std::string, ConceptRef> refs;
    auto ref_for = [&](const std::string& id) {
        auto [it, inserted] = refs.emplace(id, static_cast<ConceptRef>(index.concept_ids_.size()));
        if (inserted) index.concept_ids_.push_back(id);
        return static_cast<std::int32_t>(it->second);
    };
    auto claim = [&](std::int32_t& slot, std::int32_t ref, const std::vector<std::string>& tokens) {
        if (slot != kNone && slot != ref) {
            throw Error(ErrorCode::validation, "surface form '" + join_tokens(tokens) +
                                                   "' registered for both '" +
                                                   index.concept_ids_[slot] + "' and '" +
                                                   index.concept_ids_[ref] + "'");
        }
        slot = ref;
    };

    for (const auto& [tokens, id] : forms_) {
        const std::int32_t ref = ref_for(id);
        index.max_phrase_len_ = std::max(index.max_phrase_len_, tokens.size());
        Head& head = index.single_token_map_[tokens.front()];
        if (tokens.size() == 1) {
            claim(head.concept_ref, ref, tokens);
            continue;
        }
        if (head.trie_node == kNone) {
            head.trie_node = static_cast<std::int32_t>(index.trie_.size());
            index.trie_.emplace_back();
        }
        std::int32_t node = head.trie_node;
        for (std::size_t i = 1; i < tokens.size(); ++i) {
            auto it = index.trie_[node].children.find(tokens[i]);
            if (it == index.trie_[node].children.end()) {
                const auto child = static_cast<std::int32_t>(index.trie_.size());
                index.trie_[node].children.emplace(tokens[i], child);
                index.trie_.emplace_back();
                node = child;
            } else {
                node = it->second;
            }
        }
        claim(index.trie_[node].concept_ref, ref, tokens);
    }
    return index;
}

std::optional<std::string_view> SurfaceIndex::resolve(
    std::span<const std::string> folded_tokens) const {
    if (folded_tokens.empty()) return std::nullopt;
    auto head = single_token_map_.find(folded_tokens.front());
    if (head == single_token_map_.end()) return std::nullopt;
    if (folded_tokens.size() == 1) {
        if (head->second.concept_ref == kNone) return std::nullopt;
        return concept_ids_[head->second.concept_ref];
    }
    std::int32_t node = head->second.trie_node;
    for (std::size_t i = 1; i < folded_tokens.size() && node != kNone; ++i) {
        auto it = trie_[node].children.find(folded_tokens[i]);
        node = it == trie_[node].children.end() ? kNone : it->second;
    }
    if (node == kNone || trie_[node].concept_ref == kNone) return std::nullopt;
    return concept_ids_[trie_[node].concept_ref];
}

SurfaceIndex::Match SurfaceIndex::longest_at(std::span<const std::string> tokens,
                                             std::size_t start,
                                             std::uint64_t* comparisons) const {
    Match best;
    if (start >= tokens.size()) return best;
    if (comparisons) ++*comparisons;
    auto head = single_token_map_.find(tokens[start]);
    if (head == single_token_map_.end()) return best;
    if (head->second.concept_ref != kNone) {
        best = {1, static_cast<ConceptRef>(head->second.concept_ref)};
    }
    std::int32_t node = head->second.trie_node;
    const std::size_t limit = std::min(tokens.size(), start + max_phrase_len_);
    for (std::size_t j = start + 1; j < limit && node != kNone; ++j) {
        if (comparisons) ++*comparisons;
        auto it = trie_[node].children.find(tokens[j]);
        if (it == trie_[node].children.end()) break;
        node = it->second;
        if (trie_[node].concept_ref != kNone) {
            best = {j - start + 1, static_cast<ConceptRef>(trie_[node].concept_ref)};
        }
    }
    return best;
}

std::size_t SurfaceIndex::single_token_count() const {
    return static_cast<std::size_t>(std::count_if(
        single_token_map_.begin(), single_token_map_.end(),
        [](const auto& kv) { return kv.second.concept_ref != kNone; }));
}

std::size_t SurfaceIndex::phrase_count() const {
    return static_cast<std::size_t>(std::count_if(
        trie_.begin(), trie_.end(), [](const auto& n) { return n.concept_ref != kNone; }));
}

SurfaceIndex compile_surface_index(const Lexicon& lexicon) {
    SurfaceIndex::Builder builder;
    std::size_t forms = 0;
    for (const auto& entry : lexicon.entries()) {
        if (!entry.enabled) continue;
        for (const auto& surface : entry.matchable_synonyms) {
            builder.add(fold_tokens(surface), entry.id);
            ++forms;
        }
    }
    if (forms == 0) throw Error(ErrorCode::config, "lexicon has no enabled surface forms");
    return std::move(builder).build();
}

}  // namespace litkg
