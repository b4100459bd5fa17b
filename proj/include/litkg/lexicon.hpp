#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace litkg {

enum class ConceptCategory : std::uint8_t {
    brain_disease,
    cognitive_function,
    medicine,
    brain_region,
    neuron,
    gene_protein,
    pathway,
    neurotransmitter,
};

inline constexpr std::array<ConceptCategory, 8> kAllCategories = {
    ConceptCategory::brain_disease, ConceptCategory::cognitive_function,
    ConceptCategory::medicine,      ConceptCategory::brain_region,
    ConceptCategory::neuron,        ConceptCategory::gene_protein,
    ConceptCategory::pathway,       ConceptCategory::neurotransmitter,
};

std::string_view to_string(ConceptCategory category);
std::optional<ConceptCategory> parse_category(std::string_view text);

struct ConceptEntry {
    std::string id;
    std::string canonical_name;
    ConceptCategory category = ConceptCategory::brain_disease;
    /// Declared surface forms, canonical name included, deduplicated by folded form.
    std::vector<std::string> synonyms;
    /// Surface forms that survived the stoplist and collision resolution.
    std::vector<std::string> matchable_synonyms;
    bool enabled = true;
};

/// Folded surface forms (tokens joined by single spaces) banned at load time.
using Stoplist = std::unordered_set<std::string>;

/// Key under which a surface form is compared: folded tokens joined by ' '.
std::string surface_key(std::string_view surface);

struct SynonymCollision {
    std::string surface;  // folded key
    std::string winner;
    std::vector<std::string> losers;
};

struct StoplistExclusion {
    std::string concept_id;
    std::string surface;
};

struct LexiconReport {
    std::vector<SynonymCollision> collisions;
    std::vector<StoplistExclusion> stoplisted;
    std::vector<std::string> disabled;  // concept ids left without any surface form
};

class Lexicon {
public:
    Lexicon() = default;
    Lexicon(std::vector<ConceptEntry> entries, LexiconReport report);

    const std::vector<ConceptEntry>& entries() const { return entries_; }
    const ConceptEntry* find(std::string_view id) const;
    const LexiconReport& report() const { return report_; }
    std::size_t size() const { return entries_.size(); }
    std::size_t enabled_count() const;

private:
    std::vector<ConceptEntry> entries_;
    std::unordered_map<std::string, std::size_t> by_id_;
    LexiconReport report_;
};

Stoplist load_stoplist(std::istream& in);
Stoplist load_stoplist_file(const std::filesystem::path& path);

/// Reads the JSON Lines lexicon format. Malformed lines raise ParseError with
/// the line number; a repeated concept id is fatal. A surface form claimed by
/// several concepts stays with the concept whose id sorts first; the others
/// lose only that form and are disabled if nothing is left.
Lexicon load_lexicon(std::istream& in, const Stoplist& stoplist = {});
Lexicon load_lexicon_file(const std::filesystem::path& path, const Stoplist& stoplist = {});

/// Token-level dictionary over surface forms.
///
/// The first token of every form is looked up in a hash table. An entry there
/// carries the concept for a single-token form and, for longer forms, the root
/// of a token-edge trie. Matching at one position therefore costs at most
/// max_phrase_len() lookups.
class SurfaceIndex {
public:
    using ConceptRef = std::uint32_t;

    struct Match {
        std::size_t length = 0;  // tokens; 0 means no match
        ConceptRef concept_ref = 0;
    };

    class Builder {
    public:
        /// Throws Error(validation) on an empty token list or when the same
        /// token sequence is registered for two different ids.
        void add(std::vector<std::string> folded_tokens, const std::string& id);
        SurfaceIndex build() &&;

    private:
        std::vector<std::pair<std::vector<std::string>, std::string>> forms_;
    };

    std::optional<std::string_view> resolve(std::span<const std::string> folded_tokens) const;

    /// Longest registered form starting at tokens[start]. Each hash or trie
    /// lookup adds one to *comparisons when the counter is given.
    Match longest_at(std::span<const std::string> tokens, std::size_t start,
                     std::uint64_t* comparisons = nullptr) const;

    const std::string& concept_id(ConceptRef ref) const { return concept_ids_[ref]; }
    std::size_t concept_count() const { return concept_ids_.size(); }
    std::size_t max_phrase_len() const { return max_phrase_len_; }
    /// Number of single-token forms held directly by the hash table.
    std::size_t single_token_count() const;
    /// Number of accepting trie nodes (forms of two or more tokens).
    std::size_t phrase_count() const;
    std::size_t trie_node_count() const { return trie_.size(); }
    bool empty() const { return single_token_count() == 0 && phrase_count() == 0; }

private:
    static constexpr std::int32_t kNone = -1;

    struct Head {
        std::int32_t concept_ref = kNone;
        std::int32_t trie_node = kNone;  // node reached after consuming this token
    };
    struct TrieNode {
        std::int32_t concept_ref = kNone;
        std::unordered_map<std::string, std::int32_t> children;
    };

    std::unordered_map<std::string, Head> single_token_map_;
    std::vector<TrieNode> trie_;
    std::vector<std::string> concept_ids_;
    std::size_t max_phrase_len_ = 0;
};

/// Indexes matchable synonyms of enabled concepts. Throws Error(config) when
/// nothing would be indexed.
SurfaceIndex compile_surface_index(const Lexicon& lexicon);

}  // namespace litkg
