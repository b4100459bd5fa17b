#pragma once

#include <litkg/corpus.hpp>
#include <litkg/date.hpp>
#include <litkg/lexicon.hpp>

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace litkg {

enum class TextField : std::uint8_t { title, abstract_text };

struct ConceptMention {
    std::string concept_id;
    std::size_t sentence_index = 0;
    std::size_t token_begin = 0;
    std::size_t token_end = 0;  // exclusive
    TextField field = TextField::title;

    bool operator==(const ConceptMention&) const = default;
};

/// One piece of co-occurrence evidence. concept_a < concept_b always.
struct RelationTriple {
    std::string concept_a;
    std::string concept_b;
    std::string article_id;
    std::string sentence_text;
    std::size_t sentence_index = 0;
    Date pub_date{};
    Date extraction_date{};
    std::vector<std::string> species;

    bool operator==(const RelationTriple&) const = default;
};

void to_json(nlohmann::json& j, const RelationTriple& t);
void from_json(const nlohmann::json& j, RelationTriple& t);

/// Surface forms of species names, matched as token sequences.
class SpeciesLexicon {
public:
    struct Entry {
        std::string species;
        std::vector<std::string> surface_forms;
    };

    /// Throws Error(validation) if a surface form maps to two species.
    explicit SpeciesLexicon(std::vector<Entry> entries);

    /// human, mouse, rat, macaque, zebrafish, drosophila, c_elegans with
    /// plural and common alternative forms.
    static SpeciesLexicon bundled();
    /// JSON Lines: {"species": str, "surface_forms": [str]}.
    static SpeciesLexicon load(std::istream& in);
    static SpeciesLexicon load_file(const std::filesystem::path& path);

    const std::vector<Entry>& entries() const { return entries_; }
    const SurfaceIndex& index() const { return index_; }

private:
    std::vector<Entry> entries_;
    SurfaceIndex index_;
};

/// Leftmost-longest, non-overlapping. Scanning resumes after each match.
/// `comparisons`, when given, accumulates hash and trie lookups; the total is
/// bounded by tokens.size() * index.max_phrase_len().
std::vector<ConceptMention> match_concepts(std::span<const std::string> folded_tokens,
                                           const SurfaceIndex& index,
                                           std::uint64_t* comparisons = nullptr);

/// Distinct species named anywhere in title or abstract, in order of first
/// appearance.
std::vector<std::string> infer_species(std::string_view title, std::string_view abstract_text,
                                       const SpeciesLexicon& species);

/// All mentions across the title (sentence indices first) and the abstract.
std::vector<ConceptMention> find_mentions(const ArticleRecord& article, const SurfaceIndex& index);

/// One triple per unordered pair of distinct concepts per sentence. The
/// article's species list is attached to every triple.
std::vector<RelationTriple> extract_relations(const ArticleRecord& article,
                                              const SurfaceIndex& index,
                                              const SpeciesLexicon& species,
                                              Date extraction_date);

}  // namespace litkg
