#include <litkg/error.hpp>
#include <litkg/extractor.hpp>
#include <litkg/text.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <unordered_map>

namespace litkg {

void to_json(nlohmann::json& j, const RelationTriple& t) {
    j = nlohmann::json{
        {"concept_a", t.concept_a},
        {"concept_b", t.concept_b},
        {"article_id", t.article_id},
        {"sentence_text", t.sentence_text},
        {"sentence_index", t.sentence_index},
        {"pub_date", format_date(t.pub_date)},
        {"extraction_date", format_date(t.extraction_date)},
        {"species", t.species},
    };
}

void from_json(const nlohmann::json& j, RelationTriple& t) {
    j.at("concept_a").get_to(t.concept_a);
    j.at("concept_b").get_to(t.concept_b);
    j.at("article_id").get_to(t.article_id);
    j.at("sentence_text").get_to(t.sentence_text);
    j.at("sentence_index").get_to(t.sentence_index);
    t.pub_date = parse_date_or_throw(j.at("pub_date").get<std::string>());
    t.extraction_date = parse_date_or_throw(j.at("extraction_date").get<std::string>());
    j.at("species").get_to(t.species);
}

SpeciesLexicon::SpeciesLexicon(std::vector<Entry> entries) : entries_(std::move(entries)) {
    SurfaceIndex::Builder builder;
    std::unordered_map<std::string, std::string> owner;
    for (const auto& entry : entries_) {
        for (const auto& surface : entry.surface_forms) {
            auto tokens = fold_tokens(surface);
            const std::string key = surface_key(surface);
            auto [it, inserted] = owner.emplace(key, entry.species);
            if (!inserted && it->second != entry.species) {
                throw Error(ErrorCode::validation, "species surface form '" + surface +
                                                       "' maps to both '" + it->second +
                                                       "' and '" + entry.species + "'");
            }
            if (inserted) builder.add(std::move(tokens), entry.species);
        }
    }
    index_ = std::move(builder).build();
}

SpeciesLexicon SpeciesLexicon::bundled() {
    return SpeciesLexicon({
        {"human", {"human", "humans", "homo sapiens"}},
        {"mouse", {"mouse", "mice", "murine"}},
        {"rat", {"rat", "rats"}},
        {"macaque", {"macaque", "macaques", "monkey", "monkeys", "rhesus"}},
        {"zebrafish", {"zebrafish", "zebrafishes", "danio rerio"}},
        {"drosophila", {"drosophila", "fruit fly", "fruit flies", "fly", "flies"}},
        {"c_elegans", {"c. elegans", "caenorhabditis elegans"}},
    });
}

SpeciesLexicon SpeciesLexicon::load(std::istream& in) {
    std::vector<Entry> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        try {
            const auto obj = nlohmann::json::parse(line);
            Entry entry;
            obj.at("species").get_to(entry.species);
            obj.at("surface_forms").get_to(entry.surface_forms);
            if (entry.species.empty() || entry.surface_forms.empty()) {
                throw ParseError(line_no, "species entry needs a name and surface forms");
            }
            for (const auto& s : entry.surface_forms) {
                if (surface_key(s).empty()) {
                    throw ParseError(line_no, "surface form '" + s + "' has no tokens");
                }
            }
            entries.push_back(std::move(entry));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(line_no, e.what());
        }
    }
    if (entries.empty()) throw Error(ErrorCode::config, "species lexicon is empty");
    return SpeciesLexicon(std::move(entries));
}

SpeciesLexicon SpeciesLexicon::load_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io, "cannot open species lexicon " + path.string());
    return load(in);
}

std::vector<ConceptMention> match_concepts(std::span<const std::string> folded_tokens,
                                           const SurfaceIndex& index,
                                           std::uint64_t* comparisons) {
    std::vector<ConceptMention> mentions;
    std::size_t i = 0;
    while (i < folded_tokens.size()) {
        const auto match = index.longest_at(folded_tokens, i, comparisons);
        if (match.length == 0) {
            ++i;
            continue;
        }
        ConceptMention mention;
        mention.concept_id = index.concept_id(match.concept_ref);
        mention.token_begin = i;
        mention.token_end = i + match.length;
        mentions.push_back(std::move(mention));
        i += match.length;
    }
    return mentions;
}

std::vector<std::string> infer_species(std::string_view title, std::string_view abstract_text,
                                       const SpeciesLexicon& species) {
    std::vector<std::string> found;
    for (std::string_view text : {title, abstract_text}) {
        const auto tokens = fold_tokens(text);
        for (const auto& mention : match_concepts(tokens, species.index())) {
            if (std::find(found.begin(), found.end(), mention.concept_id) == found.end()) {
                found.push_back(mention.concept_id);
            }
        }
    }
    return found;
}

namespace {

struct FieldSentences {
    TextField field;
    std::vector<Sentence> sentences;
};

std::vector<FieldSentences> article_sentences(const ArticleRecord& article) {
    return {{TextField::title, split_sentences(article.title)},
            {TextField::abstract_text, split_sentences(article.abstract_text)}};
}

std::vector<std::string> folded(const Sentence& sentence) {
    std::vector<std::string> out;
    out.reserve(sentence.tokens.size());
    for (const auto& t : sentence.tokens) out.push_back(t.folded);
    return out;
}

}  // namespace

std::vector<ConceptMention> find_mentions(const ArticleRecord& article, const SurfaceIndex& index) {
    std::vector<ConceptMention> all;
    std::size_t sentence_index = 0;
    for (const auto& part : article_sentences(article)) {
        for (const auto& sentence : part.sentences) {
            for (auto& m : match_concepts(folded(sentence), index)) {
                m.sentence_index = sentence_index;
                m.field = part.field;
                all.push_back(std::move(m));
            }
            ++sentence_index;
        }
    }
    return all;
}

std::vector<RelationTriple> extract_relations(const ArticleRecord& article,
                                              const SurfaceIndex& index,
                                              const SpeciesLexicon& species,
                                              Date extraction_date) {
    std::vector<RelationTriple> triples;
    const auto species_list = infer_species(article.title, article.abstract_text, species);
    std::size_t sentence_index = 0;
    for (const auto& part : article_sentences(article)) {
        for (const auto& sentence : part.sentences) {
            std::set<std::string> concepts;
            for (auto& m : match_concepts(folded(sentence), index)) {
                concepts.insert(std::move(m.concept_id));
            }
            for (auto a = concepts.begin(); a != concepts.end(); ++a) {
                for (auto b = std::next(a); b != concepts.end(); ++b) {
                    RelationTriple t;
                    t.concept_a = *a;
                    t.concept_b = *b;
                    t.article_id = article.article_id;
                    t.sentence_text = sentence.text;
                    t.sentence_index = sentence_index;
                    t.pub_date = article.pub_date;
                    t.extraction_date = extraction_date;
                    t.species = species_list;
                    triples.push_back(std::move(t));
                }
            }
            ++sentence_index;
        }
    }
    return triples;
}

}  // namespace litkg
