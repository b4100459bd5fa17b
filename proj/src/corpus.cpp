#include <litkg/corpus.hpp>
#include <litkg/error.hpp>
#include <litkg/fsutil.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>

namespace litkg {

namespace {

bool is_blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

// Shared validation for both formats; nullopt means "skip this record".
std::optional<ArticleRecord> make_record(std::string id, std::string title, std::string abstract_text,
                                         std::string_view pub_date, std::string citation,
                                         const std::string& file_name, Date today) {
    if (id.empty() || is_blank(title)) return std::nullopt;
    auto date = parse_date(pub_date);
    if (!date) return std::nullopt;
    ArticleRecord record;
    record.article_id = std::move(id);
    record.title = std::move(title);
    record.abstract_text = std::move(abstract_text);
    record.pub_date = *date;
    record.citation = std::move(citation);
    record.source_file = file_name;
    record.fetch_date = today;
    return record;
}

std::optional<ArticleRecord> parse_json_line(const std::string& line, const std::string& file_name,
                                             Date today) {
    nlohmann::json obj = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (!obj.is_object()) return std::nullopt;
    auto text = [&](const char* key, bool required) -> std::optional<std::string> {
        auto it = obj.find(key);
        if (it == obj.end() || it->is_null()) {
            return required ? std::nullopt : std::optional<std::string>(std::string());
        }
        if (!it->is_string()) return std::nullopt;
        return it->get<std::string>();
    };
    auto id = text("id", true);
    auto title = text("title", true);
    auto abstract_text = text("abstract", false);
    auto pub_date = text("pub_date", true);
    auto citation = text("citation", false);
    if (!id || !title || !abstract_text || !pub_date || !citation) return std::nullopt;
    return make_record(std::move(*id), std::move(*title), std::move(*abstract_text), *pub_date,
                       std::move(*citation), file_name, today);
}

std::string decode_entities(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '&') {
            out.push_back(s[i]);
            continue;
        }
        const std::size_t semi = s.find(';', i);
        if (semi == std::string_view::npos || semi - i > 10) {
            out.push_back('&');
            continue;
        }
        const std::string_view name = s.substr(i + 1, semi - i - 1);
        std::optional<char32_t> cp;
        if (name == "amp") cp = U'&';
        else if (name == "lt") cp = U'<';
        else if (name == "gt") cp = U'>';
        else if (name == "quot") cp = U'"';
        else if (name == "apos") cp = U'\'';
        else if (name.size() > 1 && name[0] == '#') {
            try {
                const bool hex = name[1] == 'x' || name[1] == 'X';
                cp = static_cast<char32_t>(
                    std::stoul(std::string(name.substr(hex ? 2 : 1)), nullptr, hex ? 16 : 10));
            } catch (const std::exception&) {
                cp.reset();
            }
        }
        if (!cp) {
            out.push_back('&');
            continue;
        }
        const char32_t c = *cp;
        if (c < 0x80) {
            out.push_back(static_cast<char>(c));
        } else if (c < 0x800) {
            out.push_back(static_cast<char>(0xC0 | (c >> 6)));
            out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
        } else if (c < 0x10000) {
            out.push_back(static_cast<char>(0xE0 | (c >> 12)));
            out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
        } else {
            out.push_back(static_cast<char>(0xF0 | (c >> 18)));
            out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
        }
        i = semi;
    }
    return out;
}

// Finds the start of an opening tag "<name>" or "<name ...>" at or after pos.
std::size_t find_open_tag(std::string_view doc, std::string_view name, std::size_t pos,
                          std::size_t& content_begin, bool& self_closing) {
    while (true) {
        pos = doc.find('<', pos);
        if (pos == std::string_view::npos) return pos;
        const std::size_t after = pos + 1 + name.size();
        if (doc.compare(pos + 1, name.size(), name) == 0 && after < doc.size() &&
            (doc[after] == '>' || doc[after] == '/' || std::isspace(static_cast<unsigned char>(doc[after])))) {
            const std::size_t close = doc.find('>', after);
            if (close == std::string_view::npos) return std::string_view::npos;
            self_closing = doc[close - 1] == '/';
            content_begin = close + 1;
            return pos;
        }
        ++pos;
    }
}

// Text content of the first <name> element in `element`, or nullopt.
std::optional<std::string> child_text(std::string_view element, std::string_view name) {
    std::size_t content_begin = 0;
    bool self_closing = false;
    if (find_open_tag(element, name, 0, content_begin, self_closing) == std::string_view::npos) {
        return std::nullopt;
    }
    if (self_closing) return std::string();
    const std::string closing = "</" + std::string(name) + ">";
    const std::size_t end = element.find(closing, content_begin);
    if (end == std::string_view::npos) return std::nullopt;
    std::string_view raw = element.substr(content_begin, end - content_begin);
    if (raw.starts_with("<![CDATA[") && raw.ends_with("]]>")) {
        return std::string(raw.substr(9, raw.size() - 12));
    }
    return decode_entities(raw);
}

void parse_xml(std::string_view doc, const std::string& file_name, Date today, UpdateBatch& batch) {
    std::size_t pos = 0;
    while (true) {
        std::size_t content_begin = 0;
        bool self_closing = false;
        const std::size_t open = find_open_tag(doc, "article", pos, content_begin, self_closing);
        if (open == std::string_view::npos) break;
        if (self_closing) {
            ++batch.skipped_count;
            pos = content_begin;
            continue;
        }
        const std::size_t close = doc.find("</article>", content_begin);
        if (close == std::string_view::npos) {
            ++batch.skipped_count;
            break;
        }
        const std::string_view element = doc.substr(content_begin, close - content_begin);
        pos = close + 10;

        auto id = child_text(element, "id");
        auto title = child_text(element, "title");
        auto pub_date = child_text(element, "pub_date");
        if (!id || !title || !pub_date) {
            ++batch.skipped_count;
            continue;
        }
        auto record = make_record(std::move(*id), std::move(*title),
                                  child_text(element, "abstract").value_or(""), *pub_date,
                                  child_text(element, "citation").value_or(""), file_name, today);
        if (record) {
            batch.records.push_back(std::move(*record));
        } else {
            ++batch.skipped_count;
        }
    }
}

}  // namespace

UpdateBatch parse_article_file(std::istream& in, const std::string& file_name, Date today) {
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw Error(ErrorCode::io, "failed reading " + file_name);

    UpdateBatch batch;
    batch.file_name = file_name;
    const auto first = content.find_first_not_of(" \t\r\n\f\v");
    if (first == std::string::npos) return batch;

    if (content[first] == '<') {
        parse_xml(content, file_name, today, batch);
    } else {
        std::istringstream lines(content);
        std::string line;
        while (std::getline(lines, line)) {
            if (is_blank(line)) continue;
            if (auto record = parse_json_line(line, file_name, today)) {
                batch.records.push_back(std::move(*record));
            } else {
                ++batch.skipped_count;
            }
        }
    }
    batch.record_count = batch.records.size();
    if (batch.records.empty()) {
        throw Error(ErrorCode::format, file_name + ": no well-formed article records");
    }
    return batch;
}

UpdateBatch parse_article_file(const std::filesystem::path& path, Date today) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
    return parse_article_file(in, path.filename().string(), today);
}

std::string to_jsonl(const ArticleRecord& record) {
    nlohmann::ordered_json obj;
    obj["id"] = record.article_id;
    obj["title"] = record.title;
    obj["abstract"] = record.abstract_text;
    obj["pub_date"] = format_date(record.pub_date);
    obj["citation"] = record.citation;
    return obj.dump();
}

std::vector<std::string> pending_update_files(const std::filesystem::path& directory,
                                              const std::set<std::string>& processed_ledger) {
    std::error_code ec;
    if (!std::filesystem::is_directory(directory, ec)) {
        throw Error(ErrorCode::io, "update directory missing: " + directory.string());
    }
    std::vector<std::string> pending;
    for (const auto& entry : std::filesystem::directory_iterator(directory, ec)) {
        if (!entry.is_regular_file()) continue;
        std::string name = entry.path().filename().string();
        if (name.starts_with(".")) continue;
        if (!processed_ledger.count(name)) pending.push_back(std::move(name));
    }
    if (ec) throw Error(ErrorCode::io, "cannot list " + directory.string() + ": " + ec.message());
    std::sort(pending.begin(), pending.end());
    return pending;
}

ProcessedLedger::ProcessedLedger(std::filesystem::path path) : path_(std::move(path)) {
    std::ifstream in(path_);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) entries_.insert(line);
    }
}

void ProcessedLedger::append(const std::string& file_name) {
    append_durably(path_, file_name + "\n");
    entries_.insert(file_name);
}

}  // namespace litkg
