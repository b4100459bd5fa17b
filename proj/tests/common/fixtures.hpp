// Data directories and pipeline options over the bundled fixture corpus.
#pragma once

#include <litkg/pipeline.hpp>

#include "oracles.hpp"

#include <filesystem>

namespace fixture {

inline std::filesystem::path root() { return LITKG_FIXTURES; }

/// Tiny walk and training settings so a rebuild takes milliseconds.
inline litkg::PipelineConfig fast_config() {
    litkg::PipelineConfig c;
    c.walk.walk_length = 10;
    c.walk.walks_per_node = 4;
    c.sgns.dimension = 8;
    c.sgns.window = 3;
    c.sgns.epochs = 2;
    c.holdout_k = 5;
    return c;
}

inline litkg::PipelineOptions options(const std::filesystem::path& data_dir,
                                      std::optional<std::filesystem::path> updates = std::nullopt) {
    litkg::PipelineOptions o;
    o.data_dir = data_dir;
    o.lexicon_path = root() / "mini_lexicon.jsonl";
    o.stoplist_path = root() / "mini_stoplist.txt";
    o.updates_dir = std::move(updates);
    o.config = fast_config();
    o.today = [] { return litkg::Date{std::chrono::year{2024}, std::chrono::month{5}, std::chrono::day{1}}; };
    return o;
}

/// Copies the first `count` fixture update files (all when 0) into `dest`.
inline void copy_updates(const std::filesystem::path& dest, std::size_t count = 0) {
    std::filesystem::create_directories(dest);
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(root() / "updates")) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (count) files.resize(std::min(count, files.size()));
    for (const auto& f : files) {
        std::filesystem::copy_file(f, dest / f.filename(), std::filesystem::copy_options::overwrite_existing);
    }
}

}  // namespace fixture
