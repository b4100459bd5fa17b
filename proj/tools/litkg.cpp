// litkg: ingest literature updates, rebuild embeddings, evaluate, and serve.
//
// Exit codes: 0 ok, 1 data error, 2 usage error.

#include <litkg/error.hpp>
#include <litkg/pipeline.hpp>
#include <litkg/service.hpp>

#include <CLI11.hpp>

#include <csignal>
#include <iostream>

namespace {

using namespace litkg;

std::atomic<bool> g_stop{false};
HttpServer* g_server = nullptr;

void on_signal(int) {
    g_stop.store(true);
    if (g_server) g_server->stop();
}

struct Common {
    std::string data_dir = "data";
    std::string lexicon;
    std::string stoplist;
    std::string species;
    std::string config;
    std::string updates;
    std::string today;
};

PipelineConfig load_config(const Common& c) {
    return c.config.empty() ? PipelineConfig{} : PipelineConfig::load(c.config);
}

PipelineOptions make_options(const Common& c) {
    if (c.lexicon.empty()) throw CLI::RequiredError("--lexicon");
    PipelineOptions o;
    o.data_dir = c.data_dir;
    o.lexicon_path = c.lexicon;
    if (!c.stoplist.empty()) o.stoplist_path = c.stoplist;
    if (!c.species.empty()) o.species_path = c.species;
    if (!c.updates.empty()) o.updates_dir = c.updates;
    o.config = load_config(c);
    if (!c.today.empty()) {
        const Date fixed = parse_date_or_throw(c.today);
        o.today = [fixed] { return fixed; };
    }
    return o;
}

void print(const nlohmann::ordered_json& j) { std::cout << j.dump(2) << "\n"; }

std::pair<std::string, int> split_listen(const std::string& listen) {
    const auto colon = listen.rfind(':');
    if (colon == std::string::npos) throw CLI::ValidationError("--listen", "expected ADDR:PORT");
    try {
        return {listen.substr(0, colon), std::stoi(listen.substr(colon + 1))};
    } catch (const std::exception&) {
        throw CLI::ValidationError("--listen", "bad port in '" + listen + "'");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Literature knowledge graph: concept relations, embeddings and a query API"};
    app.require_subcommand(1);
    Common c;
    app.add_option("--data-dir", c.data_dir, "Data directory (triples log, generations, MANIFEST)");
    app.add_option("--lexicon", c.lexicon, "Concept lexicon (JSON Lines)");
    app.add_option("--stoplist", c.stoplist, "Surface forms never matched");
    app.add_option("--species", c.species, "Species table (JSON Lines); bundled table when omitted");
    app.add_option("--config", c.config, "JSON config with walk/sgns overrides and the update schedule");
    app.add_option("--today", c.today, "Extraction date stamped on new triples (YYYY-MM-DD)");

    auto* ingest = app.add_subcommand("ingest", "Process pending update files");
    ingest->add_option("--updates", c.updates, "Directory of update files")->required();

    auto* rebuild = app.add_subcommand("rebuild", "Train embeddings and publish a new snapshot");

    auto* eval = app.add_subcommand("eval", "Evaluation reports");
    eval->require_subcommand(1);
    std::string out_json;
    std::string out_roc;
    auto* auroc = eval->add_subcommand("auroc", "Link-prediction AUROC of the embedding");
    double holdout_edges = 0.0;
    bool planted = false;
    auroc->add_option("--holdout-edges", holdout_edges, "Fraction of edges held out of training")
        ->check(CLI::Range(0.0, 1.0));
    auroc->add_flag("--planted", planted, "Use a 4x25 planted-partition graph instead of the data directory");
    auroc->add_option("--out", out_json, "Report JSON path");
    auroc->add_option("--roc", out_roc, "ROC point list CSV path");
    auto* holdout = eval->add_subcommand("holdout", "Temporal holdout rank histogram");
    std::string cutoff;
    holdout->add_option("--cutoff", cutoff, "Last date of the training period (YYYY[-MM[-DD]])")->required();
    holdout->add_option("--out", out_json, "Report JSON path");

    auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
    std::string listen = "127.0.0.1:8080";
    std::string static_dir;
    serve->add_option("--listen", listen, "ADDR:PORT");
    serve->add_option("--static", static_dir, "Directory served at / (browser client)");
    serve->add_option("--updates", c.updates, "Update directory used by POST /v1/admin/update");
    bool with_loop = false;
    serve->add_flag("--schedule", with_loop, "Also run the scheduled update loop");

    auto* loop = app.add_subcommand("update-loop", "Run ingest + rebuild on the configured schedule");
    loop->add_option("--updates", c.updates, "Directory of update files")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*ingest) {
            Pipeline pipeline(make_options(c));
            const auto report = pipeline.ingest(c.updates);
            print(report.to_json());
            return report.failed() ? 1 : 0;
        }
        if (*rebuild) {
            Pipeline pipeline(make_options(c));
            const auto id = pipeline.rebuild();
            print({{"snapshot_id", id}});
            return 0;
        }
        if (*eval) {
            EvalOutputs outputs;
            if (!out_json.empty()) outputs.report_json = out_json;
            if (!out_roc.empty()) outputs.roc_csv = out_roc;
            if (*auroc && planted) {
                print(to_json(eval_auroc_planted(PlantedPartition{}, load_config(c), outputs)));
                return 0;
            }
            Pipeline pipeline(make_options(c));
            if (*auroc) {
                std::optional<double> fraction;
                if (holdout_edges > 0.0) fraction = holdout_edges;
                print(to_json(eval_auroc(*pipeline.holder().current(), pipeline.options().config, fraction, outputs)));
            } else {
                const auto report = eval_holdout(pipeline.store().state(), parse_date_or_throw(cutoff),
                                                 pipeline.options().config, outputs);
                auto j = to_json(report);
                j.erase("predictions");
                print(j);
            }
            return 0;
        }
        std::signal(SIGINT, on_signal);
        std::signal(SIGTERM, on_signal);
        if (*serve) {
            Pipeline pipeline(make_options(c));
            ApiService service(pipeline.holder(), [&pipeline] { return pipeline.start_update(); });
            std::optional<std::filesystem::path> mount;
            if (!static_dir.empty()) mount = static_dir;
            HttpServer server(service, mount);
            const auto [host, port] = split_listen(listen);
            const int bound = server.bind(host, port);
            log_event("info", "listening", {{"host", host}, {"port", bound}});
            std::thread scheduler;
            if (with_loop) {
                const auto& cfg = pipeline.options().config;
                scheduler = std::thread([&pipeline, &cfg] {
                    SystemClock clock;
                    run_update_loop(Schedule::parse(cfg.schedule, cfg.utc_offset_minutes), clock,
                                    [&pipeline] { return pipeline.start_update(); }, g_stop);
                });
            }
            g_server = &server;
            server.run();
            g_server = nullptr;
            g_stop.store(true);
            if (scheduler.joinable()) scheduler.join();
            return 0;
        }
        if (*loop) {
            Pipeline pipeline(make_options(c));
            const auto& cfg = pipeline.options().config;
            SystemClock clock;
            const auto schedule = Schedule::parse(cfg.schedule, cfg.utc_offset_minutes);
            log_event("info", "update_loop", {{"schedule", cfg.schedule}, {"utc_offset_minutes", cfg.utc_offset_minutes}});
            run_update_loop(schedule, clock, [&pipeline] { return pipeline.start_update(); }, g_stop);
            return 0;
        }
    } catch (const CLI::Error& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        log_event("error", "failed", {{"code", std::string(to_string(e.code()))}, {"message", e.what()}});
        return 1;
    } catch (const std::exception& e) {
        log_event("error", "failed", {{"message", e.what()}});
        return 1;
    }
    return 2;
}
