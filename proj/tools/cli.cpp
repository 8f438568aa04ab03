#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <csignal>
#include <filesystem>
#include <iomanip>
#include <sstream>

#include <CLI11.hpp>

#include "trailmine/error.hpp"
#include "trailmine/evaluation.hpp"
#include "trailmine/event_store.hpp"
#include "trailmine/http_api.hpp"
#include "trailmine/service.hpp"
#include "trailmine/simulator.hpp"

namespace fs = std::filesystem;

namespace trailmine::cli {

namespace {

HttpServer* g_server = nullptr;

extern "C" void on_signal(int)
{
    if (g_server) g_server->stop();
}

void print_stats(std::ostream& out, const GraphStats& s)
{
    out << "node_count " << s.node_count << '\n'
        << "query_node_count " << s.query_node_count << '\n'
        << "document_node_count " << s.document_node_count << '\n'
        << "edge_count " << s.edge_count << '\n'
        << "total_weight " << s.total_weight << '\n';
}

void require_file(const fs::path& p, const char* what)
{
    if (!fs::is_regular_file(p)) throw Error(std::string(what) + " not found: " + p.string());
}

// Read-side commands never create a store.
void require_store(const fs::path& dir)
{
    if (!fs::is_directory(dir)) throw Error("no store at " + dir.string() + " (run ingest first)");
}

int cmd_ingest(const fs::path& log, const fs::path& data_dir, std::int64_t gap_ms, std::ostream& out)
{
    require_file(log, "event log");
    const auto events = parse_event_log(read_file(log));
    const auto sessions = sessionize(events, gap_ms);
    TrailService service(ServiceConfig::for_data_dir(data_dir));
    IngestResult total;
    for (const auto& s : sessions) {
        const auto r = service.ingest(s.events);
        total.accepted += r.accepted;
        total.duplicates += r.duplicates;
    }
    service.write_snapshot();
    out << "ingested " << total.accepted << " events (" << total.duplicates << " duplicates) in "
        << sessions.size() << " sessions\n";
    print_stats(out, service.stats());
    return 0;
}

int cmd_serve(const fs::path& config_path, std::ostream& out)
{
    require_file(config_path, "service config");
    auto config = ServiceConfig::parse(read_file(config_path), config_path.parent_path());
    TrailService service(config);
    HttpServer server(service);
    const int port = server.bind(config.host, config.port);
    if (port < 0) throw Error("cannot bind " + config.host + ":" + std::to_string(config.port));
    out << "listening on " << config.host << ":" << port << std::endl;

    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    server.run();
    g_server = nullptr;
    return 0;
}

int cmd_recommend(const std::string& session, std::size_t k, const fs::path& data_dir, std::ostream& out)
{
    require_store(data_dir);
    TrailService service(ServiceConfig::for_data_dir(data_dir));
    const auto recs = service.recommend(session, k);
    out << "documents\n";
    for (const auto& r : recs.documents) out << "  " << strip_kind(r.node_id) << '\t' << r.score << '\n';
    out << "queries\n";
    for (const auto& r : recs.queries) out << "  " << strip_kind(r.node_id) << '\t' << r.score << '\n';
    return 0;
}

int cmd_simulate(const fs::path& config_path, const fs::path& out_dir, const fs::path& corpus_path,
                 const fs::path& qrels_path, std::ostream& out)
{
    require_file(config_path, "simulation config");
    const auto config = parse_sim_config(read_file(config_path));

    ToyCollection collection;
    if (!corpus_path.empty() || !qrels_path.empty()) {
        require_file(corpus_path, "corpus");
        require_file(qrels_path, "qrels");
        collection.corpus = load_corpus(read_file(corpus_path));
        collection.qrels = parse_qrels(read_file(qrels_path));
    } else {
        collection = make_toy_collection(config.tasks, config.corpus);
    }

    const auto outcome = run_experiment(collection.corpus, collection.qrels, config);

    fs::create_directories(out_dir / "runs");
    const auto events = outcome.all_events();
    write_file_atomic(out_dir / "events.jsonl", serialize_event_log(events));
    write_file_atomic(out_dir / "graph.snapshot", snapshot(outcome.graph));
    write_file_atomic(out_dir / "metrics.json", outcome.report.to_json());
    write_file_atomic(out_dir / "metrics.tsv", outcome.report.to_table());
    write_file_atomic(out_dir / "curve.tsv", outcome.report.curve_table());
    write_file_atomic(out_dir / "corpus.jsonl", serialize_corpus(collection.corpus));
    write_file_atomic(out_dir / "qrels.txt", serialize_qrels(collection.qrels));
    write_file_atomic(out_dir / "config.json", serialize_sim_config(config));
    for (const char* condition : {"bootstrap", "baseline", "recommend"}) {
        std::vector<ActionEvent> cond;
        for (const auto& s : outcome.sessions_of(condition)) cond.insert(cond.end(), s.events.begin(), s.events.end());
        if (!cond.empty()) {
            write_file_atomic(out_dir / "runs" / (std::string(condition) + ".jsonl"), serialize_event_log(cond));
        }
    }

    std::vector<Session> sessions;
    for (const auto& s : outcome.sessions) sessions.push_back(s.session);
    const auto mix = action_mix(sessions);
    const auto expected = reference_action_mix();

    out << std::fixed << std::setprecision(4);
    out << "sessions " << sessions.size() << ", events " << events.size() << '\n';
    print_stats(out, outcome.graph.stats());
    out << "action mix (simulated vs reference)\n";
    for (auto a : kAllActions) {
        out << "  " << std::left << std::setw(18) << to_string(a) << std::right << mix.at(a) << "  "
            << expected.at(a) << '\n';
    }
    out << "unique query fraction " << unique_query_fraction(sessions) << '\n';
    out << "viewed-shot overlap, first half vs second half of users "
        << cohort_overlap(sessions, static_cast<std::size_t>(config.num_users / 2)) << '\n';
    out << outcome.report.to_table();
    out << outcome.report.curve_table();
    out << "wrote " << out_dir.string() << '\n';
    return 0;
}

std::vector<double> parse_list(const std::string& text)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "inf" || item == "+inf") {
            out.push_back(kInf);
        } else {
            out.push_back(std::stod(item));
        }
    }
    return out;
}

int cmd_evaluate(const fs::path& qrels_path, const fs::path& runs_dir, const fs::path& graph_path,
                 const std::string& bins, const std::string& cutoffs_text, const fs::path& report_path,
                 std::ostream& out)
{
    require_file(qrels_path, "qrels");
    if (!fs::is_directory(runs_dir)) throw Error("runs directory not found: " + runs_dir.string());
    const auto qrels = parse_qrels(read_file(qrels_path));
    const auto weights = WeightTable::defaults();

    std::vector<std::size_t> cutoffs;
    for (double v : parse_list(cutoffs_text)) cutoffs.push_back(static_cast<std::size_t>(v));

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(runs_dir)) {
        if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());

    MetricsReport report;
    TrailGraph graph;
    for (const auto& f : files) {
        const auto system = f.stem().string();
        const auto text = read_file(f);
        std::vector<MetricsRow> rows;
        if (f.extension() == ".jsonl") {
            const auto sessions = sessionize(parse_event_log(text));
            rows = evaluate_sessions(system, sessions, qrels, weights, cutoffs);
            for (const auto& s : sessions) graph.add_session(s, weights);
        } else if (f.extension() == ".run" || f.extension() == ".trec") {
            rows = evaluate_runs(system, parse_trec_run(text), qrels, cutoffs);
        } else {
            continue;
        }
        report.rows.insert(report.rows.end(), rows.begin(), rows.end());
    }
    if (!graph_path.empty()) {
        require_file(graph_path, "graph snapshot");
        graph = load_snapshot(read_file(graph_path));
    }
    const auto edges = bins.empty() ? default_bin_edges() : parse_list(bins);
    report.curve = relevance_probability_curve(graph, qrels_union(qrels), edges);

    out << report.to_table() << '\n' << report.curve_table();
    if (!report_path.empty()) write_file_atomic(report_path, report.to_json());
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"trailmine: collaborative search-trail recommendation engine"};
    app.require_subcommand(1);

    std::string data_dir = "trailmine-data";

    auto* ingest = app.add_subcommand("ingest", "Append an event log to the store and rebuild the graph");
    std::string log_path;
    std::int64_t gap_ms = kDefaultSessionGapMs;
    ingest->add_option("--log", log_path, "JSON Lines event log")->required();
    ingest->add_option("--data-dir", data_dir, "Store directory");
    ingest->add_option("--gap-ms", gap_ms, "Session split gap in milliseconds");

    auto* serve = app.add_subcommand("serve", "Run the HTTP service");
    std::string serve_config;
    serve->add_option("--config", serve_config, "Service config (JSON)")->required();

    auto* recommend = app.add_subcommand("recommend", "Print recommendations for a stored session");
    std::string session;
    std::size_t k = 10;
    recommend->add_option("--session", session, "Session id")->required();
    recommend->add_option("--k", k, "Number of recommendations")->check(CLI::PositiveNumber);
    recommend->add_option("--data-dir", data_dir, "Store directory");

    auto* simulate = app.add_subcommand("simulate", "Run the simulated baseline/recommendation experiment");
    std::string sim_config;
    std::string sim_out = "sim-out";
    std::string sim_corpus, sim_qrels;
    simulate->add_option("--config", sim_config, "Simulation config (JSON)")->required();
    simulate->add_option("--out", sim_out, "Output directory");
    simulate->add_option("--corpus", sim_corpus, "Use this corpus instead of the generated one");
    simulate->add_option("--qrels", sim_qrels, "Qrels for --corpus");

    auto* evaluate = app.add_subcommand("evaluate", "Score event logs and TREC runs against qrels");
    std::string qrels_path, runs_dir, graph_path, bins, report_path;
    std::string cutoffs = "5,10,15,20,30,100";
    evaluate->add_option("--qrels", qrels_path, "Qrels file")->required();
    evaluate->add_option("--runs", runs_dir, "Directory of *.jsonl event logs and *.run TREC runs")->required();
    evaluate->add_option("--graph", graph_path, "Graph snapshot for the relevance curve");
    evaluate->add_option("--bins", bins, "Comma-separated curve bin edges (inf allowed)");
    evaluate->add_option("--cutoffs", cutoffs, "Comma-separated P@N cutoffs");
    evaluate->add_option("--report", report_path, "Write the JSON report here");

    auto* stats = app.add_subcommand("stats", "Print graph statistics of the store");
    stats->add_option("--data-dir", data_dir, "Store directory");

    auto* snap = app.add_subcommand("snapshot", "Write the graph snapshot of the store");
    std::string snap_out;
    snap->add_option("--data-dir", data_dir, "Store directory");
    snap->add_option("--out", snap_out, "Snapshot path (default: <data-dir>/graph.snapshot)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return e.get_exit_code() == 0 ? 2 : e.get_exit_code();
    }

    try {
        if (*ingest) return cmd_ingest(log_path, data_dir, gap_ms, out);
        if (*serve) return cmd_serve(serve_config, out);
        if (*recommend) return cmd_recommend(session, k, data_dir, out);
        if (*simulate) return cmd_simulate(sim_config, sim_out, sim_corpus, sim_qrels, out);
        if (*evaluate) return cmd_evaluate(qrels_path, runs_dir, graph_path, bins, cutoffs, report_path, out);
        if (*stats) {
            require_store(data_dir);
            TrailService service(ServiceConfig::for_data_dir(data_dir));
            print_stats(out, service.stats());
            return 0;
        }
        if (*snap) {
            require_store(data_dir);
            auto config = ServiceConfig::for_data_dir(data_dir);
            if (!snap_out.empty()) config.snapshot_path = snap_out;
            TrailService service(config);
            out << "wrote " << service.write_snapshot().string() << '\n';
            print_stats(out, service.stats());
            return 0;
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

}  // namespace trailmine::cli
